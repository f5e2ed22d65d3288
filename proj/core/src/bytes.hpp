#ifndef QPKT_BYTES_HPP
#define QPKT_BYTES_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qpkt/field.hpp"

namespace qpkt::detail {

// Little-endian scratch buffer for headers and fixed-layout streams.
class ByteWriter {
  public:
    void u8(uint8_t v) { buf_.push_back(static_cast<std::byte>(v)); }
    void u16(uint16_t v);
    void u32(uint32_t v);
    void u64(uint64_t v);
    void f64(double v);
    void value(double v, Dtype dtype) { append_value_bytes(buf_, v, dtype); }
    void str(const std::string& s);
    void raw(std::span<const std::byte> bytes);
    size_t size() const { return buf_.size(); }
    std::vector<std::byte> take() { return std::move(buf_); }
    std::span<const std::byte> bytes() const { return buf_; }

  private:
    std::vector<std::byte> buf_;
};

// Throws CodecError when a read runs past the end.
class ByteReader {
  public:
    explicit ByteReader(std::span<const std::byte> data) : data_(data) {}
    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    uint64_t u64();
    double f64();
    double value(Dtype dtype);
    std::string str();
    std::span<const std::byte> raw(size_t n);
    size_t pos() const { return pos_; }
    size_t remaining() const { return data_.size() - pos_; }

  private:
    std::span<const std::byte> data_;
    size_t pos_ = 0;
    void need(size_t n);
};

// [u64 raw size][zlib-deflated payload]; inflate verifies the recorded size.
std::vector<std::byte> deflate_bytes(std::span<const std::byte> raw);
std::vector<std::byte> inflate_bytes(std::span<const std::byte> blob);

uint32_t crc32_bytes(uint32_t seed, std::span<const std::byte> data);

}  // namespace qpkt::detail

#endif
