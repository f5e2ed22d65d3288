#include "bytes.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>

#include "qpkt/codec.hpp"

namespace qpkt::detail {

void ByteWriter::u16(uint16_t v) {
    u8(static_cast<uint8_t>(v));
    u8(static_cast<uint8_t>(v >> 8));
}

void ByteWriter::u32(uint32_t v) {
    u16(static_cast<uint16_t>(v));
    u16(static_cast<uint16_t>(v >> 16));
}

void ByteWriter::u64(uint64_t v) {
    u32(static_cast<uint32_t>(v));
    u32(static_cast<uint32_t>(v >> 32));
}

void ByteWriter::f64(double v) { u64(std::bit_cast<uint64_t>(v)); }

void ByteWriter::str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    raw(std::as_bytes(std::span(s.data(), s.size())));
}

void ByteWriter::raw(std::span<const std::byte> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void ByteReader::need(size_t n) {
    if (data_.size() - pos_ < n) throw CodecError("archive truncated");
}

uint8_t ByteReader::u8() {
    need(1);
    return static_cast<uint8_t>(data_[pos_++]);
}

uint16_t ByteReader::u16() {
    uint16_t lo = u8();
    return static_cast<uint16_t>(lo | (uint16_t)u8() << 8);
}

uint32_t ByteReader::u32() {
    uint32_t lo = u16();
    return lo | (uint32_t)u16() << 16;
}

uint64_t ByteReader::u64() {
    uint64_t lo = u32();
    return lo | (uint64_t)u32() << 32;
}

double ByteReader::f64() { return std::bit_cast<double>(u64()); }

double ByteReader::value(Dtype dtype) {
    need(dtype_bytes(dtype));
    double v = read_value_bytes(data_, pos_, dtype);
    pos_ += dtype_bytes(dtype);
    return v;
}

std::string ByteReader::str() {
    uint32_t n = u32();
    auto bytes = raw(n);
    return std::string(reinterpret_cast<const char*>(bytes.data()), n);
}

std::span<const std::byte> ByteReader::raw(size_t n) {
    need(n);
    auto out = data_.subspan(pos_, n);
    pos_ += n;
    return out;
}

std::vector<std::byte> deflate_bytes(std::span<const std::byte> raw) {
    uLong bound = compressBound(static_cast<uLong>(raw.size()));
    ByteWriter w;
    w.u64(raw.size());
    std::vector<std::byte> packed(bound ? bound : 1);
    uLongf packed_len = bound;
    int rc = compress2(reinterpret_cast<Bytef*>(packed.data()), &packed_len,
                       reinterpret_cast<const Bytef*>(raw.data()),
                       static_cast<uLong>(raw.size()), Z_DEFAULT_COMPRESSION);
    if (rc != Z_OK) throw CodecError("deflate failed");
    packed.resize(packed_len);
    w.raw(packed);
    return w.take();
}

std::vector<std::byte> inflate_bytes(std::span<const std::byte> blob) {
    ByteReader r(blob);
    uint64_t raw_size = r.u64();
    if (raw_size == 0) return {};
    std::vector<std::byte> out(raw_size);
    uLongf out_len = static_cast<uLongf>(raw_size);
    auto packed = r.raw(r.remaining());
    int rc = uncompress(reinterpret_cast<Bytef*>(out.data()), &out_len,
                        reinterpret_cast<const Bytef*>(packed.data()),
                        static_cast<uLong>(packed.size()));
    if (rc != Z_OK || out_len != raw_size) throw CodecError("inflate failed");
    return out;
}

uint32_t crc32_bytes(uint32_t seed, std::span<const std::byte> data) {
    uint32_t crc = seed;
    size_t pos = 0;
    while (pos < data.size()) {
        uInt chunk = static_cast<uInt>(
            std::min<size_t>(data.size() - pos, 1u << 30));
        crc = static_cast<uint32_t>(
            crc32(crc, reinterpret_cast<const Bytef*>(data.data() + pos), chunk));
        pos += chunk;
    }
    return crc;
}

}  // namespace qpkt::detail
