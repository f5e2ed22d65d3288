#include "qpkt/field.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qpkt {

std::pair<double, double> Field::value_range() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo > hi) return {0.0, 0.0};
    return {lo, hi};
}

Field make_field(std::vector<size_t> shape, Dtype dtype) {
    Field f;
    f.shape = std::move(shape);
    f.dtype = dtype;
    f.values.assign(f.size(), 0.0);
    return f;
}

Field read_raw(const std::string& path, std::vector<size_t> shape, Dtype dtype) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot open " + path);
    size_t bytes = static_cast<size_t>(in.tellg());
    Field f = make_field(std::move(shape), dtype);
    if (bytes != f.byte_size())
        throw std::runtime_error(path + ": file has " + std::to_string(bytes) +
                                 " bytes, shape/dtype needs " +
                                 std::to_string(f.byte_size()));
    in.seekg(0);
    if (dtype == Dtype::F32) {
        std::vector<float> tmp(f.size());
        in.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(bytes));
        for (size_t i = 0; i < tmp.size(); ++i) f.values[i] = tmp[i];
    } else {
        in.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(bytes));
    }
    if (!in) throw std::runtime_error("short read on " + path);
    return f;
}

void write_raw(const Field& f, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    if (f.dtype == Dtype::F32) {
        std::vector<float> tmp(f.size());
        for (size_t i = 0; i < tmp.size(); ++i) tmp[i] = static_cast<float>(f.values[i]);
        out.write(reinterpret_cast<const char*>(tmp.data()),
                  static_cast<std::streamsize>(tmp.size() * sizeof(float)));
    } else {
        out.write(reinterpret_cast<const char*>(f.values.data()),
                  static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("short write on " + path);
}

void append_value_bytes(std::vector<std::byte>& out, double v, Dtype dtype) {
    if (dtype == Dtype::F32) {
        auto bits = std::bit_cast<uint32_t>(static_cast<float>(v));
        for (int i = 0; i < 4; ++i)
            out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xff));
    } else {
        auto bits = std::bit_cast<uint64_t>(v);
        for (int i = 0; i < 8; ++i)
            out.push_back(static_cast<std::byte>((bits >> (8 * i)) & 0xff));
    }
}

double read_value_bytes(std::span<const std::byte> in, size_t offset, Dtype dtype) {
    if (dtype == Dtype::F32) {
        uint32_t bits = 0;
        for (int i = 0; i < 4; ++i)
            bits |= static_cast<uint32_t>(std::to_integer<uint8_t>(in[offset + i])) << (8 * i);
        return static_cast<double>(std::bit_cast<float>(bits));
    }
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<uint64_t>(std::to_integer<uint8_t>(in[offset + i])) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace qpkt
