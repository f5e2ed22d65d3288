#ifndef QPKT_FIELD_HPP
#define QPKT_FIELD_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qpkt {

enum class Dtype : uint8_t { F32 = 4, F64 = 8 };

inline size_t dtype_bytes(Dtype d) { return static_cast<size_t>(d); }

// A row-major scalar grid.  Values are held as doubles regardless of the
// stored width; F32 fields hold exactly float-representable values so the
// stored-width round trip is lossless.
struct Field {
    std::vector<size_t> shape;
    Dtype dtype = Dtype::F64;
    std::vector<double> values;

    size_t size() const {
        size_t n = 1;
        for (size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }
    size_t byte_size() const { return size() * dtype_bytes(dtype); }

    // (min, max) over finite values; (0, 0) when none are finite.
    std::pair<double, double> value_range() const;
    double range_width() const {
        auto [lo, hi] = value_range();
        return hi - lo;
    }
};

Field make_field(std::vector<size_t> shape, Dtype dtype);

// Headerless row-major binary files; the byte size must equal
// product(shape) * width.
Field read_raw(const std::string& path, std::vector<size_t> shape, Dtype dtype);
void write_raw(const Field& f, const std::string& path);

// Stored-width bytes of one value (little-endian), used by the codec and
// the raw writer.
void append_value_bytes(std::vector<std::byte>& out, double v, Dtype dtype);
double read_value_bytes(std::span<const std::byte> in, size_t offset, Dtype dtype);

}  // namespace qpkt

#endif
