#include "qpkt/fixtures.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace qpkt {
namespace {

std::vector<size_t> row_major_strides(std::span<const size_t> shape) {
    std::vector<size_t> stride(shape.size());
    size_t s = 1;
    for (size_t d = shape.size(); d-- > 0;) {
        stride[d] = s;
        s *= shape[d];
    }
    return stride;
}

Field empty_like(std::vector<size_t> shape) {
    if (shape.empty()) throw std::invalid_argument("field has no shape");
    for (size_t d : shape)
        if (d == 0) throw std::invalid_argument("zero-extent dimension");
    Field f;
    f.shape = std::move(shape);
    f.dtype = Dtype::F64;
    f.values.resize(f.size());
    return f;
}

// Uniform in (0, 1), identical on every platform for a given engine state.
double unit_open(std::mt19937& rng) {
    return (static_cast<double>(rng()) + 0.5) / 4294967296.0;
}

double gaussian(std::mt19937& rng) {
    double u1 = unit_open(rng);
    double u2 = unit_open(rng);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Field sinusoid_field(std::vector<size_t> shape, unsigned seed) {
    Field f = empty_like(std::move(shape));
    const size_t nd = f.shape.size();
    std::mt19937 rng(seed);
    std::vector<double> freq(nd), phase(nd);
    for (size_t d = 0; d < nd; ++d) {
        freq[d] = 2.0 + static_cast<double>(rng() % 4);  // 2..5 waves per axis
        phase[d] = 2.0 * std::numbers::pi * unit_open(rng);
    }
    auto stride = row_major_strides(f.shape);
    const double amp = 1.2 / static_cast<double>(nd);
    for (size_t i = 0; i < f.values.size(); ++i) {
        double v = 2.5;
        size_t rem = i;
        for (size_t d = 0; d < nd; ++d) {
            size_t c = rem / stride[d];
            rem %= stride[d];
            v += amp * std::sin(2.0 * std::numbers::pi * freq[d] *
                                    static_cast<double>(c) /
                                    static_cast<double>(f.shape[d]) +
                                phase[d]);
        }
        f.values[i] = v;
    }
    return f;
}

Field lognormal_field(std::vector<size_t> shape, unsigned seed, double sigma) {
    Field f = empty_like(std::move(shape));
    std::mt19937 rng(seed);
    for (auto& v : f.values) v = std::exp(sigma * gaussian(rng));

    // one 3-point mean pass per axis, edges clamped
    auto stride = row_major_strides(f.shape);
    std::vector<double> tmp(f.values.size());
    for (size_t d = 0; d < f.shape.size(); ++d) {
        const size_t n = f.shape[d];
        if (n < 2) continue;
        const size_t st = stride[d];
        for (size_t i = 0; i < f.values.size(); ++i) {
            const size_t c = (i / st) % n;
            const double lo = f.values[c > 0 ? i - st : i];
            const double hi = f.values[c + 1 < n ? i + st : i];
            tmp[i] = (lo + f.values[i] + hi) / 3.0;
        }
        f.values.swap(tmp);
    }
    return f;
}

Field plateau_field(std::vector<size_t> shape, unsigned seed, size_t tile) {
    if (tile == 0) throw std::invalid_argument("zero tile size");
    Field f = empty_like(std::move(shape));
    const size_t nd = f.shape.size();
    static constexpr double kPalette[] = {0.5,  1.0,  1.75, 2.5,
                                          3.5,  5.0,  7.25, 10.0};
    std::vector<size_t> tiles(nd), tstride(nd);
    size_t n_tiles = 1;
    for (size_t d = nd; d-- > 0;) {
        tiles[d] = (f.shape[d] + tile - 1) / tile;
        tstride[d] = n_tiles;
        n_tiles *= tiles[d];
    }
    std::mt19937 rng(seed);
    std::vector<double> level(n_tiles);
    for (auto& v : level) v = kPalette[rng() % 8];

    auto stride = row_major_strides(f.shape);
    for (size_t i = 0; i < f.values.size(); ++i) {
        size_t rem = i, t = 0;
        for (size_t d = 0; d < nd; ++d) {
            size_t c = rem / stride[d];
            rem %= stride[d];
            t += (c / tile) * tstride[d];
        }
        f.values[i] = level[t];
    }
    return f;
}

Field with_dtype(Field f, Dtype dtype) {
    f.dtype = dtype;
    if (dtype == Dtype::F32)
        for (auto& v : f.values)
            v = static_cast<double>(static_cast<float>(v));
    return f;
}

}  // namespace qpkt
