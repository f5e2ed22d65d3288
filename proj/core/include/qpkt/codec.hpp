#ifndef QPKT_CODEC_HPP
#define QPKT_CODEC_HPP

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "qpkt/field.hpp"
#include "qpkt/qoi.hpp"

namespace qpkt {

struct CodecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Per-point bounds are snapped down to eps_global * 2^-k so the per-point
// level stream stays tiny after entropy coding.  kLosslessLevel marks points
// stored exactly.
inline constexpr uint8_t kMaxLevel = 40;
inline constexpr uint8_t kLosslessLevel = 41;
// Residual bins beyond this magnitude escape to exact storage.
inline constexpr int64_t kMaxBin = 32767;

// Smallest k with eps_global * 2^-k <= bound (0 when bound >= eps_global);
// kLosslessLevel when no representable level honors the bound.
uint8_t level_for_bound(double bound, double eps_global);
std::vector<uint8_t> quantize_bounds(std::span<const double> bounds,
                                     double eps_global);
// The bound a level grants; 0 for lossless levels.
double level_bound(uint8_t level, double eps_global);

// A point whose decoded value is replaced outright (validation repairs).
struct Correction {
    uint64_t index;
    double value;
};

struct FieldStreams {
    std::vector<std::byte> levels;    // per-point levels, prefix-coded + deflated
    std::vector<std::byte> quants;    // residual bins, prefix-coded + deflated
    std::vector<std::byte> outliers;  // deflated (index, exact value) pairs
    uint64_t n_outliers = 0;          // entries in the outlier stream
    uint64_t n_lossless = 0;          // of those, points with a lossless level
    uint64_t byte_size() const {
        return levels.size() + quants.size() + outliers.size();
    }
};

// First-order Lorenzo prediction on previously reconstructed values, residual
// binning at 2x the point's snapped bound, escape to exact storage when the
// bin overflows or the reconstruction misses the bound.  Decoding reproduces
// every value within its snapped bound, exactly for escaped points.
FieldStreams encode_streams(const Field& f, std::span<const double> bounds,
                            double eps_global);

struct ArchiveHeader {
    std::vector<size_t> shape;
    Dtype dtype = Dtype::F64;
    double eps_user = 0.0;    // absolute point-wise bound the archive promises
    double eps_global = 0.0;  // base bound the level stream is relative to
    double tau_abs = std::numeric_limits<double>::infinity();
    std::optional<QoiSpec> qoi;
    double tune_c = 2.0, tune_beta = 0.999, tune_c0 = 0.95;
    uint64_t n_values = 0;
    uint64_t n_outliers = 0;     // filled on read
    uint64_t n_corrections = 0;  // filled on read
};

// Self-contained archive: magic, header, stream table, checksum, payloads.
std::vector<std::byte> assemble_archive(const ArchiveHeader& hdr,
                                        const FieldStreams& s,
                                        std::span<const Correction> corrections = {});
ArchiveHeader peek_header(std::span<const std::byte> archive);
// Full reconstruction, corrections applied last.  Throws CodecError on a
// malformed archive or checksum mismatch.
Field decode_archive(std::span<const std::byte> archive,
                     ArchiveHeader* hdr_out = nullptr);

// Stream bytes for a centered sample block compressed at one uniform bound;
// the tuner ranks candidate bounds with this.
uint64_t estimate_compressed_size(const Field& f, double eps);

}  // namespace qpkt

#endif
