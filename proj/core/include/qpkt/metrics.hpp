#ifndef QPKT_METRICS_HPP
#define QPKT_METRICS_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace qpkt {

struct QualityReport {
    std::string name;  // field label
    uint64_t n_values = 0;
    uint64_t raw_bytes = 0;
    uint64_t packed_bytes = 0;
    double eps_user = 0.0;
    double eps_global = 0.0;
    double tau_abs = std::numeric_limits<double>::infinity();
    double max_point_err = 0.0;
    double max_qoi_err = 0.0;      // absolute, after any repairs
    double max_qoi_rel_err = 0.0;  // relative to the exact quantity's range
    double qoi_psnr = 0.0;
    uint64_t n_outliers = 0;
    uint64_t n_corrections = 0;
    // Whole-call wall times (no file I/O); multi-field runs repeat the
    // dataset total on every row.
    double seconds_compress = 0.0;
    double seconds_decompress = 0.0;
};

// raw size over packed size; +inf when packed is empty.
double compression_ratio(uint64_t raw_bytes, uint64_t packed_bytes);
// packed bits per stored value.
double bit_rate(uint64_t packed_bytes, uint64_t n_values);

// 20*log10(range of exact) - 10*log10(mean squared error), over the exact
// and approximate outputs of the quantity; +inf when they match everywhere.
double psnr(std::span<const double> exact, std::span<const double> approx);

std::string report_table(std::span<const QualityReport> rows);
std::string report_csv(std::span<const QualityReport> rows);

}  // namespace qpkt

#endif
