#include "qpkt/metrics.hpp"

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <stdexcept>

namespace qpkt {
namespace {

void append_line(std::string& out, const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    out += buf;
    out += '\n';
}

}  // namespace

double compression_ratio(uint64_t raw_bytes, uint64_t packed_bytes) {
    if (packed_bytes == 0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(raw_bytes) / static_cast<double>(packed_bytes);
}

double bit_rate(uint64_t packed_bytes, uint64_t n_values) {
    if (n_values == 0) return 0.0;
    return 8.0 * static_cast<double>(packed_bytes) /
           static_cast<double>(n_values);
}

double psnr(std::span<const double> exact, std::span<const double> approx) {
    if (exact.size() != approx.size())
        throw std::invalid_argument("output sizes do not match");
    if (exact.empty()) throw std::invalid_argument("no outputs");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sq = 0.0;
    for (size_t i = 0; i < exact.size(); ++i) {
        if (std::isfinite(exact[i])) {
            lo = std::min(lo, exact[i]);
            hi = std::max(hi, exact[i]);
        }
        double d = exact[i] - approx[i];
        if (exact[i] == approx[i] ||
            (std::isnan(exact[i]) && std::isnan(approx[i])))
            d = 0.0;
        sq += d * d;
    }
    double mse = sq / static_cast<double>(exact.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    double range = hi > lo ? hi - lo : 0.0;
    return 20.0 * std::log10(range) - 10.0 * std::log10(mse);
}

std::string report_table(std::span<const QualityReport> rows) {
    std::string out;
    append_line(out,
                "%-16s %10s %11s %11s %8s %9s %12s %12s %12s %9s %8s %7s %8s %8s",
                "field", "values", "raw B", "packed B", "ratio", "bits/val",
                "point err", "qoi err", "qoi rel", "psnr dB", "outlier",
                "corr", "comp s", "dec s");
    for (const QualityReport& r : rows) {
        append_line(out,
                    "%-16s %10llu %11llu %11llu %8.2f %9.4f %12.3e %12.3e "
                    "%12.3e %9.2f %8llu %7llu %8.3f %8.3f",
                    r.name.c_str(), (unsigned long long)r.n_values,
                    (unsigned long long)r.raw_bytes,
                    (unsigned long long)r.packed_bytes,
                    compression_ratio(r.raw_bytes, r.packed_bytes),
                    bit_rate(r.packed_bytes, r.n_values), r.max_point_err,
                    r.max_qoi_err, r.max_qoi_rel_err, r.qoi_psnr,
                    (unsigned long long)r.n_outliers,
                    (unsigned long long)r.n_corrections, r.seconds_compress,
                    r.seconds_decompress);
    }
    return out;
}

std::string report_csv(std::span<const QualityReport> rows) {
    std::string out =
        "field,values,raw_bytes,packed_bytes,ratio,bits_per_value,eps_user,"
        "eps_global,tau_abs,max_point_err,max_qoi_err,max_qoi_rel_err,"
        "qoi_psnr,outliers,corrections,compress_s,decompress_s\n";
    for (const QualityReport& r : rows) {
        append_line(out,
                    "%s,%llu,%llu,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                    "%.17g,%.17g,%.17g,%llu,%llu,%.17g,%.17g",
                    r.name.c_str(), (unsigned long long)r.n_values,
                    (unsigned long long)r.raw_bytes,
                    (unsigned long long)r.packed_bytes,
                    compression_ratio(r.raw_bytes, r.packed_bytes),
                    bit_rate(r.packed_bytes, r.n_values), r.eps_user,
                    r.eps_global, r.tau_abs, r.max_point_err, r.max_qoi_err,
                    r.max_qoi_rel_err, r.qoi_psnr,
                    (unsigned long long)r.n_outliers,
                    (unsigned long long)r.n_corrections, r.seconds_compress,
                    r.seconds_decompress);
    }
    return out;
}

}  // namespace qpkt
