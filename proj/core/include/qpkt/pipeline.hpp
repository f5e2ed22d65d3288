#ifndef QPKT_PIPELINE_HPP
#define QPKT_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpkt/codec.hpp"
#include "qpkt/ebtune.hpp"
#include "qpkt/field.hpp"
#include "qpkt/metrics.hpp"
#include "qpkt/qoi.hpp"

namespace qpkt {

struct CompressOptions {
    // Point-wise bound: absolute wins when positive, else relative to the
    // smallest value range over the input fields.  One of the two is
    // required.
    double eps_abs = 0.0;
    double eps_rel = 0.0;
    // Quantity tolerance: absolute wins when positive (+inf turns the
    // quantity constraint off), else relative to the exact quantity's
    // smallest output range.  Without a quantity both default to off.
    double tau_abs = 0.0;
    double tau_rel = 0.0;
    std::optional<QoiSpec> qoi;
    TuneParams tune;
    bool tune_global = true;  // sample-driven global-bound search
    std::vector<std::string> names;  // per-field labels for reports
};

struct CompressResult {
    std::vector<std::vector<std::byte>> archives;  // one per field
    std::vector<QualityReport> reports;            // one per field
    double eps_abs = 0.0;  // resolved absolute point bound
    double tau_abs = std::numeric_limits<double>::infinity();
    TuneResult tuning;
    uint64_t n_outliers = 0;
    uint64_t n_corrections = 0;
    uint64_t raw_bytes = 0;
    uint64_t packed_bytes = 0;
};

// Absolute point bound / quantity tolerance for these inputs: absolute
// settings pass through, relative ones scale the smallest field range and
// the smallest exact-quantity output range.  Degenerate ranges reject
// relative settings with guidance to use absolute ones.
double resolve_point_bound(std::span<const Field> fields,
                           const CompressOptions& opt);
double resolve_qoi_tolerance(std::span<const Field> fields,
                             const CompressOptions& opt);

// End to end: resolve tolerances, derive per-point bounds from the quantity,
// tune the global bound against sample compression size, encode, repair any
// quantity drift with exact corrections, and emit verified archives.  Every
// archive independently decodes within eps; together they honor tau.
CompressResult compress_fields(std::span<const Field> fields,
                               const CompressOptions& opt);

struct DecompressResult {
    std::vector<Field> fields;
    std::vector<ArchiveHeader> headers;
};

DecompressResult decompress_archives(
    std::span<const std::vector<std::byte>> archives);

struct VerifyReport {
    bool point_bound_ok = false;
    bool qoi_ok = false;
    double max_point_err = 0.0;
    double max_qoi_err = 0.0;
    double eps_user = 0.0;  // thresholds as recorded in the archives
    double tau_abs = std::numeric_limits<double>::infinity();
    bool ok() const { return point_bound_ok && qoi_ok; }
};

// Decodes the archives and checks them against the originals using the
// thresholds recorded in the archive headers.
VerifyReport verify_archives(std::span<const Field> originals,
                             std::span<const std::vector<std::byte>> archives);

struct BaselineResult {
    double eps = 0.0;        // uniform bound the search settled on
    int probes = 0;          // full compress+decode+measure cycles spent
    bool bracketed = false;  // final error landed in [0.8 tau, tau]
    uint64_t packed_bytes = 0;
    double max_qoi_err = 0.0;
};

// Reference protocol a plain error-bounded compressor needs: repeatedly
// guess a uniform bound, compress, decode, measure the quantity error, and
// bisect on a log scale until the error lands in [0.8 tau, tau] or the probe
// budget runs out.  Starts from eps_hi (the point-wise requirement).
BaselineResult baseline_search(std::span<const Field> fields,
                               const QoiSpec& spec, double tau_abs,
                               double eps_hi, int max_probes = 20);

}  // namespace qpkt

#endif
