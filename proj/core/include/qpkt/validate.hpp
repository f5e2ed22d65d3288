#ifndef QPKT_VALIDATE_HPP
#define QPKT_VALIDATE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "qpkt/codec.hpp"
#include "qpkt/field.hpp"
#include "qpkt/qoi.hpp"

namespace qpkt {

struct ValidateResult {
    std::vector<std::vector<Correction>> corrections;  // one list per field
    uint64_t n_corrected_points = 0;  // replaced points across all fields
    uint64_t n_violations = 0;        // outputs initially over tolerance
    int passes = 0;                   // repair sweeps run
    double max_error_before = 0.0;    // worst |Q(X)-Q(D)| before repair
};

// Replaces the decoded points behind every quantity output whose drift
// exceeds tau_abs with their exact originals, in place, and re-checks.
// Outputs read disjoint points, so one sweep settles; the loop simply
// verifies that.  An infinite tau_abs turns the whole pass off.
ValidateResult validate_and_correct(const QoiSpec& spec,
                                    std::span<const Field> originals,
                                    std::span<Field> decoded, double tau_abs);

// Worst |Q(X)-Q(D)| over all outputs.  Matching values (including equal
// infinities, or NaN against NaN) count as zero drift; any other non-finite
// mismatch counts as infinite drift.  Never throws on domain trouble.
double max_qoi_error(const QoiSpec& spec, std::span<const Field> originals,
                     std::span<const Field> decoded);

// Worst point-wise |X-D| across paired fields, with the same non-finite
// conventions as max_qoi_error.
double max_point_error(std::span<const Field> originals,
                       std::span<const Field> decoded);

}  // namespace qpkt

#endif
