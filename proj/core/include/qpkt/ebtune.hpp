#ifndef QPKT_EBTUNE_HPP
#define QPKT_EBTUNE_HPP

#include <functional>
#include <span>
#include <vector>

#include "qpkt/qoi.hpp"

namespace qpkt {

struct TuneParams {
    // Concentration scale factor; 0 falls back to the worst-case split only.
    double c = 2.0;
    // Target probability that a region's combined drift stays within its
    // tolerance; violations are repaired by validation.
    double beta = 0.999;
    // Stage-2 walk keeps smaller bounds while they stay above
    // (c0 + (k/k0)*(1-c0)) times the stage-1 pick.
    double c0 = 0.95;
    std::vector<double> quantiles = {0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.0025};
    // Stage 2 only runs when the winning quantile is at or below this.
    double stage2_max_quantile = 0.005;
};

// Per-point error bounds for every bound field, sharing one global cap.
struct BoundPlan {
    double eps_global = 0.0;
    std::vector<std::vector<double>> bounds;  // [field][flat index]

    size_t total_count() const {
        size_t n = 0;
        for (const auto& b : bounds) n += b.size();
        return n;
    }
};

// Largest eps such that the second-order drift model of f stays within t:
//   |f'(x)|*eps + |f''(x)|/2 * eps^2 <= t,
// capped by eps_global, halved against the nearest recorded singularity, and
// floored at eps_global*2^-40 when derivatives are not finite (points whose
// returned bound sits below that floor are stored losslessly downstream).
double univariate_bound(double x, const DerivativeBundle& f, double t,
                        double eps_global);

// Per-point tolerance splits of a region total T across coefficients alpha:
// the worst-case share T/sum|alpha|, and the concentration-based share
//   c*T*sqrt(1 / (2*sum(alpha^2)*ln(2/(1-beta)))),
// which trades a beta-probability guarantee for a larger per-point budget.
double worst_case_tolerance(std::span<const double> alphas, double total);
double concentration_tolerance(std::span<const double> alphas, double total,
                               double c, double beta);

// Per-point tolerance actually granted: max of the two splits.
double split_tolerance(std::span<const double> alphas, double total,
                       const TuneParams& params);

// Builds the per-point bound plan for the quantity over the inputs with
// global cap eps_abs and quantity tolerance tau_abs (+inf allowed; yields
// uniform bounds).
BoundPlan build_plan(std::span<const Field> fields, const QoiSpec& spec,
                     double tau_abs, double eps_abs, const TuneParams& params);

// Compressed byte count of a fixed sample when coded with one uniform bound;
// supplied by the codec, treated as a black box here.
using SampleSizer = std::function<uint64_t(double eps)>;

struct TuneResult {
    double eps_global = 0.0;
    double quantile = 0.0;      // winning stage-1 quantile
    size_t rank = 0;            // its 0-indexed order statistic
    bool stage2_ran = false;
    bool tuned = false;         // false when no usable candidate existed
};

// Two-stage global-bound selection over the pooled per-point bounds:
// stage 1 tries low-order quantile candidates and keeps the one whose
// sample compression is smallest (ties within 0.5% prefer the larger eps);
// stage 2, for the smallest quantiles only, walks further down the sorted
// bounds while they hold up against the c0 slope.  Updates plan.eps_global.
TuneResult tune_global_bound(BoundPlan& plan, const SampleSizer& sample_size,
                             const TuneParams& params);

// Caps every per-point bound at the (tuned) global bound.
void clamp_plan(BoundPlan& plan);

}  // namespace qpkt

#endif
