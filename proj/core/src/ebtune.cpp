#include "qpkt/ebtune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace qpkt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bounds below eps_global*2^-40 are stored losslessly by the codec; this is
// the value handed out when the drift model itself breaks down.
double bound_floor(double eps_global) {
    return std::isfinite(eps_global) ? std::ldexp(eps_global, -40) : 0.0;
}

}  // namespace

double univariate_bound(double x, const DerivativeBundle& f, double t,
                        double eps_global) {
    if (!(t > 0.0)) throw std::invalid_argument("tolerance must be positive");
    if (!(eps_global > 0.0))
        throw std::invalid_argument("global bound must be positive");
    double at[1] = {x};
    double a = f.cd1[0](at);
    double b = f.cd2[0](at);
    if (!std::isfinite(a) || !std::isfinite(b)) return bound_floor(eps_global);
    double eps;
    if (!std::isfinite(t)) {
        eps = eps_global;
    } else if (b != 0.0) {
        // Root of |a|e + |b|/2 e^2 = t, written to avoid cancellation.
        eps = 2.0 * t / (std::sqrt(a * a + 2.0 * std::fabs(b) * t) + std::fabs(a));
    } else if (a != 0.0) {
        eps = t / std::fabs(a);
    } else {
        eps = eps_global;
    }
    eps = std::min(eps, eps_global);
    double d = singular_distance(f.sings, 0, x);
    if (std::isfinite(d)) eps = std::min(eps, 0.5 * d);
    return eps;
}

double worst_case_tolerance(std::span<const double> alphas, double total) {
    double s = 0.0;
    for (double a : alphas) s += std::fabs(a);
    if (s == 0.0) return kInf;
    return total / s;
}

double concentration_tolerance(std::span<const double> alphas, double total,
                               double c, double beta) {
    if (c == 0.0) return 0.0;
    if (!(beta > 0.0 && beta < 1.0))
        throw std::invalid_argument("beta must lie in (0, 1)");
    double s2 = 0.0;
    for (double a : alphas) s2 += a * a;
    if (s2 == 0.0) return kInf;
    double ln_term = std::log(2.0 / (1.0 - beta));
    return c * total * std::sqrt(1.0 / (2.0 * s2 * ln_term));
}

double split_tolerance(std::span<const double> alphas, double total,
                       const TuneParams& params) {
    return std::max(worst_case_tolerance(alphas, total),
                    concentration_tolerance(alphas, total, params.c, params.beta));
}

// ---------------------------------------------------------------------------

BoundPlan build_plan(std::span<const Field> fields, const QoiSpec& spec,
                     double tau_abs, double eps_abs, const TuneParams& params) {
    if (!(eps_abs > 0.0) || !std::isfinite(eps_abs))
        throw std::invalid_argument("global bound must be positive and finite");
    if (!(tau_abs > 0.0)) throw std::invalid_argument("tolerance must be positive");
    BoundPlan plan;
    plan.eps_global = eps_abs;
    plan.bounds.resize(fields.size());
    for (size_t k = 0; k < fields.size(); ++k)
        plan.bounds[k].assign(fields[k].values.size(), eps_abs);

    switch (spec.kind) {
        case QoiKind::Univariate: {
            const Field& f = fields[0];
            auto& b = plan.bounds[0];
            for (size_t i = 0; i < f.values.size(); ++i)
                b[i] = univariate_bound(f.values[i], spec.bundle, tau_abs, eps_abs);
            break;
        }
        case QoiKind::RegionalLinear: {
            const Field& f = fields[0];
            auto& b = plan.bounds[0];
            RegionIter it(f.shape, spec.block);
            Region r;
            std::vector<size_t> members;
            // Uniform coefficient rules share one tolerance per block size.
            std::map<size_t, double> t_by_count;
            while (it.next(r)) {
                members.clear();
                it.member_indices(r, members);
                // Identical members are treated identically downstream, so
                // their drifts are copies of one another and cannot cancel;
                // such regions keep the worst-case share instead of the
                // cancellation-based grant.
                bool constant = true;
                for (size_t m : members)
                    if (f.values[m] != f.values[members[0]]) {
                        constant = false;
                        break;
                    }
                double t;
                if (constant) {
                    std::vector<double> alphas = region_coefficients(spec, r);
                    t = worst_case_tolerance(alphas, tau_abs);
                } else if (spec.coeff_rule == CoeffRule::Weighted) {
                    std::vector<double> alphas = region_coefficients(spec, r);
                    t = split_tolerance(alphas, tau_abs, params);
                } else {
                    auto found = t_by_count.find(members.size());
                    if (found == t_by_count.end()) {
                        std::vector<double> alphas = region_coefficients(spec, r);
                        t = split_tolerance(alphas, tau_abs, params);
                        t_by_count.emplace(members.size(), t);
                    } else {
                        t = found->second;
                    }
                }
                for (size_t m : members) {
                    double eb =
                        univariate_bound(f.values[m], spec.bundle, t, eps_abs);
                    b[m] = std::min(b[m], eb);
                }
            }
            break;
        }
        case QoiKind::MultivariateGeneral: {
            size_t n = fields[0].values.size();
            std::vector<double> at(spec.arity), alphas(spec.arity);
            for (size_t i = 0; i < n; ++i) {
                for (size_t k = 0; k < spec.arity; ++k)
                    at[k] = fields[k].values[i];
                bool ok = true;
                for (size_t k = 0; k < spec.arity; ++k) {
                    alphas[k] = spec.bundle.cd1[k](at);
                    ok = ok && std::isfinite(alphas[k]);
                }
                if (!ok) {
                    // The linearization breaks down at this tuple; store it
                    // (nearly) losslessly instead of trusting the model.
                    for (size_t k = 0; k < spec.arity; ++k)
                        plan.bounds[k][i] = bound_floor(eps_abs);
                    continue;
                }
                double t = split_tolerance(alphas, tau_abs, params);
                for (size_t k = 0; k < spec.arity; ++k) {
                    // Each component enters the split linearly, so its own
                    // bound is just the granted tolerance under the cap.
                    double eb = std::min(eps_abs, t);
                    double d = singular_distance(spec.bundle.sings,
                                                 static_cast<int>(k), at[k]);
                    if (std::isfinite(d)) eb = std::min(eb, 0.5 * d);
                    plan.bounds[k][i] = eb;
                }
            }
            break;
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------

TuneResult tune_global_bound(BoundPlan& plan, const SampleSizer& sample_size,
                             const TuneParams& params) {
    TuneResult res;
    res.eps_global = plan.eps_global;
    size_t n = plan.total_count();
    if (n == 0 || params.quantiles.empty()) return res;

    std::vector<double> sorted;
    sorted.reserve(n);
    for (const auto& b : plan.bounds) sorted.insert(sorted.end(), b.begin(), b.end());
    std::sort(sorted.begin(), sorted.end());

    // All bounds equal: every candidate coincides, no sampling needed.
    if (sorted.front() == sorted.back()) {
        plan.eps_global = std::min(plan.eps_global, sorted.front());
        res.eps_global = plan.eps_global;
        res.quantile = params.quantiles.front();
        res.rank = std::min(static_cast<size_t>(
                                params.quantiles.front() * static_cast<double>(n)),
                            n - 1);
        res.tuned = true;
        return res;
    }

    // Stage 1: quantile candidates, smallest sampled size wins; ties within
    // 0.5% keep the earlier (larger) bound.
    bool have_best = false;
    uint64_t best_size = 0;
    double best_eps = 0.0, best_q = 0.0;
    size_t best_rank = 0;
    double last_tried = -1.0;
    for (double q : params.quantiles) {
        size_t k = std::min(static_cast<size_t>(q * static_cast<double>(n)), n - 1);
        double eps = sorted[k];
        if (!(eps > 0.0)) continue;      // pinned to a singularity; unusable
        if (eps == last_tried) continue;  // duplicate candidate value
        last_tried = eps;
        uint64_t size = sample_size(eps);
        if (!have_best || static_cast<double>(size) <
                              static_cast<double>(best_size) * 0.995) {
            have_best = true;
            best_size = size;
            best_eps = eps;
            best_q = q;
            best_rank = k;
        }
    }
    if (!have_best) return res;  // nothing usable; keep the user bound

    res.tuned = true;
    res.quantile = best_q;
    res.rank = best_rank;

    // Stage 2: for the smallest quantiles, walk down the sorted bounds while
    // they stay close enough to the stage-1 pick.
    double eps_final = best_eps;
    if (best_q <= params.stage2_max_quantile && best_rank > 0) {
        res.stage2_ran = true;
        double k0 = static_cast<double>(best_rank);
        for (size_t k = best_rank; k-- > 0;) {
            double slope = params.c0 +
                           (static_cast<double>(k) / k0) * (1.0 - params.c0);
            if (sorted[k] >= slope * best_eps)
                eps_final = sorted[k];
            else
                break;
        }
    }
    plan.eps_global = std::min(plan.eps_global, eps_final);
    res.eps_global = plan.eps_global;
    return res;
}

void clamp_plan(BoundPlan& plan) {
    for (auto& b : plan.bounds)
        for (double& eps : b) eps = std::min(eps, plan.eps_global);
}

}  // namespace qpkt
