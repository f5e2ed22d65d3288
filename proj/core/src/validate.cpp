#include "qpkt/validate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace qpkt {
namespace {

bool same_value(double a, double b) {
    return a == b || (std::isnan(a) && std::isnan(b));
}

double pair_error(double qx, double qd) {
    if (qx == qd) return 0.0;
    if (std::isnan(qx) && std::isnan(qd)) return 0.0;
    double e = std::fabs(qx - qd);
    return std::isnan(e) ? std::numeric_limits<double>::infinity() : e;
}

void check_bindings(const QoiSpec& spec, std::span<const Field> x,
                    std::span<const Field> d) {
    if (x.size() != spec.arity)
        throw std::invalid_argument("wrong number of fields for quantity");
    if (d.size() != x.size())
        throw std::invalid_argument("original/decoded field count mismatch");
    for (size_t i = 0; i < x.size(); ++i)
        if (x[i].size() != d[i].size() || x[i].size() != x[0].size())
            throw std::invalid_argument("field sizes do not match");
}

// Calls on(drift, points) for every quantity output; `points` lists the
// (field, flat index) inputs that output reads.
template <class On>
void walk_outputs(const QoiSpec& spec, std::span<const Field> x,
                  std::span<const Field> d, On&& on) {
    const CompiledExpr& f = spec.bundle.cf;
    std::vector<std::pair<size_t, size_t>> pts;
    switch (spec.kind) {
        case QoiKind::Univariate: {
            const auto& xv = x[0].values;
            const auto& dv = d[0].values;
            double ax[1], ad[1];
            for (size_t i = 0; i < xv.size(); ++i) {
                ax[0] = xv[i];
                ad[0] = dv[i];
                pts.assign(1, {0, i});
                on(pair_error(f(ax), f(ad)), pts);
            }
            break;
        }
        case QoiKind::RegionalLinear: {
            const auto& xv = x[0].values;
            const auto& dv = d[0].values;
            RegionIter it(x[0].shape, spec.block);
            Region r;
            std::vector<size_t> idx;
            while (it.next(r)) {
                idx.clear();
                it.member_indices(r, idx);
                std::vector<double> alpha = region_coefficients(spec, r);
                double qx = spec.constant, qd = spec.constant;
                double a[1];
                pts.clear();
                for (size_t j = 0; j < idx.size(); ++j) {
                    a[0] = xv[idx[j]];
                    qx += alpha[j] * f(a);
                    a[0] = dv[idx[j]];
                    qd += alpha[j] * f(a);
                    pts.emplace_back(0, idx[j]);
                }
                on(pair_error(qx, qd), pts);
            }
            break;
        }
        case QoiKind::MultivariateGeneral: {
            const size_t m = spec.arity;
            const size_t n = x[0].size();
            std::vector<double> ax(m), ad(m);
            for (size_t i = 0; i < n; ++i) {
                pts.clear();
                for (size_t fi = 0; fi < m; ++fi) {
                    ax[fi] = x[fi].values[i];
                    ad[fi] = d[fi].values[i];
                    pts.emplace_back(fi, i);
                }
                on(pair_error(f(ax), f(ad)), pts);
            }
            break;
        }
    }
}

}  // namespace

ValidateResult validate_and_correct(const QoiSpec& spec,
                                    std::span<const Field> originals,
                                    std::span<Field> decoded, double tau_abs) {
    check_bindings(spec, originals, {decoded.data(), decoded.size()});
    if (!(tau_abs > 0.0))
        throw std::invalid_argument("tolerance must be positive");
    ValidateResult res;
    res.corrections.resize(originals.size());
    if (std::isinf(tau_abs)) return res;

    std::span<const Field> dview(decoded.data(), decoded.size());
    for (int pass = 0; pass < 4; ++pass) {
        ++res.passes;
        uint64_t fixed = 0;
        walk_outputs(spec, originals, dview, [&](double err, const auto& pts) {
            if (pass == 0 && err > res.max_error_before)
                res.max_error_before = err;
            if (!(err > tau_abs)) return;
            if (pass == 0) ++res.n_violations;
            for (auto [fi, idx] : pts) {
                double exact = originals[fi].values[idx];
                if (same_value(decoded[fi].values[idx], exact)) continue;
                decoded[fi].values[idx] = exact;
                res.corrections[fi].push_back({idx, exact});
                ++res.n_corrected_points;
                ++fixed;
            }
        });
        if (fixed == 0) break;
    }
    return res;
}

double max_qoi_error(const QoiSpec& spec, std::span<const Field> originals,
                     std::span<const Field> decoded) {
    check_bindings(spec, originals, decoded);
    double worst = 0.0;
    walk_outputs(spec, originals, decoded, [&](double err, const auto&) {
        if (err > worst) worst = err;
    });
    return worst;
}

double max_point_error(std::span<const Field> originals,
                       std::span<const Field> decoded) {
    if (originals.size() != decoded.size())
        throw std::invalid_argument("original/decoded field count mismatch");
    double worst = 0.0;
    for (size_t fi = 0; fi < originals.size(); ++fi) {
        const auto& xv = originals[fi].values;
        const auto& dv = decoded[fi].values;
        if (xv.size() != dv.size())
            throw std::invalid_argument("field sizes do not match");
        for (size_t i = 0; i < xv.size(); ++i) {
            double e = pair_error(xv[i], dv[i]);
            if (e > worst) worst = e;
        }
    }
    return worst;
}

}  // namespace qpkt
