#ifndef QPKT_TESTS_SUPPORT_HPP
#define QPKT_TESTS_SUPPORT_HPP

#include <cmath>
#include <limits>

namespace testsupport {

// Reference bound: the largest eps in [0, hi] whose worst endpoint drift
// max(|f(x+eps)-f(x)|, |f(x-eps)-f(x)|) stays within t, found by bisection.
// Runs in long double so the reference has headroom over the estimator
// under test; non-finite drift counts as a violation.
template <class F>
double oracle_bound(F f, long double x, long double t, long double hi) {
    auto drift = [&](long double e) -> long double {
        long double up = std::fabs(f(x + e) - f(x));
        long double dn = std::fabs(f(x - e) - f(x));
        long double d = std::max(up, dn);
        return std::isfinite(static_cast<double>(d))
                   ? d
                   : std::numeric_limits<long double>::infinity();
    };
    if (drift(hi) <= t) return static_cast<double>(hi);
    long double lo = 0.0L;
    for (int i = 0; i < 200 && lo < hi; ++i) {
        long double mid = 0.5L * (lo + hi);
        if (drift(mid) <= t)
            lo = mid;
        else
            hi = mid;
    }
    return static_cast<double>(lo);
}

}  // namespace testsupport

#endif
