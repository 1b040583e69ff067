#pragma once

// One-dimensional quadrature and root bracketing shared by the oracles and
// the IBOSS asymptotics. Integration is adaptive Gauss-Kronrod (15-point via
// boost); roots are located by plain bisection so results are reproducible.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <stdexcept>

namespace streamthin {

inline constexpr double kQuadAbsTol = 1e-10;
inline constexpr double kRootTol = 1e-10;

// Integral of f over [a, b]; either endpoint may be infinite.
template <typename F>
double integrate(const F& f, double a, double b) {
    if (a == b) return 0.0;
    double error = 0.0;
    const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, a, b, 15, 1e-13, &error);
    if (!(error <= kQuadAbsTol) || !std::isfinite(value)) {
        throw std::runtime_error("quadrature did not converge to 1e-10");
    }
    return value;
}

// Root of f in [lo, hi]; endpoints must bracket (f(lo)*f(hi) <= 0).
// Bisects until the interval is narrower than kRootTol.
template <typename F>
double bisect(const F& f, double lo, double hi) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) {
        throw std::invalid_argument("bisect: endpoints do not bracket a root");
    }
    while (hi - lo > kRootTol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Scans [lo, hi] on `steps` equal panels for a sign change of f; on success
// tightens [lo, hi] around the first change and returns true.
template <typename F>
bool find_bracket(const F& f, double& lo, double& hi, int steps) {
    const double a = lo;
    const double width = (hi - lo) / steps;
    double x0 = a;
    double f0 = f(x0);
    for (int i = 1; i <= steps; ++i) {
        const double x1 = (i == steps) ? hi : a + i * width;
        const double f1 = f(x1);
        if (f0 == 0.0 || (f0 > 0.0) != (f1 > 0.0)) {
            lo = x0;
            hi = x1;
            return true;
        }
        x0 = x1;
        f0 = f1;
    }
    return false;
}

}  // namespace streamthin
