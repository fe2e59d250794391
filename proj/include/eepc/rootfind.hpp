#pragma once

#include <cmath>
#include <stdexcept>

namespace eepc {

struct BisectOptions {
    double rel_tol = 1e-13;
    int max_iterations = 200;
};

// Bisection on a bracketed root; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F&& f, double lo, double hi, BisectOptions opt = {}) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw std::invalid_argument("bisect: root not bracketed");
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= opt.rel_tol * std::abs(mid) || mid <= lo || mid >= hi) return mid;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (fhi > 0.0)) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

// For monotone f: doubles hi until the sign flips, then bisects.
template <class F>
double bisect_expanding(F&& f, double lo, double hi, BisectOptions opt = {}) {
    const double flo = f(lo);
    if (flo == 0.0) return lo;
    for (int i = 0; i < 200; ++i) {
        const double fhi = f(hi);
        if (fhi == 0.0) return hi;
        if ((fhi > 0.0) != (flo > 0.0)) return bisect(f, lo, hi, opt);
        lo = hi;
        hi *= 2.0;
    }
    throw std::runtime_error("bisect_expanding: no sign change found");
}

}  // namespace eepc
