#pragma once

#include <cmath>
#include <string>

#include "mep/errors.hpp"

namespace mep {

struct BisectionResult {
    double root = 0.0;
    int iterations = 0;
};

/// Plain bisection for a function that changes sign on [lo, hi].
/// Stops once the bracket is narrower than `abs_tol` or after `max_iter` halvings.
template <class F>
BisectionResult bisect(F&& f, double lo, double hi, double abs_tol = 1e-12, int max_iter = 200) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return {lo, 0};
    if (fhi == 0.0) return {hi, 0};
    if ((flo < 0.0) == (fhi < 0.0)) {
        throw NumericalError("bisection bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] does not contain a sign change");
    }
    int it = 0;
    while (hi - lo > abs_tol && it < max_iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket at double resolution
        const double fm = f(mid);
        ++it;
        if (fm == 0.0) return {mid, it};
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), it};
}

}  // namespace mep
