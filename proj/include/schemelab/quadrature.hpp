#pragma once

#include <algorithm>
#include <functional>

namespace schemelab {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;  // accumulated Richardson error estimate
    bool converged = true;
};

// Adaptive Simpson on [a, b] to absolute tolerance `abs_tol`. The integrand
// must be smooth on the open interval; callers split at known jumps.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, int max_depth = 40);

// Locates the switch point of `pred` on [lo, hi] given pred(lo) != pred(hi).
// Returns a point within `tol` of the switch.
double bisect_switch(const std::function<bool(double)>& pred, double lo, double hi,
                     double tol = 1e-12);

// Clamps c to [lo + d, hi - d], d = min(1e-11, (hi - lo) / 4). Integrands
// on a piece then see one-sided limits at jumps that sit on an endpoint or
// within rounding of it.
inline double inside(double c, double lo, double hi) noexcept {
    const double d = std::min(1e-11, 0.25 * (hi - lo));
    return std::clamp(c, lo + d, hi - d);
}

}  // namespace schemelab
