#include "schemelab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace schemelab {

namespace {

struct Panel {
    double a, fa, m, fm, b, fb, whole;
};

void refine(const std::function<double(double)>& f, const Panel& p, double tol, int depth,
            QuadratureResult& out) {
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (p.m - p.a) / 6.0 * (p.fa + 4.0 * flm + p.fm);
    const double right = (p.b - p.m) / 6.0 * (p.fm + 4.0 * frm + p.fb);
    const double delta = left + right - p.whole;

    if (std::abs(delta) <= 15.0 * tol) {
        out.value += left + right + delta / 15.0;
        out.error += std::abs(delta) / 15.0;
        return;
    }
    if (depth <= 0) {
        out.value += left + right + delta / 15.0;
        out.error += std::abs(delta) / 15.0;
        out.converged = false;
        return;
    }
    refine(f, Panel{p.a, p.fa, lm, flm, p.m, p.fm, left}, 0.5 * tol, depth - 1, out);
    refine(f, Panel{p.m, p.fm, rm, frm, p.b, p.fb, right}, 0.5 * tol, depth - 1, out);
}

}  // namespace

QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, int max_depth) {
    QuadratureResult out;
    if (!(b > a)) {
        return out;
    }
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Tolerances below the rounding noise of the panel sums can never be met.
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(whole) + (b - a));
    refine(f, Panel{a, fa, m, fm, b, fb, whole}, std::max(abs_tol, floor), max_depth, out);
    return out;
}

double bisect_switch(const std::function<bool(double)>& pred, double lo, double hi, double tol) {
    const bool at_lo = pred(lo);
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        if (pred(mid) == at_lo) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace schemelab
