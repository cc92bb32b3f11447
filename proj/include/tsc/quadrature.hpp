#pragma once

#include <cmath>

#include "tsc/errors.hpp"

namespace tsc {

template <typename F>
double detail_simpson_step(F&& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return detail_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           detail_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

/// Adaptive Simpson on [a, b]. Recursion splits until the Richardson
/// estimate |S_left + S_right - S_whole| / 15 meets the per-call tolerance,
/// then adds that estimate as a correction term.
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double abs_tol = 1e-11,
                        int max_depth = 40) {
    const double fa = f(a), fb = f(b);
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail_simpson_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

} // namespace tsc
