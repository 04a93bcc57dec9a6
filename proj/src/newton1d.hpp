#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace rmoe::detail {

struct Newton1DResult {
    double x = 0.0;
    bool ok = false; // false: no reliable maximizer found, caller keeps its value
};

// Safeguarded Newton ascent for a smooth concave univariate function.
// Step halving keeps the objective non-decreasing; if Newton stalls, a
// bisection on the gradient sign change takes over.
template <class F, class G, class H>
Newton1DResult maximize_concave_1d(F f, G g, H h, double x0, int max_iter = 50,
                                   double tol = 1e-8) {
    double x = x0;
    double fx = f(x);
    if (!std::isfinite(fx)) return {x0, false};

    bool stalled = false;
    for (int it = 0; it < max_iter; ++it) {
        const double gx = g(x);
        const double hx = h(x);
        if (!std::isfinite(gx) || !std::isfinite(hx)) {
            stalled = true;
            break;
        }
        double step;
        if (hx < 0.0) {
            step = -gx / hx;
        } else {
            // numerically flat curvature: move along the gradient
            step = (gx > 0.0 ? 1.0 : -1.0) * (1.0 + std::abs(x));
        }
        if (std::abs(step) <= tol * (1.0 + std::abs(x))) return {x, true};

        double xn = x + step;
        double fn = f(xn);
        int halvings = 0;
        while ((!std::isfinite(fn) || fn < fx - 1e-12 * (1.0 + std::abs(fx))) &&
               halvings < 40) {
            step *= 0.5;
            xn = x + step;
            fn = f(xn);
            ++halvings;
        }
        if (halvings == 40) {
            stalled = true;
            break;
        }
        const double moved = std::abs(xn - x);
        x = xn;
        fx = fn;
        if (moved <= tol * (1.0 + std::abs(x))) return {x, true};
    }
    if (!stalled) {
        // iteration cap reached with steady progress; current point is usable
        return {x, true};
    }

    // Bisection fallback on the (decreasing) gradient.
    double lo, hi;
    double span = 1.0 + std::abs(x0);
    const double g0 = g(x0);
    if (!std::isfinite(g0)) return {x0, false};
    if (g0 > 0.0) {
        lo = x0;
        hi = x0 + span;
        int grow = 0;
        while (std::isfinite(g(hi)) && g(hi) > 0.0 && grow++ < 60) {
            span *= 2.0;
            hi = x0 + span;
        }
        if (!std::isfinite(g(hi)) || g(hi) > 0.0) return {x0, false};
    } else {
        hi = x0;
        lo = x0 - span;
        int grow = 0;
        while (std::isfinite(g(lo)) && g(lo) <= 0.0 && grow++ < 60) {
            span *= 2.0;
            lo = x0 - span;
        }
        if (!std::isfinite(g(lo)) || g(lo) <= 0.0) return {x0, false};
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > tol * (1.0 + std::abs(mid)); ++it) {
        mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (!std::isfinite(gm)) return {x0, false};
        (gm > 0.0 ? lo : hi) = mid;
    }
    mid = 0.5 * (lo + hi);
    return {mid, true};
}

} // namespace rmoe::detail
