#pragma once

#include "newton1d.hpp"

#include <cmath>

namespace rmoe::detail {

// Maximizer of f(w) - gamma*|w| for smooth concave f: safeguarded Newton on
// each half (gradient g -/+ gamma), both maxima compared against the value
// at zero; sign-infeasible maximizers are discarded and exact 0.0 returned
// when zero wins. Never returns a point with a worse measured value than
// the current one.
template <class F, class G, class H>
double maximize_l1_piecewise(F f, G g, H h, double gamma, double wcur, int& nr_failures) {
    if (gamma == 0.0) {
        auto r = maximize_concave_1d(f, g, h, wcur);
        if (!r.ok) {
            ++nr_failures;
            return wcur;
        }
        return f(r.x) > f(wcur) ? r.x : wcur; // flat objectives keep the current value
    }

    const double v0 = f(0.0);
    double best_w = 0.0;
    double best_v = v0;
    bool any_fail = false;
    {
        auto fp = [&](double w) { return f(w) - gamma * w; };
        auto gp = [&](double w) { return g(w) - gamma; };
        auto r = maximize_concave_1d(fp, gp, h, wcur);
        if (!r.ok) {
            any_fail = true;
        } else if (r.x > 0.0) {
            const double v = fp(r.x);
            if (v > best_v) {
                best_v = v;
                best_w = r.x;
            }
        }
    }
    {
        auto fn = [&](double w) { return f(w) + gamma * w; };
        auto gn = [&](double w) { return g(w) + gamma; };
        auto r = maximize_concave_1d(fn, gn, h, wcur);
        if (!r.ok) {
            any_fail = true;
        } else if (r.x < 0.0) {
            const double v = fn(r.x);
            if (v > best_v) {
                best_v = v;
                best_w = r.x;
            }
        }
    }
    if (any_fail) ++nr_failures;

    const double vcur = f(wcur) - gamma * std::abs(wcur);
    if (vcur > best_v) return wcur;
    return best_w;
}

} // namespace rmoe::detail
