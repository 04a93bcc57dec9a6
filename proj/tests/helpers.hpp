#pragma once

#include "rmoe/em.hpp"
#include "rmoe/model.hpp"
#include "rmoe/types.hpp"

#include <cmath>
#include <random>

namespace testutil {

using rmoe::Dataset;
using rmoe::MatrixXd;
using rmoe::MoEParams;
using rmoe::VectorXd;

inline MoEParams random_params(int K, int p, std::mt19937_64& rng, bool shared = false,
                               double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    std::uniform_real_distribution<double> sig(0.5, 2.0);
    MoEParams params = MoEParams::zeros(K, p, shared ? rmoe::SigmaMode::Shared
                                                     : rmoe::SigmaMode::PerComponent);
    for (int k = 0; k < K - 1; ++k) {
        params.gate_intercepts(k) = normal(rng);
        for (int j = 0; j < p; ++j) params.gate_weights(k, j) = normal(rng);
    }
    for (int k = 0; k < K; ++k) {
        params.expert_intercepts(k) = normal(rng);
        for (int j = 0; j < p; ++j) params.expert_weights(k, j) = normal(rng);
    }
    for (int k = 0; k < params.sigmas.size(); ++k) params.sigmas(k) = sig(rng);
    return params;
}

inline Dataset random_dataset(int n, int p, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Dataset data;
    data.X.resize(n, p);
    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) data.X(i, j) = normal(rng);
        data.y(i) = normal(rng);
    }
    return data;
}

inline MatrixXd random_tau(int n, int K, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    MatrixXd tau(n, K);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < K; ++k) {
            tau(i, k) = expo(rng);
            s += tau(i, k);
        }
        tau.row(i) /= s;
    }
    return tau;
}

// Iterative grid refinement maximizer for 1-D oracles: evaluates `points`
// per level, zooms to +/- 2 spacings around the argmax. Final resolution
// (hi-lo) * (4/(points-1))^levels.
template <class F>
double grid_maximize(F f, double lo, double hi, int points = 201, int levels = 8) {
    double best_x = lo;
    for (int level = 0; level < levels; ++level) {
        const double step = (hi - lo) / (points - 1);
        double best_v = -std::numeric_limits<double>::infinity();
        best_x = lo;
        for (int i = 0; i < points; ++i) {
            const double x = lo + step * i;
            const double v = f(x);
            if (v > best_v) {
                best_v = v;
                best_x = x;
            }
        }
        const double new_lo = std::max(lo, best_x - 2.0 * step);
        const double new_hi = std::min(hi, best_x + 2.0 * step);
        lo = new_lo;
        hi = new_hi;
    }
    return best_x;
}

// Direct evaluation of the log-likelihood without log-sum-exp shifting.
inline double naive_log_likelihood(const Dataset& data, const MoEParams& params) {
    double total = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        const VectorXd pi = rmoe::gating_probs(data.X.row(i).transpose(), params);
        double density = 0.0;
        for (int k = 0; k < params.n_components(); ++k) {
            const double mean = params.expert_intercepts(k) +
                                params.expert_weights.row(k).dot(data.X.row(i));
            const double sigma = params.sigma(k);
            const double z = (data.y(i) - mean) / sigma;
            density += pi(k) * std::exp(-0.5 * z * z) /
                       (sigma * std::sqrt(2.0 * M_PI));
        }
        total += std::log(density);
    }
    return total;
}

// Bayes-rule responsibilities via direct density ratios.
inline MatrixXd naive_responsibilities(const Dataset& data, const MoEParams& params) {
    MatrixXd tau(data.n(), params.n_components());
    for (int i = 0; i < data.n(); ++i) {
        const VectorXd pi = rmoe::gating_probs(data.X.row(i).transpose(), params);
        double s = 0.0;
        for (int k = 0; k < params.n_components(); ++k) {
            const double mean = params.expert_intercepts(k) +
                                params.expert_weights.row(k).dot(data.X.row(i));
            const double sigma = params.sigma(k);
            const double z = (data.y(i) - mean) / sigma;
            tau(i, k) = pi(k) * std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
            s += tau(i, k);
        }
        tau.row(i) /= s;
    }
    return tau;
}

// Parameters whose entries are multiples of 2^-4 in [-4, 4]: permutation
// alignment arithmetic on them is exact in floating point.
inline MoEParams random_dyadic_params(int K, int p, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> grid(-64, 64);
    MoEParams params = MoEParams::zeros(K, p);
    auto draw = [&]() { return grid(rng) / 16.0; };
    for (int k = 0; k < K - 1; ++k) {
        params.gate_intercepts(k) = draw();
        for (int j = 0; j < p; ++j) params.gate_weights(k, j) = draw();
    }
    for (int k = 0; k < K; ++k) {
        params.expert_intercepts(k) = draw();
        for (int j = 0; j < p; ++j) params.expert_weights(k, j) = draw();
        params.sigmas(k) = 1.0 + std::abs(draw());
    }
    return params;
}

} // namespace testutil
