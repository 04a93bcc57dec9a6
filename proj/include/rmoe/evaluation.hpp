#pragma once

#include "rmoe/types.hpp"

#include <optional>

namespace rmoe {

/// Resolves label switching: searches all K! component permutations for the
/// one minimizing the total squared distance between expert coefficient
/// blocks (intercept + weights), then re-normalizes the gate rows by
/// subtracting the new reference component's row so w_K = 0 again.
/// The log-likelihood is invariant under the returned reparameterization.
MoEParams align_components(const MoEParams& est, const MoEParams& ref);

/// S1 = fraction of true zeros estimated exactly 0.0,
/// S2 = fraction of true nonzeros estimated nonzero. Undefined fractions
/// (no true zeros / no true nonzeros in a block) are left empty.
struct BlockSparsity {
    std::optional<double> s1, s2;
};

/// Per penalized block: one entry per expert (weights only, intercepts
/// excluded) and one per gate row.
struct SparsityReport {
    std::vector<BlockSparsity> experts; // K
    std::vector<BlockSparsity> gates;   // K-1
};

SparsityReport sensitivity_specificity(const MoEParams& est, const MoEParams& truth);

/// Fraction of matching labels maximized over all label permutations.
double correct_classification_rate(const std::vector<int>& est_labels,
                                   const std::vector<int>& true_labels);

/// Pair-counting Adjusted Rand Index; computed from integer pair counts
/// with a single final division.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct CoefficientStat {
    std::string block; // "expert", "gate", "sigma"
    int component = 0; // 1-based
    int index = 0;     // 0 = intercept, 1..p = weights (sigma: 0)
    double truth = 0.0, mean = 0.0, sd = 0.0, mse = 0.0;
};

/// Per-coordinate mean, sample sd and mean squared error across replicate
/// fits (already aligned to the truth).
std::vector<CoefficientStat> coefficient_errors(const std::vector<MoEParams>& fits,
                                                const MoEParams& truth);

struct PredictionMetrics {
    std::optional<double> r2; // squared Pearson correlation; empty when degenerate
    double mse = 0.0;
    double mse_sd = 0.0;
};

PredictionMetrics prediction_metrics(const VectorXd& y, const VectorXd& yhat);

} // namespace rmoe
