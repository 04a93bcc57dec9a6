#pragma once

#include "rmoe/types.hpp"

namespace rmoe {

/// Softmax gate probabilities pi_k(x; w), k = 1..K, with the K-th linear
/// score fixed at zero. Computed with a max shift; entries are positive
/// and sum to one.
VectorXd gating_probs(const VectorXd& x, const MoEParams& params);

/// log N(y; beta_k0 + x.beta_k, sigma_k^2) for component k (1-based).
double expert_log_density(double y, const VectorXd& x, int k, const MoEParams& params);

/// Observed-data log-likelihood, evaluated with a per-row log-sum-exp.
double log_likelihood(const Dataset& data, const MoEParams& params);

/// log-likelihood minus lambda*sum_k |beta_k|_1, gamma*sum_{k<K} |w_k|_1
/// and (rho/2)*sum_{k<K} |w_k|_2^2. Intercepts and sigma are unpenalized.
double penalized_log_likelihood(const Dataset& data, const MoEParams& params,
                                const Hyperparams& hp);

/// E-step posteriors tau_{ik}, computed in log space and row-normalized.
Responsibilities responsibilities(const Dataset& data, const MoEParams& params);

/// Conditional mean prediction sum_k pi_k(x)(beta_k0 + x.beta_k).
double predict(const VectorXd& x, const MoEParams& params);

/// Row-wise predictions for a whole design matrix.
VectorXd predict_all(const MatrixXd& X, const MoEParams& params);

/// Bayes allocation rule: argmax_k tau_{ik}, 1-based labels,
/// ties broken toward the smallest component index.
std::vector<int> hard_assign(const Responsibilities& tau);

} // namespace rmoe
