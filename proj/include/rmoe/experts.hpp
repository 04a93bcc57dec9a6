#pragma once

#include "rmoe/types.hpp"

namespace rmoe {

struct SolverDiag;

/// sign(u) * max(|u| - t, 0); exact 0.0 inside the dead zone.
double soft_threshold(double u, double t);

/// Closed-form weighted-Lasso coordinate update for beta_{kj} at threshold
/// lambda_k * sigma_k^2 (sigma frozen at its current value). Other
/// coordinates stay fixed; returns the new value, exact 0.0 when shrunk.
double update_beta_coord(int k, int j, const MoEParams& params,
                         const Responsibilities& tau, const Dataset& data,
                         const Hyperparams& hp);

/// Weighted residual mean: sum_i tau_ik (y_i - beta_k.x_i) / sum_i tau_ik.
double update_beta_intercept(int k, const MoEParams& params,
                             const Responsibilities& tau, const Dataset& data);

/// Weighted mean squared residual, per component or pooled over all
/// components (shared mode); the result is floored at sigma_floor.
/// Returns sigma (not squared).
double update_sigma(int k, const MoEParams& params, const Responsibilities& tau,
                    const Dataset& data, SigmaMode mode, double sigma_floor = 0.0);

/// One expert M-step: `sweeps` cyclic coordinate passes over every
/// component's weights followed by its intercept, sigma held fixed.
void expert_step(MoEParams& params, const Responsibilities& tau, const Dataset& data,
                 const Hyperparams& hp, int sweeps, SolverDiag* diag = nullptr);

/// Sigma update for every component (or the pooled shared update).
void sigma_step(MoEParams& params, const Responsibilities& tau, const Dataset& data,
                SigmaMode mode, double sigma_floor, SolverDiag* diag = nullptr);

} // namespace rmoe
