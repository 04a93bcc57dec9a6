#pragma once

#include "rmoe/diagnostics.hpp"
#include "rmoe/types.hpp"

#include <utility>

namespace rmoe {

/// Gradient and Hessian of the exact gating objective restricted to w_kj.
/// The gradient is the one of the active piece, U(w_kj) - gamma*sign(w_kj)
/// (the smooth part U alone when w_kj = 0); the Hessian
/// -sum_i x_ij^2 pi_ik(1-pi_ik) - rho does not depend on the piece.
std::pair<double, double> ca_coord_grad_hess(int k, int j, const VectorXd& gate_intercepts,
                                             const MatrixXd& gate_weights,
                                             const MatrixXd& tau, const Dataset& data,
                                             const Hyperparams& hp);

/// Cyclic coordinate-ascent update of w_kj on the exact objective:
/// safeguarded Newton on each smooth piece warm-started at the current
/// value, compared against the value at zero; exact 0.0 when zero wins.
double ca_update_weight(int k, int j, const VectorXd& gate_intercepts,
                        const MatrixXd& gate_weights, const MatrixXd& tau,
                        const Dataset& data, const Hyperparams& hp,
                        SolverDiag* diag = nullptr);

/// Unpenalized concave univariate Newton update of w_k0.
double ca_update_intercept(int k, const VectorXd& gate_intercepts,
                           const MatrixXd& gate_weights, const MatrixXd& tau,
                           const Dataset& data, SolverDiag* diag = nullptr);

/// `sweeps` cyclic passes over (k = 1..K-1; intercept then j = 1..p), each
/// coordinate updated with the others frozen. q_gating is non-decreasing
/// across the step. Per-row scores are maintained incrementally.
void ca_gating_step(VectorXd& gate_intercepts, MatrixXd& gate_weights,
                    const MatrixXd& tau, const Dataset& data, const Hyperparams& hp,
                    int sweeps, SolverDiag* diag = nullptr);

} // namespace rmoe
