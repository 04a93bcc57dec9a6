#pragma once

#include "rmoe/diagnostics.hpp"
#include "rmoe/types.hpp"

namespace rmoe {

/// Per-class diagonal quadratic model of the smooth part of the gating
/// objective at an expansion point: working weights omega_ik =
/// pi_ik(1 - pi_ik) (floored at 1e-5) and working responses
/// z_ik = eta_ik + (tau_ik - pi_ik) / omega_ik. The model's value and
/// gradient match the smooth part exactly at the expansion point.
struct PnQuadratic {
    MatrixXd omega; // n x (K-1)
    MatrixXd z;     // n x (K-1)
    MatrixXd eta0;  // n x (K-1), linear scores at the expansion point
    double smooth_at_expansion = 0.0;
    int floor_events = 0;
};

PnQuadratic pn_quadratic_approx(const VectorXd& gate_intercepts,
                                const MatrixXd& gate_weights, const MatrixXd& tau,
                                const Dataset& data);

/// Quadratic-model value at arbitrary gate parameters (smooth part only,
/// no penalties): smooth(W0) - 1/2 sum omega [(z-eta)^2 - (z-eta0)^2].
double pn_model_value(const PnQuadratic& quad, const VectorXd& gate_intercepts,
                      const MatrixXd& gate_weights, const Dataset& data);

/// Closed-form elastic-net coordinate update on the quadratic model:
/// w_kj <- S_gamma(sum_i omega x_ij r_ikj) / (sum_i omega x_ij^2 + rho),
/// with r the partial working residual excluding coordinate j. j = 0
/// addresses the intercept (gamma- and rho-free). Zero denominator skips
/// the coordinate.
double pn_coordinate_update(int k, int j, const PnQuadratic& quad,
                            const VectorXd& gate_intercepts, const MatrixXd& gate_weights,
                            const Dataset& data, const Hyperparams& hp,
                            SolverDiag* diag = nullptr);

/// Proximal-Newton outer loop: rebuild the quadratic at the current point,
/// run `sweeps` coordinate passes on it, then accept the candidate only if
/// q_gating did not decrease, halving the step toward the current point
/// otherwise (at most 30 times; counted failure when exhausted).
void pn_gating_step(VectorXd& gate_intercepts, MatrixXd& gate_weights,
                    const MatrixXd& tau, const Dataset& data, const Hyperparams& hp,
                    int outer_iters, int sweeps, SolverDiag* diag = nullptr);

} // namespace rmoe
