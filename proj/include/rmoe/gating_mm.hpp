#pragma once

#include "rmoe/diagnostics.hpp"
#include "rmoe/types.hpp"

namespace rmoe {

/// Frozen expansion state of one MM sweep: the gate parameters w^[s] plus
/// the per-row caches log C_i = log(1 + sum_k e^{score_ik}) and
/// pi_k(x_i; w^[s]) the surrogate is built from.
struct MMState {
    VectorXd gate_intercepts; // K-1
    MatrixXd gate_weights;    // (K-1) x p
    VectorXd log_denom;       // n, log C_i^m >= 0
    MatrixXd pi;              // n x (K-1)
};

MMState mm_build_state(const VectorXd& gate_intercepts, const MatrixXd& gate_weights,
                       const MatrixXd& X);

/// Separable minorizer G(w | w^[s]) of the gating objective, including the
/// arithmetic-geometric-mean exponential terms (x_{i0} = 1 convention) and
/// the gate penalties. Touches q_gating at w = w^[s] and lies below it
/// elsewhere. Exponents are clamped at +/-700 (counted in diag); a clamped
/// evaluation voids the domination bound locally.
double mm_minorizer_value(const VectorXd& gate_intercepts, const MatrixXd& gate_weights,
                          const MMState& state, const MatrixXd& tau,
                          const Dataset& data, const Hyperparams& hp,
                          SolverDiag* diag = nullptr);

/// Closed-form intercept move w_k0^[s] + log(sum_i tau_ik / sum_i pi_ik)/(p+1).
/// Zero responsibility or gate mass: returns the current value (skip, counted).
double mm_update_intercept(int k, const MMState& state, const MatrixXd& tau,
                           SolverDiag* diag = nullptr);

/// Maximizes the univariate surrogate piece for w_kj: safeguarded Newton on
/// each smooth concave half (gradient U -/+ gamma), values compared against
/// the piece value at zero; returns exact 0.0 when zero wins and discards
/// maximizers that violate their sign constraint.
double mm_update_weight(int k, int j, const MMState& state, const MatrixXd& tau,
                        const Dataset& data, const Hyperparams& hp,
                        SolverDiag* diag = nullptr);

/// One MM gating step: `sweeps` rounds of {rebuild state, update all
/// intercepts, update all weights in (k, j) order}. q_gating never
/// decreases across the step (sandwich inequality).
void mm_gating_step(VectorXd& gate_intercepts, MatrixXd& gate_weights,
                    const MatrixXd& tau, const Dataset& data, const Hyperparams& hp,
                    int sweeps, SolverDiag* diag = nullptr);

} // namespace rmoe
