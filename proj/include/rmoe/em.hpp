#pragma once

#include "rmoe/diagnostics.hpp"
#include "rmoe/types.hpp"

#include <random>

namespace rmoe {

struct FitOptions {
    int max_em_iters = 1000;
    double rel_tol = 1e-6;  // on |delta PL| / (1 + |PL|), after a full EM iteration
    int inner_iters = 10;   // sweep cap per M-step sub-solver
    int n_starts = 5;
    InitStrategy init_strategy = InitStrategy::RandomResponsibilities;
    std::uint64_t rng_seed = 0;
    SigmaMode sigma_mode = SigmaMode::PerComponent;

    void validate() const;
};

struct FitDiagnostics {
    SolverDiag solver;
    int start_chosen = -1;
    std::vector<std::vector<double>> start_traces; // PL trace per start
    std::vector<double> start_objectives;          // final PL per start (NaN = failed)
    std::vector<std::string> start_errors;
};

struct FitResult {
    MoEParams params;
    std::vector<double> objective_trace; // penalized log-likelihood per EM iteration
    double final_penalized_loglik = 0.0;
    double final_loglik = 0.0; // unpenalized, at the returned params
    int n_iters = 0;
    bool converged = false;
    int df = 0; // exact-nonzero count over penalized blocks (gate + expert weights)
    Responsibilities responsibilities;
    FitDiagnostics diagnostics;
};

/// Expected complete-data gating objective (the oracle all three gating
/// solvers must not decrease):
/// sum_i sum_{k<K} tau_ik eta_ik - sum_i log(1 + sum_{k<K} e^{eta_ik})
///   - sum_k gamma_k |w_k|_1 - (rho/2) sum_k |w_k|_2^2.
double q_gating(const VectorXd& gate_intercepts, const MatrixXd& gate_weights,
                const MatrixXd& tau, const Dataset& data, const Hyperparams& hp);

/// Expected complete-data expert objective:
/// sum_ik tau_ik log N(y_i; beta_k0 + x_i.beta_k, sigma_k^2) - sum_k lambda_k |beta_k|_1.
double q_experts(const MatrixXd& expert_weights, const VectorXd& expert_intercepts,
                 const VectorXd& sigmas, const MatrixXd& tau, const Dataset& data,
                 const Hyperparams& hp);

/// Number of exactly nonzero entries in the penalized blocks
/// (gate weights and expert weights).
int count_nonzero_penalized(const MoEParams& params);

/// Start-point construction. Gates always start from zero; the expert block
/// is seeded from a random row-stochastic tau (one unpenalized M-step) or
/// from per-cluster regressions on a joint k-means partition of (x, y).
MoEParams initialize(const Dataset& data, int K, InitStrategy strategy,
                     std::mt19937_64& rng, const Hyperparams& hp,
                     SigmaMode sigma_mode, double sigma_floor,
                     SolverDiag* diag = nullptr);

/// Block-wise EM: E-step, gating M-step (per hp.solver), expert coefficient
/// sweeps, a second E-step, then the sigma update. Runs opts.n_starts
/// independent starts and returns the one with the highest final penalized
/// objective. Throws FitError when every start fails.
FitResult fit(const Dataset& data, const Hyperparams& hp, const FitOptions& opts = {});

/// sigma floor used by fit: 1e-6 * sd(y).
double sigma_floor_for(const Dataset& data);

} // namespace rmoe
