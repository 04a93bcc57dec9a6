#pragma once

#include "rmoe/em.hpp"
#include "rmoe/types.hpp"

namespace rmoe {

struct GridSpec {
    std::vector<int> K_set;
    std::vector<double> lambda_grid; // ascending
    std::vector<double> gamma_grid;  // ascending
    double rho = 0.0;

    void validate() const;
};

/// Log-spaced grids from 0.01*max to max with m1 (resp. m2) points, max
/// defaulting to sqrt(n); rho from the 0.1*log(n) rule (natural log).
GridSpec build_grid(int n, int m1, int m2, double max_lambda = -1.0,
                    double max_gamma = -1.0);

/// L(theta_hat) - DF * log(n) / 2, with the unpenalized log-likelihood at
/// the penalized estimate and DF = nonzero penalized coefficients plus
/// intercepts and sigma parameters (always counted nonzero).
double modified_bic(const FitResult& fit, int n);

struct ScoreRow {
    int K = 0;
    double lambda = 0.0, gamma = 0.0, rho = 0.0;
    double loglik = 0.0;
    int df = 0; // full DF as used by the BIC
    double bic = 0.0;
    bool converged = false;
};

struct SelectionResult {
    Hyperparams best;
    FitResult best_fit;
    std::vector<ScoreRow> table;          // successful cells only
    std::vector<std::string> failures;    // messages for excluded cells
};

/// Fits every (K, lambda_i, gamma_j) cell of the grid (cells run on a
/// bounded worker pool; n_workers = 0 means hardware concurrency) and
/// returns the argmax-BIC cell. Ties prefer larger lambda, then larger
/// gamma, then smaller K. Throws Error when every cell fails.
SelectionResult select(const Dataset& data, const GridSpec& grid, Solver solver,
                       const FitOptions& opts, int n_workers = 0);

std::string score_table_csv(const std::vector<ScoreRow>& table);

} // namespace rmoe
