#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmoe {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Error hierarchy. ContractViolation covers precondition/dimension failures,
// NumericError covers non-finite results and degenerate numerics.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractViolation : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct FitError : Error {
    FitError(const std::string& msg, std::vector<std::string> per_start)
        : Error(msg), start_errors(std::move(per_start)) {}
    std::vector<std::string> start_errors;
};

enum class Solver { MM, CA, PN };
enum class SigmaMode { PerComponent, Shared };
enum class InitStrategy { RandomResponsibilities, KMeansSeeded };

std::string to_string(Solver s);
std::string to_string(SigmaMode m);
Solver solver_from_string(const std::string& s);
SigmaMode sigma_mode_from_string(const std::string& s);

/// Full parameter vector of a K-component mixture-of-experts regression.
/// Component K's gating parameters are fixed at zero for identifiability,
/// so only K-1 gate rows are stored. sigmas has length K (per-component)
/// or length 1 (shared across components).
struct MoEParams {
    VectorXd gate_intercepts;   // K-1
    MatrixXd gate_weights;      // (K-1) x p
    VectorXd expert_intercepts; // K
    MatrixXd expert_weights;    // K x p
    VectorXd sigmas;            // K or 1, strictly positive

    int n_components() const { return static_cast<int>(expert_intercepts.size()); }
    int n_features() const { return static_cast<int>(expert_weights.cols()); }
    bool shared_sigma() const { return sigmas.size() == 1; }
    double sigma(int k) const { return shared_sigma() ? sigmas(0) : sigmas(k); }

    static MoEParams zeros(int K, int p, SigmaMode mode = SigmaMode::PerComponent);

    // Throws ContractViolation on inconsistent shapes, non-finite entries,
    // or non-positive sigmas.
    void validate() const;
};

/// Penalty triple plus component count and M-step solver choice.
/// Scalar lambda/gamma broadcast to every component; the optional
/// per-component vectors override the scalars when non-empty.
struct Hyperparams {
    double lambda = 0.0; // expert Lasso
    double gamma = 0.0;  // gate Lasso
    double rho = 0.0;    // gate ridge
    int K = 1;
    Solver solver = Solver::CA;

    VectorXd lambda_per_component; // empty or length K
    VectorXd gamma_per_component;  // empty or length K-1

    double lambda_k(int k) const {
        return lambda_per_component.size() > 0 ? lambda_per_component(k) : lambda;
    }
    double gamma_k(int k) const {
        return gamma_per_component.size() > 0 ? gamma_per_component(k) : gamma;
    }

    void validate() const;
};

/// Per-column affine transform x' = (x - mean) / sd that was applied to X.
/// Constant columns are stored with (mean, sd) = (0, 1), i.e. untouched.
struct Standardization {
    VectorXd means;
    VectorXd sds;
};

struct Dataset {
    MatrixXd X; // n x p
    VectorXd y; // n
    std::optional<Standardization> standardization;

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }

    void validate() const;
};

/// Posterior membership matrix tau (n x K): rows on the simplex.
struct Responsibilities {
    MatrixXd tau;

    int n() const { return static_cast<int>(tau.rows()); }
    int K() const { return static_cast<int>(tau.cols()); }

    void validate() const;
};

} // namespace rmoe
