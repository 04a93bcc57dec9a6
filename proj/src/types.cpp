#include "rmoe/types.hpp"

namespace rmoe {

std::string to_string(Solver s) {
    switch (s) {
    case Solver::MM: return "mm";
    case Solver::CA: return "ca";
    case Solver::PN: return "pn";
    }
    return "?";
}

std::string to_string(SigmaMode m) {
    return m == SigmaMode::Shared ? "shared" : "per-component";
}

Solver solver_from_string(const std::string& s) {
    if (s == "mm" || s == "MM") return Solver::MM;
    if (s == "ca" || s == "CA") return Solver::CA;
    if (s == "pn" || s == "PN") return Solver::PN;
    throw ConfigError("unknown solver '" + s + "' (expected mm, ca or pn)");
}

SigmaMode sigma_mode_from_string(const std::string& s) {
    if (s == "per-component") return SigmaMode::PerComponent;
    if (s == "shared") return SigmaMode::Shared;
    throw ConfigError("unknown sigma mode '" + s + "' (expected per-component or shared)");
}

MoEParams MoEParams::zeros(int K, int p, SigmaMode mode) {
    if (K < 1 || p < 1) throw ContractViolation("MoEParams::zeros: K and p must be >= 1");
    MoEParams out;
    out.gate_intercepts = VectorXd::Zero(K - 1);
    out.gate_weights = MatrixXd::Zero(K - 1, p);
    out.expert_intercepts = VectorXd::Zero(K);
    out.expert_weights = MatrixXd::Zero(K, p);
    out.sigmas = VectorXd::Ones(mode == SigmaMode::Shared ? 1 : K);
    return out;
}

void MoEParams::validate() const {
    const int K = n_components();
    const int p = n_features();
    if (K < 1 || p < 1) throw ContractViolation("MoEParams: K and p must be >= 1");
    if (gate_intercepts.size() != K - 1 || gate_weights.rows() != K - 1 ||
        gate_weights.cols() != p || expert_weights.rows() != K)
        throw ContractViolation("MoEParams: inconsistent shapes");
    if (sigmas.size() != K && sigmas.size() != 1)
        throw ContractViolation("MoEParams: sigmas must have length K or 1");
    auto all_finite = [](const auto& m) { return m.allFinite(); };
    if (!all_finite(gate_intercepts) || !all_finite(gate_weights) ||
        !all_finite(expert_intercepts) || !all_finite(expert_weights) || !all_finite(sigmas))
        throw ContractViolation("MoEParams: non-finite entry");
    if ((sigmas.array() <= 0.0).any())
        throw ContractViolation("MoEParams: sigmas must be strictly positive");
}

void Hyperparams::validate() const {
    if (lambda < 0 || gamma < 0 || rho < 0)
        throw ContractViolation("Hyperparams: lambda, gamma, rho must be >= 0");
    if (K < 1) throw ContractViolation("Hyperparams: K must be >= 1");
    if (lambda_per_component.size() > 0) {
        if (lambda_per_component.size() != K)
            throw ContractViolation("Hyperparams: lambda_per_component must have length K");
        if ((lambda_per_component.array() < 0.0).any())
            throw ContractViolation("Hyperparams: negative per-component lambda");
    }
    if (gamma_per_component.size() > 0) {
        if (gamma_per_component.size() != K - 1)
            throw ContractViolation("Hyperparams: gamma_per_component must have length K-1");
        if ((gamma_per_component.array() < 0.0).any())
            throw ContractViolation("Hyperparams: negative per-component gamma");
    }
}

void Dataset::validate() const {
    if (n() < 1 || p() < 1) throw ContractViolation("Dataset: need n >= 1, p >= 1");
    if (y.size() != n()) throw ContractViolation("Dataset: X and y row counts differ");
    if (!X.allFinite() || !y.allFinite())
        throw ContractViolation("Dataset: non-finite entry");
    if (standardization) {
        if (standardization->means.size() != p() || standardization->sds.size() != p())
            throw ContractViolation("Dataset: standardization metadata has wrong length");
        for (int j = 0; j < p(); ++j) {
            // identity entries mark columns that were left unscaled
            if (standardization->means(j) == 0.0 && standardization->sds(j) == 1.0) continue;
            const double mean = X.col(j).mean();
            const double var =
                (X.col(j).array() - mean).square().sum() / std::max(1, n() - 1);
            if (std::abs(mean) > 1e-8 || std::abs(var - 1.0) > 1e-8)
                throw ContractViolation("Dataset: column " + std::to_string(j + 1) +
                                        " marked standardized but is not");
        }
    }
}

void Responsibilities::validate() const {
    if (n() < 1 || K() < 1) throw ContractViolation("Responsibilities: empty");
    for (int i = 0; i < n(); ++i) {
        double s = 0.0;
        for (int k = 0; k < K(); ++k) {
            const double t = tau(i, k);
            if (!(t >= 0.0 && t <= 1.0))
                throw ContractViolation("Responsibilities: entry outside [0,1] at row " +
                                        std::to_string(i + 1));
            s += t;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw ContractViolation("Responsibilities: row " + std::to_string(i + 1) +
                                    " does not sum to 1");
    }
}

} // namespace rmoe
