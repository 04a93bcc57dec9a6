#include "rmoe/model.hpp"

#include <cmath>

namespace rmoe {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// log(exp(a_1)+...+exp(a_m)) with an implicit extra zero score when
// include_zero is set (the fixed reference component).
double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& a, bool include_zero) {
    double m = include_zero ? 0.0 : -std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < a.size(); ++l) m = std::max(m, a(l));
    if (!std::isfinite(m)) return m; // all -inf
    double s = include_zero ? std::exp(-m) : 0.0;
    for (Eigen::Index l = 0; l < a.size(); ++l) s += std::exp(a(l) - m);
    return m + std::log(s);
}

void check_x_dim(const VectorXd& x, const MoEParams& params, const char* op) {
    if (x.size() != params.n_features())
        throw ContractViolation(std::string(op) + ": x has length " +
                                std::to_string(x.size()) + ", expected " +
                                std::to_string(params.n_features()));
}

double log_normal(double y, double mean, double sigma) {
    const double z = (y - mean) / sigma;
    return -0.5 * kLog2Pi - std::log(sigma) - 0.5 * z * z;
}

// Per-row component log-joints log pi_k + log N_k, written into u (length K).
void row_log_joint(const Dataset& data, const MoEParams& params, int i,
                   Eigen::RowVectorXd& scores, Eigen::RowVectorXd& u) {
    const int K = params.n_components();
    scores = (params.gate_weights * data.X.row(i).transpose()).transpose() +
             params.gate_intercepts.transpose();
    const double denom = log_sum_exp(scores, /*include_zero=*/true);
    for (int k = 0; k < K; ++k) {
        const double log_pi = (k < K - 1 ? scores(k) : 0.0) - denom;
        const double mean = params.expert_intercepts(k) +
                            params.expert_weights.row(k).dot(data.X.row(i));
        u(k) = log_pi + log_normal(data.y(i), mean, params.sigma(k));
    }
}

} // namespace

VectorXd gating_probs(const VectorXd& x, const MoEParams& params) {
    check_x_dim(x, params, "gating_probs");
    const int K = params.n_components();
    Eigen::RowVectorXd scores =
        (params.gate_weights * x).transpose() + params.gate_intercepts.transpose();
    const double denom = log_sum_exp(scores, true);
    VectorXd pi(K);
    for (int k = 0; k < K - 1; ++k) pi(k) = std::exp(scores(k) - denom);
    pi(K - 1) = std::exp(-denom);
    pi /= pi.sum();
    return pi;
}

double expert_log_density(double y, const VectorXd& x, int k, const MoEParams& params) {
    check_x_dim(x, params, "expert_log_density");
    if (k < 1 || k > params.n_components())
        throw ContractViolation("expert_log_density: component index out of range");
    const double sigma = params.sigma(k - 1);
    if (!(sigma > 0)) throw ContractViolation("expert_log_density: sigma must be positive");
    const double mean = params.expert_intercepts(k - 1) + params.expert_weights.row(k - 1).dot(x);
    const double v = log_normal(y, mean, sigma);
    if (!std::isfinite(v))
        throw NumericError("expert_log_density: non-finite result for component " +
                           std::to_string(k));
    return v;
}

double log_likelihood(const Dataset& data, const MoEParams& params) {
    if (data.p() != params.n_features())
        throw ContractViolation("log_likelihood: feature count mismatch");
    const int K = params.n_components();
    Eigen::RowVectorXd scores(K - 1), u(K);
    double total = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        row_log_joint(data, params, i, scores, u);
        const double row = log_sum_exp(u, false);
        if (!std::isfinite(row))
            throw NumericError("log_likelihood: non-finite contribution at row " +
                               std::to_string(i + 1));
        total += row;
    }
    return total;
}

double penalized_log_likelihood(const Dataset& data, const MoEParams& params,
                                const Hyperparams& hp) {
    const int K = params.n_components();
    double penalty = 0.0;
    for (int k = 0; k < K; ++k)
        penalty += hp.lambda_k(k) * params.expert_weights.row(k).cwiseAbs().sum();
    for (int k = 0; k < K - 1; ++k)
        penalty += hp.gamma_k(k) * params.gate_weights.row(k).cwiseAbs().sum() +
                   0.5 * hp.rho * params.gate_weights.row(k).squaredNorm();
    return log_likelihood(data, params) - penalty;
}

Responsibilities responsibilities(const Dataset& data, const MoEParams& params) {
    if (data.p() != params.n_features())
        throw ContractViolation("responsibilities: feature count mismatch");
    const int K = params.n_components();
    Responsibilities out;
    out.tau.resize(data.n(), K);
    Eigen::RowVectorXd scores(K - 1), u(K);
    for (int i = 0; i < data.n(); ++i) {
        row_log_joint(data, params, i, scores, u);
        const double denom = log_sum_exp(u, false);
        if (!std::isfinite(denom))
            throw NumericError("responsibilities: all component densities vanish at row " +
                               std::to_string(i + 1));
        double s = 0.0;
        for (int k = 0; k < K; ++k) {
            out.tau(i, k) = std::exp(u(k) - denom);
            s += out.tau(i, k);
        }
        out.tau.row(i) /= s;
    }
    return out;
}

double predict(const VectorXd& x, const MoEParams& params) {
    const VectorXd pi = gating_probs(x, params);
    double v = 0.0;
    for (int k = 0; k < params.n_components(); ++k)
        v += pi(k) * (params.expert_intercepts(k) + params.expert_weights.row(k).dot(x));
    return v;
}

VectorXd predict_all(const MatrixXd& X, const MoEParams& params) {
    VectorXd out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) out(i) = predict(X.row(i).transpose(), params);
    return out;
}

std::vector<int> hard_assign(const Responsibilities& tau) {
    std::vector<int> labels(tau.n());
    for (int i = 0; i < tau.n(); ++i) {
        int best = 0;
        for (int k = 1; k < tau.K(); ++k)
            if (tau.tau(i, k) > tau.tau(i, best)) best = k; // ties keep the smaller index
        labels[i] = best + 1;
    }
    return labels;
}

} // namespace rmoe
