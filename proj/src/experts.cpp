#include "rmoe/experts.hpp"

#include "rmoe/diagnostics.hpp"

#include <cmath>

namespace rmoe {

namespace {

constexpr double kEmptyMassFactor = 1e-8; // threshold is K * this

void check_shapes(const MoEParams& params, const Responsibilities& tau,
                  const Dataset& data, const char* op) {
    if (tau.n() != data.n() || tau.K() != params.n_components() ||
        data.p() != params.n_features())
        throw ContractViolation(std::string(op) + ": shape mismatch");
}

} // namespace

double soft_threshold(double u, double t) {
    if (t < 0.0) throw ContractViolation("soft_threshold: negative threshold");
    const double a = std::abs(u) - t;
    if (a <= 0.0) return 0.0;
    return u > 0.0 ? a : -a;
}

double update_beta_coord(int k, int j, const MoEParams& params,
                         const Responsibilities& tau, const Dataset& data,
                         const Hyperparams& hp) {
    check_shapes(params, tau, data, "update_beta_coord");
    const auto wts = tau.tau.col(k - 1);
    const auto xj = data.X.col(j - 1);
    const double denom = wts.dot(xj.cwiseProduct(xj));
    const double cur = params.expert_weights(k - 1, j - 1);
    if (!(denom > 0.0)) return cur; // skipped

    // partial residual r_ikj = y - beta_k0 - x.beta_k + beta_kj x_ij
    const VectorXd resid = data.y.array() - params.expert_intercepts(k - 1) -
                           (data.X * params.expert_weights.row(k - 1).transpose()).array() +
                           cur * xj.array();
    const double num = wts.dot(resid.cwiseProduct(xj));
    const double sigma = params.sigma(k - 1);
    return soft_threshold(num, hp.lambda_k(k - 1) * sigma * sigma) / denom;
}

double update_beta_intercept(int k, const MoEParams& params,
                             const Responsibilities& tau, const Dataset& data) {
    check_shapes(params, tau, data, "update_beta_intercept");
    const auto wts = tau.tau.col(k - 1);
    const double mass = wts.sum();
    if (!(mass > 0.0)) return params.expert_intercepts(k - 1); // skipped
    const VectorXd fitted = data.X * params.expert_weights.row(k - 1).transpose();
    return wts.dot(data.y - fitted) / mass;
}

double update_sigma(int k, const MoEParams& params, const Responsibilities& tau,
                    const Dataset& data, SigmaMode mode, double sigma_floor) {
    check_shapes(params, tau, data, "update_sigma");
    const int K = params.n_components();
    double num = 0.0, mass = 0.0;
    const int first = (mode == SigmaMode::Shared) ? 0 : k - 1;
    const int last = (mode == SigmaMode::Shared) ? K - 1 : k - 1;
    for (int c = first; c <= last; ++c) {
        const VectorXd resid = data.y.array() - params.expert_intercepts(c) -
                               (data.X * params.expert_weights.row(c).transpose()).array();
        num += tau.tau.col(c).dot(resid.cwiseProduct(resid));
        mass += tau.tau.col(c).sum();
    }
    if (!(mass > 0.0)) return params.sigma(k - 1); // keep previous, caller flags
    const double var = std::max(num / mass, sigma_floor * sigma_floor);
    return std::sqrt(var);
}

void expert_step(MoEParams& params, const Responsibilities& tau, const Dataset& data,
                 const Hyperparams& hp, int sweeps, SolverDiag* diag) {
    check_shapes(params, tau, data, "expert_step");
    const int K = params.n_components();
    const int p = params.n_features();
    for (int k = 0; k < K; ++k) {
        const auto wts = tau.tau.col(k);
        VectorXd xw2(p);
        for (int j = 0; j < p; ++j) xw2(j) = wts.dot(data.X.col(j).cwiseAbs2());
        const double mass = wts.sum();
        const double sigma = params.sigma(k);
        const double thr = hp.lambda_k(k) * sigma * sigma;

        VectorXd resid = data.y.array() - params.expert_intercepts(k) -
                         (data.X * params.expert_weights.row(k).transpose()).array();
        for (int s = 0; s < sweeps; ++s) {
            for (int j = 0; j < p; ++j) {
                if (!(xw2(j) > 0.0)) {
                    if (diag) ++diag->skipped_coordinates;
                    continue;
                }
                const double cur = params.expert_weights(k, j);
                const double num =
                    wts.dot(resid.cwiseProduct(data.X.col(j))) + cur * xw2(j);
                const double next = soft_threshold(num, thr) / xw2(j);
                if (next != cur) {
                    resid -= (next - cur) * data.X.col(j);
                    params.expert_weights(k, j) = next;
                }
            }
            if (mass > 0.0) {
                const double shift = wts.dot(resid) / mass;
                if (shift != 0.0) {
                    params.expert_intercepts(k) += shift;
                    resid.array() -= shift;
                }
            } else if (diag) {
                ++diag->skipped_coordinates;
            }
        }
    }
}

void sigma_step(MoEParams& params, const Responsibilities& tau, const Dataset& data,
                SigmaMode mode, double sigma_floor, SolverDiag* diag) {
    const int K = params.n_components();
    if (mode == SigmaMode::Shared) {
        const double s = update_sigma(1, params, tau, data, mode, sigma_floor);
        if (diag && s == sigma_floor) ++diag->sigma_floor_hits;
        params.sigmas.setConstant(1, s);
        return;
    }
    if (params.sigmas.size() != K) {
        // switching from a shared parameterization: expand first
        params.sigmas = VectorXd::Constant(K, params.sigmas(0));
    }
    const double empty_mass = K * kEmptyMassFactor;
    for (int k = 0; k < K; ++k) {
        if (tau.tau.col(k).sum() < empty_mass) {
            if (diag) ++diag->empty_components;
            continue; // keep previous sigma
        }
        const double s = update_sigma(k + 1, params, tau, data, mode, sigma_floor);
        if (diag && s == sigma_floor) ++diag->sigma_floor_hits;
        params.sigmas(k) = s;
    }
}

} // namespace rmoe
