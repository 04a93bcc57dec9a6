#include "rmoe/gating_ca.hpp"

#include "piecewise.hpp"

#include <cmath>

namespace rmoe {

namespace {

void check_inputs(int k, int j, const VectorXd& w0, const MatrixXd& W,
                  const MatrixXd& tau, const Dataset& data, bool intercept_ok) {
    const int Km1 = static_cast<int>(W.rows());
    if (w0.size() != Km1 || W.cols() != data.p())
        throw ContractViolation("gating-ca: gate parameter shapes inconsistent");
    if (tau.rows() != data.n() || tau.cols() != Km1 + 1)
        throw ContractViolation("gating-ca: tau shape mismatch");
    if (k < 1 || k > Km1) throw ContractViolation("gating-ca: component index out of range");
    const int jmin = intercept_ok ? 0 : 1;
    if (j < jmin || j > data.p())
        throw ContractViolation("gating-ca: coordinate index out of range");
}

MatrixXd build_eta(const VectorXd& w0, const MatrixXd& W, const MatrixXd& X) {
    return ((X * W.transpose()).rowwise() + w0.transpose());
}

// log(1 + sum_l exp(eta_l + [l==k] shift)), numerically shifted
double row_log_denom(const Eigen::Ref<const Eigen::RowVectorXd>& eta, int k, double shift) {
    double m = 0.0;
    for (Eigen::Index l = 0; l < eta.size(); ++l) {
        const double v = eta(l) + (l == k ? shift : 0.0);
        if (v > m) m = v;
    }
    double s = std::exp(-m);
    for (Eigen::Index l = 0; l < eta.size(); ++l)
        s += std::exp(eta(l) + (l == k ? shift : 0.0) - m);
    return m + std::log(s);
}

double row_pi(const Eigen::Ref<const Eigen::RowVectorXd>& eta, int k, double shift) {
    return std::exp(eta(k) + shift - row_log_denom(eta, k, shift));
}

// Coordinate update on the exact objective; eta holds the current scores
// and is NOT modified. j == 0 addresses the intercept. Returns the new
// coordinate value.
double update_coord(int k0, int j0, const MatrixXd& eta, double wcur,
                    const MatrixXd& tau, const Dataset& data, const Hyperparams& hp,
                    SolverDiag* diag) {
    const int n = data.n();
    const bool intercept = (j0 < 0);
    const double rho = intercept ? 0.0 : hp.rho;
    const double gamma = intercept ? 0.0 : hp.gamma_k(k0);

    double t_lin = 0.0; // sum_i tau_ik x_ij
    if (intercept) {
        t_lin = tau.col(k0).sum();
    } else {
        t_lin = tau.col(k0).dot(data.X.col(j0));
    }
    auto xval = [&](int i) { return intercept ? 1.0 : data.X(i, j0); };

    auto f = [&](double w) {
        const double d = w - wcur;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += row_log_denom(eta.row(i), k0, d * xval(i));
        return t_lin * w - s - 0.5 * rho * w * w;
    };
    auto g = [&](double w) {
        const double d = w - wcur;
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += xval(i) * row_pi(eta.row(i), k0, d * xval(i));
        return t_lin - s - rho * w;
    };
    auto h = [&](double w) {
        const double d = w - wcur;
        double s = 0.0;
        for (int i = 0; i < n; ++i) {
            const double pi = row_pi(eta.row(i), k0, d * xval(i));
            s += xval(i) * xval(i) * pi * (1.0 - pi);
        }
        return -s - rho;
    };

    int failures = 0;
    const double next = detail::maximize_l1_piecewise(f, g, h, gamma, wcur, failures);
    if (diag) diag->nr_failures += failures;
    return next;
}

} // namespace

std::pair<double, double> ca_coord_grad_hess(int k, int j, const VectorXd& gate_intercepts,
                                             const MatrixXd& gate_weights,
                                             const MatrixXd& tau, const Dataset& data,
                                             const Hyperparams& hp) {
    check_inputs(k, j, gate_intercepts, gate_weights, tau, data, false);
    const int k0 = k - 1, j0 = j - 1;
    const MatrixXd eta = build_eta(gate_intercepts, gate_weights, data.X);
    const double w = gate_weights(k0, j0);

    double grad_lin = tau.col(k0).dot(data.X.col(j0));
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        const double pi = row_pi(eta.row(i), k0, 0.0);
        const double x = data.X(i, j0);
        s += x * pi;
        s2 += x * x * pi * (1.0 - pi);
    }
    const double u = grad_lin - s - hp.rho * w;
    const double gamma = hp.gamma_k(k0);
    const double sign = (w > 0.0) ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
    return {u - gamma * sign, -s2 - hp.rho};
}

double ca_update_weight(int k, int j, const VectorXd& gate_intercepts,
                        const MatrixXd& gate_weights, const MatrixXd& tau,
                        const Dataset& data, const Hyperparams& hp, SolverDiag* diag) {
    check_inputs(k, j, gate_intercepts, gate_weights, tau, data, false);
    const MatrixXd eta = build_eta(gate_intercepts, gate_weights, data.X);
    return update_coord(k - 1, j - 1, eta, gate_weights(k - 1, j - 1), tau, data, hp, diag);
}

double ca_update_intercept(int k, const VectorXd& gate_intercepts,
                           const MatrixXd& gate_weights, const MatrixXd& tau,
                           const Dataset& data, SolverDiag* diag) {
    check_inputs(k, 0, gate_intercepts, gate_weights, tau, data, true);
    const MatrixXd eta = build_eta(gate_intercepts, gate_weights, data.X);
    Hyperparams hp;
    hp.K = static_cast<int>(gate_intercepts.size()) + 1;
    return update_coord(k - 1, -1, eta, gate_intercepts(k - 1), tau, data, hp, diag);
}

void ca_gating_step(VectorXd& gate_intercepts, MatrixXd& gate_weights,
                    const MatrixXd& tau, const Dataset& data, const Hyperparams& hp,
                    int sweeps, SolverDiag* diag) {
    const int Km1 = static_cast<int>(gate_weights.rows());
    if (Km1 == 0 || sweeps <= 0) return;
    check_inputs(1, 0, gate_intercepts, gate_weights, tau, data, true);

    MatrixXd eta = build_eta(gate_intercepts, gate_weights, data.X);
    for (int s = 0; s < sweeps; ++s) {
        for (int k = 0; k < Km1; ++k) {
            {
                const double cur = gate_intercepts(k);
                const double next = update_coord(k, -1, eta, cur, tau, data, hp, diag);
                if (next != cur) {
                    eta.col(k).array() += next - cur;
                    gate_intercepts(k) = next;
                }
            }
            for (int j = 0; j < data.p(); ++j) {
                const double cur = gate_weights(k, j);
                const double next = update_coord(k, j, eta, cur, tau, data, hp, diag);
                if (next != cur) {
                    eta.col(k) += (next - cur) * data.X.col(j);
                    gate_weights(k, j) = next;
                }
            }
        }
    }
}

} // namespace rmoe
