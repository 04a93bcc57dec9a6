#include "rmoe/gating_pn.hpp"

#include "rmoe/em.hpp"
#include "rmoe/experts.hpp"

#include <cmath>

namespace rmoe {

namespace {

constexpr double kOmegaFloor = 1e-5;

void check_inputs(const VectorXd& w0, const MatrixXd& W, const MatrixXd& tau,
                  const Dataset& data) {
    const int Km1 = static_cast<int>(W.rows());
    if (w0.size() != Km1 || W.cols() != data.p())
        throw ContractViolation("gating-pn: gate parameter shapes inconsistent");
    if (tau.rows() != data.n() || tau.cols() != Km1 + 1)
        throw ContractViolation("gating-pn: tau shape mismatch");
}

// One coordinate move on the quadratic model given cached class scores.
// j0 == -1 addresses the intercept.
double quad_coord(int k0, int j0, const PnQuadratic& quad, const MatrixXd& eta,
                  double wcur, const Dataset& data, const Hyperparams& hp,
                  SolverDiag* diag) {
    const auto om = quad.omega.col(k0);
    const auto zk = quad.z.col(k0);
    double num, den;
    if (j0 < 0) {
        num = om.dot(zk - eta.col(k0)) + wcur * om.sum();
        den = om.sum();
    } else {
        const auto xj = data.X.col(j0);
        const double wx2 = om.dot(xj.cwiseAbs2());
        num = om.dot(xj.cwiseProduct(zk - eta.col(k0))) + wcur * wx2;
        den = wx2 + hp.rho;
    }
    if (!(den > 0.0)) {
        if (diag) ++diag->skipped_coordinates;
        return wcur;
    }
    if (j0 < 0) return num / den;
    return soft_threshold(num, hp.gamma_k(k0)) / den;
}

} // namespace

PnQuadratic pn_quadratic_approx(const VectorXd& gate_intercepts,
                                const MatrixXd& gate_weights, const MatrixXd& tau,
                                const Dataset& data) {
    check_inputs(gate_intercepts, gate_weights, tau, data);
    const int Km1 = static_cast<int>(gate_weights.rows());
    const int n = data.n();
    PnQuadratic quad;
    quad.eta0 = (data.X * gate_weights.transpose()).rowwise() + gate_intercepts.transpose();
    quad.omega.resize(n, Km1);
    quad.z.resize(n, Km1);
    double smooth = 0.0;
    for (int i = 0; i < n; ++i) {
        double m = 0.0;
        for (int k = 0; k < Km1; ++k) m = std::max(m, quad.eta0(i, k));
        double s = std::exp(-m);
        for (int k = 0; k < Km1; ++k) s += std::exp(quad.eta0(i, k) - m);
        const double logden = m + std::log(s);
        smooth -= logden;
        for (int k = 0; k < Km1; ++k) {
            const double pi = std::exp(quad.eta0(i, k) - logden);
            double om = pi * (1.0 - pi);
            if (om < kOmegaFloor) {
                om = kOmegaFloor;
                ++quad.floor_events;
            }
            quad.omega(i, k) = om;
            quad.z(i, k) = quad.eta0(i, k) + (tau(i, k) - pi) / om;
            smooth += tau(i, k) * quad.eta0(i, k);
        }
    }
    quad.smooth_at_expansion = smooth;
    return quad;
}

double pn_model_value(const PnQuadratic& quad, const VectorXd& gate_intercepts,
                      const MatrixXd& gate_weights, const Dataset& data) {
    const MatrixXd eta =
        (data.X * gate_weights.transpose()).rowwise() + gate_intercepts.transpose();
    const auto dev = (quad.z - eta).array().square() - (quad.z - quad.eta0).array().square();
    return quad.smooth_at_expansion - 0.5 * (quad.omega.array() * dev).sum();
}

double pn_coordinate_update(int k, int j, const PnQuadratic& quad,
                            const VectorXd& gate_intercepts, const MatrixXd& gate_weights,
                            const Dataset& data, const Hyperparams& hp, SolverDiag* diag) {
    const int Km1 = static_cast<int>(gate_weights.rows());
    if (quad.omega.rows() != data.n() || quad.omega.cols() != Km1 ||
        gate_intercepts.size() != Km1 || gate_weights.cols() != data.p())
        throw ContractViolation("pn_coordinate_update: shape mismatch");
    if (k < 1 || k > Km1 || j < 0 || j > data.p())
        throw ContractViolation("pn_coordinate_update: index out of range");
    const MatrixXd eta =
        (data.X * gate_weights.transpose()).rowwise() + gate_intercepts.transpose();
    const double wcur = (j == 0) ? gate_intercepts(k - 1) : gate_weights(k - 1, j - 1);
    return quad_coord(k - 1, j - 1, quad, eta, wcur, data, hp, diag);
}

void pn_gating_step(VectorXd& gate_intercepts, MatrixXd& gate_weights,
                    const MatrixXd& tau, const Dataset& data, const Hyperparams& hp,
                    int outer_iters, int sweeps, SolverDiag* diag) {
    const int Km1 = static_cast<int>(gate_weights.rows());
    if (Km1 == 0 || outer_iters <= 0 || sweeps <= 0) return;
    check_inputs(gate_intercepts, gate_weights, tau, data);

    double q0 = q_gating(gate_intercepts, gate_weights, tau, data, hp);
    for (int outer = 0; outer < outer_iters; ++outer) {
        const PnQuadratic quad = pn_quadratic_approx(gate_intercepts, gate_weights, tau, data);
        VectorXd cand_int = gate_intercepts;
        MatrixXd cand_w = gate_weights;
        MatrixXd eta = quad.eta0;
        for (int s = 0; s < sweeps; ++s) {
            for (int k = 0; k < Km1; ++k) {
                {
                    const double cur = cand_int(k);
                    const double next = quad_coord(k, -1, quad, eta, cur, data, hp, diag);
                    if (next != cur) {
                        eta.col(k).array() += next - cur;
                        cand_int(k) = next;
                    }
                }
                for (int j = 0; j < data.p(); ++j) {
                    const double cur = cand_w(k, j);
                    const double next = quad_coord(k, j, quad, eta, cur, data, hp, diag);
                    if (next != cur) {
                        eta.col(k) += (next - cur) * data.X.col(j);
                        cand_w(k, j) = next;
                    }
                }
            }
        }
        const double move = (cand_w - gate_weights).cwiseAbs().maxCoeff() +
                            (cand_int - gate_intercepts).cwiseAbs().maxCoeff();
        if (move == 0.0) break;

        // backtracking acceptance on the true objective
        bool accepted = false;
        double alpha = 1.0;
        for (int halving = 0; halving <= 30; ++halving, alpha *= 0.5) {
            VectorXd try_int;
            MatrixXd try_w;
            if (halving == 0) { // full step kept bit-exact (preserves exact zeros)
                try_int = cand_int;
                try_w = cand_w;
            } else {
                try_int = gate_intercepts + alpha * (cand_int - gate_intercepts);
                try_w = gate_weights + alpha * (cand_w - gate_weights);
            }
            const double q1 = q_gating(try_int, try_w, tau, data, hp);
            if (q1 >= q0 - 1e-12 * (1.0 + std::abs(q0))) {
                gate_intercepts = std::move(try_int);
                gate_weights = std::move(try_w);
                q0 = q1;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (diag) ++diag->pn_backtrack_failures;
            return;
        }
    }
}

} // namespace rmoe
