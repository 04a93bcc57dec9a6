#include "rmoe/gating_mm.hpp"

#include "piecewise.hpp"

#include <cmath>

namespace rmoe {

namespace {

constexpr double kExpClamp = 700.0;

double clamped_exp(double t, int* clamps) {
    if (t > kExpClamp) {
        if (clamps) ++*clamps;
        t = kExpClamp;
    } else if (t < -kExpClamp) {
        if (clamps) ++*clamps;
        t = -kExpClamp;
    }
    return std::exp(t);
}

void check_state(const MMState& state, const MatrixXd& tau, const Dataset& data) {
    const int Km1 = static_cast<int>(state.gate_weights.rows());
    if (state.pi.rows() != data.n() || state.pi.cols() != Km1 ||
        state.log_denom.size() != data.n() || state.gate_weights.cols() != data.p())
        throw ContractViolation("gating-mm: state/data shapes inconsistent");
    if (tau.rows() != data.n() || tau.cols() != Km1 + 1)
        throw ContractViolation("gating-mm: tau shape mismatch");
}

} // namespace

MMState mm_build_state(const VectorXd& gate_intercepts, const MatrixXd& gate_weights,
                       const MatrixXd& X) {
    const int Km1 = static_cast<int>(gate_weights.rows());
    MMState st;
    st.gate_intercepts = gate_intercepts;
    st.gate_weights = gate_weights;
    MatrixXd scores = (X * gate_weights.transpose()).rowwise() + gate_intercepts.transpose();
    st.log_denom.resize(X.rows());
    st.pi.resize(X.rows(), Km1);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double m = 0.0;
        for (int k = 0; k < Km1; ++k) m = std::max(m, scores(i, k));
        double s = std::exp(-m);
        for (int k = 0; k < Km1; ++k) s += std::exp(scores(i, k) - m);
        st.log_denom(i) = m + std::log(s);
        for (int k = 0; k < Km1; ++k) st.pi(i, k) = std::exp(scores(i, k) - st.log_denom(i));
    }
    return st;
}

double mm_minorizer_value(const VectorXd& gate_intercepts, const MatrixXd& gate_weights,
                          const MMState& state, const MatrixXd& tau,
                          const Dataset& data, const Hyperparams& hp, SolverDiag* diag) {
    check_state(state, tau, data);
    const int Km1 = static_cast<int>(gate_weights.rows());
    const int p = data.p();
    const double pp1 = p + 1;
    int clamps = 0;

    double value = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        double gi = -state.log_denom(i) + 1.0 - std::exp(-state.log_denom(i));
        double lin = 0.0;
        for (int k = 0; k < Km1; ++k) {
            const double eta =
                gate_intercepts(k) + gate_weights.row(k).dot(data.X.row(i));
            lin += tau(i, k) * eta;
            // separable exponentials, x_{i0} = 1 for the intercept term
            double esum = clamped_exp(pp1 * (gate_intercepts(k) - state.gate_intercepts(k)),
                                      &clamps);
            for (int j = 0; j < p; ++j)
                esum += clamped_exp(
                    pp1 * data.X(i, j) * (gate_weights(k, j) - state.gate_weights(k, j)),
                    &clamps);
            gi -= state.pi(i, k) / pp1 * esum;
        }
        value += lin + gi;
    }
    for (int k = 0; k < Km1; ++k)
        value -= hp.gamma_k(k) * gate_weights.row(k).cwiseAbs().sum() +
                 0.5 * hp.rho * gate_weights.row(k).squaredNorm();
    if (diag) diag->clamp_events += clamps;
    return value;
}

double mm_update_intercept(int k, const MMState& state, const MatrixXd& tau,
                           SolverDiag* diag) {
    const int Km1 = static_cast<int>(state.gate_weights.rows());
    if (k < 1 || k > Km1) throw ContractViolation("mm_update_intercept: bad component");
    const double tau_mass = tau.col(k - 1).sum();
    const double pi_mass = state.pi.col(k - 1).sum();
    if (!(tau_mass > 0.0) || !(pi_mass > 0.0)) {
        if (diag) ++diag->empty_components;
        return state.gate_intercepts(k - 1);
    }
    const double pp1 = state.gate_weights.cols() + 1;
    return state.gate_intercepts(k - 1) + std::log(tau_mass / pi_mass) / pp1;
}

double mm_update_weight(int k, int j, const MMState& state, const MatrixXd& tau,
                        const Dataset& data, const Hyperparams& hp, SolverDiag* diag) {
    check_state(state, tau, data);
    const int Km1 = static_cast<int>(state.gate_weights.rows());
    if (k < 1 || k > Km1 || j < 1 || j > data.p())
        throw ContractViolation("mm_update_weight: index out of range");
    const int k0 = k - 1, j0 = j - 1;
    const int n = data.n();
    const double pp1 = data.p() + 1;
    const double w0 = state.gate_weights(k0, j0);
    const double rho = hp.rho;
    const double gamma = hp.gamma_k(k0);
    const double a_lin = tau.col(k0).dot(data.X.col(j0));
    int clamps = 0;

    // F(w) = A w - sum_i (pi_ik/(p+1)) e^{(p+1) x_ij (w - w0)} - (rho/2) w^2
    auto f = [&](double w) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            s += state.pi(i, k0) / pp1 *
                 clamped_exp(pp1 * data.X(i, j0) * (w - w0), &clamps);
        return a_lin * w - s - 0.5 * rho * w * w;
    };
    auto g = [&](double w) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            s += data.X(i, j0) * state.pi(i, k0) *
                 clamped_exp(pp1 * data.X(i, j0) * (w - w0), &clamps);
        return a_lin - s - rho * w;
    };
    auto h = [&](double w) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            s += data.X(i, j0) * data.X(i, j0) * state.pi(i, k0) *
                 clamped_exp(pp1 * data.X(i, j0) * (w - w0), &clamps);
        return -pp1 * s - rho;
    };

    int failures = 0;
    const double next = detail::maximize_l1_piecewise(f, g, h, gamma, w0, failures);
    if (diag) {
        diag->nr_failures += failures;
        diag->clamp_events += clamps;
    }
    return next;
}

void mm_gating_step(VectorXd& gate_intercepts, MatrixXd& gate_weights,
                    const MatrixXd& tau, const Dataset& data, const Hyperparams& hp,
                    int sweeps, SolverDiag* diag) {
    const int Km1 = static_cast<int>(gate_weights.rows());
    if (Km1 == 0 || sweeps <= 0) return;
    for (int s = 0; s < sweeps; ++s) {
        // the surrogate is separable, so every coordinate uses the same state
        const MMState state = mm_build_state(gate_intercepts, gate_weights, data.X);
        check_state(state, tau, data);
        for (int k = 1; k <= Km1; ++k)
            gate_intercepts(k - 1) = mm_update_intercept(k, state, tau, diag);
        for (int k = 1; k <= Km1; ++k)
            for (int j = 1; j <= data.p(); ++j)
                gate_weights(k - 1, j - 1) = mm_update_weight(k, j, state, tau, data, hp, diag);
    }
}

} // namespace rmoe
