#include "rmoe/em.hpp"

#include "rmoe/experts.hpp"
#include "rmoe/gating_ca.hpp"
#include "rmoe/gating_mm.hpp"
#include "rmoe/gating_pn.hpp"
#include "rmoe/model.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>

namespace rmoe {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr int kPnSweepsPerQuadratic = 5;

double sample_sd(const VectorXd& v) {
    if (v.size() < 2) return 0.0;
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / (v.size() - 1));
}

// Weighted least squares of y on [1 X]; rank deficiency falls through to
// the QR's least-squares solution.
void weighted_ls(const Dataset& data, const VectorXd& wts, double& b0,
                 Eigen::RowVectorXd& beta) {
    const int n = data.n(), p = data.p();
    MatrixXd A(n, p + 1);
    A.col(0).setOnes();
    A.rightCols(p) = data.X;
    const VectorXd sw = wts.cwiseMax(0.0).cwiseSqrt();
    const MatrixXd Aw = sw.asDiagonal() * A;
    const VectorXd yw = sw.asDiagonal() * data.y;
    const VectorXd sol = Aw.colPivHouseholderQr().solve(yw);
    b0 = sol(0);
    beta = sol.tail(p).transpose();
}

std::vector<int> kmeans_partition(const MatrixXd& V, int K, std::mt19937_64& rng) {
    const int n = static_cast<int>(V.rows());
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // k-means++ seeding
    MatrixXd centers(K, V.cols());
    centers.row(0) = V.row(pick(rng));
    VectorXd d2 = (V.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < K; ++c) {
        const double total = d2.sum();
        int chosen = 0;
        if (total > 0.0) {
            double target = unif(rng) * total, acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += d2(i);
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        centers.row(c) = V.row(chosen);
        d2 = d2.cwiseMin((V.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> assign(n, 0);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (int i = 0; i < n; ++i) {
            int best = 0;
            double bd = (V.row(i) - centers.row(0)).squaredNorm();
            for (int c = 1; c < K; ++c) {
                const double d = (V.row(i) - centers.row(c)).squaredNorm();
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        MatrixXd sums = MatrixXd::Zero(K, V.cols());
        VectorXd counts = VectorXd::Zero(K);
        for (int i = 0; i < n; ++i) {
            sums.row(assign[i]) += V.row(i);
            counts(assign[i]) += 1.0;
        }
        for (int c = 0; c < K; ++c) {
            if (counts(c) > 0.0) {
                centers.row(c) = sums.row(c) / counts(c);
            } else {
                // reseed an empty cluster at the farthest point
                int far = 0;
                double fd = -1.0;
                for (int i = 0; i < n; ++i) {
                    const double d = (V.row(i) - centers.row(assign[i])).squaredNorm();
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                centers.row(c) = V.row(far);
                changed = true;
            }
        }
        if (!changed) break;
    }
    return assign;
}

struct StartOutcome {
    MoEParams params;
    std::vector<double> trace;
    int n_iters = 0;
    bool converged = false;
    SolverDiag diag;
};

StartOutcome run_single_start(const Dataset& data, const Hyperparams& hp,
                              const FitOptions& opts, std::uint64_t seed,
                              double sigma_floor) {
    StartOutcome out;
    std::mt19937_64 rng(seed);
    MoEParams params = initialize(data, hp.K, opts.init_strategy, rng, hp,
                                  opts.sigma_mode, sigma_floor, &out.diag);

    double prev = penalized_log_likelihood(data, params, hp);
    if (!std::isfinite(prev)) throw NumericError("fit: non-finite objective at start");
    out.trace.push_back(prev);

    for (int q = 1; q <= opts.max_em_iters; ++q) {
        const Responsibilities tau = responsibilities(data, params);

        if (hp.K > 1) {
            switch (hp.solver) {
            case Solver::MM:
                mm_gating_step(params.gate_intercepts, params.gate_weights, tau.tau, data,
                               hp, opts.inner_iters, &out.diag);
                break;
            case Solver::CA:
                ca_gating_step(params.gate_intercepts, params.gate_weights, tau.tau, data,
                               hp, opts.inner_iters, &out.diag);
                break;
            case Solver::PN:
                pn_gating_step(params.gate_intercepts, params.gate_weights, tau.tau, data,
                               hp, opts.inner_iters, kPnSweepsPerQuadratic, &out.diag);
                break;
            }
        }

        expert_step(params, tau, data, hp, opts.inner_iters, &out.diag);

        // refreshed E-step between the coefficient and variance updates
        const Responsibilities tau2 = responsibilities(data, params);
        sigma_step(params, tau2, data, opts.sigma_mode, sigma_floor, &out.diag);

        const double pl = penalized_log_likelihood(data, params, hp);
        if (!std::isfinite(pl))
            throw NumericError("fit: non-finite objective at iteration " + std::to_string(q));
        out.trace.push_back(pl);
        out.n_iters = q;
        if (std::abs(pl - prev) <= opts.rel_tol * (1.0 + std::abs(prev))) {
            out.converged = true;
            break;
        }
        prev = pl;
    }
    out.params = std::move(params);
    return out;
}

} // namespace

void FitOptions::validate() const {
    if (max_em_iters < 1 || inner_iters < 1 || n_starts < 1)
        throw ContractViolation("FitOptions: counts must be positive");
    if (!(rel_tol > 0.0)) throw ContractViolation("FitOptions: rel_tol must be > 0");
}

double q_gating(const VectorXd& gate_intercepts, const MatrixXd& gate_weights,
                const MatrixXd& tau, const Dataset& data, const Hyperparams& hp) {
    const int Km1 = static_cast<int>(gate_weights.rows());
    if (gate_intercepts.size() != Km1 || (Km1 > 0 && gate_weights.cols() != data.p()))
        throw ContractViolation("q_gating: gate shapes inconsistent");
    if (tau.rows() != data.n() || tau.cols() != Km1 + 1)
        throw ContractViolation("q_gating: tau shape mismatch");
    if (Km1 == 0) return 0.0;

    const MatrixXd eta =
        (data.X * gate_weights.transpose()).rowwise() + gate_intercepts.transpose();
    double value = 0.0;
    for (int i = 0; i < data.n(); ++i) {
        double m = 0.0;
        for (int k = 0; k < Km1; ++k) {
            value += tau(i, k) * eta(i, k);
            m = std::max(m, eta(i, k));
        }
        double s = std::exp(-m);
        for (int k = 0; k < Km1; ++k) s += std::exp(eta(i, k) - m);
        value -= m + std::log(s);
    }
    for (int k = 0; k < Km1; ++k)
        value -= hp.gamma_k(k) * gate_weights.row(k).cwiseAbs().sum() +
                 0.5 * hp.rho * gate_weights.row(k).squaredNorm();
    return value;
}

double q_experts(const MatrixXd& expert_weights, const VectorXd& expert_intercepts,
                 const VectorXd& sigmas, const MatrixXd& tau, const Dataset& data,
                 const Hyperparams& hp) {
    const int K = static_cast<int>(expert_intercepts.size());
    if (expert_weights.rows() != K || expert_weights.cols() != data.p())
        throw ContractViolation("q_experts: expert shapes inconsistent");
    if (tau.rows() != data.n() || tau.cols() != K)
        throw ContractViolation("q_experts: tau shape mismatch");
    if ((sigmas.array() <= 0.0).any())
        throw ContractViolation("q_experts: sigma must be strictly positive");

    double value = 0.0;
    for (int k = 0; k < K; ++k) {
        const double sigma = sigmas.size() == 1 ? sigmas(0) : sigmas(k);
        const VectorXd resid = data.y.array() - expert_intercepts(k) -
                               (data.X * expert_weights.row(k).transpose()).array();
        const double mass = tau.col(k).sum();
        value += -(0.5 * kLog2Pi + std::log(sigma)) * mass -
                 0.5 * tau.col(k).dot(resid.cwiseAbs2()) / (sigma * sigma);
        value -= hp.lambda_k(k) * expert_weights.row(k).cwiseAbs().sum();
    }
    return value;
}

int count_nonzero_penalized(const MoEParams& params) {
    int df = 0;
    df += static_cast<int>((params.gate_weights.array() != 0.0).count());
    df += static_cast<int>((params.expert_weights.array() != 0.0).count());
    return df;
}

double sigma_floor_for(const Dataset& data) {
    // constant y would give a zero floor and let sigma collapse entirely
    return std::max(1e-6 * sample_sd(data.y), 1e-12);
}

MoEParams initialize(const Dataset& data, int K, InitStrategy strategy,
                     std::mt19937_64& rng, const Hyperparams& hp,
                     SigmaMode sigma_mode, double sigma_floor, SolverDiag* diag) {
    data.validate();
    if (K < 1) throw ContractViolation("initialize: K must be >= 1");
    if (K > data.n()) throw ContractViolation("initialize: K exceeds the sample size");
    const int n = data.n(), p = data.p();

    MoEParams params = MoEParams::zeros(K, p, sigma_mode);
    MatrixXd tau(n, K);
    std::vector<bool> degenerate(K, false);

    if (K == 1) {
        tau.setOnes();
    } else if (strategy == InitStrategy::RandomResponsibilities) {
        std::exponential_distribution<double> expo(1.0);
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int k = 0; k < K; ++k) {
                tau(i, k) = expo(rng);
                s += tau(i, k);
            }
            tau.row(i) /= s;
        }
    } else {
        // joint k-means on standardized (x, y)
        MatrixXd V(n, p + 1);
        V.leftCols(p) = data.X;
        V.col(p) = data.y;
        for (int j = 0; j <= p; ++j) {
            const double mean = V.col(j).mean();
            const double sd = sample_sd(V.col(j));
            V.col(j).array() -= mean;
            if (sd > 0.0) V.col(j) /= sd;
        }
        const std::vector<int> assign = kmeans_partition(V, K, rng);
        tau.setZero();
        std::vector<int> counts(K, 0);
        for (int i = 0; i < n; ++i) {
            tau(i, assign[i]) = 1.0;
            ++counts[assign[i]];
        }
        for (int k = 0; k < K; ++k) degenerate[k] = counts[k] < p + 1;
    }

    const VectorXd ones = VectorXd::Ones(n);
    for (int k = 0; k < K; ++k) {
        double b0;
        Eigen::RowVectorXd beta(p);
        // degenerate cluster: fall back to a global regression
        weighted_ls(data, degenerate[k] ? ones : VectorXd(tau.col(k)), b0, beta);
        params.expert_intercepts(k) = b0;
        params.expert_weights.row(k) = beta;
    }
    sigma_step(params, Responsibilities{tau}, data, sigma_mode,
               std::max(sigma_floor, 1e-12), diag);

    if (K > 1) {
        // one gating pass from zero; ridge only for the k-means strategy
        Hyperparams hp0;
        hp0.K = K;
        hp0.rho = (strategy == InitStrategy::KMeansSeeded) ? hp.rho : 0.0;
        ca_gating_step(params.gate_intercepts, params.gate_weights, tau, data, hp0, 1, diag);
    }
    return params;
}

FitResult fit(const Dataset& data, const Hyperparams& hp, const FitOptions& opts) {
    data.validate();
    hp.validate();
    opts.validate();
    if (hp.K > data.n()) throw ContractViolation("fit: K exceeds the sample size");

    const double sigma_floor = sigma_floor_for(data);
    FitResult result;
    result.diagnostics.start_traces.resize(opts.n_starts);
    result.diagnostics.start_objectives.assign(
        opts.n_starts, std::numeric_limits<double>::quiet_NaN());
    result.diagnostics.start_errors.assign(opts.n_starts, "");

    int best = -1;
    double best_obj = -std::numeric_limits<double>::infinity();
    StartOutcome best_outcome;
    for (int s = 0; s < opts.n_starts; ++s) {
        try {
            StartOutcome outcome =
                run_single_start(data, hp, opts, opts.rng_seed + static_cast<std::uint64_t>(s),
                                 sigma_floor);
            const double obj = outcome.trace.back();
            result.diagnostics.start_traces[s] = outcome.trace;
            result.diagnostics.start_objectives[s] = obj;
            result.diagnostics.solver.merge(outcome.diag);
            if (obj > best_obj) {
                best_obj = obj;
                best = s;
                best_outcome = std::move(outcome);
            }
        } catch (const Error& e) {
            result.diagnostics.start_errors[s] = e.what();
        }
    }
    if (best < 0) {
        std::vector<std::string> msgs;
        for (const auto& m : result.diagnostics.start_errors)
            if (!m.empty()) msgs.push_back(m);
        throw FitError("fit: every start failed to produce a finite objective", msgs);
    }

    result.params = std::move(best_outcome.params);
    result.objective_trace = std::move(best_outcome.trace);
    result.final_penalized_loglik = result.objective_trace.back();
    result.final_loglik = log_likelihood(data, result.params);
    result.n_iters = best_outcome.n_iters;
    result.converged = best_outcome.converged;
    result.df = count_nonzero_penalized(result.params);
    result.responsibilities = responsibilities(data, result.params);
    result.diagnostics.start_chosen = best;
    return result;
}

} // namespace rmoe
