// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria.

#include "rmoe/data_io.hpp"
#include "rmoe/detail/parallel.hpp"
#include "rmoe/em.hpp"
#include "rmoe/evaluation.hpp"
#include "rmoe/experts.hpp"
#include "rmoe/gating_ca.hpp"
#include "rmoe/gating_mm.hpp"
#include "rmoe/gating_pn.hpp"
#include "rmoe/model.hpp"
#include "rmoe/selection.hpp"
#include "helpers.hpp"

#include <Eigen/QR>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace rmoe;

namespace {

struct Criterion {
    std::string name;
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << (detail.str().empty() ? "" : "; ") << "FAILED " << what;
        }
    }
};

double elapsed_seconds(const std::function<void()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    body();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

// ---------------------------------------------------------------- criterion 1
Criterion monotonicity_suite() {
    Criterion c{"EM monotonicity, 20 datasets x 3 solvers x 3 starts"};
    double worst = 0.0;
    int traces = 0;
    for (int seed = 1; seed <= 20; ++seed) {
        const SimulatedData sim = simulate(reference_sim_spec(300, seed));
        for (Solver solver : {Solver::MM, Solver::CA, Solver::PN}) {
            Hyperparams hp;
            hp.K = 2;
            hp.lambda = 1.732;
            hp.gamma = 1.732;
            hp.rho = 0.5704;
            hp.solver = solver;
            FitOptions opts;
            opts.n_starts = 3;
            opts.max_em_iters = 50;
            opts.rel_tol = 1e-7;
            opts.rng_seed = 1000 * seed;
            opts.sigma_mode = SigmaMode::Shared;
            const FitResult fr = fit(sim.data, hp, opts);
            for (const auto& trace : fr.diagnostics.start_traces) {
                if (trace.empty()) continue;
                ++traces;
                for (size_t i = 1; i < trace.size(); ++i) {
                    const double slack = 1e-8 * std::abs(trace[i - 1]);
                    worst = std::max(worst, trace[i - 1] - trace[i]);
                    c.require(trace[i] >= trace[i - 1] - slack,
                              "trace decrease seed=" + std::to_string(seed) + " solver=" +
                                  to_string(solver) + " step=" + std::to_string(i));
                }
            }
        }
    }
    c.detail << traces << " traces, worst decrease " << worst;
    return c;
}

// ---------------------------------------------------------------- criterion 2
Criterion mm_minorizer_suite() {
    Criterion c{"MM minorizer touching and domination"};
    std::mt19937_64 rng(271828);
    std::normal_distribution<double> step(0.0, 0.5);
    double worst_touch = 0.0, worst_dom = 0.0;
    for (int state_i = 0; state_i < 5; ++state_i) {
        const Dataset data = testutil::random_dataset(40, 3, rng);
        const MoEParams params = testutil::random_params(3, 3, rng, false, 0.7);
        const MatrixXd tau = testutil::random_tau(40, 3, rng);
        Hyperparams hp;
        hp.K = 3;
        hp.gamma = 0.5;
        hp.rho = 0.3;
        const MMState st = mm_build_state(params.gate_intercepts, params.gate_weights, data.X);

        const double g0 = mm_minorizer_value(params.gate_intercepts, params.gate_weights, st,
                                             tau, data, hp);
        const double q0 = q_gating(params.gate_intercepts, params.gate_weights, tau, data, hp);
        worst_touch = std::max(worst_touch, std::abs(g0 - q0));
        c.require(std::abs(g0 - q0) <= 1e-10, "touching state " + std::to_string(state_i));

        for (int draw = 0; draw < 1000; ++draw) {
            VectorXd w0 = params.gate_intercepts;
            MatrixXd W = params.gate_weights;
            for (int k = 0; k < w0.size(); ++k) w0(k) += step(rng);
            for (int k = 0; k < W.rows(); ++k)
                for (int j = 0; j < W.cols(); ++j) W(k, j) += step(rng);
            const double g = mm_minorizer_value(w0, W, st, tau, data, hp);
            const double q = q_gating(w0, W, tau, data, hp);
            worst_dom = std::max(worst_dom, g - q);
            c.require(g <= q + 1e-10,
                      "domination state " + std::to_string(state_i) + " draw " +
                          std::to_string(draw));
        }
    }
    c.detail << "max |G-Q| at touch " << worst_touch << ", max G-Q over draws " << worst_dom;
    return c;
}

// ---------------------------------------------------------------- criterion 3
struct OracleEnv {
    Dataset data;
    MoEParams params;
    MatrixXd tau;
    Hyperparams hp;
};

OracleEnv random_env(std::mt19937_64& rng, int n = 30, int p = 3, int K = 3) {
    std::uniform_real_distribution<double> ug(0.0, 1.5), ur(0.0, 0.5);
    OracleEnv env;
    env.data = testutil::random_dataset(n, p, rng);
    env.params = testutil::random_params(K, p, rng, false, 0.7);
    env.tau = testutil::random_tau(n, K, rng);
    env.hp.K = K;
    env.hp.gamma = ug(rng);
    env.hp.rho = ur(rng);
    env.hp.lambda = ug(rng);
    return env;
}

Criterion coordinate_oracle_suite() {
    Criterion c{"coordinate updates match 1-D grid oracles (50 each)"};
    std::mt19937_64 rng(314159);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        OracleEnv env = random_env(rng);
        const int k = 1 + static_cast<int>(rng() % 2);
        const int j = 1 + static_cast<int>(rng() % 3);

        { // MM weight vs its surrogate piece
            const MMState st =
                mm_build_state(env.params.gate_intercepts, env.params.gate_weights, env.data.X);
            const double upd = mm_update_weight(k, j, st, env.tau, env.data, env.hp);
            auto piece = [&](double w) {
                MatrixXd W = env.params.gate_weights;
                W(k - 1, j - 1) = w;
                return mm_minorizer_value(env.params.gate_intercepts, W, st, env.tau, env.data,
                                          env.hp);
            };
            const double center = env.params.gate_weights(k - 1, j - 1);
            const double oracle = testutil::grid_maximize(piece, center - 6, center + 6);
            worst = std::max(worst, std::abs(upd - oracle));
            c.require(std::abs(upd - oracle) <= 1e-5, "mm_update_weight trial " +
                                                          std::to_string(trial));
        }
        { // CA weight vs the exact objective
            const double upd = ca_update_weight(k, j, env.params.gate_intercepts,
                                                env.params.gate_weights, env.tau, env.data,
                                                env.hp);
            auto objective = [&](double w) {
                MatrixXd W = env.params.gate_weights;
                W(k - 1, j - 1) = w;
                return q_gating(env.params.gate_intercepts, W, env.tau, env.data, env.hp);
            };
            const double oracle = testutil::grid_maximize(objective, -10.0, 10.0);
            worst = std::max(worst, std::abs(upd - oracle));
            c.require(std::abs(upd - oracle) <= 1e-5, "ca_update_weight trial " +
                                                          std::to_string(trial));
        }
        { // PN coordinate vs the penalized quadratic model
            const PnQuadratic quad = pn_quadratic_approx(
                env.params.gate_intercepts, env.params.gate_weights, env.tau, env.data);
            const double upd = pn_coordinate_update(k, j, quad, env.params.gate_intercepts,
                                                    env.params.gate_weights, env.data, env.hp);
            auto objective = [&](double w) {
                MatrixXd W = env.params.gate_weights;
                W(k - 1, j - 1) = w;
                return pn_model_value(quad, env.params.gate_intercepts, W, env.data) -
                       env.hp.gamma_k(k - 1) * std::abs(w) - 0.5 * env.hp.rho * w * w;
            };
            const double oracle = testutil::grid_maximize(objective, -10.0, 10.0);
            worst = std::max(worst, std::abs(upd - oracle));
            c.require(std::abs(upd - oracle) <= 1e-5, "pn_coordinate_update trial " +
                                                          std::to_string(trial));
        }
        { // expert coordinate vs q_experts
            Responsibilities tau;
            tau.tau = env.tau;
            const int ke = 1 + static_cast<int>(rng() % 3);
            const double upd = update_beta_coord(ke, j, env.params, tau, env.data, env.hp);
            auto objective = [&](double b) {
                MoEParams trial_params = env.params;
                trial_params.expert_weights(ke - 1, j - 1) = b;
                return q_experts(trial_params.expert_weights, trial_params.expert_intercepts,
                                 trial_params.sigmas, env.tau, env.data, env.hp);
            };
            const double oracle = testutil::grid_maximize(objective, -10.0, 10.0);
            worst = std::max(worst, std::abs(upd - oracle));
            c.require(std::abs(upd - oracle) <= 1e-5, "update_beta_coord trial " +
                                                          std::to_string(trial));
        }
    }
    c.detail << "max |update - grid argmax| = " << worst;
    return c;
}

// ---------------------------------------------------------------- criterion 4
Criterion gradient_check_suite() {
    Criterion c{"analytic gradients/Hessians vs central differences (100 coords)"};
    std::mt19937_64 rng(161803);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        OracleEnv env = random_env(rng);
        const int k = 1 + static_cast<int>(rng() % 2);
        const int j = 1 + static_cast<int>(rng() % 3);
        if (std::abs(env.params.gate_weights(k - 1, j - 1)) < 0.05)
            env.params.gate_weights(k - 1, j - 1) = 0.5;

        auto q_at = [&](double w) {
            MatrixXd W = env.params.gate_weights;
            W(k - 1, j - 1) = w;
            return q_gating(env.params.gate_intercepts, W, env.tau, env.data, env.hp);
        };
        const double w = env.params.gate_weights(k - 1, j - 1);
        const auto [grad, hess] =
            ca_coord_grad_hess(k, j, env.params.gate_intercepts, env.params.gate_weights,
                               env.tau, env.data, env.hp);
        const double h = 1e-6 * (1.0 + std::abs(w));
        const double fd_grad = (q_at(w + h) - q_at(w - h)) / (2 * h);
        const double rel_g = std::abs(grad - fd_grad) / (1.0 + std::abs(grad));
        worst = std::max(worst, rel_g);
        c.require(rel_g <= 1e-5, "ca gradient trial " + std::to_string(trial));

        auto grad_at = [&](double v) {
            MatrixXd W = env.params.gate_weights;
            W(k - 1, j - 1) = v;
            return ca_coord_grad_hess(k, j, env.params.gate_intercepts, W, env.tau, env.data,
                                      env.hp)
                .first;
        };
        const double h2 = 1e-5 * (1.0 + std::abs(w));
        const double fd_hess = (grad_at(w + h2) - grad_at(w - h2)) / (2 * h2);
        const double rel_h = std::abs(hess - fd_hess) / (1.0 + std::abs(hess));
        worst = std::max(worst, rel_h);
        c.require(rel_h <= 1e-5, "ca hessian trial " + std::to_string(trial));

        // PN quadratic model gradient at the expansion vs the smooth part
        Hyperparams smooth = env.hp;
        smooth.gamma = 0.0;
        smooth.rho = 0.0;
        const PnQuadratic quad = pn_quadratic_approx(env.params.gate_intercepts,
                                                     env.params.gate_weights, env.tau, env.data);
        const double model_grad = (quad.omega.col(k - 1).array() *
                                   (quad.z.col(k - 1) - quad.eta0.col(k - 1)).array() *
                                   env.data.X.col(j - 1).array())
                                      .sum();
        auto q_smooth_at = [&](double v) {
            MatrixXd W = env.params.gate_weights;
            W(k - 1, j - 1) = v;
            return q_gating(env.params.gate_intercepts, W, env.tau, env.data, smooth);
        };
        const double fd_model = (q_smooth_at(w + h) - q_smooth_at(w - h)) / (2 * h);
        const double rel_m = std::abs(model_grad - fd_model) / (1.0 + std::abs(model_grad));
        worst = std::max(worst, rel_m);
        c.require(rel_m <= 1e-5, "pn model gradient trial " + std::to_string(trial));
    }
    c.detail << "max relative error " << worst;
    return c;
}

// ---------------------------------------------------------------- criterion 5
Criterion exact_sparsity_suite() {
    Criterion c{"large penalties give bit-exact zero coefficient blocks"};
    const SimulatedData sim = simulate(reference_sim_spec(300, 5));
    const double big = 10.0 * std::sqrt(300.0);
    for (Solver solver : {Solver::MM, Solver::CA, Solver::PN}) {
        FitOptions opts;
        opts.n_starts = 2;
        opts.max_em_iters = 60;
        opts.sigma_mode = SigmaMode::Shared;
        {
            Hyperparams hp;
            hp.K = 2;
            hp.gamma = big;
            hp.lambda = 1.0;
            hp.rho = 0.5704;
            hp.solver = solver;
            const FitResult fr = fit(sim.data, hp, opts);
            c.require((fr.params.gate_weights.array() == 0.0).all(),
                      "gate zeros under big gamma, solver " + to_string(solver));
        }
        {
            Hyperparams hp;
            hp.K = 2;
            hp.gamma = 1.0;
            hp.lambda = big;
            hp.rho = 0.5704;
            hp.solver = solver;
            const FitResult fr = fit(sim.data, hp, opts);
            c.require((fr.params.expert_weights.array() == 0.0).all(),
                      "expert zeros under big lambda, solver " + to_string(solver));
        }
    }
    c.detail << "gamma = lambda = " << big;
    return c;
}

// ---------------------------------------------------------------- criterion 6
struct StudyMetrics {
    double s1_e1, s1_e2, s2_e1, s2_e2, s1_g, crate, ari, sigma_hat;
};

StudyMetrics run_study(const Hyperparams& hp, const FitOptions& opts, int R) {
    const MoEParams truth = reference_sim_spec().true_params;
    std::vector<double> s1_e1(R), s1_e2(R), s2_e1(R), s2_e2(R), s1_g(R), crate(R), ari(R),
        sigma_hat(R);
    detail::parallel_for(R, 0, [&](int r) {
        const SimulatedData sim = simulate(reference_sim_spec(300, r + 1));
        FitOptions ro = opts;
        ro.rng_seed = 100 + r;
        const FitResult fr = fit(sim.data, hp, ro);
        const MoEParams aligned = align_components(fr.params, truth);
        const SparsityReport sp = sensitivity_specificity(aligned, truth);
        s1_e1[r] = sp.experts[0].s1.value();
        s2_e1[r] = sp.experts[0].s2.value();
        s1_e2[r] = sp.experts[1].s1.value();
        s2_e2[r] = sp.experts[1].s2.value();
        s1_g[r] = sp.gates[0].s1.value();
        const std::vector<int> est = hard_assign(responsibilities(sim.data, aligned));
        crate[r] = correct_classification_rate(est, sim.labels);
        ari[r] = adjusted_rand_index(est, sim.labels);
        sigma_hat[r] = aligned.sigmas.mean();
    });
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / v.size();
    };
    return {mean(s1_e1), mean(s1_e2), mean(s2_e1), mean(s2_e2),
            mean(s1_g),  mean(crate), mean(ari),   mean(sigma_hat)};
}

Criterion replication_suite() {
    Criterion c{"reduced-scale replication of the reference simulation study"};

    // tuning fixed at the modified-BIC-selected cell of replicate 1; the grid
    // carries sqrt(n) points per axis over the default [0.01 sqrt(n), sqrt(n)]
    const SimulatedData rep1 = simulate(reference_sim_spec(300, 1));
    GridSpec grid = build_grid(300, 17, 17);
    grid.K_set = {2};
    FitOptions opts;
    opts.n_starts = 5;
    opts.sigma_mode = SigmaMode::Shared;
    opts.rng_seed = 1;
    const SelectionResult sel = select(rep1.data, grid, Solver::CA, opts, 0);
    const Hyperparams hp = sel.best;
    const double best_bic = modified_bic(sel.best_fit, rep1.data.n());

    const StudyMetrics m = run_study(hp, opts, 20);
    struct Target {
        const char* name;
        double value, center, tol;
    };
    const Target targets[] = {
        {"expert1 S2", m.s2_e1, 1.0, 0.02},   {"expert2 S2", m.s2_e2, 1.0, 0.02},
        {"expert1 S1", m.s1_e1, 0.70, 0.15},  {"expert2 S1", m.s1_e2, 0.803, 0.15},
        {"gate S1", m.s1_g, 0.853, 0.15},     {"C.rate", m.crate, 0.8946, 0.03},
        {"ARI", m.ari, 0.6190, 0.08},         {"sigma mean", m.sigma_hat, 0.989, 0.03},
    };
    c.detail << "cell lambda=" << hp.lambda << " gamma=" << hp.gamma << " rho=" << hp.rho
             << " bic=" << best_bic;
    for (const Target& t : targets) {
        c.detail << "; " << t.name << "=" << t.value << " (target " << t.center << "+/-"
                 << t.tol << ")";
        c.require(std::abs(t.value - t.center) <= t.tol, t.name);
    }

    if (!c.pass) {
        // diagnostic only: the sparsest cell whose BIC ties the argmax within
        // one nat, to show how flat the selection surface is
        const ScoreRow* alt = nullptr;
        for (const auto& row : sel.table) {
            if (row.bic < best_bic - 1.0) continue;
            if (row.lambda == hp.lambda && row.gamma == hp.gamma) continue;
            if (!alt || row.lambda > alt->lambda ||
                (row.lambda == alt->lambda && row.gamma > alt->gamma))
                alt = &row;
        }
        if (alt) {
            Hyperparams hp2 = hp;
            hp2.lambda = alt->lambda;
            hp2.gamma = alt->gamma;
            const StudyMetrics d = run_study(hp2, opts, 20);
            c.detail << " | diagnostic near-tie cell lambda=" << alt->lambda
                     << " gamma=" << alt->gamma << " (bic gap "
                     << best_bic - alt->bic << "): expert1 S1=" << d.s1_e1
                     << " expert2 S1=" << d.s1_e2 << " gate S1=" << d.s1_g
                     << " S2=" << d.s2_e1 << "/" << d.s2_e2 << " C.rate=" << d.crate
                     << " ARI=" << d.ari << " sigma=" << d.sigma_hat;
        }
    }
    return c;
}

// ---------------------------------------------------------------- criterion 7
Criterion solver_speed_suite() {
    Criterion c{"proximal Newton faster than coordinate ascent on one replicate"};
    const SimulatedData sim = simulate(reference_sim_spec(300, 2));
    Hyperparams hp;
    hp.K = 2;
    hp.lambda = 1.732;
    hp.gamma = 1.732;
    hp.rho = 0.5704;
    FitOptions opts;
    opts.n_starts = 3;
    opts.max_em_iters = 300;
    opts.sigma_mode = SigmaMode::Shared;

    hp.solver = Solver::CA;
    const double t_ca = elapsed_seconds([&] { fit(sim.data, hp, opts); });
    hp.solver = Solver::PN;
    const double t_pn = elapsed_seconds([&] { fit(sim.data, hp, opts); });
    c.detail << "CA " << t_ca << " s, PN " << t_pn << " s";
    c.require(t_pn < t_ca, "PN wall time below CA wall time");
    return c;
}

// ---------------------------------------------------------------- criterion 8
Criterion unpenalized_reduction_suite() {
    Criterion c{"unpenalized fits reduce to plain MLE / weighted least squares"};
    {
        const SimulatedData sim = simulate(reference_sim_spec(150, 3));
        Hyperparams hp;
        hp.K = 2;
        FitOptions opts;
        opts.n_starts = 3;
        opts.max_em_iters = 200;
        const FitResult fr = fit(sim.data, hp, opts);
        c.require(fr.final_penalized_loglik == fr.final_loglik,
                  "penalized == unpenalized objective at lambda=gamma=rho=0");
    }
    {
        const SimulatedData sim = simulate(reference_sim_spec(120, 4));
        Hyperparams hp;
        hp.K = 1;
        FitOptions opts;
        opts.n_starts = 1;
        opts.rel_tol = 1e-12;
        opts.max_em_iters = 1000;
        const FitResult fr = fit(sim.data, hp, opts);
        MatrixXd A(sim.data.n(), sim.data.p() + 1);
        A.col(0).setOnes();
        A.rightCols(sim.data.p()) = sim.data.X;
        const VectorXd sol = A.colPivHouseholderQr().solve(sim.data.y);
        const double coef_err = std::max(
            std::abs(fr.params.expert_intercepts(0) - sol(0)),
            (fr.params.expert_weights.row(0).transpose() - sol.tail(sim.data.p()))
                .cwiseAbs()
                .maxCoeff());
        const double mse = (sim.data.y - A * sol).squaredNorm() / sim.data.n();
        const double sig_err = std::abs(fr.params.sigmas(0) * fr.params.sigmas(0) - mse);
        c.detail << "K=1 coefficient error " << coef_err << ", sigma^2 error " << sig_err;
        c.require(coef_err <= 1e-8, "K=1 coefficients match closed-form least squares");
        c.require(sig_err <= 1e-8, "K=1 sigma^2 matches the mean squared residual");
    }
    return c;
}

// ---------------------------------------------------------------- criterion 9
Criterion metric_oracle_suite() {
    Criterion c{"metric oracles: ARI anchor, permutation invariance, alignment round trip"};
    c.require(adjusted_rand_index({1, 1, 2, 2}, {1, 2, 1, 2}) == -0.5, "ARI == -0.5 exactly");

    std::mt19937_64 rng(120211);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<int> a(30), b(30);
        for (int i = 0; i < 30; ++i) {
            a[i] = 1 + static_cast<int>(rng() % 3);
            b[i] = 1 + static_cast<int>(rng() % 3);
        }
        const int map[3] = {2, 3, 1};
        std::vector<int> rel(30);
        for (int i = 0; i < 30; ++i) rel[i] = map[a[i] - 1];
        c.require(correct_classification_rate(rel, b) == correct_classification_rate(a, b),
                  "classification-rate relabel invariance");
        c.require(adjusted_rand_index(rel, b) == adjusted_rand_index(a, b),
                  "ARI relabel invariance");
    }

    for (int trial = 0; trial < 20; ++trial) {
        const int K = 2 + static_cast<int>(rng() % 3);
        const MoEParams ref = testutil::random_dyadic_params(K, 3, rng);
        std::vector<int> perm(K);
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        MoEParams shuffled = ref;
        for (int k = 0; k < K; ++k) {
            shuffled.expert_intercepts(k) = ref.expert_intercepts(perm[k]);
            shuffled.expert_weights.row(k) = ref.expert_weights.row(perm[k]);
            shuffled.sigmas(k) = ref.sigmas(perm[k]);
        }
        auto ext_int = [&](int m) { return m == K - 1 ? 0.0 : ref.gate_intercepts(m); };
        auto ext_row = [&](int m) -> Eigen::RowVectorXd {
            return m == K - 1 ? Eigen::RowVectorXd::Zero(3).eval()
                              : Eigen::RowVectorXd(ref.gate_weights.row(m));
        };
        for (int k = 0; k < K - 1; ++k) {
            shuffled.gate_intercepts(k) = ext_int(perm[k]) - ext_int(perm[K - 1]);
            shuffled.gate_weights.row(k) = ext_row(perm[k]) - ext_row(perm[K - 1]);
        }
        const MoEParams back = align_components(shuffled, ref);
        const bool exact = back.expert_intercepts == ref.expert_intercepts &&
                           back.expert_weights == ref.expert_weights &&
                           back.gate_intercepts == ref.gate_intercepts &&
                           back.gate_weights == ref.gate_weights && back.sigmas == ref.sigmas;
        c.require(exact, "alignment round trip trial " + std::to_string(trial));
    }
    return c;
}

} // namespace

int main() {
    std::cout.precision(6);
    std::vector<Criterion> results;
    results.push_back(monotonicity_suite());
    results.push_back(mm_minorizer_suite());
    results.push_back(coordinate_oracle_suite());
    results.push_back(gradient_check_suite());
    results.push_back(exact_sparsity_suite());
    results.push_back(replication_suite());
    results.push_back(solver_speed_suite());
    results.push_back(unpenalized_reduction_suite());
    results.push_back(metric_oracle_suite());

    int failures = 0;
    for (size_t i = 0; i < results.size(); ++i) {
        const Criterion& c = results[i];
        std::cout << (c.pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1) << ": "
                  << c.name;
        if (!c.detail.str().empty()) std::cout << " -- " << c.detail.str();
        std::cout << "\n";
        if (!c.pass) ++failures;
    }
    return failures;
}
