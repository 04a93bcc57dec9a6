#include "rmoe/data_io.hpp"
#include "rmoe/detail/parallel.hpp"
#include "rmoe/em.hpp"
#include "rmoe/evaluation.hpp"
#include "rmoe/model.hpp"
#include "rmoe/selection.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace rmoe;

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

struct RhoFlag {
    std::string raw = "auto";
    double resolve(int n) const {
        if (raw == "auto") return 0.1 * std::log(static_cast<double>(n));
        try {
            size_t pos = 0;
            const double v = std::stod(raw, &pos);
            if (pos != raw.size() || v < 0) throw std::invalid_argument(raw);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("--rho must be 'auto' or a nonnegative number, got '" + raw + "'");
        }
    }
};

std::vector<int> parse_int_list(const std::string& s, const char* flag) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            out.push_back(std::stoi(tok));
        } catch (const std::exception&) {
            throw ConfigError(std::string(flag) + ": bad integer '" + tok + "'");
        }
    }
    if (out.empty()) throw ConfigError(std::string(flag) + ": empty list");
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(17);
    return out;
}

// Predictor-only CSV reader for predict: a column named like the response
// (if any) is dropped.
MatrixXd load_predictors(const std::string& path, const std::string& response_column) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw rmoe::ParseError("empty csv '" + path + "'");
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) header.push_back(tok);
    }
    int skip = -1;
    for (size_t c = 0; c < header.size(); ++c)
        if (header[c] == response_column) skip = static_cast<int>(c);
    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        int c = 0;
        while (std::getline(ss, tok, ',')) {
            if (c != skip) {
                char* end = nullptr;
                vals.push_back(std::strtod(tok.c_str(), &end));
                if (tok.empty() || end != tok.c_str() + tok.size())
                    throw rmoe::ParseError("non-numeric cell at row " + std::to_string(line_no));
            }
            ++c;
        }
        if (c != static_cast<int>(header.size()))
            throw rmoe::ParseError("row " + std::to_string(line_no) + " has wrong width");
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw rmoe::ParseError("no data rows in '" + path + "'");
    MatrixXd X(rows.size(), rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return X;
}

void apply_standardization(MatrixXd& X, const Standardization& st) {
    if (X.cols() != st.means.size())
        throw ContractViolation("prediction data has " + std::to_string(X.cols()) +
                                " predictors, model expects " + std::to_string(st.means.size()));
    for (Eigen::Index j = 0; j < X.cols(); ++j)
        X.col(j) = (X.col(j).array() - st.means(j)) / st.sds(j);
}

void print_fit_report(std::ostream& os, const FitResult& fr, const Hyperparams& hp, int n) {
    const MoEParams& pr = fr.params;
    const int K = pr.n_components();
    os << "solver=" << to_string(hp.solver) << " K=" << K << " lambda=" << hp.lambda
       << " gamma=" << hp.gamma << " rho=" << hp.rho << "\n";
    os << "penalized_loglik=" << fr.final_penalized_loglik
       << " loglik=" << fr.final_loglik << "\n";
    const int df_full = fr.df + (K - 1) + K + static_cast<int>(pr.sigmas.size());
    os << "df_penalized_nonzero=" << fr.df << " df_total=" << df_full
       << " bic=" << (fr.final_loglik - df_full * std::log(double(n)) / 2.0) << "\n";
    os << "iterations=" << fr.n_iters << " converged=" << (fr.converged ? "yes" : "no")
       << " start_chosen=" << fr.diagnostics.start_chosen << "\n";
    for (int k = 0; k < K; ++k)
        os << "expert" << (k + 1)
           << "_nonzero=" << (pr.expert_weights.row(k).array() != 0.0).count() << "/"
           << pr.n_features() << "\n";
    for (int k = 0; k < K - 1; ++k)
        os << "gate" << (k + 1)
           << "_nonzero=" << (pr.gate_weights.row(k).array() != 0.0).count() << "/"
           << pr.n_features() << "\n";
    os << "sigma=";
    for (int k = 0; k < pr.sigmas.size(); ++k) os << (k ? "," : "") << pr.sigmas(k);
    os << "\n";
    const auto& d = fr.diagnostics.solver;
    if (d.sigma_floor_hits || d.nr_failures || d.clamp_events || d.empty_components ||
        d.pn_backtrack_failures)
        os << "diagnostics: floor_hits=" << d.sigma_floor_hits
           << " nr_failures=" << d.nr_failures << " clamp_events=" << d.clamp_events
           << " empty_components=" << d.empty_components
           << " pn_backtrack_failures=" << d.pn_backtrack_failures << "\n";
}

void write_trace_csv(const std::vector<double>& trace, const std::string& path) {
    auto out = open_out(path);
    out << "iter,penalized_loglik\n";
    for (size_t i = 0; i < trace.size(); ++i) out << i << ',' << trace[i] << '\n';
}

MoEParams load_truth_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    // either a simulation spec ({"params": ...}) or a saved model
    if (text.find("\"params\"") != std::string::npos)
        return sim_spec_from_json(text).true_params;
    return model_from_json(text).params;
}

struct ReplicateMetrics {
    MoEParams aligned;
    SparsityReport sparsity;
    double crate = 0.0, ari = 0.0, sigma_hat = 0.0;
};

ReplicateMetrics evaluate_against_truth(const MoEParams& fitted, const MoEParams& truth,
                                        const Dataset* data, const std::vector<int>* labels) {
    ReplicateMetrics m;
    m.aligned = align_components(fitted, truth);
    m.sparsity = sensitivity_specificity(m.aligned, truth);
    m.sigma_hat = m.aligned.sigmas.mean();
    if (data && labels) {
        const Responsibilities tau = responsibilities(*data, m.aligned);
        const std::vector<int> est = hard_assign(tau);
        m.crate = correct_classification_rate(est, *labels);
        m.ari = adjusted_rand_index(est, *labels);
    }
    return m;
}

int cmd_simulate(const std::string& spec_arg, int n, std::uint64_t seed, bool n_set,
                 bool seed_set, const std::string& out_path, const std::string& labels_path,
                 const std::string& spec_out) {
    SimulationSpec spec;
    if (spec_arg == "builtin:paper-sim") {
        spec = reference_sim_spec();
    } else {
        std::ifstream in(spec_arg);
        if (!in) throw ConfigError("cannot open spec '" + spec_arg + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        spec = sim_spec_from_json(ss.str());
    }
    if (n_set) spec.n = n;
    if (seed_set) spec.rng_seed = seed;
    spec.validate();
    const SimulatedData sim = simulate(spec);
    write_dataset_csv(sim.data, out_path);
    if (!labels_path.empty()) write_labels_csv(sim.labels, labels_path);
    if (!spec_out.empty()) {
        auto out = open_out(spec_out);
        out << sim_spec_to_json(spec) << '\n';
    }
    std::cout << "wrote " << sim.data.n() << " rows, " << sim.data.p()
              << " predictors to " << out_path << "\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& response, int K,
            double lambda, double gamma, const RhoFlag& rho, const std::string& solver,
            bool standardize, std::uint64_t seed, int starts, const std::string& init,
            int max_iters, double tol, int inner, const std::string& sigma_mode,
            const std::string& out_path, const std::string& trace_path) {
    std::vector<std::string> warnings;
    const Dataset data = load_csv(data_path, response, standardize, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    Hyperparams hp;
    hp.K = K;
    hp.lambda = lambda;
    hp.gamma = gamma;
    hp.rho = rho.resolve(data.n());
    hp.solver = solver_from_string(solver);

    FitOptions opts;
    opts.rng_seed = seed;
    opts.n_starts = starts;
    opts.max_em_iters = max_iters;
    opts.rel_tol = tol;
    opts.inner_iters = inner;
    opts.sigma_mode = sigma_mode_from_string(sigma_mode);
    opts.init_strategy = (init == "kmeans") ? InitStrategy::KMeansSeeded
                                            : InitStrategy::RandomResponsibilities;

    const FitResult fr = fit(data, hp, opts);
    print_fit_report(std::cout, fr, hp, data.n());
    if (!out_path.empty()) {
        ModelFile model{fr.params, hp, opts.sigma_mode, data.standardization};
        save_model(model, out_path);
    }
    if (!trace_path.empty()) write_trace_csv(fr.objective_trace, trace_path);
    return 0;
}

int cmd_select(const std::string& data_path, const std::string& response,
               const std::string& k_set, const std::string& grid_size, double max_lambda,
               double max_gamma, const RhoFlag& rho, const std::string& solver,
               bool standardize, std::uint64_t seed, int starts, int workers,
               const std::string& sigma_mode, const std::string& scores_path,
               const std::string& out_path) {
    std::vector<std::string> warnings;
    const Dataset data = load_csv(data_path, response, standardize, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";

    const std::vector<int> sizes = parse_int_list(grid_size, "--grid-size");
    if (sizes.size() != 2) throw ConfigError("--grid-size expects m1,m2");
    GridSpec grid = build_grid(data.n(), sizes[0], sizes[1], max_lambda, max_gamma);
    grid.K_set = parse_int_list(k_set, "--K-set");
    if (rho.raw != "auto") grid.rho = rho.resolve(data.n());

    FitOptions opts;
    opts.rng_seed = seed;
    opts.n_starts = starts;
    opts.sigma_mode = sigma_mode_from_string(sigma_mode);

    const SelectionResult sel = select(data, grid, solver_from_string(solver), opts, workers);
    for (const auto& msg : sel.failures) std::cerr << "cell failed: " << msg << "\n";
    if (!scores_path.empty()) {
        auto out = open_out(scores_path);
        out << score_table_csv(sel.table);
    }
    std::cout << "selected K=" << sel.best.K << " lambda=" << sel.best.lambda
              << " gamma=" << sel.best.gamma << " rho=" << sel.best.rho
              << " bic=" << modified_bic(sel.best_fit, data.n()) << "\n";
    print_fit_report(std::cout, sel.best_fit, sel.best, data.n());
    if (!out_path.empty()) {
        ModelFile model{sel.best_fit.params, sel.best, opts.sigma_mode, data.standardization};
        save_model(model, out_path);
    }
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& response, const std::string& out_path,
                const std::string& assign_path) {
    const ModelFile model = load_model(model_path);
    MatrixXd X = load_predictors(data_path, response);
    if (model.standardization) apply_standardization(X, *model.standardization);
    if (X.cols() != model.params.n_features())
        throw ContractViolation("prediction data has " + std::to_string(X.cols()) +
                                " predictors, model expects " +
                                std::to_string(model.params.n_features()));
    const VectorXd yhat = predict_all(X, model.params);
    auto out = open_out(out_path);
    out << "prediction\n";
    for (Eigen::Index i = 0; i < yhat.size(); ++i) out << yhat(i) << '\n';
    if (!assign_path.empty()) {
        // Bayes allocation needs the observed response
        Dataset data = load_csv(data_path, response, false);
        if (model.standardization) apply_standardization(data.X, *model.standardization);
        write_labels_csv(hard_assign(responsibilities(data, model.params)), assign_path);
    }
    std::cout << "wrote " << yhat.size() << " predictions to " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& truth_path,
                 const std::string& data_path, const std::string& response,
                 const std::string& labels_path, const std::string& out_path) {
    const ModelFile model = load_model(model_path);
    const MoEParams truth = load_truth_params(truth_path);

    Dataset data;
    std::vector<int> labels;
    const bool with_clustering = !data_path.empty() && !labels_path.empty();
    if (with_clustering) {
        data = load_csv(data_path, response, false);
        labels = read_labels_csv(labels_path);
        if (static_cast<int>(labels.size()) != data.n())
            throw ContractViolation("labels and data row counts differ");
    }
    const ReplicateMetrics m = evaluate_against_truth(
        model.params, truth, with_clustering ? &data : nullptr,
        with_clustering ? &labels : nullptr);

    auto out = open_out(out_path);
    out << "metric,block,component,index,value\n";
    for (size_t k = 0; k < m.sparsity.experts.size(); ++k) {
        const auto& b = m.sparsity.experts[k];
        if (b.s1) out << "s1,expert," << (k + 1) << ",," << *b.s1 << "\n";
        if (b.s2) out << "s2,expert," << (k + 1) << ",," << *b.s2 << "\n";
    }
    for (size_t k = 0; k < m.sparsity.gates.size(); ++k) {
        const auto& b = m.sparsity.gates[k];
        if (b.s1) out << "s1,gate," << (k + 1) << ",," << *b.s1 << "\n";
        if (b.s2) out << "s2,gate," << (k + 1) << ",," << *b.s2 << "\n";
    }
    if (with_clustering) {
        out << "crate,,,," << m.crate << "\n";
        out << "ari,,,," << m.ari << "\n";
    }
    out << "sigma_hat,,,," << m.sigma_hat << "\n";
    const auto coef = coefficient_errors({m.aligned}, truth);
    for (const auto& c : coef)
        out << "coef_error," << c.block << ',' << c.component << ',' << c.index << ','
            << (c.mean - c.truth) << "\n";
    std::cout << "wrote metrics to " << out_path << "\n";
    return 0;
}

int cmd_replicate(int replicates, int n, std::uint64_t seed, double lambda, double gamma,
                  const RhoFlag& rho, const std::string& solver, const std::string& sigma_mode,
                  int starts, int workers, const std::string& out_path,
                  const std::string& coef_path, const std::string& per_replicate_path) {
    if (replicates < 1) throw ConfigError("--replicates must be >= 1");
    const SimulationSpec base = reference_sim_spec(n);
    const MoEParams& truth = base.true_params;

    Hyperparams hp;
    hp.K = truth.n_components();
    hp.lambda = lambda;
    hp.gamma = gamma;
    hp.rho = rho.resolve(n);
    hp.solver = solver_from_string(solver);

    FitOptions opts;
    opts.n_starts = starts;
    opts.sigma_mode = sigma_mode_from_string(sigma_mode);

    std::vector<ReplicateMetrics> metrics(replicates);
    detail::parallel_for(replicates, workers, [&](int r) {
        SimulationSpec spec = base;
        spec.rng_seed = seed + static_cast<std::uint64_t>(r) + 1;
        const SimulatedData sim = simulate(spec);
        FitOptions ro = opts;
        ro.rng_seed = seed + 7919ULL * (r + 1);
        const FitResult fr = fit(sim.data, hp, ro);
        metrics[r] = evaluate_against_truth(fr.params, truth, &sim.data, &sim.labels);
    });

    auto mean_sd = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        const double sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1.0)) : 0.0;
        return std::pair<double, double>(m, sd);
    };

    auto out = open_out(out_path);
    out << "metric,block,component,mean,sd\n";
    auto emit_block = [&](const std::string& metric, const std::string& block, int comp,
                          auto getter) {
        std::vector<double> vals;
        for (const auto& m : metrics) {
            const auto v = getter(m);
            if (v) vals.push_back(*v);
        }
        if (vals.empty()) return;
        const auto [mean, sd] = mean_sd(vals);
        out << metric << ',' << block << ',' << comp << ',' << mean << ',' << sd << "\n";
    };
    const int K = truth.n_components();
    for (int k = 0; k < K; ++k) {
        emit_block("s1", "expert", k + 1,
                   [k](const ReplicateMetrics& m) { return m.sparsity.experts[k].s1; });
        emit_block("s2", "expert", k + 1,
                   [k](const ReplicateMetrics& m) { return m.sparsity.experts[k].s2; });
    }
    for (int k = 0; k < K - 1; ++k) {
        emit_block("s1", "gate", k + 1,
                   [k](const ReplicateMetrics& m) { return m.sparsity.gates[k].s1; });
        emit_block("s2", "gate", k + 1,
                   [k](const ReplicateMetrics& m) { return m.sparsity.gates[k].s2; });
    }
    auto emit_scalar = [&](const std::string& metric, auto getter) {
        std::vector<double> vals;
        for (const auto& m : metrics) vals.push_back(getter(m));
        const auto [mean, sd] = mean_sd(vals);
        out << metric << ",,," << mean << ',' << sd << "\n";
    };
    emit_scalar("crate", [](const ReplicateMetrics& m) { return m.crate; });
    emit_scalar("ari", [](const ReplicateMetrics& m) { return m.ari; });
    emit_scalar("sigma_hat", [](const ReplicateMetrics& m) { return m.sigma_hat; });

    if (!coef_path.empty()) {
        std::vector<MoEParams> aligned;
        aligned.reserve(metrics.size());
        for (const auto& m : metrics) aligned.push_back(m.aligned);
        const auto stats = coefficient_errors(aligned, truth);
        auto cout_file = open_out(coef_path);
        cout_file << "block,component,index,truth,mean,sd,mse\n";
        for (const auto& c : stats)
            cout_file << c.block << ',' << c.component << ',' << c.index << ',' << c.truth
                      << ',' << c.mean << ',' << c.sd << ',' << c.mse << "\n";
    }
    if (!per_replicate_path.empty()) {
        auto per = open_out(per_replicate_path);
        per << "replicate,metric,block,component,value\n";
        for (int r = 0; r < replicates; ++r) {
            const ReplicateMetrics& m = metrics[r];
            for (size_t k = 0; k < m.sparsity.experts.size(); ++k) {
                const auto& b = m.sparsity.experts[k];
                if (b.s1) per << (r + 1) << ",s1,expert," << (k + 1) << ',' << *b.s1 << "\n";
                if (b.s2) per << (r + 1) << ",s2,expert," << (k + 1) << ',' << *b.s2 << "\n";
            }
            for (size_t k = 0; k < m.sparsity.gates.size(); ++k) {
                const auto& b = m.sparsity.gates[k];
                if (b.s1) per << (r + 1) << ",s1,gate," << (k + 1) << ',' << *b.s1 << "\n";
                if (b.s2) per << (r + 1) << ",s2,gate," << (k + 1) << ',' << *b.s2 << "\n";
            }
            per << (r + 1) << ",crate,,," << m.crate << "\n";
            per << (r + 1) << ",ari,,," << m.ari << "\n";
            per << (r + 1) << ",sigma_hat,,," << m.sigma_hat << "\n";
        }
    }
    std::cout << "wrote replicate summary to " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized mixture-of-experts regression: penalized EM fitting, "
                 "tuning selection and evaluation"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
    std::string sim_spec = "builtin:paper-sim", sim_out = "data.csv", sim_labels, sim_spec_out;
    int sim_n = 300;
    std::uint64_t sim_seed = 0;
    sim->add_option("--spec", sim_spec, "spec json path or builtin:paper-sim");
    auto* sim_n_opt = sim->add_option("--n", sim_n, "number of rows");
    auto* sim_seed_opt = sim->add_option("--seed", sim_seed, "rng seed");
    sim->add_option("--out", sim_out, "output data csv");
    sim->add_option("--labels", sim_labels, "output labels csv");
    sim->add_option("--spec-out", sim_spec_out, "write the resolved spec json");

    // fit
    auto* fitc = app.add_subcommand("fit", "Fit a penalized mixture-of-experts model");
    std::string fit_data, fit_response = "y", fit_solver = "ca", fit_init = "random";
    std::string fit_sigma = "per-component", fit_out = "model.json", fit_trace;
    RhoFlag fit_rho;
    int fit_K = 2, fit_starts = 5, fit_max_iters = 1000, fit_inner = 10;
    double fit_lambda = 0.0, fit_gamma = 0.0, fit_tol = 1e-6;
    bool fit_std = false;
    std::uint64_t fit_seed = 0;
    fitc->add_option("--data", fit_data, "training csv")->required();
    fitc->add_option("--response", fit_response, "response column name");
    fitc->add_option("--K", fit_K, "number of experts");
    fitc->add_option("--lambda", fit_lambda, "expert lasso penalty");
    fitc->add_option("--gamma", fit_gamma, "gate lasso penalty");
    fitc->add_option("--rho", fit_rho.raw, "gate ridge penalty or 'auto' (0.1 log n)");
    fitc->add_option("--solver", fit_solver, "mm|ca|pn");
    fitc->add_flag("--standardize", fit_std, "standardize predictor columns");
    fitc->add_option("--seed", fit_seed, "rng seed");
    fitc->add_option("--starts", fit_starts, "number of EM starts");
    fitc->add_option("--init", fit_init, "random|kmeans");
    fitc->add_option("--max-iters", fit_max_iters, "EM iteration cap");
    fitc->add_option("--tol", fit_tol, "relative objective tolerance");
    fitc->add_option("--inner-iters", fit_inner, "M-step sweep cap");
    fitc->add_option("--sigma-mode", fit_sigma, "per-component|shared");
    fitc->add_option("--out", fit_out, "output model json");
    fitc->add_option("--trace", fit_trace, "objective trace csv");

    // select
    auto* selc = app.add_subcommand("select", "Grid search with the modified BIC");
    std::string sel_data, sel_response = "y", sel_kset = "1,2,3", sel_grid = "5,5";
    std::string sel_solver = "ca", sel_sigma = "per-component";
    std::string sel_scores = "scores.csv", sel_out = "model.json";
    RhoFlag sel_rho;
    double sel_max_lambda = -1.0, sel_max_gamma = -1.0;
    int sel_starts = 5, sel_workers = 0;
    bool sel_std = false;
    std::uint64_t sel_seed = 0;
    selc->add_option("--data", sel_data, "training csv")->required();
    selc->add_option("--response", sel_response, "response column name");
    selc->add_option("--K-set", sel_kset, "comma list of K values");
    selc->add_option("--grid-size", sel_grid, "m1,m2 grid sizes");
    selc->add_option("--max-lambda", sel_max_lambda, "lambda grid maximum (default sqrt(n))");
    selc->add_option("--max-gamma", sel_max_gamma, "gamma grid maximum (default sqrt(n))");
    selc->add_option("--rho", sel_rho.raw, "gate ridge penalty or 'auto'");
    selc->add_option("--solver", sel_solver, "mm|ca|pn");
    selc->add_flag("--standardize", sel_std, "standardize predictor columns");
    selc->add_option("--seed", sel_seed, "rng seed");
    selc->add_option("--starts", sel_starts, "EM starts per cell");
    selc->add_option("--workers", sel_workers, "worker threads (0 = hardware)");
    selc->add_option("--sigma-mode", sel_sigma, "per-component|shared");
    selc->add_option("--scores", sel_scores, "score table csv");
    selc->add_option("--out", sel_out, "best model json");

    // predict
    auto* prec = app.add_subcommand("predict", "Apply a saved model to new rows");
    std::string pre_model, pre_data, pre_response = "y", pre_out = "predictions.csv";
    std::string pre_assign;
    prec->add_option("--model", pre_model, "model json")->required();
    prec->add_option("--data", pre_data, "input csv")->required();
    prec->add_option("--response", pre_response, "response column to ignore if present");
    prec->add_option("--out", pre_out, "output predictions csv");
    prec->add_option("--assign", pre_assign,
                     "also write hard cluster assignments (requires the response column)");

    // evaluate
    auto* evc = app.add_subcommand("evaluate", "Compare a model against a known truth");
    std::string ev_model, ev_truth, ev_data, ev_response = "y", ev_labels;
    std::string ev_out = "metrics.csv";
    evc->add_option("--model", ev_model, "model json")->required();
    evc->add_option("--truth", ev_truth, "truth spec or model json")->required();
    evc->add_option("--data", ev_data, "data csv (for clustering metrics)");
    evc->add_option("--response", ev_response, "response column name");
    evc->add_option("--labels", ev_labels, "true labels csv");
    evc->add_option("--out", ev_out, "metrics csv");

    // replicate
    auto* repc = app.add_subcommand(
        "replicate", "Replicate study on the built-in design: simulate, fit, aggregate");
    int rep_R = 20, rep_n = 300, rep_starts = 5, rep_workers = 0;
    double rep_lambda = 0.0, rep_gamma = 0.0;
    RhoFlag rep_rho;
    std::string rep_solver = "ca", rep_sigma = "shared", rep_out = "summary.csv", rep_coef;
    std::string rep_per;
    std::uint64_t rep_seed = 0;
    repc->add_option("--replicates", rep_R, "number of replicates");
    repc->add_option("--n", rep_n, "rows per replicate");
    repc->add_option("--seed", rep_seed, "base rng seed");
    repc->add_option("--lambda", rep_lambda, "expert lasso penalty");
    repc->add_option("--gamma", rep_gamma, "gate lasso penalty");
    repc->add_option("--rho", rep_rho.raw, "gate ridge penalty or 'auto'");
    repc->add_option("--solver", rep_solver, "mm|ca|pn");
    repc->add_option("--sigma-mode", rep_sigma, "per-component|shared");
    repc->add_option("--starts", rep_starts, "EM starts per fit");
    repc->add_option("--workers", rep_workers, "worker threads (0 = hardware)");
    repc->add_option("--out", rep_out, "summary csv");
    repc->add_option("--coef", rep_coef, "per-coefficient stats csv");
    repc->add_option("--per-replicate", rep_per, "per-replicate metric rows csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_spec, sim_n, sim_seed, sim_n_opt->count() > 0,
                                sim_seed_opt->count() > 0, sim_out, sim_labels, sim_spec_out);
        if (fitc->parsed())
            return cmd_fit(fit_data, fit_response, fit_K, fit_lambda, fit_gamma, fit_rho,
                           fit_solver, fit_std, fit_seed, fit_starts, fit_init, fit_max_iters,
                           fit_tol, fit_inner, fit_sigma, fit_out, fit_trace);
        if (selc->parsed())
            return cmd_select(sel_data, sel_response, sel_kset, sel_grid, sel_max_lambda,
                              sel_max_gamma, sel_rho, sel_solver, sel_std, sel_seed,
                              sel_starts, sel_workers, sel_sigma, sel_scores, sel_out);
        if (prec->parsed())
            return cmd_predict(pre_model, pre_data, pre_response, pre_out, pre_assign);
        if (evc->parsed())
            return cmd_evaluate(ev_model, ev_truth, ev_data, ev_response, ev_labels, ev_out);
        if (repc->parsed())
            return cmd_replicate(rep_R, rep_n, rep_seed, rep_lambda, rep_gamma, rep_rho,
                                 rep_solver, rep_sigma, rep_starts, rep_workers, rep_out,
                                 rep_coef, rep_per);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const rmoe::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ContractViolation& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return 0;
}
