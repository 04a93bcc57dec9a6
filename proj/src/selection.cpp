#include "rmoe/selection.hpp"

#include "rmoe/detail/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace rmoe {

void GridSpec::validate() const {
    if (K_set.empty() || lambda_grid.empty() || gamma_grid.empty())
        throw ContractViolation("GridSpec: grids must be non-empty");
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()) ||
        !std::is_sorted(gamma_grid.begin(), gamma_grid.end()))
        throw ContractViolation("GridSpec: grids must be sorted ascending");
    for (int k : K_set)
        if (k < 1) throw ContractViolation("GridSpec: K must be >= 1");
    if (rho < 0) throw ContractViolation("GridSpec: rho must be >= 0");
}

GridSpec build_grid(int n, int m1, int m2, double max_lambda, double max_gamma) {
    if (n < 1 || m1 < 1 || m2 < 1) throw ContractViolation("build_grid: bad arguments");
    if (max_lambda <= 0.0) max_lambda = std::sqrt(static_cast<double>(n));
    if (max_gamma <= 0.0) max_gamma = std::sqrt(static_cast<double>(n));
    auto log_spaced = [](double top, int m) {
        std::vector<double> g(m);
        if (m == 1) {
            g[0] = top;
            return g;
        }
        const double lo = std::log(0.01 * top), hi = std::log(top);
        for (int i = 0; i < m; ++i) g[i] = std::exp(lo + (hi - lo) * i / (m - 1));
        return g;
    };
    GridSpec grid;
    grid.K_set = {1, 2, 3};
    grid.lambda_grid = log_spaced(max_lambda, m1);
    grid.gamma_grid = log_spaced(max_gamma, m2);
    grid.rho = 0.1 * std::log(static_cast<double>(n));
    return grid;
}

double modified_bic(const FitResult& fit, int n) {
    if (n < 1) throw ContractViolation("modified_bic: n must be >= 1");
    const int K = fit.params.n_components();
    const int df_total = fit.df + (K - 1) + K + static_cast<int>(fit.params.sigmas.size());
    return fit.final_loglik - df_total * std::log(static_cast<double>(n)) / 2.0;
}

SelectionResult select(const Dataset& data, const GridSpec& grid, Solver solver,
                       const FitOptions& opts, int n_workers) {
    data.validate();
    grid.validate();

    struct Cell {
        int K;
        double lambda, gamma;
    };
    std::vector<Cell> cells;
    for (int K : grid.K_set)
        for (double lam : grid.lambda_grid)
            for (double gam : grid.gamma_grid) cells.push_back({K, lam, gam});

    std::vector<std::optional<ScoreRow>> rows(cells.size());
    std::vector<std::optional<FitResult>> fits(cells.size());
    std::vector<std::string> failures(cells.size());

    detail::parallel_for(static_cast<int>(cells.size()), n_workers, [&](int i) {
        Hyperparams hp;
        hp.K = cells[i].K;
        hp.lambda = cells[i].lambda;
        hp.gamma = cells[i].gamma;
        hp.rho = grid.rho;
        hp.solver = solver;
        try {
            FitResult fr = fit(data, hp, opts);
            ScoreRow row;
            row.K = hp.K;
            row.lambda = hp.lambda;
            row.gamma = hp.gamma;
            row.rho = hp.rho;
            row.loglik = fr.final_loglik;
            const int K = fr.params.n_components();
            row.df = fr.df + (K - 1) + K + static_cast<int>(fr.params.sigmas.size());
            row.bic = modified_bic(fr, data.n());
            row.converged = fr.converged;
            rows[i] = row;
            fits[i] = std::move(fr);
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });

    SelectionResult out;
    int best = -1;
    for (size_t i = 0; i < cells.size(); ++i) {
        if (!rows[i]) {
            std::ostringstream msg;
            msg << "K=" << cells[i].K << " lambda=" << cells[i].lambda
                << " gamma=" << cells[i].gamma << ": " << failures[i];
            out.failures.push_back(msg.str());
            continue;
        }
        out.table.push_back(*rows[i]);
        if (best < 0) {
            best = static_cast<int>(i);
            continue;
        }
        const ScoreRow& a = *rows[i];
        const ScoreRow& b = *rows[best];
        // ties prefer larger lambda, then larger gamma, then smaller K
        const bool better = a.bic > b.bic ||
                            (a.bic == b.bic &&
                             (a.lambda > b.lambda ||
                              (a.lambda == b.lambda &&
                               (a.gamma > b.gamma ||
                                (a.gamma == b.gamma && a.K < b.K)))));
        if (better) best = static_cast<int>(i);
    }
    if (best < 0) throw Error("select: every grid cell failed");

    out.best.K = cells[best].K;
    out.best.lambda = cells[best].lambda;
    out.best.gamma = cells[best].gamma;
    out.best.rho = grid.rho;
    out.best.solver = solver;
    out.best_fit = std::move(*fits[best]);
    return out;
}

std::string score_table_csv(const std::vector<ScoreRow>& table) {
    std::ostringstream os;
    os.precision(17);
    os << "K,lambda,gamma,rho,loglik,df,bic,converged\n";
    for (const auto& r : table)
        os << r.K << ',' << r.lambda << ',' << r.gamma << ',' << r.rho << ',' << r.loglik
           << ',' << r.df << ',' << r.bic << ',' << (r.converged ? 1 : 0) << '\n';
    return os.str();
}

} // namespace rmoe
