#include "rmoe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace rmoe {

namespace {

void check_label_args(const std::vector<int>& a, const std::vector<int>& b,
                      const char* op) {
    if (a.size() != b.size() || a.empty())
        throw ContractViolation(std::string(op) + ": label vectors must have equal nonzero length");
}

// labels remapped to 0..G-1 in first-occurrence order
std::vector<int> canonical_labels(const std::vector<int>& a, int& n_groups) {
    std::map<int, int> ids;
    std::vector<int> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        auto [it, inserted] = ids.emplace(a[i], static_cast<int>(ids.size()));
        out[i] = it->second;
    }
    n_groups = static_cast<int>(ids.size());
    return out;
}

} // namespace

MoEParams align_components(const MoEParams& est, const MoEParams& ref) {
    est.validate();
    ref.validate();
    const int K = est.n_components();
    const int p = est.n_features();
    if (K != ref.n_components() || p != ref.n_features())
        throw ContractViolation("align_components: K or p mismatch");

    std::vector<int> perm(K), best_perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    best_perm = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (int k = 0; k < K; ++k) {
            const int m = perm[k];
            const double d0 = est.expert_intercepts(m) - ref.expert_intercepts(k);
            cost += d0 * d0 +
                    (est.expert_weights.row(m) - ref.expert_weights.row(k)).squaredNorm();
        }
        if (cost < best_cost) {
            best_cost = cost;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    MoEParams out = est;
    for (int k = 0; k < K; ++k) {
        const int m = best_perm[k];
        out.expert_intercepts(k) = est.expert_intercepts(m);
        out.expert_weights.row(k) = est.expert_weights.row(m);
        if (!est.shared_sigma()) out.sigmas(k) = est.sigmas(m);
    }
    // gate rows in the extended parameterization (row K = 0), re-normalized
    // against the new reference component so w_K = 0 again
    auto ext_intercept = [&](int m) { return m == K - 1 ? 0.0 : est.gate_intercepts(m); };
    auto ext_row = [&](int m) -> Eigen::RowVectorXd {
        return m == K - 1 ? Eigen::RowVectorXd::Zero(p).eval()
                          : Eigen::RowVectorXd(est.gate_weights.row(m));
    };
    const int ref_comp = best_perm[K - 1];
    for (int k = 0; k < K - 1; ++k) {
        out.gate_intercepts(k) = ext_intercept(best_perm[k]) - ext_intercept(ref_comp);
        out.gate_weights.row(k) = ext_row(best_perm[k]) - ext_row(ref_comp);
    }
    return out;
}

SparsityReport sensitivity_specificity(const MoEParams& est, const MoEParams& truth) {
    const int K = truth.n_components();
    const int p = truth.n_features();
    if (est.n_components() != K || est.n_features() != p)
        throw ContractViolation("sensitivity_specificity: K or p mismatch");

    auto block = [](const Eigen::RowVectorXd& e, const Eigen::RowVectorXd& t) {
        int zeros = 0, zeros_hit = 0, nonzeros = 0, nonzeros_hit = 0;
        for (Eigen::Index j = 0; j < t.size(); ++j) {
            if (t(j) == 0.0) {
                ++zeros;
                if (e(j) == 0.0) ++zeros_hit;
            } else {
                ++nonzeros;
                if (e(j) != 0.0) ++nonzeros_hit;
            }
        }
        BlockSparsity b;
        if (zeros > 0) b.s1 = static_cast<double>(zeros_hit) / zeros;
        if (nonzeros > 0) b.s2 = static_cast<double>(nonzeros_hit) / nonzeros;
        return b;
    };

    SparsityReport report;
    for (int k = 0; k < K; ++k)
        report.experts.push_back(block(est.expert_weights.row(k), truth.expert_weights.row(k)));
    for (int k = 0; k < K - 1; ++k)
        report.gates.push_back(block(est.gate_weights.row(k), truth.gate_weights.row(k)));
    return report;
}

double correct_classification_rate(const std::vector<int>& est_labels,
                                   const std::vector<int>& true_labels) {
    check_label_args(est_labels, true_labels, "correct_classification_rate");
    int ga = 0, gb = 0;
    const std::vector<int> a = canonical_labels(est_labels, ga);
    const std::vector<int> b = canonical_labels(true_labels, gb);
    const int G = std::max(ga, gb);
    if (G > 10)
        throw ContractViolation("correct_classification_rate: too many labels for "
                                "permutation search");
    std::vector<int> perm(G);
    std::iota(perm.begin(), perm.end(), 0);
    const double n = static_cast<double>(a.size());
    double best = 0.0;
    do {
        int hits = 0;
        for (size_t i = 0; i < a.size(); ++i)
            if (perm[a[i]] == b[i]) ++hits;
        best = std::max(best, hits / n);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

double adjusted_rand_index(const std::vector<int>& a_in, const std::vector<int>& b_in) {
    check_label_args(a_in, b_in, "adjusted_rand_index");
    int ga = 0, gb = 0;
    const std::vector<int> a = canonical_labels(a_in, ga);
    const std::vector<int> b = canonical_labels(b_in, gb);
    const long long n = static_cast<long long>(a.size());

    std::vector<std::vector<long long>> cont(ga, std::vector<long long>(gb, 0));
    for (size_t i = 0; i < a.size(); ++i) ++cont[a[i]][b[i]];

    auto pairs2 = [](long long c) { return c * (c - 1) / 2; };
    long long sum_idx = 0, sum_a = 0, sum_b = 0;
    std::vector<long long> row_sum(ga, 0), col_sum(gb, 0);
    for (int i = 0; i < ga; ++i)
        for (int j = 0; j < gb; ++j) {
            sum_idx += pairs2(cont[i][j]);
            row_sum[i] += cont[i][j];
            col_sum[j] += cont[i][j];
        }
    for (int i = 0; i < ga; ++i) sum_a += pairs2(row_sum[i]);
    for (int j = 0; j < gb; ++j) sum_b += pairs2(col_sum[j]);
    const long long c2n = pairs2(n);

    // integer pair counts, one final division: ARI is exact on exact inputs
    const long double num =
        2.0L * (static_cast<long double>(c2n) * sum_idx -
                static_cast<long double>(sum_a) * sum_b);
    const long double den =
        static_cast<long double>(c2n) * (sum_a + sum_b) -
        2.0L * static_cast<long double>(sum_a) * sum_b;
    if (den == 0.0L) return a == b ? 1.0 : 0.0; // both partitions degenerate
    return static_cast<double>(num / den);
}

std::vector<CoefficientStat> coefficient_errors(const std::vector<MoEParams>& fits,
                                                const MoEParams& truth) {
    if (fits.empty()) throw ContractViolation("coefficient_errors: no fits");
    const int K = truth.n_components();
    const int p = truth.n_features();
    for (const auto& f : fits)
        if (f.n_components() != K || f.n_features() != p)
            throw ContractViolation("coefficient_errors: fit shape mismatch");
    const double R = static_cast<double>(fits.size());

    std::vector<CoefficientStat> stats;
    auto add = [&](const std::string& block, int comp, int index, double truth_v,
                   auto getter) {
        CoefficientStat st;
        st.block = block;
        st.component = comp;
        st.index = index;
        st.truth = truth_v;
        double sum = 0.0, sumsq_err = 0.0;
        for (const auto& f : fits) {
            const double v = getter(f);
            sum += v;
            sumsq_err += (v - truth_v) * (v - truth_v);
        }
        st.mean = sum / R;
        st.mse = sumsq_err / R;
        double ss = 0.0;
        for (const auto& f : fits) {
            const double d = getter(f) - st.mean;
            ss += d * d;
        }
        st.sd = fits.size() > 1 ? std::sqrt(ss / (R - 1.0)) : 0.0;
        stats.push_back(st);
    };

    for (int k = 0; k < K; ++k) {
        add("expert", k + 1, 0, truth.expert_intercepts(k),
            [k](const MoEParams& f) { return f.expert_intercepts(k); });
        for (int j = 0; j < p; ++j)
            add("expert", k + 1, j + 1, truth.expert_weights(k, j),
                [k, j](const MoEParams& f) { return f.expert_weights(k, j); });
    }
    for (int k = 0; k < K - 1; ++k) {
        add("gate", k + 1, 0, truth.gate_intercepts(k),
            [k](const MoEParams& f) { return f.gate_intercepts(k); });
        for (int j = 0; j < p; ++j)
            add("gate", k + 1, j + 1, truth.gate_weights(k, j),
                [k, j](const MoEParams& f) { return f.gate_weights(k, j); });
    }
    const int n_sigma = static_cast<int>(truth.sigmas.size());
    for (int k = 0; k < n_sigma; ++k)
        add("sigma", k + 1, 0, truth.sigmas(k), [k, n_sigma](const MoEParams& f) {
            return f.sigmas.size() == n_sigma ? f.sigmas(k) : f.sigmas(0);
        });
    return stats;
}

PredictionMetrics prediction_metrics(const VectorXd& y, const VectorXd& yhat) {
    if (y.size() != yhat.size() || y.size() == 0)
        throw ContractViolation("prediction_metrics: length mismatch");
    const double n = static_cast<double>(y.size());
    PredictionMetrics out;
    const VectorXd sq = (y - yhat).cwiseAbs2();
    out.mse = sq.mean();
    if (y.size() > 1) {
        out.mse_sd = std::sqrt((sq.array() - out.mse).square().sum() / (n - 1.0));
    }
    const VectorXd yc = y.array() - y.mean();
    const VectorXd hc = yhat.array() - yhat.mean();
    const double vy = yc.squaredNorm(), vh = hc.squaredNorm();
    if (vy > 0.0 && vh > 0.0) {
        const double corr = yc.dot(hc) / std::sqrt(vy * vh);
        out.r2 = corr * corr;
    }
    return out;
}

} // namespace rmoe
