#include "rmoe/data_io.hpp"

#include "rmoe/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace rmoe {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

json vec_to_json(const VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

json mat_to_json(const MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

VectorXd vec_from_json(const json& a, const char* field) {
    if (!a.is_array()) throw ParseError(std::string("model json: ") + field + " must be an array");
    VectorXd v(a.size());
    for (size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
    return v;
}

MatrixXd mat_from_json(const json& a, const char* field) {
    if (!a.is_array()) throw ParseError(std::string("model json: ") + field + " must be an array");
    const size_t rows = a.size();
    size_t cols = 0;
    if (rows > 0) cols = a[0].size();
    MatrixXd m(rows, cols);
    for (size_t i = 0; i < rows; ++i) {
        if (a[i].size() != cols)
            throw ParseError(std::string("model json: ragged matrix in ") + field);
        for (size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j].get<double>();
    }
    return m;
}

json params_to_json(const MoEParams& params) {
    json j;
    j["K"] = params.n_components();
    j["p"] = params.n_features();
    j["sigma_mode"] = to_string(params.shared_sigma() ? SigmaMode::Shared
                                                      : SigmaMode::PerComponent);
    j["gate_intercepts"] = vec_to_json(params.gate_intercepts);
    j["gate_weights"] = mat_to_json(params.gate_weights);
    j["expert_intercepts"] = vec_to_json(params.expert_intercepts);
    j["expert_weights"] = mat_to_json(params.expert_weights);
    j["sigmas"] = vec_to_json(params.sigmas);
    return j;
}

MoEParams params_from_json(const json& j) {
    MoEParams params;
    params.gate_intercepts = vec_from_json(j.at("gate_intercepts"), "gate_intercepts");
    params.gate_weights = mat_from_json(j.at("gate_weights"), "gate_weights");
    params.expert_intercepts = vec_from_json(j.at("expert_intercepts"), "expert_intercepts");
    params.expert_weights = mat_from_json(j.at("expert_weights"), "expert_weights");
    params.sigmas = vec_from_json(j.at("sigmas"), "sigmas");
    const int K = j.at("K").get<int>();
    const int p = j.at("p").get<int>();
    if (params.n_components() != K || params.n_features() != p)
        throw ParseError("model json: K/p fields disagree with parameter shapes");
    if (params.gate_weights.rows() == K - 1 && params.gate_weights.cols() == 0 && p > 0)
        params.gate_weights.resize(K - 1, p); // empty-row matrices lose their width
    params.validate();
    return params;
}

} // namespace

void SimulationSpec::validate() const {
    if (n < 1) throw ContractViolation("SimulationSpec: n must be >= 1");
    if (!(ar_corr >= 0.0 && ar_corr < 1.0))
        throw ContractViolation("SimulationSpec: ar_corr must be in [0, 1)");
    true_params.validate();
}

SimulatedData simulate(const SimulationSpec& spec) {
    spec.validate();
    const int n = spec.n;
    const int p = spec.true_params.n_features();
    const int K = spec.true_params.n_components();
    std::mt19937_64 rng(spec.rng_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SimulatedData out;
    out.data.X.resize(n, p);
    out.data.y.resize(n);
    out.labels.resize(n);
    const double phi = spec.ar_corr;
    const double innovation = std::sqrt(1.0 - phi * phi);
    for (int i = 0; i < n; ++i) {
        // AR(1) sequential draw realizes corr(x_j, x_j') = phi^{|j-j'|} exactly
        out.data.X(i, 0) = normal(rng);
        for (int j = 1; j < p; ++j)
            out.data.X(i, j) = phi * out.data.X(i, j - 1) + innovation * normal(rng);

        const VectorXd pi = gating_probs(out.data.X.row(i).transpose(), spec.true_params);
        const double u = unif(rng);
        int z = K - 1;
        double acc = 0.0;
        for (int k = 0; k < K; ++k) {
            acc += pi(k);
            if (u <= acc) {
                z = k;
                break;
            }
        }
        out.labels[i] = z + 1;
        const double mean = spec.true_params.expert_intercepts(z) +
                            spec.true_params.expert_weights.row(z).dot(out.data.X.row(i));
        out.data.y(i) = mean + spec.true_params.sigma(z) * normal(rng);
    }
    return out;
}

SimulationSpec reference_sim_spec(int n, std::uint64_t seed) {
    SimulationSpec spec;
    spec.n = n;
    spec.ar_corr = 0.5;
    spec.rng_seed = seed;
    MoEParams& t = spec.true_params;
    t = MoEParams::zeros(2, 6, SigmaMode::Shared);
    t.expert_intercepts << 0.0, 0.0;
    t.expert_weights.row(0) << 0.0, 1.5, 0.0, 0.0, 0.0, 1.0;
    t.expert_weights.row(1) << 1.0, -1.5, 0.0, 0.0, 2.0, 0.0;
    t.gate_intercepts << 1.0;
    t.gate_weights.row(0) << 2.0, 0.0, 0.0, -1.0, 0.0, 0.0;
    t.sigmas << 1.0;
    return spec;
}

Dataset load_csv(const std::string& path, const std::string& response_column,
                 bool standardize, std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("load_csv: empty file '" + path + "'");
    const std::vector<std::string> header = split_csv_line(line);
    int y_col = -1;
    for (size_t c = 0; c < header.size(); ++c)
        if (header[c] == response_column) y_col = static_cast<int>(c);
    if (y_col < 0)
        throw ConfigError("load_csv: response column '" + response_column + "' not found");
    const int width = static_cast<int>(header.size());
    if (width < 2) throw ParseError("load_csv: need at least one predictor column");

    std::vector<std::vector<double>> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split_csv_line(line);
        if (static_cast<int>(cells.size()) != width)
            throw ParseError("load_csv: row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(width));
        std::vector<double> vals(width);
        for (int c = 0; c < width; ++c) {
            const std::string& cell = cells[c];
            char* end = nullptr;
            vals[c] = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size())
                throw ParseError("load_csv: non-numeric cell at row " +
                                 std::to_string(line_no) + ", column '" + header[c] + "'");
        }
        rows.push_back(std::move(vals));
    }
    if (rows.empty()) throw ParseError("load_csv: no data rows in '" + path + "'");

    Dataset data;
    const int n = static_cast<int>(rows.size());
    const int p = width - 1;
    data.X.resize(n, p);
    data.y.resize(n);
    for (int i = 0; i < n; ++i) {
        int jx = 0;
        for (int c = 0; c < width; ++c) {
            if (c == y_col)
                data.y(i) = rows[i][c];
            else
                data.X(i, jx++) = rows[i][c];
        }
    }
    if (standardize) {
        Standardization st;
        st.means = VectorXd::Zero(p);
        st.sds = VectorXd::Ones(p);
        for (int j = 0; j < p; ++j) {
            const double mean = data.X.col(j).mean();
            const double sd = n > 1 ? std::sqrt((data.X.col(j).array() - mean).square().sum() /
                                                (n - 1))
                                    : 0.0;
            if (sd > 0.0) {
                data.X.col(j) = (data.X.col(j).array() - mean) / sd;
                st.means(j) = mean;
                st.sds(j) = sd;
            } else if (warnings) {
                const int name_col = j < y_col ? j : j + 1;
                warnings->push_back("column '" + header[name_col] +
                                    "' is constant; left unscaled");
            }
        }
        data.standardization = std::move(st);
    }
    data.validate();
    return data;
}

std::string model_to_json(const ModelFile& model) {
    json j = params_to_json(model.params);
    j["schema_version"] = kSchemaVersion;
    j["sigma_mode"] = to_string(model.sigma_mode);
    j["hyperparams"] = {{"lambda", model.hp.lambda},
                        {"gamma", model.hp.gamma},
                        {"rho", model.hp.rho}};
    if (model.standardization) {
        j["standardization"] = {{"means", vec_to_json(model.standardization->means)},
                                {"sds", vec_to_json(model.standardization->sds)}};
    } else {
        j["standardization"] = nullptr;
    }
    return j.dump(2);
}

ModelFile model_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model json: ") + e.what());
    }
    if (!j.contains("schema_version"))
        throw ParseError("model json: missing schema_version (expected " +
                         std::to_string(kSchemaVersion) + ")");
    const int version = j["schema_version"].get<int>();
    if (version != kSchemaVersion)
        throw ParseError("model json: schema version " + std::to_string(version) +
                         ", this build reads version " + std::to_string(kSchemaVersion));
    ModelFile model;
    model.params = params_from_json(j);
    model.sigma_mode = sigma_mode_from_string(j.at("sigma_mode").get<std::string>());
    const json& hp = j.at("hyperparams");
    model.hp.lambda = hp.at("lambda").get<double>();
    model.hp.gamma = hp.at("gamma").get<double>();
    model.hp.rho = hp.at("rho").get<double>();
    model.hp.K = model.params.n_components();
    if (j.contains("standardization") && !j["standardization"].is_null()) {
        Standardization st;
        st.means = vec_from_json(j["standardization"].at("means"), "standardization.means");
        st.sds = vec_from_json(j["standardization"].at("sds"), "standardization.sds");
        if (st.means.size() != model.params.n_features() ||
            st.sds.size() != model.params.n_features())
            throw ParseError("model json: standardization length mismatch");
        model.standardization = std::move(st);
    }
    return model;
}

void save_model(const ModelFile& model, const std::string& path) {
    model.params.validate();
    std::ofstream out(path);
    if (!out) throw ConfigError("save_model: cannot write '" + path + "'");
    out << model_to_json(model) << '\n';
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("load_model: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

SimulationSpec sim_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("sim spec json: ") + e.what());
    }
    SimulationSpec spec;
    spec.n = j.value("n", 0);
    spec.ar_corr = j.value("ar_corr", 0.5);
    spec.rng_seed = j.value("seed", 0ULL);
    spec.true_params = params_from_json(j.at("params"));
    spec.validate();
    return spec;
}

std::string sim_spec_to_json(const SimulationSpec& spec) {
    json j;
    j["n"] = spec.n;
    j["ar_corr"] = spec.ar_corr;
    j["seed"] = spec.rng_seed;
    j["params"] = params_to_json(spec.true_params);
    return j.dump(2);
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_dataset_csv: cannot write '" + path + "'");
    out.precision(17);
    for (int j = 0; j < data.p(); ++j) out << 'x' << (j + 1) << ',';
    out << "y\n";
    for (int i = 0; i < data.n(); ++i) {
        for (int j = 0; j < data.p(); ++j) out << data.X(i, j) << ',';
        out << data.y(i) << '\n';
    }
}

void write_labels_csv(const std::vector<int>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("write_labels_csv: cannot write '" + path + "'");
    out << "label\n";
    for (int v : labels) out << v << '\n';
}

std::vector<int> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("read_labels_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError("read_labels_csv: empty file");
    std::vector<int> labels;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string cell = trim(line);
        if (cell.empty()) continue;
        char* end = nullptr;
        const long v = std::strtol(cell.c_str(), &end, 10);
        if (end != cell.c_str() + cell.size())
            throw ParseError("read_labels_csv: non-integer label at row " +
                             std::to_string(line_no));
        labels.push_back(static_cast<int>(v));
    }
    return labels;
}

} // namespace rmoe
