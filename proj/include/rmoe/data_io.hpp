#pragma once

#include "rmoe/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rmoe {

/// Simulation design: predictors drawn row-wise from N(0, Sigma) with
/// Sigma_{jj'} = ar_corr^{|j-j'|} (realized by the exact AR(1) sequential
/// construction), labels from the softmax gate, responses from the
/// assigned expert.
struct SimulationSpec {
    int n = 0;
    MoEParams true_params;
    double ar_corr = 0.5;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct SimulatedData {
    Dataset data;
    std::vector<int> labels; // 1-based true components
};

SimulatedData simulate(const SimulationSpec& spec);

/// The built-in two-component reference design (p = 6, sigma = 1):
/// expert 1 (0 | 0, 1.5, 0, 0, 0, 1), expert 2 (0 | 1, -1.5, 0, 0, 2, 0),
/// gate (1 | 2, 0, 0, -1, 0, 0).
SimulationSpec reference_sim_spec(int n = 300, std::uint64_t seed = 0);

/// CSV ingestion: header row required, comma separated, '.' decimal.
/// When standardize is set, non-constant predictor columns are centered
/// and scaled and the (mean, sd) pairs recorded on the Dataset; constant
/// columns are left untouched and reported through `warnings`.
Dataset load_csv(const std::string& path, const std::string& response_column,
                 bool standardize, std::vector<std::string>* warnings = nullptr);

/// Everything needed to reuse a fitted model on new raw data.
struct ModelFile {
    MoEParams params;
    Hyperparams hp;
    SigmaMode sigma_mode = SigmaMode::PerComponent;
    std::optional<Standardization> standardization;
};

/// Versioned JSON model files; numeric fields round-trip bit-exactly and
/// exact zeros stay exact. A wrong schema tag is rejected naming both
/// versions.
void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

std::string model_to_json(const ModelFile& model);
ModelFile model_from_json(const std::string& text);

/// Simulation spec JSON (same parameter layout as the model schema).
SimulationSpec sim_spec_from_json(const std::string& text);
std::string sim_spec_to_json(const SimulationSpec& spec);

void write_dataset_csv(const Dataset& data, const std::string& path);
void write_labels_csv(const std::vector<int>& labels, const std::string& path);
std::vector<int> read_labels_csv(const std::string& path);

} // namespace rmoe
