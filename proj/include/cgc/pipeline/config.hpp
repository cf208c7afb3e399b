#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "cgc/nn/autoencoder.hpp"
#include "cgc/wl/wl_kernel.hpp"

namespace cgc {

struct PipelinePaths {
    std::string corpus_dir;
    std::string model_dir;
    std::string report_dir;
};

struct VocabConfig {
    std::size_t max_size = 20000;
};

struct AutoencoderConfig {
    int hidden_dim = 64;
    int embed_dim = 64;
    double learning_rate = 1e-3;
    int batch_size = 32;
    int epochs = 30;
    int max_len = 300;
    double gradient_clip_norm = 5.0;
    // 0 = use every sequence; otherwise train on a deterministic subsample
    int max_train_sequences = 0;
    bool dedup_sequences = true;

    TrainingConfig training(uint64_t seed) const;
};

struct ClusteringConfig {
    int k = 50;
    int batch_size = 1024;
    int iterations = 200;
    bool normalize_embeddings = false;
};

struct SvmConfig {
    std::vector<double> c_grid = {0.01, 0.1, 1.0, 10.0, 100.0};
    int folds = 3;
    int platt_folds = 3;
    bool normalize_kernel = true;
    // > 0 switches to exp(-gamma * ||phi(G)-phi(G')||^2) over WL features
    double rbf_gamma = 0.0;
};

struct SplitConfig {
    double test_fraction = 0.10;
    double validation_fraction = 0.10;
};

struct PipelineConfig {
    PipelinePaths paths;
    VocabConfig vocab;
    AutoencoderConfig autoencoder;
    ClusteringConfig clustering;
    WlConfig wl;
    SvmConfig svm;
    SplitConfig split;
    uint64_t seed = 20260809;
    int jobs = 1;
    bool keep_multiplicity = false;

    void validate() const;  // ConfigError

    nlohmann::json to_json() const;
    // Unknown keys are rejected.
    static PipelineConfig from_json(const nlohmann::json& j);
    static PipelineConfig from_file(const std::string& path);

    std::string hash() const;
};

}  // namespace cgc
