#pragma once

#include <map>
#include <string>
#include <vector>

#include "cgc/pipeline/config.hpp"
#include "cgc/pipeline/metrics.hpp"
#include "cgc/pipeline/split.hpp"

namespace cgc {

struct PredictionRow {
    std::string file_id;
    std::string family;
    std::map<std::string, double> probabilities;
};

struct PredictOutcome {
    std::vector<PredictionRow> predictions;
    std::vector<std::pair<std::string, std::string>> errors;  // file_id -> message
};

// Stage orchestrator. Every stage reads its inputs from the model directory,
// writes artifacts atomically, and records a manifest with input/output
// hashes so reruns are byte-comparable and stale artifact mixes are
// detectable. Test-split files are never touched before evaluation.
class Pipeline {
public:
    explicit Pipeline(PipelineConfig cfg);

    void stage_split();
    void stage_ingest();
    void stage_vocab();
    void stage_autoencoder();
    void stage_embed();
    void stage_cluster();
    void stage_graph_features();
    void stage_classifier();

    void run_training();

    PredictOutcome predict_files(const std::vector<std::string>& listing_paths) const;

    // Predicts the held-out test split, writes predictions.jsonl plus report
    // files into the report dir, and returns the report.
    EvaluationReport evaluate_test() const;

    // Throws if any training-stage manifest consumed a test-split file.
    void check_leakage() const;

    const PipelineConfig& config() const { return cfg_; }

    // stage timings in milliseconds, in execution order
    const std::vector<std::pair<std::string, double>>& timings() const { return timings_; }

private:
    PipelineConfig cfg_;
    mutable std::vector<std::pair<std::string, double>> timings_;

    std::string model_path(const std::string& name) const;
    std::map<std::string, std::string> read_labels() const;
    DatasetSplit read_split() const;
    std::vector<std::string> parsed_ids() const;  // ingest survivors
    std::vector<std::string> effective(const std::vector<std::string>& ids) const;

    void write_manifest(const std::string& stage,
                        const std::map<std::string, std::string>& inputs,
                        const std::vector<std::string>& output_files) const;
};

}  // namespace cgc
