// cgclass: program-family classification from static call graphs.
// Ingests textual disassembly listings, trains the embedding/clustering/WL
// kernel/SVM stack, and evaluates or predicts on new listings.

#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cgc/asm/listing.hpp"
#include "cgc/asm/vocabulary.hpp"
#include "cgc/graph/callgraph.hpp"
#include "cgc/pipeline/config.hpp"
#include "cgc/pipeline/metrics.hpp"
#include "cgc/pipeline/pipeline.hpp"
#include "cgc/pipeline/synth.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/fs_io.hpp"

namespace fs = std::filesystem;

namespace {

cgc::PipelineConfig load_config(const std::string& config_path, uint64_t seed_override,
                                bool has_seed, int jobs_override, bool has_jobs) {
    cgc::PipelineConfig cfg;
    if (!config_path.empty()) cfg = cgc::PipelineConfig::from_file(config_path);
    if (has_seed) cfg.seed = seed_override;
    if (has_jobs) cfg.jobs = jobs_override;
    return cfg;
}

std::vector<std::string> listing_paths(const std::string& input) {
    std::vector<std::string> paths;
    if (fs::is_directory(input)) {
        for (const auto& entry : fs::directory_iterator(input))
            if (entry.path().extension() == ".asm") paths.push_back(entry.path().string());
        std::sort(paths.begin(), paths.end());
    } else {
        paths.push_back(input);
    }
    return paths;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"program-family classification from static call graphs"};
    app.require_subcommand(1);

    std::string config_path;
    uint64_t seed = 0;
    int jobs = 0;
    app.add_option("--config", config_path, "pipeline config JSON")->envname("CGCLASS_CONFIG");
    auto* seed_opt = app.add_option("--seed", seed, "override the global seed");
    auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads for per-file stages");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse listings into functions and call graphs");
    std::string ingest_in, ingest_out;
    ingest->add_option("--corpus", ingest_in, "directory of .asm listings")->required();
    ingest->add_option("--out", ingest_out, "output directory")->required();

    // synth-gen
    auto* synth = app.add_subcommand("synth-gen", "generate a synthetic labeled corpus");
    std::string synth_out, synth_spec;
    int synth_families = 4, synth_samples = 50;
    uint64_t synth_seed = 7;
    synth->add_option("--out", synth_out, "corpus output directory")->required();
    synth->add_option("--spec", synth_spec, "family spec JSON (list of specs)");
    synth->add_option("--families", synth_families, "family count for the default specs");
    synth->add_option("--samples", synth_samples, "files per family");
    synth->add_option("--gen-seed", synth_seed, "generator seed");

    // training stages
    auto* train = app.add_subcommand("train", "run the full training pipeline");
    auto* train_ae = app.add_subcommand("train-autoencoder", "stages through autoencoder training");
    auto* embed = app.add_subcommand("embed", "embed training functions with the trained encoder");
    auto* cluster = app.add_subcommand("cluster", "fit mini-batch k-means on the embeddings");
    auto* graph_features =
        app.add_subcommand("graph-features", "label graphs and compute WL features and the kernel");
    auto* train_clf = app.add_subcommand("train-classifier", "grid search and one-vs-all SVM");

    // predict / evaluate / report
    auto* predict = app.add_subcommand("predict", "classify new listings");
    std::string predict_input, predict_out;
    predict->add_option("--input", predict_input, "listing file or directory")->required();
    predict->add_option("--out", predict_out, "write predictions JSONL here");

    auto* evaluate = app.add_subcommand("evaluate", "evaluate the held-out test split");

    auto* report = app.add_subcommand("report", "render a report JSON");
    std::string report_path, report_format = "table";
    report->add_option("--report", report_path, "report.json path")->required();
    report->add_option("--format", report_format, "table|svg");

    CLI11_PARSE(app, argc, argv);

    try {
        if (ingest->parsed()) {
            auto paths = listing_paths(ingest_in);
            cgc::ensure_dir(ingest_out + "/functions");
            cgc::ensure_dir(ingest_out + "/graphs");
            long parsed = 0, failed = 0;
            for (const auto& path : paths) {
                std::string id = fs::path(path).stem().string();
                try {
                    cgc::AsmListing listing = cgc::parse_listing(cgc::read_file(path), path);
                    cgc::ExtractionResult extraction = cgc::extract_functions(listing);
                    if (extraction.functions.empty()) throw cgc::UnparsableFile("no parsable functions");
                    cgc::CallGraph graph = cgc::build_call_graph(extraction.functions, id);
                    cgc::write_file_atomic(ingest_out + "/functions/" + id + ".jsonl",
                                           cgc::function_records_to_jsonl(extraction.functions));
                    cgc::write_json_file(ingest_out + "/graphs/" + id + ".json",
                                         cgc::callgraph_to_json(graph));
                    ++parsed;
                } catch (const cgc::Error& e) {
                    std::cerr << id << ": " << e.what() << "\n";
                    ++failed;
                }
            }
            std::cout << "parsed " << parsed << " files, " << failed << " failed\n";
            return failed > 0 ? 1 : 0;
        }

        if (synth->parsed()) {
            std::vector<cgc::SyntheticFamilySpec> specs;
            if (!synth_spec.empty()) {
                for (const auto& j : cgc::read_json_file(synth_spec))
                    specs.push_back(cgc::SyntheticFamilySpec::from_json(j));
            } else {
                specs = cgc::default_family_specs(synth_families, synth_samples);
            }
            cgc::SyntheticCorpus corpus = cgc::generate_synthetic_corpus(specs, synth_seed);
            cgc::write_synthetic_corpus(corpus, synth_out);
            std::cout << "wrote " << corpus.files.size() << " listings to " << synth_out << "\n";
            return 0;
        }

        cgc::PipelineConfig cfg =
            load_config(config_path, seed, seed_opt->count() > 0, jobs, jobs_opt->count() > 0);
        cgc::Pipeline pipeline(cfg);

        if (train->parsed()) {
            pipeline.run_training();
            std::cout << "training complete; artifacts in " << cfg.paths.model_dir << "\n";
        } else if (train_ae->parsed()) {
            pipeline.stage_split();
            pipeline.stage_ingest();
            pipeline.stage_vocab();
            pipeline.stage_autoencoder();
            std::cout << "autoencoder trained\n";
        } else if (embed->parsed()) {
            pipeline.stage_embed();
            std::cout << "embeddings written\n";
        } else if (cluster->parsed()) {
            pipeline.stage_cluster();
            std::cout << "k-means model written\n";
        } else if (graph_features->parsed()) {
            pipeline.stage_graph_features();
            std::cout << "labeled graphs, WL features and kernel written\n";
        } else if (train_clf->parsed()) {
            pipeline.stage_classifier();
            std::cout << "classifier written\n";
        } else if (predict->parsed()) {
            cgc::PredictOutcome outcome = pipeline.predict_files(listing_paths(predict_input));
            std::string jsonl;
            for (const auto& row : outcome.predictions) {
                nlohmann::json j{{"file_id", row.file_id},
                                 {"family", row.family},
                                 {"probabilities", row.probabilities}};
                jsonl += j.dump();
                jsonl += '\n';
                std::cout << row.file_id << " -> " << row.family << "\n";
            }
            for (const auto& [id, message] : outcome.errors)
                std::cerr << id << ": error: " << message << "\n";
            if (!predict_out.empty()) cgc::write_file_atomic(predict_out, jsonl);
        } else if (evaluate->parsed()) {
            cgc::EvaluationReport result = pipeline.evaluate_test();
            std::cout << cgc::render_report_table(result);
            std::cout << "report written to " << cfg.paths.report_dir << "\n";
        } else if (report->parsed()) {
            cgc::EvaluationReport r = cgc::EvaluationReport::from_json(cgc::read_json_file(report_path));
            if (report_format == "table")
                std::cout << cgc::render_report_table(r);
            else if (report_format == "svg")
                std::cout << cgc::render_confusion_svg(r);
            else
                throw cgc::ConfigError("unknown report format: " + report_format);
        }
    } catch (const cgc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
