#include "cgc/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "cgc/asm/listing.hpp"
#include "cgc/asm/vocabulary.hpp"
#include "cgc/cluster/labeled_graph.hpp"
#include "cgc/graph/callgraph.hpp"
#include "cgc/io/tensor_container.hpp"
#include "cgc/nn/autoencoder.hpp"
#include "cgc/svm/svm.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/fs_io.hpp"
#include "cgc/util/hash.hpp"
#include "cgc/util/parallel.hpp"
#include "cgc/util/rng.hpp"
#include "cgc/wl/wl_kernel.hpp"

namespace fs = std::filesystem;

namespace cgc {

namespace {

std::string stem_of(const std::string& path) {
    return fs::path(path).stem().string();
}

struct StageTimer {
    std::vector<std::pair<std::string, double>>& sink;
    std::string name;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    ~StageTimer() {
        double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
        sink.emplace_back(name, ms);
    }
};

struct FileFunctions {
    std::string file_id;
    std::vector<FunctionRecord> records;
};

// embeddings for a single file's records, in record order
Eigen::MatrixXd embed_records(const GruAutoencoderModel& model, const Vocabulary& vocab,
                              const std::vector<FunctionRecord>& records, int max_len,
                              bool normalize) {
    Eigen::MatrixXd rows(records.size(), model.hidden_dim);
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto ids = encode_sequence(records[i], vocab, static_cast<std::size_t>(max_len));
        Eigen::VectorXd e = encode(model, ids);
        if (normalize) {
            double n = e.norm();
            if (n > 0.0) e /= n;
        }
        rows.row(static_cast<Eigen::Index>(i)) = e.transpose();
    }
    return rows;
}

std::unordered_map<int, Eigen::VectorXd> vertex_embeddings(const CallGraph& graph,
                                                           const Eigen::MatrixXd& record_rows) {
    std::unordered_map<int, Eigen::VectorXd> out;
    for (const auto& v : graph.vertices)
        if (v.kind == VertexKind::Internal)
            out.emplace(v.id, record_rows.row(v.function_index).transpose());
    return out;
}

}  // namespace

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
}

std::string Pipeline::model_path(const std::string& name) const {
    return cfg_.paths.model_dir + "/" + name;
}

std::map<std::string, std::string> Pipeline::read_labels() const {
    std::string path = cfg_.paths.corpus_dir + "/labels.json";
    nlohmann::json j = read_json_file(path);
    std::map<std::string, std::string> labels;
    for (const auto& [id, family] : j.items()) labels[id] = family.get<std::string>();
    if (labels.empty()) throw EmptyCorpus("no labels in " + path);
    return labels;
}

DatasetSplit Pipeline::read_split() const {
    return DatasetSplit::from_json(read_json_file(model_path("split.json")));
}

std::vector<std::string> Pipeline::parsed_ids() const {
    nlohmann::json j = read_json_file(model_path("ingest/summary.json"));
    return j.at("parsed").get<std::vector<std::string>>();
}

std::vector<std::string> Pipeline::effective(const std::vector<std::string>& ids) const {
    auto parsed = parsed_ids();
    std::set<std::string> ok(parsed.begin(), parsed.end());
    std::vector<std::string> out;
    for (const auto& id : ids)
        if (ok.count(id)) out.push_back(id);
    return out;
}

void Pipeline::write_manifest(const std::string& stage,
                              const std::map<std::string, std::string>& inputs,
                              const std::vector<std::string>& output_files) const {
    std::map<std::string, std::string> outputs;
    for (const auto& rel : output_files) outputs[rel] = hash_file(model_path(rel));
    nlohmann::json j{{"schema", "manifest/1"},
                     {"stage", stage},
                     {"config_hash", cfg_.hash()},
                     {"seed", cfg_.seed},
                     {"inputs", inputs},
                     {"outputs", outputs}};
    write_json_file(model_path("manifests/" + stage + ".json"), j);
}

void Pipeline::stage_split() {
    StageTimer timer{timings_, "split"};
    auto labels = read_labels();
    std::vector<std::pair<std::string, std::string>> id_family(labels.begin(), labels.end());
    DatasetSplit split = split_dataset(id_family, cfg_.split.test_fraction,
                                       cfg_.split.validation_fraction, cfg_.seed);
    ensure_dir(cfg_.paths.model_dir);
    write_json_file(model_path("split.json"), split.to_json());
    write_manifest("split",
                   {{"corpus/labels.json", hash_file(cfg_.paths.corpus_dir + "/labels.json")}},
                   {"split.json"});
}

void Pipeline::stage_ingest() {
    StageTimer timer{timings_, "ingest"};
    auto labels = read_labels();
    DatasetSplit split = read_split();

    // test files are deliberately left untouched until evaluation
    std::vector<std::string> ids = split.train;
    ids.insert(ids.end(), split.validation.begin(), split.validation.end());
    std::sort(ids.begin(), ids.end());

    struct Ingested {
        std::string functions_jsonl;
        nlohmann::json graph;
        std::string error;
        long instruction_lines = 0;
        long skipped_outside_code = 0;
        long indirect_calls = 0;
    };
    std::vector<Ingested> results(ids.size());
    parallel_for(ids.size(), cfg_.jobs, [&](std::size_t i) {
        const std::string& id = ids[i];
        try {
            std::string text = read_file(cfg_.paths.corpus_dir + "/" + id + ".asm");
            AsmListing listing = parse_listing(text, id);
            ExtractionResult extraction = extract_functions(listing);
            if (extraction.functions.empty()) {
                results[i].error = "no parsable functions";
                return;
            }
            CallGraph graph = build_call_graph(extraction.functions, id, cfg_.keep_multiplicity);
            graph.family = labels.count(id) ? std::optional<std::string>(labels.at(id)) : std::nullopt;
            results[i].functions_jsonl = function_records_to_jsonl(extraction.functions);
            results[i].graph = callgraph_to_json(graph);
            results[i].instruction_lines = extraction.instruction_lines;
            results[i].skipped_outside_code = extraction.skipped_outside_code;
            results[i].indirect_calls = extraction.indirect_calls_dropped;
        } catch (const Error& e) {
            results[i].error = e.what();
        }
    });

    std::map<std::string, std::string> inputs;
    inputs["corpus/labels.json"] = hash_file(cfg_.paths.corpus_dir + "/labels.json");
    std::vector<std::string> outputs;
    std::vector<std::string> parsed;
    auto excluded = nlohmann::json::array();
    long instruction_lines = 0, skipped_outside_code = 0, indirect_calls = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const std::string& id = ids[i];
        inputs["corpus/" + id + ".asm"] = hash_file(cfg_.paths.corpus_dir + "/" + id + ".asm");
        if (!results[i].error.empty()) {
            excluded.push_back({{"file_id", id}, {"error", results[i].error}});
            continue;
        }
        write_file_atomic(model_path("ingest/functions/" + id + ".jsonl"),
                          results[i].functions_jsonl);
        write_json_file(model_path("ingest/graphs/" + id + ".json"), results[i].graph);
        outputs.push_back("ingest/functions/" + id + ".jsonl");
        outputs.push_back("ingest/graphs/" + id + ".json");
        parsed.push_back(id);
        instruction_lines += results[i].instruction_lines;
        skipped_outside_code += results[i].skipped_outside_code;
        indirect_calls += results[i].indirect_calls;
    }
    write_json_file(model_path("ingest/summary.json"),
                    nlohmann::json{{"schema", "ingest-summary/1"},
                                   {"parsed", parsed},
                                   {"excluded", excluded},
                                   {"instruction_lines", instruction_lines},
                                   {"skipped_outside_code", skipped_outside_code},
                                   {"indirect_calls_dropped", indirect_calls}});
    outputs.push_back("ingest/summary.json");
    write_manifest("ingest", inputs, outputs);
}

void Pipeline::stage_vocab() {
    StageTimer timer{timings_, "vocab"};
    DatasetSplit split = read_split();
    auto train_ids = effective(split.train);
    std::sort(train_ids.begin(), train_ids.end());

    std::vector<FunctionRecord> corpus;
    std::map<std::string, std::string> inputs;
    for (const auto& id : train_ids) {
        std::string rel = "ingest/functions/" + id + ".jsonl";
        inputs[rel] = hash_file(model_path(rel));
        auto records = function_records_from_jsonl(read_file(model_path(rel)));
        corpus.insert(corpus.end(), records.begin(), records.end());
    }
    Vocabulary vocab = Vocabulary::build(corpus, cfg_.vocab.max_size);
    write_json_file(model_path("vocab.json"), vocab.to_json());
    write_manifest("vocab", inputs, {"vocab.json"});
}

void Pipeline::stage_autoencoder() {
    StageTimer timer{timings_, "autoencoder"};
    DatasetSplit split = read_split();
    Vocabulary vocab = Vocabulary::from_json(read_json_file(model_path("vocab.json")));

    auto collect = [&](const std::vector<std::string>& ids) {
        std::vector<std::vector<int>> seqs;
        auto sorted = effective(ids);
        std::sort(sorted.begin(), sorted.end());
        for (const auto& id : sorted) {
            auto records =
                function_records_from_jsonl(read_file(model_path("ingest/functions/" + id + ".jsonl")));
            for (const auto& r : records)
                seqs.push_back(encode_sequence(r, vocab, static_cast<std::size_t>(cfg_.autoencoder.max_len)));
        }
        return seqs;
    };
    std::vector<std::vector<int>> train_seqs = collect(split.train);
    std::vector<std::vector<int>> val_seqs = collect(split.validation);

    if (cfg_.autoencoder.dedup_sequences) {
        std::set<std::vector<int>> seen;
        std::vector<std::vector<int>> unique;
        for (auto& s : train_seqs)
            if (seen.insert(s).second) unique.push_back(std::move(s));
        train_seqs = std::move(unique);
    }
    if (cfg_.autoencoder.max_train_sequences > 0 &&
        static_cast<int>(train_seqs.size()) > cfg_.autoencoder.max_train_sequences) {
        Rng rng = Rng::substream(cfg_.seed, "ae-subsample");
        rng.shuffle(train_seqs);
        train_seqs.resize(static_cast<std::size_t>(cfg_.autoencoder.max_train_sequences));
    }

    uint64_t ae_seed = splitmix64(cfg_.seed ^ fnv1a64("autoencoder"));
    TrainResult result = train_autoencoder(train_seqs, val_seqs, cfg_.autoencoder.training(ae_seed));
    result.model.vocab_hash = vocab.hash();
    result.model.save(model_path("autoencoder.cgct"));
    write_json_file(model_path("train_log.json"),
                    nlohmann::json{{"schema", "train-log/1"},
                                   {"train_loss", result.train_loss},
                                   {"val_loss", result.val_loss},
                                   {"best_epoch", result.best_epoch},
                                   {"train_sequences", train_seqs.size()},
                                   {"val_sequences", val_seqs.size()}});

    std::map<std::string, std::string> inputs;
    inputs["vocab.json"] = hash_file(model_path("vocab.json"));
    inputs["split.json"] = hash_file(model_path("split.json"));
    write_manifest("autoencoder", inputs, {"autoencoder.cgct", "train_log.json"});
}

void Pipeline::stage_embed() {
    StageTimer timer{timings_, "embed"};
    DatasetSplit split = read_split();
    Vocabulary vocab = Vocabulary::from_json(read_json_file(model_path("vocab.json")));
    GruAutoencoderModel model = GruAutoencoderModel::load(model_path("autoencoder.cgct"));
    if (model.vocab_hash != vocab.hash())
        throw FingerprintMismatch("autoencoder was trained against a different vocabulary");

    auto train_ids = effective(split.train);
    std::sort(train_ids.begin(), train_ids.end());

    std::vector<Eigen::MatrixXd> per_file(train_ids.size());
    std::vector<std::vector<std::string>> names(train_ids.size());
    parallel_for(train_ids.size(), cfg_.jobs, [&](std::size_t i) {
        auto records = function_records_from_jsonl(
            read_file(model_path("ingest/functions/" + train_ids[i] + ".jsonl")));
        per_file[i] = embed_records(model, vocab, records, cfg_.autoencoder.max_len,
                                    cfg_.clustering.normalize_embeddings);
        for (const auto& r : records) names[i].push_back(r.name);
    });

    long total = 0;
    for (const auto& m : per_file) total += m.rows();
    Eigen::MatrixXd all(total, model.hidden_dim);
    auto refs = nlohmann::json::array();
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < per_file.size(); ++i) {
        for (Eigen::Index r = 0; r < per_file[i].rows(); ++r) {
            all.row(row++) = per_file[i].row(r);
            refs.push_back({{"file_id", train_ids[i]},
                            {"index", r},
                            {"name", names[i][static_cast<std::size_t>(r)]}});
        }
    }

    TensorContainer c;
    c.schema = "embeddings/1";
    c.meta = {{"refs", refs}, {"hidden_dim", model.hidden_dim}};
    c.add("embeddings", all);
    c.save(model_path("embeddings.cgct"));

    std::map<std::string, std::string> inputs;
    inputs["vocab.json"] = hash_file(model_path("vocab.json"));
    inputs["autoencoder.cgct"] = hash_file(model_path("autoencoder.cgct"));
    for (const auto& id : train_ids) {
        std::string rel = "ingest/functions/" + id + ".jsonl";
        inputs[rel] = hash_file(model_path(rel));
    }
    write_manifest("embed", inputs, {"embeddings.cgct"});
}

void Pipeline::stage_cluster() {
    StageTimer timer{timings_, "cluster"};
    TensorContainer c = TensorContainer::load(model_path("embeddings.cgct"));
    const Eigen::MatrixXd& points = c.get("embeddings");
    uint64_t km_seed = splitmix64(cfg_.seed ^ fnv1a64("kmeans"));
    KMeansModel model = fit_minibatch_kmeans(points, cfg_.clustering.k, cfg_.clustering.batch_size,
                                             cfg_.clustering.iterations, km_seed);
    model.save(model_path("kmeans.cgct"));
    write_manifest("cluster", {{"embeddings.cgct", hash_file(model_path("embeddings.cgct"))}},
                   {"kmeans.cgct"});
}

void Pipeline::stage_graph_features() {
    StageTimer timer{timings_, "graph_features"};
    DatasetSplit split = read_split();
    auto train_ids = effective(split.train);
    std::sort(train_ids.begin(), train_ids.end());

    TensorContainer embeddings = TensorContainer::load(model_path("embeddings.cgct"));
    const Eigen::MatrixXd& rows = embeddings.get("embeddings");
    std::map<std::pair<std::string, int>, Eigen::Index> row_of;
    {
        Eigen::Index r = 0;
        for (const auto& ref : embeddings.meta.at("refs"))
            row_of[{ref.at("file_id").get<std::string>(), ref.at("index").get<int>()}] = r++;
    }
    KMeansModel kmeans = KMeansModel::load(model_path("kmeans.cgct"));

    LabelDictionary dict;
    std::string features_jsonl;
    std::vector<std::string> outputs;
    std::map<std::string, std::string> inputs;
    inputs["embeddings.cgct"] = hash_file(model_path("embeddings.cgct"));
    inputs["kmeans.cgct"] = hash_file(model_path("kmeans.cgct"));

    for (const auto& id : train_ids) {
        std::string graph_rel = "ingest/graphs/" + id + ".json";
        inputs[graph_rel] = hash_file(model_path(graph_rel));
        std::string fn_rel = "ingest/functions/" + id + ".jsonl";
        inputs[fn_rel] = hash_file(model_path(fn_rel));

        // rebuild from records so vertex/function indices line up
        auto records = function_records_from_jsonl(read_file(model_path(fn_rel)));
        CallGraph graph = build_call_graph(records, id, cfg_.keep_multiplicity);
        nlohmann::json stored = read_json_file(model_path(graph_rel));
        graph.family = stored.at("family").is_null()
                           ? std::nullopt
                           : std::optional<std::string>(stored.at("family").get<std::string>());

        std::unordered_map<int, Eigen::VectorXd> vertex_emb;
        for (const auto& v : graph.vertices)
            if (v.kind == VertexKind::Internal)
                vertex_emb.emplace(v.id, rows.row(row_of.at({id, v.function_index})).transpose());

        LabeledGraph labeled = label_graph(graph, kmeans, vertex_emb);
        write_json_file(model_path("labeled/" + id + ".json"), labeled_graph_to_json(labeled));
        outputs.push_back("labeled/" + id + ".json");

        WlFeatureVector features = wl_features(labeled, cfg_.wl, dict);
        nlohmann::json line{{"file_id", id},
                            {"family", labeled.family.value_or("")},
                            {"features", feature_vector_to_json(features)}};
        features_jsonl += line.dump();
        features_jsonl += '\n';
    }

    write_file_atomic(model_path("features.jsonl"), features_jsonl);
    write_json_file(model_path("wl_dict.json"), dict.to_json());
    outputs.push_back("features.jsonl");
    outputs.push_back("wl_dict.json");

    // raw (unnormalized) training kernel
    std::vector<WlFeatureVector> features;
    std::vector<std::string> ids;
    {
        std::istringstream stream(features_jsonl);
        std::string line;
        while (std::getline(stream, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            features.push_back(feature_vector_from_json(j.at("features")));
            ids.push_back(j.at("file_id").get<std::string>());
        }
    }
    KernelMatrix kernel = kernel_matrix_from_features(features, ids, cfg_.jobs);
    kernel.save(model_path("kernel.bin"), model_path("kernel.index.json"));
    outputs.push_back("kernel.bin");
    outputs.push_back("kernel.index.json");

    write_manifest("graph_features", inputs, outputs);
}

namespace {

// raw -> SVM-ready kernel per config
Eigen::MatrixXd transform_kernel(const Eigen::MatrixXd& raw, const SvmConfig& svm) {
    if (svm.rbf_gamma > 0.0) {
        Eigen::MatrixXd out(raw.rows(), raw.cols());
        for (Eigen::Index i = 0; i < raw.rows(); ++i)
            for (Eigen::Index j = 0; j < raw.cols(); ++j)
                out(i, j) =
                    std::exp(-svm.rbf_gamma * (raw(i, i) + raw(j, j) - 2.0 * raw(i, j)));
        return out;
    }
    if (svm.normalize_kernel) {
        KernelMatrix k;
        k.values = raw;
        k.graph_ids.assign(static_cast<std::size_t>(raw.rows()), "");
        return normalize_kernel(k).values;
    }
    return raw;
}

double transform_kernel_entry(double k_tt, double k_ii, double k_ti, const SvmConfig& svm) {
    if (svm.rbf_gamma > 0.0) return std::exp(-svm.rbf_gamma * (k_tt + k_ii - 2.0 * k_ti));
    if (svm.normalize_kernel) {
        if (k_tt <= 0.0 || k_ii <= 0.0)
            throw ZeroDiagonal("self-kernel must be positive for normalization");
        return k_ti / std::sqrt(k_tt * k_ii);
    }
    return k_ti;
}

}  // namespace

void Pipeline::stage_classifier() {
    StageTimer timer{timings_, "classifier"};
    KernelMatrix raw = KernelMatrix::load(model_path("kernel.bin"), model_path("kernel.index.json"));
    auto labels_map = read_labels();
    std::vector<std::string> labels;
    labels.reserve(raw.graph_ids.size());
    for (const auto& id : raw.graph_ids) labels.push_back(labels_map.at(id));

    Eigen::MatrixXd K = transform_kernel(raw.values, cfg_.svm);
    std::vector<std::string> warnings;
    std::string repair = repair_kernel_psd(K);
    if (!repair.empty()) warnings.push_back(repair);

    GridSearchSpec spec;
    spec.c_values = cfg_.svm.c_grid;
    spec.folds = cfg_.svm.folds;
    spec.seed = splitmix64(cfg_.seed ^ fnv1a64("gridsearch"));
    GridSearchReport grid = grid_search(K, labels, spec);

    OneVsAllClassifier clf = train_one_vs_all(K, labels, grid.best_c, cfg_.svm.platt_folds,
                                              splitmix64(cfg_.seed ^ fnv1a64("platt")));

    uint64_t fp = kFnvOffset;
    fp = fnv1a64(hash_file(model_path("vocab.json")), fp);
    fp = fnv1a64(hash_file(model_path("autoencoder.cgct")), fp);
    fp = fnv1a64(hash_file(model_path("kmeans.cgct")), fp);
    fp = fnv1a64(hash_file(model_path("wl_dict.json")), fp);
    fp = fnv1a64_u64(cfg_.wl.hash(), fp);
    fp = fnv1a64_u64(cfg_.svm.normalize_kernel ? 1 : 0, fp);
    fp = fnv1a64(std::to_string(cfg_.svm.rbf_gamma), fp);

    nlohmann::json j{{"schema", "classifier/1"},
                     {"classifier", clf.to_json()},
                     {"training_ids", raw.graph_ids},
                     {"best_c", grid.best_c},
                     {"grid_search", grid.to_json()},
                     {"normalize_kernel", cfg_.svm.normalize_kernel},
                     {"rbf_gamma", cfg_.svm.rbf_gamma},
                     {"fingerprint", hex64(fp)},
                     {"warnings", warnings}};
    write_json_file(model_path("classifier.json"), j);

    std::map<std::string, std::string> inputs{
        {"kernel.bin", hash_file(model_path("kernel.bin"))},
        {"kernel.index.json", hash_file(model_path("kernel.index.json"))},
        {"features.jsonl", hash_file(model_path("features.jsonl"))},
        {"wl_dict.json", hash_file(model_path("wl_dict.json"))}};
    write_manifest("classifier", inputs, {"classifier.json"});
}

void Pipeline::run_training() {
    stage_split();
    stage_ingest();
    stage_vocab();
    stage_autoencoder();
    stage_embed();
    stage_cluster();
    stage_graph_features();
    stage_classifier();

    nlohmann::json t = nlohmann::json::array();
    for (const auto& [name, ms] : timings_) t.push_back({{"stage", name}, {"ms", ms}});
    write_json_file(model_path("timings.json"),
                    nlohmann::json{{"schema", "timings/1"}, {"stages", t}});
}

PredictOutcome Pipeline::predict_files(const std::vector<std::string>& listing_paths) const {
    Vocabulary vocab = Vocabulary::from_json(read_json_file(model_path("vocab.json")));
    GruAutoencoderModel model = GruAutoencoderModel::load(model_path("autoencoder.cgct"));
    KMeansModel kmeans = KMeansModel::load(model_path("kmeans.cgct"));
    LabelDictionary dict = LabelDictionary::from_json(read_json_file(model_path("wl_dict.json")));
    nlohmann::json clf_json = read_json_file(model_path("classifier.json"));
    if (clf_json.value("schema", "") != "classifier/1")
        throw IoError("not a classifier/1 document");
    OneVsAllClassifier clf = OneVsAllClassifier::from_json(clf_json.at("classifier"));
    auto training_ids = clf_json.at("training_ids").get<std::vector<std::string>>();
    bool normalize = clf_json.at("normalize_kernel").get<bool>();
    double rbf_gamma = clf_json.at("rbf_gamma").get<double>();

    if (model.vocab_hash != vocab.hash())
        throw FingerprintMismatch("autoencoder/vocabulary mismatch in model dir");
    uint64_t fp = kFnvOffset;
    fp = fnv1a64(hash_file(model_path("vocab.json")), fp);
    fp = fnv1a64(hash_file(model_path("autoencoder.cgct")), fp);
    fp = fnv1a64(hash_file(model_path("kmeans.cgct")), fp);
    fp = fnv1a64(hash_file(model_path("wl_dict.json")), fp);
    fp = fnv1a64_u64(cfg_.wl.hash(), fp);
    fp = fnv1a64_u64(normalize ? 1 : 0, fp);
    fp = fnv1a64(std::to_string(rbf_gamma), fp);
    if (hex64(fp) != clf_json.at("fingerprint").get<std::string>())
        throw FingerprintMismatch("classifier fingerprint does not match model artifacts");

    // training features in kernel order
    std::vector<WlFeatureVector> train_features(training_ids.size());
    {
        std::map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < training_ids.size(); ++i) pos[training_ids[i]] = i;
        std::istringstream stream(read_file(model_path("features.jsonl")));
        std::string line;
        while (std::getline(stream, line)) {
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line);
            auto it = pos.find(j.at("file_id").get<std::string>());
            if (it != pos.end())
                train_features[it->second] = feature_vector_from_json(j.at("features"));
        }
    }
    SvmConfig svm_cfg;
    svm_cfg.normalize_kernel = normalize;
    svm_cfg.rbf_gamma = rbf_gamma;
    std::vector<double> train_diag(training_ids.size());
    for (std::size_t i = 0; i < train_features.size(); ++i)
        train_diag[i] = wl_dot(train_features[i], train_features[i]);

    PredictOutcome outcome;
    for (const auto& path : listing_paths) {
        std::string file_id = stem_of(path);
        try {
            AsmListing listing = parse_listing(read_file(path), path);
            ExtractionResult extraction = extract_functions(listing);
            if (extraction.functions.empty())
                throw UnparsableFile("no parsable functions in " + path);
            CallGraph graph = build_call_graph(extraction.functions, file_id, cfg_.keep_multiplicity);
            Eigen::MatrixXd rows = embed_records(model, vocab, extraction.functions,
                                                 cfg_.autoencoder.max_len,
                                                 cfg_.clustering.normalize_embeddings);
            LabeledGraph labeled = label_graph(graph, kmeans, vertex_embeddings(graph, rows));
            LabelDictionary local_dict = dict;  // unseen signatures extend a per-run copy
            WlFeatureVector features = wl_features(labeled, cfg_.wl, local_dict);

            double k_tt = wl_dot(features, features);
            Eigen::VectorXd kernel_row(static_cast<Eigen::Index>(training_ids.size()));
            for (std::size_t i = 0; i < train_features.size(); ++i)
                kernel_row(static_cast<Eigen::Index>(i)) = transform_kernel_entry(
                    k_tt, train_diag[i], wl_dot(features, train_features[i]), svm_cfg);

            Prediction prediction = predict_one(clf, kernel_row);
            PredictionRow row;
            row.file_id = file_id;
            row.family = prediction.cls;
            for (std::size_t c = 0; c < clf.classes.size(); ++c)
                row.probabilities[clf.classes[c]] =
                    prediction.probabilities(static_cast<Eigen::Index>(c));
            outcome.predictions.push_back(std::move(row));
        } catch (const Error& e) {
            outcome.errors.emplace_back(file_id, e.what());
        }
    }
    return outcome;
}

EvaluationReport Pipeline::evaluate_test() const {
    check_leakage();
    DatasetSplit split = read_split();
    auto labels = read_labels();

    std::vector<std::string> test_ids = split.test;
    std::sort(test_ids.begin(), test_ids.end());
    std::vector<std::string> paths;
    paths.reserve(test_ids.size());
    for (const auto& id : test_ids) paths.push_back(cfg_.paths.corpus_dir + "/" + id + ".asm");

    PredictOutcome outcome = predict_files(paths);

    std::vector<std::string> actual, predicted;
    std::string predictions_jsonl;
    for (const auto& row : outcome.predictions) {
        actual.push_back(labels.at(row.file_id));
        predicted.push_back(row.family);
        nlohmann::json j{{"file_id", row.file_id},
                         {"family", row.family},
                         {"probabilities", row.probabilities}};
        predictions_jsonl += j.dump();
        predictions_jsonl += '\n';
    }

    EvaluationReport report = evaluate_predictions(actual, predicted);
    report.metadata["seed"] = cfg_.seed;
    report.metadata["config_hash"] = cfg_.hash();
    report.metadata["n_test"] = test_ids.size();
    report.metadata["n_errors"] = outcome.errors.size();
    {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& [name, ms] : timings_) t.push_back({{"stage", name}, {"ms", ms}});
        report.metadata["timings"] = t;
    }

    ensure_dir(cfg_.paths.report_dir);
    write_file_atomic(cfg_.paths.report_dir + "/predictions.jsonl", predictions_jsonl);
    if (!outcome.errors.empty()) {
        std::string errors_jsonl;
        for (const auto& [id, message] : outcome.errors) {
            nlohmann::json j{{"file_id", id}, {"error", message}};
            errors_jsonl += j.dump();
            errors_jsonl += '\n';
        }
        write_file_atomic(cfg_.paths.report_dir + "/errors.jsonl", errors_jsonl);
    }
    emit_report(report, cfg_.paths.report_dir);
    return report;
}

void Pipeline::check_leakage() const {
    DatasetSplit split = read_split();
    std::unordered_set<std::string> test_ids(split.test.begin(), split.test.end());

    fs::path manifest_dir = model_path("manifests");
    if (!fs::is_directory(manifest_dir)) throw IoError("no stage manifests found");
    for (const auto& entry : fs::directory_iterator(manifest_dir)) {
        if (entry.path().extension() != ".json") continue;
        nlohmann::json manifest = read_json_file(entry.path().string());
        for (const auto& [input, hash] : manifest.at("inputs").items()) {
            std::string stem = stem_of(input);
            if (test_ids.count(stem))
                throw Error("leakage: stage '" + manifest.at("stage").get<std::string>() +
                            "' consumed test file '" + stem + "'");
        }
    }
}

}  // namespace cgc
