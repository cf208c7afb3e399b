#include "cgc/pipeline/config.hpp"

#include <set>

#include "cgc/util/errors.hpp"
#include "cgc/util/fs_io.hpp"
#include "cgc/util/hash.hpp"

namespace cgc {

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + context);
}

}  // namespace

TrainingConfig AutoencoderConfig::training(uint64_t seed) const {
    TrainingConfig t;
    t.learning_rate = learning_rate;
    t.batch_size = batch_size;
    t.epochs = epochs;
    t.max_len = max_len;
    t.gradient_clip_norm = gradient_clip_norm;
    t.seed = seed;
    t.hidden_dim = hidden_dim;
    t.embed_dim = embed_dim;
    return t;
}

void PipelineConfig::validate() const {
    if (split.test_fraction <= 0.0 || split.test_fraction >= 1.0)
        throw ConfigError("split.test_fraction must be in (0, 1)");
    if (split.validation_fraction <= 0.0 || split.validation_fraction >= 1.0)
        throw ConfigError("split.validation_fraction must be in (0, 1)");
    if (autoencoder.hidden_dim < 1 || autoencoder.embed_dim < 1)
        throw ConfigError("autoencoder dimensions must be positive");
    if (autoencoder.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (autoencoder.batch_size < 1 || autoencoder.epochs < 1 || autoencoder.max_len < 1)
        throw ConfigError("autoencoder batch_size/epochs/max_len must be positive");
    if (clustering.k < 1 || clustering.batch_size < 1 || clustering.iterations < 1)
        throw ConfigError("clustering k/batch_size/iterations must be positive");
    if (vocab.max_size < 1) throw ConfigError("vocab.max_size must be positive");
    wl.validate();
    if (svm.c_grid.empty()) throw ConfigError("svm.c_grid must not be empty");
    for (double c : svm.c_grid)
        if (c <= 0.0) throw ConfigError("svm.c_grid entries must be positive");
    if (svm.folds < 2) throw ConfigError("svm.folds must be at least 2");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

nlohmann::json PipelineConfig::to_json() const {
    return nlohmann::json{
        {"paths",
         {{"corpus_dir", paths.corpus_dir},
          {"model_dir", paths.model_dir},
          {"report_dir", paths.report_dir}}},
        {"vocab", {{"max_size", vocab.max_size}}},
        {"autoencoder",
         {{"hidden_dim", autoencoder.hidden_dim},
          {"embed_dim", autoencoder.embed_dim},
          {"learning_rate", autoencoder.learning_rate},
          {"batch_size", autoencoder.batch_size},
          {"epochs", autoencoder.epochs},
          {"max_len", autoencoder.max_len},
          {"gradient_clip_norm", autoencoder.gradient_clip_norm},
          {"max_train_sequences", autoencoder.max_train_sequences},
          {"dedup_sequences", autoencoder.dedup_sequences}}},
        {"clustering",
         {{"k", clustering.k},
          {"batch_size", clustering.batch_size},
          {"iterations", clustering.iterations},
          {"normalize_embeddings", clustering.normalize_embeddings}}},
        {"wl", {{"h", wl.h}, {"alpha", wl.alpha}}},
        {"svm",
         {{"c_grid", svm.c_grid},
          {"folds", svm.folds},
          {"platt_folds", svm.platt_folds},
          {"normalize_kernel", svm.normalize_kernel},
          {"rbf_gamma", svm.rbf_gamma}}},
        {"split",
         {{"test_fraction", split.test_fraction},
          {"validation_fraction", split.validation_fraction}}},
        {"seed", seed},
        {"jobs", jobs},
        {"keep_multiplicity", keep_multiplicity}};
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    check_keys(j, {"paths", "vocab", "autoencoder", "clustering", "wl", "svm", "split", "seed",
                   "jobs", "keep_multiplicity"},
               "config");
    PipelineConfig cfg;
    if (j.contains("paths")) {
        const auto& p = j.at("paths");
        check_keys(p, {"corpus_dir", "model_dir", "report_dir"}, "config.paths");
        cfg.paths.corpus_dir = p.value("corpus_dir", "");
        cfg.paths.model_dir = p.value("model_dir", "");
        cfg.paths.report_dir = p.value("report_dir", "");
    }
    if (j.contains("vocab")) {
        const auto& v = j.at("vocab");
        check_keys(v, {"max_size"}, "config.vocab");
        cfg.vocab.max_size = v.value("max_size", cfg.vocab.max_size);
    }
    if (j.contains("autoencoder")) {
        const auto& a = j.at("autoencoder");
        check_keys(a,
                   {"hidden_dim", "embed_dim", "learning_rate", "batch_size", "epochs", "max_len",
                    "gradient_clip_norm", "max_train_sequences", "dedup_sequences"},
                   "config.autoencoder");
        cfg.autoencoder.hidden_dim = a.value("hidden_dim", cfg.autoencoder.hidden_dim);
        cfg.autoencoder.embed_dim = a.value("embed_dim", cfg.autoencoder.embed_dim);
        cfg.autoencoder.learning_rate = a.value("learning_rate", cfg.autoencoder.learning_rate);
        cfg.autoencoder.batch_size = a.value("batch_size", cfg.autoencoder.batch_size);
        cfg.autoencoder.epochs = a.value("epochs", cfg.autoencoder.epochs);
        cfg.autoencoder.max_len = a.value("max_len", cfg.autoencoder.max_len);
        cfg.autoencoder.gradient_clip_norm =
            a.value("gradient_clip_norm", cfg.autoencoder.gradient_clip_norm);
        cfg.autoencoder.max_train_sequences =
            a.value("max_train_sequences", cfg.autoencoder.max_train_sequences);
        cfg.autoencoder.dedup_sequences = a.value("dedup_sequences", cfg.autoencoder.dedup_sequences);
    }
    if (j.contains("clustering")) {
        const auto& c = j.at("clustering");
        check_keys(c, {"k", "batch_size", "iterations", "normalize_embeddings"}, "config.clustering");
        cfg.clustering.k = c.value("k", cfg.clustering.k);
        cfg.clustering.batch_size = c.value("batch_size", cfg.clustering.batch_size);
        cfg.clustering.iterations = c.value("iterations", cfg.clustering.iterations);
        cfg.clustering.normalize_embeddings =
            c.value("normalize_embeddings", cfg.clustering.normalize_embeddings);
    }
    if (j.contains("wl")) {
        const auto& w = j.at("wl");
        check_keys(w, {"h", "alpha"}, "config.wl");
        cfg.wl.h = w.value("h", cfg.wl.h);
        if (w.contains("alpha"))
            cfg.wl.alpha = w.at("alpha").get<std::vector<double>>();
        else
            cfg.wl.alpha.assign(static_cast<std::size_t>(cfg.wl.h) + 1, 1.0);
    }
    if (j.contains("svm")) {
        const auto& s = j.at("svm");
        check_keys(s, {"c_grid", "folds", "platt_folds", "normalize_kernel", "rbf_gamma"},
                   "config.svm");
        if (s.contains("c_grid")) cfg.svm.c_grid = s.at("c_grid").get<std::vector<double>>();
        cfg.svm.folds = s.value("folds", cfg.svm.folds);
        cfg.svm.platt_folds = s.value("platt_folds", cfg.svm.platt_folds);
        cfg.svm.normalize_kernel = s.value("normalize_kernel", cfg.svm.normalize_kernel);
        cfg.svm.rbf_gamma = s.value("rbf_gamma", cfg.svm.rbf_gamma);
    }
    if (j.contains("split")) {
        const auto& s = j.at("split");
        check_keys(s, {"test_fraction", "validation_fraction"}, "config.split");
        cfg.split.test_fraction = s.value("test_fraction", cfg.split.test_fraction);
        cfg.split.validation_fraction =
            s.value("validation_fraction", cfg.split.validation_fraction);
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.jobs = j.value("jobs", cfg.jobs);
    cfg.keep_multiplicity = j.value("keep_multiplicity", cfg.keep_multiplicity);
    cfg.validate();
    return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
    return from_json(read_json_file(path));
}

std::string PipelineConfig::hash() const {
    return hex64(fnv1a64(to_json().dump()));
}

}  // namespace cgc
