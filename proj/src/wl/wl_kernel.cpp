#include "cgc/wl/wl_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cgc/util/errors.hpp"
#include "cgc/util/fs_io.hpp"
#include "cgc/util/hash.hpp"
#include "cgc/util/parallel.hpp"

namespace cgc {

void WlConfig::validate() const {
    if (h < 0) throw ConfigError("wl.h must be >= 0");
    if (alpha.size() != static_cast<std::size_t>(h) + 1)
        throw ConfigError("wl.alpha must have h+1 entries");
    for (double a : alpha)
        if (a < 0.0) throw ConfigError("wl.alpha entries must be >= 0");
}

uint64_t WlConfig::hash() const {
    uint64_t acc = fnv1a64_u64(static_cast<uint64_t>(h));
    for (double a : alpha) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(a));
        std::memcpy(&bits, &a, sizeof(bits));
        acc = fnv1a64_u64(bits, acc);
    }
    return acc;
}

int LabelDictionary::intern(std::string key, Entry entry) {
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    int id = static_cast<int>(entries_.size());
    entries_.push_back(std::move(entry));
    index_.emplace(std::move(key), id);
    return id;
}

int LabelDictionary::raw_id(const std::string& label, bool insert) {
    std::string key = "L:" + label;
    if (!insert) {
        auto it = index_.find(key);
        if (it == index_.end()) throw UnknownLabel("label not in dictionary: " + label);
        return it->second;
    }
    Entry e;
    e.raw = label;
    return intern(std::move(key), std::move(e));
}

int LabelDictionary::signature_id(int own, const std::vector<int>& sorted_neighbors) {
    std::string key = "S:" + std::to_string(own) + "|";
    for (std::size_t i = 0; i < sorted_neighbors.size(); ++i) {
        if (i) key += ',';
        key += std::to_string(sorted_neighbors[i]);
    }
    Entry e;
    e.signature = true;
    e.own = own;
    e.neighbors = sorted_neighbors;
    return intern(std::move(key), std::move(e));
}

int LabelDictionary::resolve(const std::string& label_text) const {
    if (label_text.size() > 1 && label_text[0] == '#') {
        int id = -1;
        try {
            id = std::stoi(label_text.substr(1));
        } catch (...) {
            id = -1;
        }
        if (id >= 0 && static_cast<std::size_t>(id) < entries_.size() &&
            entries_[static_cast<std::size_t>(id)].signature)
            return id;
        throw UnknownLabel("unknown compressed label: " + label_text);
    }
    auto it = index_.find("L:" + label_text);
    if (it == index_.end()) throw UnknownLabel("label not in dictionary: " + label_text);
    return it->second;
}

std::string LabelDictionary::label_text(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= entries_.size())
        throw UnknownLabel("label id out of range: " + std::to_string(id));
    const Entry& e = entries_[static_cast<std::size_t>(id)];
    return e.signature ? "#" + std::to_string(id) : e.raw;
}

uint64_t LabelDictionary::hash() const {
    uint64_t h = kFnvOffset;
    for (const auto& e : entries_) {
        if (e.signature) {
            h = fnv1a64("S", h);
            h = fnv1a64_u64(static_cast<uint64_t>(e.own), h);
            for (int n : e.neighbors) h = fnv1a64_u64(static_cast<uint64_t>(n), h);
        } else {
            h = fnv1a64("L", h);
            h = fnv1a64(e.raw, h);
        }
    }
    return h;
}

nlohmann::json LabelDictionary::to_json() const {
    auto entries = nlohmann::json::array();
    for (const auto& e : entries_) {
        if (e.signature)
            entries.push_back({{"t", "S"}, {"o", e.own}, {"n", e.neighbors}});
        else
            entries.push_back({{"t", "L"}, {"s", e.raw}});
    }
    return nlohmann::json{{"schema", "wl-dict/1"}, {"entries", entries}};
}

LabelDictionary LabelDictionary::from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "wl-dict/1") throw IoError("not a wl-dict/1 document");
    LabelDictionary d;
    for (const auto& ej : j.at("entries")) {
        std::string t = ej.at("t").get<std::string>();
        if (t == "L") {
            d.raw_id(ej.at("s").get<std::string>(), true);
        } else if (t == "S") {
            d.signature_id(ej.at("o").get<int>(), ej.at("n").get<std::vector<int>>());
        } else {
            throw IoError("unknown dictionary entry type: " + t);
        }
    }
    return d;
}

std::vector<std::vector<int>> wl_adjacency(const LabeledGraph& g) {
    std::vector<std::vector<int>> neighbors(g.vertices.size());
    for (const auto& [a, b] : g.edges) {
        if (a == b) {
            neighbors[static_cast<std::size_t>(a)].push_back(a);
            continue;
        }
        neighbors[static_cast<std::size_t>(a)].push_back(b);
        neighbors[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& ns : neighbors) {
        std::sort(ns.begin(), ns.end());
        if (!g.keep_multiplicity) ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    }
    return neighbors;
}

std::vector<std::vector<int>> wl_label_iterations(const LabeledGraph& g, int h,
                                                  LabelDictionary& dict, bool insert_raw) {
    const std::size_t n = g.vertices.size();
    auto adjacency = wl_adjacency(g);

    std::vector<std::vector<int>> iterations;
    iterations.reserve(static_cast<std::size_t>(h) + 1);

    std::vector<int> current(n);
    for (std::size_t v = 0; v < n; ++v) {
        const std::string& label = g.labels[v];
        // '#'-prefixed labels are compressed ids from an earlier relabeling
        if (!label.empty() && label[0] == '#')
            current[v] = dict.resolve(label);
        else
            current[v] = dict.raw_id(label, insert_raw);
    }
    iterations.push_back(current);

    for (int it = 0; it < h; ++it) {
        std::vector<int> next(n);
        for (std::size_t v = 0; v < n; ++v) {
            std::vector<int> neighbor_labels;
            neighbor_labels.reserve(adjacency[v].size());
            for (int u : adjacency[v]) neighbor_labels.push_back(current[static_cast<std::size_t>(u)]);
            std::sort(neighbor_labels.begin(), neighbor_labels.end());
            next[v] = dict.signature_id(current[v], neighbor_labels);
        }
        current = std::move(next);
        iterations.push_back(current);
    }
    return iterations;
}

LabeledGraph wl_relabel(const LabeledGraph& g, LabelDictionary& dict) {
    auto iterations = wl_label_iterations(g, 1, dict, /*insert_raw=*/false);
    LabeledGraph out = g;
    for (std::size_t v = 0; v < g.vertices.size(); ++v)
        out.labels[v] = dict.label_text(iterations[1][v]);
    return out;
}

WlFeatureVector wl_features(const LabeledGraph& g, const WlConfig& cfg, LabelDictionary& dict) {
    cfg.validate();
    auto iterations = wl_label_iterations(g, cfg.h, dict, /*insert_raw=*/true);
    WlFeatureVector f;
    for (int it = 0; it <= cfg.h; ++it) {
        double scale = std::sqrt(cfg.alpha[static_cast<std::size_t>(it)]);
        if (scale == 0.0) continue;
        std::map<int, long> counts;
        for (int label : iterations[static_cast<std::size_t>(it)]) ++counts[label];
        for (const auto& [label, count] : counts)
            f.values[label] += scale * static_cast<double>(count);
    }
    return f;
}

double wl_dot(const WlFeatureVector& a, const WlFeatureVector& b) {
    const auto& small = a.values.size() <= b.values.size() ? a : b;
    const auto& large = a.values.size() <= b.values.size() ? b : a;
    double sum = 0.0;
    for (const auto& [id, value] : small.values) {
        auto it = large.values.find(id);
        if (it != large.values.end()) sum += value * it->second;
    }
    return sum;
}

double wl_kernel(const LabeledGraph& g, const LabeledGraph& g2, const WlConfig& cfg,
                 LabelDictionary& dict) {
    WlFeatureVector fa = wl_features(g, cfg, dict);
    WlFeatureVector fb = wl_features(g2, cfg, dict);
    return wl_dot(fa, fb);
}

KernelMatrix kernel_matrix_from_features(const std::vector<WlFeatureVector>& features,
                                         const std::vector<std::string>& ids, int jobs) {
    const std::size_t n = features.size();
    KernelMatrix k;
    k.graph_ids = ids;
    k.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, jobs, [&](std::size_t i) {
        for (std::size_t j = i; j < n; ++j) {
            double v = wl_dot(features[i], features[j]);
            k.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            k.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    });
    return k;
}

KernelMatrix wl_kernel_matrix(const std::vector<LabeledGraph>& graphs, const WlConfig& cfg,
                              LabelDictionary& dict, int jobs) {
    cfg.validate();
    // dictionary insertion is order-sensitive, so features are extracted
    // sequentially in graph order; the pairwise products parallelize
    std::vector<WlFeatureVector> features;
    features.reserve(graphs.size());
    std::vector<std::string> ids;
    ids.reserve(graphs.size());
    for (const auto& g : graphs) {
        features.push_back(wl_features(g, cfg, dict));
        ids.push_back(g.file_id);
    }
    return kernel_matrix_from_features(features, ids, jobs);
}

KernelMatrix normalize_kernel(const KernelMatrix& k) {
    const Eigen::Index n = k.values.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        if (k.values(i, i) <= 0.0)
            throw ZeroDiagonal("kernel diagonal must be strictly positive at index " +
                               std::to_string(i));
    KernelMatrix out;
    out.graph_ids = k.graph_ids;
    out.values = Eigen::MatrixXd(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j)
            out.values(i, j) = k.values(i, j) / std::sqrt(k.values(i, i) * k.values(j, j));
        out.values(i, i) = 1.0;
    }
    return out;
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric,
                                                          Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void KernelMatrix::save(const std::string& bin_path, const std::string& index_path) const {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor rm = values;
    std::string bytes(reinterpret_cast<const char*>(rm.data()),
                      static_cast<std::size_t>(rm.size()) * sizeof(double));
    write_file_atomic(bin_path, bytes);
    write_json_file(index_path, nlohmann::json{{"schema", "kernel-index/1"},
                                               {"size", values.rows()},
                                               {"graph_ids", graph_ids}});
}

KernelMatrix KernelMatrix::load(const std::string& bin_path, const std::string& index_path) {
    nlohmann::json index = read_json_file(index_path);
    if (index.value("schema", "") != "kernel-index/1") throw IoError("not a kernel-index/1 file");
    Eigen::Index n = index.at("size").get<Eigen::Index>();
    std::string bytes = read_file(bin_path);
    if (bytes.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n) * sizeof(double))
        throw IoError("kernel block size does not match index: " + bin_path);
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor rm(n, n);
    std::memcpy(rm.data(), bytes.data(), bytes.size());
    KernelMatrix k;
    k.values = rm;
    k.graph_ids = index.at("graph_ids").get<std::vector<std::string>>();
    return k;
}

nlohmann::json feature_vector_to_json(const WlFeatureVector& f) {
    auto pairs = nlohmann::json::array();
    for (const auto& [id, value] : f.values) pairs.push_back({id, value});
    return pairs;
}

WlFeatureVector feature_vector_from_json(const nlohmann::json& j) {
    WlFeatureVector f;
    for (const auto& pair : j) f.values[pair.at(0).get<int>()] = pair.at(1).get<double>();
    return f;
}

}  // namespace cgc
