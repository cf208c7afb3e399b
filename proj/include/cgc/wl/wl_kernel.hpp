#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cgc/cluster/labeled_graph.hpp"

namespace cgc {

struct WlConfig {
    int h = 3;
    std::vector<double> alpha = {1.0, 1.0, 1.0, 1.0};  // per-iteration weights

    void validate() const;  // ConfigError
    uint64_t hash() const;
};

// Injective replacement for Algorithm-style label hashing: every original
// label and every compressed neighborhood signature gets a unique id, shared
// across the whole corpus. Insertion-ordered, so building it is the one
// serialized step of feature extraction.
class LabelDictionary {
public:
    // UnknownLabel when !insert and the label has not been seen.
    int raw_id(const std::string& label, bool insert);
    // signature of (own label, sorted neighbor label multiset); always inserts
    int signature_id(int own, const std::vector<int>& sorted_neighbors);

    // raw label string or "#<id>" for compressed labels; inverse of label_text
    int resolve(const std::string& label_text) const;  // UnknownLabel
    std::string label_text(int id) const;

    std::size_t size() const { return entries_.size(); }
    uint64_t hash() const;

    nlohmann::json to_json() const;
    static LabelDictionary from_json(const nlohmann::json& j);

private:
    struct Entry {
        bool signature = false;
        std::string raw;             // raw labels only
        int own = -1;                // signatures only
        std::vector<int> neighbors;  // signatures only
    };
    std::vector<Entry> entries_;
    std::unordered_map<std::string, int> index_;

    int intern(std::string key, Entry entry);
};

// Sparse label-count feature vector accumulated over iterations 0..h; the
// iteration-i block is scaled by sqrt(alpha_i) so a plain inner product
// realizes the weighted kernel sum.
struct WlFeatureVector {
    std::map<int, double> values;
};

// Undirected adjacency (self-loop contributes the vertex itself once);
// parallel directed edges collapse unless the graph keeps multiplicity.
std::vector<std::vector<int>> wl_adjacency(const LabeledGraph& g);

// Vertex label ids per iteration 0..h. insert_raw controls whether unseen
// original labels extend the dictionary or raise UnknownLabel.
std::vector<std::vector<int>> wl_label_iterations(const LabeledGraph& g, int h,
                                                  LabelDictionary& dict, bool insert_raw = true);

// One relabeling iteration. All current labels must already be in dict.
LabeledGraph wl_relabel(const LabeledGraph& g, LabelDictionary& dict);

WlFeatureVector wl_features(const LabeledGraph& g, const WlConfig& cfg, LabelDictionary& dict);

double wl_dot(const WlFeatureVector& a, const WlFeatureVector& b);

double wl_kernel(const LabeledGraph& g, const LabeledGraph& g2, const WlConfig& cfg,
                 LabelDictionary& dict);

struct KernelMatrix {
    Eigen::MatrixXd values;  // N x N, symmetric
    std::vector<std::string> graph_ids;

    void save(const std::string& bin_path, const std::string& index_path) const;
    static KernelMatrix load(const std::string& bin_path, const std::string& index_path);
};

KernelMatrix wl_kernel_matrix(const std::vector<LabeledGraph>& graphs, const WlConfig& cfg,
                              LabelDictionary& dict, int jobs = 1);
KernelMatrix kernel_matrix_from_features(const std::vector<WlFeatureVector>& features,
                                         const std::vector<std::string>& ids, int jobs = 1);

// K'[i][j] = K[i][j] / sqrt(K[i][i] K[j][j]); throws ZeroDiagonal.
KernelMatrix normalize_kernel(const KernelMatrix& k);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

nlohmann::json feature_vector_to_json(const WlFeatureVector& f);
WlFeatureVector feature_vector_from_json(const nlohmann::json& j);

}  // namespace cgc
