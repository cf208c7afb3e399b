#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cgc/cluster/kmeans.hpp"
#include "cgc/graph/callgraph.hpp"

namespace cgc {

// Call-graph topology with one discrete label per vertex: cluster ids
// ("C0".."C{k-1}") for internal vertices, import names for external ones.
struct LabeledGraph {
    std::string file_id;
    std::optional<std::string> family;
    std::vector<Vertex> vertices;  // id == position
    std::vector<std::pair<int, int>> edges;
    bool keep_multiplicity = false;
    std::vector<std::string> labels;  // by vertex id
};

// Import names that would collide with the cluster namespace ("C" + digits)
// get an "_ext" suffix.
std::string external_label(const std::string& import_name);

// Throws MissingEmbedding naming the vertex when an internal vertex has no
// embedding row.
LabeledGraph label_graph(const CallGraph& g, const KMeansModel& model,
                         const std::unordered_map<int, Eigen::VectorXd>& internal_embeddings);

nlohmann::json labeled_graph_to_json(const LabeledGraph& g);
LabeledGraph labeled_graph_from_json(const nlohmann::json& j);

}  // namespace cgc
