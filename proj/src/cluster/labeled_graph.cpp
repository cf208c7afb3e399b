#include "cgc/cluster/labeled_graph.hpp"

#include <cctype>

#include "cgc/util/errors.hpp"

namespace cgc {

std::string external_label(const std::string& import_name) {
    // '#' opens the compressed-label namespace of the WL dictionary
    if (!import_name.empty() && import_name[0] == '#') return "ext_" + import_name;
    if (import_name.size() >= 2 && import_name[0] == 'C') {
        bool digits = true;
        for (std::size_t i = 1; i < import_name.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(import_name[i]))) {
                digits = false;
                break;
            }
        if (digits) return import_name + "_ext";
    }
    return import_name;
}

LabeledGraph label_graph(const CallGraph& g, const KMeansModel& model,
                         const std::unordered_map<int, Eigen::VectorXd>& internal_embeddings) {
    LabeledGraph lg;
    lg.file_id = g.file_id;
    lg.family = g.family;
    lg.vertices = g.vertices;
    lg.edges = g.edges;
    lg.keep_multiplicity = g.keep_multiplicity;
    lg.labels.reserve(g.vertices.size());
    for (const auto& v : g.vertices) {
        if (v.kind == VertexKind::External) {
            lg.labels.push_back(external_label(v.name));
            continue;
        }
        auto it = internal_embeddings.find(v.id);
        if (it == internal_embeddings.end())
            throw MissingEmbedding("no embedding for internal vertex '" + v.name + "' in " +
                                   g.file_id);
        lg.labels.push_back("C" + std::to_string(assign_cluster(model, it->second)));
    }
    return lg;
}

nlohmann::json labeled_graph_to_json(const LabeledGraph& g) {
    CallGraph cg;
    cg.file_id = g.file_id;
    cg.family = g.family;
    cg.vertices = g.vertices;
    cg.edges = g.edges;
    cg.keep_multiplicity = g.keep_multiplicity;
    nlohmann::json j = callgraph_to_json(cg);
    j["labels"] = g.labels;
    return j;
}

LabeledGraph labeled_graph_from_json(const nlohmann::json& j) {
    CallGraph cg = callgraph_from_json(j);
    LabeledGraph g;
    g.file_id = std::move(cg.file_id);
    g.family = std::move(cg.family);
    g.vertices = std::move(cg.vertices);
    g.edges = std::move(cg.edges);
    g.keep_multiplicity = cg.keep_multiplicity;
    g.labels = j.at("labels").get<std::vector<std::string>>();
    if (g.labels.size() != g.vertices.size())
        throw IoError("labeled graph has " + std::to_string(g.labels.size()) + " labels for " +
                      std::to_string(g.vertices.size()) + " vertices");
    return g;
}

}  // namespace cgc
