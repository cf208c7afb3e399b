#include "cgc/graph/callgraph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "cgc/util/errors.hpp"

namespace cgc {

const Vertex* CallGraph::find(const std::string& name) const {
    auto it = std::lower_bound(vertices.begin(), vertices.end(), name,
                               [](const Vertex& v, const std::string& n) { return v.name < n; });
    if (it != vertices.end() && it->name == name) return &*it;
    return nullptr;
}

CallGraph build_call_graph(const std::vector<FunctionRecord>& functions,
                           const std::string& file_id,
                           bool keep_multiplicity) {
    CallGraph g;
    g.file_id = file_id;
    g.keep_multiplicity = keep_multiplicity;

    // Disambiguate duplicate internal names. Order records by content so the
    // suffix assignment does not depend on input order.
    std::vector<std::size_t> internal_indices;
    for (std::size_t i = 0; i < functions.size(); ++i)
        if (!functions[i].is_external) internal_indices.push_back(i);
    std::stable_sort(internal_indices.begin(), internal_indices.end(),
                     [&](std::size_t a, std::size_t b) {
                         const auto& fa = functions[a];
                         const auto& fb = functions[b];
                         if (fa.name != fb.name) return fa.name < fb.name;
                         if (fa.tokens != fb.tokens) return fa.tokens < fb.tokens;
                         return fa.callee_names < fb.callee_names;
                     });

    std::map<std::string, int> name_uses;
    std::map<std::size_t, std::string> record_vertex_name;  // record index -> unique name
    std::map<std::string, std::size_t> first_record_of;     // original name -> record index
    for (std::size_t idx : internal_indices) {
        const std::string& base = functions[idx].name;
        int uses = ++name_uses[base];
        std::string unique = uses == 1 ? base : base + "~" + std::to_string(uses);
        record_vertex_name[idx] = unique;
        if (uses == 1) first_record_of[base] = idx;
    }

    // externals: callees that do not match any defined internal name
    std::set<std::string> external_names;
    for (std::size_t idx : internal_indices)
        for (const auto& callee : functions[idx].callee_names)
            if (!first_record_of.count(callee)) external_names.insert(callee);

    std::vector<Vertex> vertices;
    for (const auto& [idx, unique] : record_vertex_name)
        vertices.push_back({0, VertexKind::Internal, unique, static_cast<int>(idx)});
    for (const auto& name : external_names)
        vertices.push_back({0, VertexKind::External, name, -1});
    std::sort(vertices.begin(), vertices.end(),
              [](const Vertex& a, const Vertex& b) { return a.name < b.name; });
    std::map<std::string, int> vertex_id;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        vertices[i].id = static_cast<int>(i);
        vertex_id[vertices[i].name] = static_cast<int>(i);
    }
    g.vertices = std::move(vertices);

    std::vector<std::pair<int, int>> edges;
    for (std::size_t idx : internal_indices) {
        int caller = vertex_id.at(record_vertex_name.at(idx));
        for (const auto& callee : functions[idx].callee_names) {
            auto defined = first_record_of.find(callee);
            int target = defined != first_record_of.end()
                             ? vertex_id.at(record_vertex_name.at(defined->second))
                             : vertex_id.at(callee);
            edges.emplace_back(caller, target);
        }
    }
    std::sort(edges.begin(), edges.end());
    if (!keep_multiplicity) edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    return g;
}

GraphStats graph_stats(const CallGraph& g) {
    GraphStats s;
    s.n = static_cast<long>(g.vertices.size());
    s.m = static_cast<long>(g.edges.size());
    for (const auto& v : g.vertices)
        (v.kind == VertexKind::Internal ? s.internal_count : s.external_count)++;
    std::vector<bool> touched(g.vertices.size(), false);
    for (const auto& [a, b] : g.edges) {
        touched[static_cast<std::size_t>(a)] = true;
        touched[static_cast<std::size_t>(b)] = true;
    }
    s.isolated_count = static_cast<long>(std::count(touched.begin(), touched.end(), false));
    return s;
}

nlohmann::json callgraph_to_json(const CallGraph& g) {
    nlohmann::json j;
    j["file_id"] = g.file_id;
    j["family"] = g.family.has_value() ? nlohmann::json(*g.family) : nlohmann::json(nullptr);
    auto verts = nlohmann::json::array();
    for (const auto& v : g.vertices)
        verts.push_back({{"id", v.id},
                         {"kind", v.kind == VertexKind::Internal ? "internal" : "external"},
                         {"name", v.name}});
    j["vertices"] = std::move(verts);
    auto edges = nlohmann::json::array();
    for (const auto& [a, b] : g.edges) edges.push_back({a, b});
    j["edges"] = std::move(edges);
    j["keep_multiplicity"] = g.keep_multiplicity;
    return j;
}

CallGraph callgraph_from_json(const nlohmann::json& j) {
    CallGraph g;
    g.file_id = j.at("file_id").get<std::string>();
    if (!j.at("family").is_null()) g.family = j.at("family").get<std::string>();
    g.keep_multiplicity = j.value("keep_multiplicity", false);
    for (const auto& vj : j.at("vertices")) {
        Vertex v;
        v.id = vj.at("id").get<int>();
        v.name = vj.at("name").get<std::string>();
        std::string kind = vj.at("kind").get<std::string>();
        if (kind == "internal")
            v.kind = VertexKind::Internal;
        else if (kind == "external")
            v.kind = VertexKind::External;
        else
            throw IoError("unknown vertex kind: " + kind);
        g.vertices.push_back(std::move(v));
    }
    for (std::size_t i = 0; i < g.vertices.size(); ++i)
        if (g.vertices[i].id != static_cast<int>(i))
            throw IoError("vertex ids must equal their position");
    int n = static_cast<int>(g.vertices.size());
    for (const auto& ej : j.at("edges")) {
        int a = ej.at(0).get<int>();
        int b = ej.at(1).get<int>();
        if (a < 0 || a >= n || b < 0 || b >= n) throw IoError("edge endpoint out of range");
        g.edges.emplace_back(a, b);
    }
    return g;
}

}  // namespace cgc
