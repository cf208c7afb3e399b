#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cgc/asm/functions.hpp"

namespace cgc {

enum class VertexKind { Internal, External };

struct Vertex {
    int id = 0;
    VertexKind kind = VertexKind::Internal;
    std::string name;
    // index into the FunctionRecord list this graph was built from; -1 for
    // external vertices. Not serialized.
    int function_index = -1;
};

// Directed call graph. Vertices are sorted by name with id == position, so
// the canonical JSON serialization is independent of input order.
struct CallGraph {
    std::string file_id;
    std::optional<std::string> family;
    std::vector<Vertex> vertices;
    std::vector<std::pair<int, int>> edges;  // sorted; deduped unless keep_multiplicity
    bool keep_multiplicity = false;

    const Vertex* find(const std::string& name) const;
};

struct GraphStats {
    long n = 0;
    long m = 0;
    long internal_count = 0;
    long external_count = 0;
    long isolated_count = 0;

    bool operator==(const GraphStats&) const = default;
};

// Internal vertex per internal record (duplicate names disambiguated with a
// "~k" suffix), external vertex per callee not defined in the file, one edge
// per distinct (caller, callee) pair unless keep_multiplicity is set.
CallGraph build_call_graph(const std::vector<FunctionRecord>& functions,
                           const std::string& file_id,
                           bool keep_multiplicity = false);

GraphStats graph_stats(const CallGraph& g);

nlohmann::json callgraph_to_json(const CallGraph& g);
CallGraph callgraph_from_json(const nlohmann::json& j);

}  // namespace cgc
