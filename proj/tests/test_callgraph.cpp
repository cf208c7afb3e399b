#include "doctest.h"

#include "cgc/graph/callgraph.hpp"
#include "cgc/util/rng.hpp"

using namespace cgc;

TEST_SUITE_BEGIN("callgraph");

namespace {

FunctionRecord make_fn(const std::string& name, std::vector<std::string> callees,
                       std::vector<std::string> tokens = {"push ebp", "retn"}) {
    FunctionRecord f;
    f.name = name;
    f.section = ".text";
    f.tokens = std::move(tokens);
    f.callee_names = std::move(callees);
    return f;
}

}  // namespace

TEST_CASE("two internal vertices, one edge") {
    CallGraph g = build_call_graph({make_fn("A", {"B"}), make_fn("B", {})}, "file1");
    REQUIRE(g.vertices.size() == 2);
    CHECK(g.vertices[0].name == "A");
    CHECK(g.vertices[0].kind == VertexKind::Internal);
    CHECK(g.vertices[1].name == "B");
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0] == std::make_pair(0, 1));
}

TEST_CASE("undefined callee becomes an external vertex") {
    CallGraph g = build_call_graph({make_fn("A", {"GetProcAddress"})}, "file1");
    REQUIRE(g.vertices.size() == 2);
    const Vertex* ext = g.find("GetProcAddress");
    REQUIRE(ext != nullptr);
    CHECK(ext->kind == VertexKind::External);
    CHECK(g.edges.size() == 1);
    CHECK(g.edges[0].first == g.find("A")->id);
    CHECK(g.edges[0].second == ext->id);
}

TEST_CASE("duplicate calls collapse unless multiplicity is kept") {
    auto fns = {make_fn("A", {"B", "B"}), make_fn("B", {})};
    CallGraph dedup = build_call_graph(fns, "f");
    CHECK(dedup.edges.size() == 1);
    CallGraph multi = build_call_graph(fns, "f", /*keep_multiplicity=*/true);
    CHECK(multi.edges.size() == 2);
}

TEST_CASE("self-calls stay as self-loops") {
    CallGraph g = build_call_graph({make_fn("A", {"A"})}, "f");
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0] == std::make_pair(0, 0));
}

TEST_CASE("no edge originates at an external vertex") {
    CallGraph g = build_call_graph(
        {make_fn("A", {"ReadFile", "B"}), make_fn("B", {"WriteFile"})}, "f");
    for (const auto& [caller, callee] : g.edges)
        CHECK(g.vertices[static_cast<std::size_t>(caller)].kind == VertexKind::Internal);
}

TEST_CASE("permutation invariance of the canonical serialization") {
    std::vector<FunctionRecord> fns = {
        make_fn("main", {"helper", "CreateFileA", "main"}),
        make_fn("helper", {"main", "Sleep"}),
        make_fn("dup", {}, {"nop"}),
        make_fn("dup", {}, {"xor eax, eax"}),
    };
    std::string canonical = callgraph_to_json(build_call_graph(fns, "f")).dump();

    Rng rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        rng.shuffle(fns);
        CHECK(callgraph_to_json(build_call_graph(fns, "f")).dump() == canonical);
    }
}

TEST_CASE("graph JSON round trip is bit-exact") {
    CallGraph g = build_call_graph({make_fn("A", {"B", "Sleep"}), make_fn("B", {})}, "f");
    g.family = "fam1";
    std::string once = callgraph_to_json(g).dump();
    CallGraph restored = callgraph_from_json(nlohmann::json::parse(once));
    CHECK(callgraph_to_json(restored).dump() == once);
}

TEST_CASE("graph_stats") {
    CHECK(graph_stats(build_call_graph({}, "empty")) == GraphStats{0, 0, 0, 0, 0});

    CallGraph g = build_call_graph({make_fn("A", {"B"}), make_fn("B", {})}, "f");
    GraphStats s = graph_stats(g);
    CHECK(s.n == 2);
    CHECK(s.m == 1);
    CHECK(s.internal_count == 2);
    CHECK(s.external_count == 0);
    CHECK(s.isolated_count == 0);

    CallGraph with_isolated =
        build_call_graph({make_fn("A", {"B"}), make_fn("B", {}), make_fn("alone", {})}, "f");
    CHECK(graph_stats(with_isolated).isolated_count == 1);
}

TEST_SUITE_END();
