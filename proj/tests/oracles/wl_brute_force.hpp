#pragma once

// Brute-force WL subtree kernel: explicit iteration-by-iteration relabeling
// with full signature strings (no compression dictionary) and per-iteration
// count maps. Independent of the library's dictionary-based implementation.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "cgc/cluster/labeled_graph.hpp"

namespace oracle {

// neighbor lists built directly from the edge list: undirected, self-loop
// contributes the vertex once, parallel edges collapse unless multiplicity
// is kept
inline std::vector<std::vector<int>> brute_neighbors(const cgc::LabeledGraph& g) {
    std::vector<std::vector<int>> out(g.vertices.size());
    for (const auto& [a, b] : g.edges) {
        if (a == b) {
            out[static_cast<std::size_t>(a)].push_back(a);
        } else {
            out[static_cast<std::size_t>(a)].push_back(b);
            out[static_cast<std::size_t>(b)].push_back(a);
        }
    }
    for (auto& ns : out) {
        std::sort(ns.begin(), ns.end());
        if (!g.keep_multiplicity) ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    }
    return out;
}

// full label strings per iteration 0..h; labels grow by concatenation, no
// compression
inline std::vector<std::vector<std::string>> brute_label_iterations(const cgc::LabeledGraph& g,
                                                                    int h) {
    auto neighbors = brute_neighbors(g);
    std::vector<std::vector<std::string>> iterations;
    iterations.push_back(g.labels);
    for (int it = 0; it < h; ++it) {
        const auto& current = iterations.back();
        std::vector<std::string> next(current.size());
        for (std::size_t v = 0; v < current.size(); ++v) {
            std::vector<std::string> ns;
            for (int u : neighbors[v]) ns.push_back(current[static_cast<std::size_t>(u)]);
            std::sort(ns.begin(), ns.end());
            std::string signature = current[v] + "(";
            for (std::size_t i = 0; i < ns.size(); ++i) {
                if (i) signature += ";";
                signature += ns[i];
            }
            signature += ")";
            next[v] = signature;
        }
        iterations.push_back(std::move(next));
    }
    return iterations;
}

inline std::map<std::string, long> brute_counts(const std::vector<std::string>& labels) {
    std::map<std::string, long> counts;
    for (const auto& l : labels) ++counts[l];
    return counts;
}

inline double brute_wl_kernel(const cgc::LabeledGraph& ga, const cgc::LabeledGraph& gb, int h,
                              const std::vector<double>& alpha) {
    auto ia = brute_label_iterations(ga, h);
    auto ib = brute_label_iterations(gb, h);
    double total = 0.0;
    for (int it = 0; it <= h; ++it) {
        auto ca = brute_counts(ia[static_cast<std::size_t>(it)]);
        auto cb = brute_counts(ib[static_cast<std::size_t>(it)]);
        double dot = 0.0;
        for (const auto& [label, count] : ca) {
            auto found = cb.find(label);
            if (found != cb.end()) dot += static_cast<double>(count) * static_cast<double>(found->second);
        }
        total += alpha[static_cast<std::size_t>(it)] * dot;
    }
    return total;
}

}  // namespace oracle
