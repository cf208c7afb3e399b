#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace cgc {

// Desk-scale corpus generator: each family owns a set of instruction motifs
// and a characteristic wiring style; files instantiate mutated motifs and a
// call topology, emitted as parsable listings.
struct SyntheticFamilySpec {
    std::string name;
    int motif_count = 12;
    int motif_min_len = 6;
    int motif_max_len = 28;
    double mutation_rate = 0.08;
    int functions_min = 30;
    int functions_max = 80;
    double edge_density = 1.5;  // distinct internal call pairs per function
    std::vector<std::string> imports;
    int samples = 50;

    void validate() const;  // InvalidSpec

    nlohmann::json to_json() const;
    static SyntheticFamilySpec from_json(const nlohmann::json& j);
};

struct SyntheticFileTruth {
    std::string file_id;
    std::string family;
    long function_count = 0;
    long vertex_count = 0;  // internal + distinct imports
    long edge_count = 0;    // distinct internal pairs + import call pairs
};

struct SyntheticCorpus {
    std::vector<std::pair<std::string, std::string>> files;  // id -> listing text
    std::map<std::string, std::string> labels;               // id -> family
    std::vector<SyntheticFileTruth> truth;
};

SyntheticCorpus generate_synthetic_corpus(const std::vector<SyntheticFamilySpec>& specs,
                                          uint64_t seed);

// <id>.asm per file plus labels.json and truth.json.
void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::string& dir);

// Family specs used by the CLI when no spec file is given.
std::vector<SyntheticFamilySpec> default_family_specs(int families, int samples_per_family,
                                                      int functions_min = 30,
                                                      int functions_max = 80);

}  // namespace cgc
