#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cgc {

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;

    nlohmann::json to_json() const;
    static DatasetSplit from_json(const nlohmann::json& j);
};

// Stratified by family, independent of input order, deterministic under
// seed. test_fraction applies per family; validation_fraction applies to the
// remaining training portion. Throws FamilyTooSmall for families with fewer
// than 3 samples.
DatasetSplit split_dataset(const std::vector<std::pair<std::string, std::string>>& id_family,
                           double test_fraction, double validation_fraction, uint64_t seed);

}  // namespace cgc
