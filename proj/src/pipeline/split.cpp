#include "cgc/pipeline/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cgc/util/errors.hpp"
#include "cgc/util/rng.hpp"

namespace cgc {

DatasetSplit split_dataset(const std::vector<std::pair<std::string, std::string>>& id_family,
                           double test_fraction, double validation_fraction, uint64_t seed) {
    std::map<std::string, std::vector<std::string>> by_family;
    for (const auto& [id, family] : id_family) by_family[family].push_back(id);

    DatasetSplit split;
    for (auto& [family, ids] : by_family) {
        if (ids.size() < 3)
            throw FamilyTooSmall("family '" + family + "' has only " + std::to_string(ids.size()) +
                                 " samples (minimum 3)");
        std::sort(ids.begin(), ids.end());  // input order must not matter
        Rng rng = Rng::substream(seed, "split:" + family);
        rng.shuffle(ids);

        std::size_t n = ids.size();
        std::size_t n_test = static_cast<std::size_t>(
            std::llround(static_cast<double>(n) * test_fraction));
        std::size_t n_val = static_cast<std::size_t>(
            std::llround(static_cast<double>(n - n_test) * validation_fraction));
        // keep at least one training sample per family
        if (n_test + n_val >= n) n_val = n - n_test > 0 ? n - n_test - 1 : 0;

        for (std::size_t i = 0; i < n; ++i) {
            if (i < n_test)
                split.test.push_back(ids[i]);
            else if (i < n_test + n_val)
                split.validation.push_back(ids[i]);
            else
                split.train.push_back(ids[i]);
        }
    }
    return split;
}

nlohmann::json DatasetSplit::to_json() const {
    return nlohmann::json{{"schema", "split/1"},
                          {"train", train},
                          {"validation", validation},
                          {"test", test}};
}

DatasetSplit DatasetSplit::from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "split/1") throw IoError("not a split/1 document");
    DatasetSplit s;
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    return s;
}

}  // namespace cgc
