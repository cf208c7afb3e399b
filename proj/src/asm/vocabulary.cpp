#include "cgc/asm/vocabulary.hpp"

#include <algorithm>
#include <map>

#include "cgc/asm/normalize.hpp"
#include "cgc/util/errors.hpp"
#include "cgc/util/hash.hpp"

namespace cgc {

Vocabulary::Vocabulary() {
    id_to_token_ = {std::string(kPadToken), std::string(kStartToken), std::string(kEndToken),
                    std::string(kUnknownToken)};
    for (std::size_t i = 0; i < id_to_token_.size(); ++i)
        token_to_id_[id_to_token_[i]] = static_cast<int>(i);
}

Vocabulary Vocabulary::build(const std::vector<FunctionRecord>& corpus, std::size_t max_size) {
    if (corpus.empty()) throw EmptyCorpus("cannot build a vocabulary from an empty corpus");
    if (max_size < 1) throw EmptyCorpus("max_size must be at least 1");

    // std::map keeps keys sorted, which settles frequency ties lexicographically
    std::map<std::string, long long> counts;
    for (const auto& f : corpus)
        for (const auto& t : f.tokens) ++counts[t];

    std::vector<std::pair<std::string, long long>> ordered(counts.begin(), counts.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocabulary v;
    v.max_size_ = max_size;
    std::size_t take = std::min(max_size, ordered.size());
    for (std::size_t i = 0; i < take; ++i) {
        v.token_to_id_[ordered[i].first] = static_cast<int>(v.id_to_token_.size());
        v.id_to_token_.push_back(ordered[i].first);
    }
    return v;
}

int Vocabulary::encode(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnknownId : it->second;
}

const std::string& Vocabulary::decode(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        throw DimensionMismatch("token id out of range: " + std::to_string(id));
    return id_to_token_[static_cast<std::size_t>(id)];
}

uint64_t Vocabulary::hash() const {
    uint64_t h = kFnvOffset;
    for (const auto& t : id_to_token_) {
        h = fnv1a64(t, h);
        h = fnv1a64("\n", h);
    }
    return fnv1a64_u64(max_size_, h);
}

nlohmann::json Vocabulary::to_json() const {
    std::vector<std::string> content(id_to_token_.begin() + kReserved, id_to_token_.end());
    return nlohmann::json{{"schema", "vocab/1"}, {"max_size", max_size_}, {"tokens", content}};
}

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
    if (j.value("schema", "") != "vocab/1") throw IoError("not a vocab/1 document");
    Vocabulary v;
    v.max_size_ = j.at("max_size").get<std::size_t>();
    for (const auto& t : j.at("tokens")) {
        std::string token = t.get<std::string>();
        v.token_to_id_[token] = static_cast<int>(v.id_to_token_.size());
        v.id_to_token_.push_back(token);
    }
    return v;
}

std::vector<int> encode_sequence(const FunctionRecord& f, const Vocabulary& v, std::size_t max_len) {
    if (f.is_external)
        throw ExternalFunction("cannot encode external function: " + f.name);
    std::vector<int> ids;
    std::size_t take = std::min(max_len, f.tokens.size());
    ids.reserve(take + 2);
    ids.push_back(Vocabulary::kStartId);
    for (std::size_t i = 0; i < take; ++i) ids.push_back(v.encode(f.tokens[i]));
    ids.push_back(Vocabulary::kEndId);
    return ids;
}

}  // namespace cgc
