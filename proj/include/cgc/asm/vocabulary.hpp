#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "cgc/asm/functions.hpp"

namespace cgc {

// Token ids: 0..3 reserved for <pad>, <start>, <end>, <unknown>; content
// tokens follow contiguously in frequency order (ties lexicographic).
class Vocabulary {
public:
    static constexpr int kPadId = 0;
    static constexpr int kStartId = 1;
    static constexpr int kEndId = 2;
    static constexpr int kUnknownId = 3;
    static constexpr int kReserved = 4;

    Vocabulary();

    // Throws EmptyCorpus when the corpus is empty.
    static Vocabulary build(const std::vector<FunctionRecord>& corpus, std::size_t max_size);

    int encode(const std::string& token) const;  // out-of-vocabulary -> kUnknownId
    const std::string& decode(int id) const;

    std::size_t content_size() const { return id_to_token_.size() - kReserved; }
    std::size_t size() const { return id_to_token_.size(); }
    std::size_t max_size() const { return max_size_; }

    uint64_t hash() const;

    nlohmann::json to_json() const;
    static Vocabulary from_json(const nlohmann::json& j);

    bool operator==(const Vocabulary& other) const { return id_to_token_ == other.id_to_token_; }

private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, int> token_to_id_;
    std::size_t max_size_ = 0;
};

// [<start>] + token ids truncated to max_len + [<end>].
// Throws ExternalFunction for external records.
std::vector<int> encode_sequence(const FunctionRecord& f, const Vocabulary& v, std::size_t max_len);

}  // namespace cgc
