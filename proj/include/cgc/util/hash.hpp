#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cgc {

inline constexpr uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr uint64_t kFnvPrime = 1099511628211ULL;

inline uint64_t fnv1a64(std::string_view bytes, uint64_t h = kFnvOffset) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

inline uint64_t fnv1a64_u64(uint64_t v, uint64_t h = kFnvOffset) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (i * 8)) & 0xFFu;
        h *= kFnvPrime;
    }
    return h;
}

std::string hex64(uint64_t v);

// FNV-1a of a file's bytes, rendered as 16 hex digits. Throws IoError.
std::string hash_file(const std::string& path);

}  // namespace cgc
