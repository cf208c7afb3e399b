#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace cgc {

uint64_t splitmix64(uint64_t x);

// Deterministic RNG wrapper. std:: distributions are implementation-defined,
// so every draw goes through these helpers; the byte stream is identical on
// any conforming platform.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    // Named substream derived from one global seed. Components seed their
    // randomness through substreams so they can be re-run independently.
    static Rng substream(uint64_t global_seed, std::string_view name);

    uint64_t next_u64() { return engine_(); }

    // [0, 1) with 53 bits of entropy
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // unbiased integer in [0, n)
    uint64_t bounded(uint64_t n);

    // inclusive range
    int64_t uniform_int(int64_t lo, int64_t hi) {
        return lo + static_cast<int64_t>(bounded(static_cast<uint64_t>(hi - lo + 1)));
    }

    double gaussian();

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(bounded(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace cgc
