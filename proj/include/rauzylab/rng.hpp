#pragma once

#include <cstdint>
#include <cmath>

namespace rauzylab {

// Counter-based splittable generator (splitmix64 core).  A stream is keyed by
// (master seed, stream id) so trials can run in parallel and still reproduce
// bit-identical sequences regardless of scheduling.
class Rng {
public:
    Rng() : state_(0x9e3779b97f4a7c15ull) {}
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}
    Rng(std::uint64_t master_seed, std::uint64_t stream_id)
        : state_(mix(mix(master_seed ^ 0x9e3779b97f4a7c15ull) + stream_id)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return mix(state_);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Multiply-shift rejection-free map; the modulo bias is < 2^-64 * n.
        return static_cast<std::uint64_t>((static_cast<__uint128_t>(next_u64()) * n) >> 64);
    }

    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

} // namespace rauzylab
