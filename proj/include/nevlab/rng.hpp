#pragma once

#include <cstdint>

namespace nevlab {

/// Counter-based random stream: every variate is a pure function of
/// (seed, stream, index), so parallel or re-ordered evaluation cannot change
/// results.  Mixing is the splitmix64 finalizer applied to the packed key.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    /// Uniform on (0,1), open at both ends.
    double uniform(std::uint64_t stream, std::uint64_t index) const {
        std::uint64_t z = mix(seed_ ^ mix(stream ^ 0x9e3779b97f4a7c15ULL) ^ mix(index));
        return ((z >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    /// Standard normal via Box-Muller; component selects cos/sin branch.
    double normal(std::uint64_t stream, std::uint64_t index) const;

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_;
};

} // namespace nevlab
