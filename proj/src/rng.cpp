#include "nevlab/rng.hpp"

#include <cmath>

namespace nevlab {

double CounterRng::normal(std::uint64_t stream, std::uint64_t index) const {
    // One normal per index; pair (2k, 2k+1) shares the uniforms, cos/sin split.
    std::uint64_t pair = index >> 1;
    double u1 = uniform(stream ^ 0x5bf03635ULL, 2 * pair);
    double u2 = uniform(stream ^ 0x5bf03635ULL, 2 * pair + 1);
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    return (index & 1) ? r * std::sin(a) : r * std::cos(a);
}

} // namespace nevlab
