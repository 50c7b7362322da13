#pragma once

#include <cstdint>
#include <random>

namespace sbdc::rnd {

// Uniform doubles derived from the raw engine bits; keeps seeded output
// byte-reproducible across standard library implementations.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace sbdc::rnd
