#ifndef DRAM_ORACLE_RNG_HPP
#define DRAM_ORACLE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace dram_oracle {

// Counter-based randomness. Every random quantity in the toolkit is a pure
// function of (seed, counter...) so that parallel and serial execution paths
// produce bit-identical results and repeated runs are reproducible.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline uint64_t mix(uint64_t seed, uint64_t a) { return splitmix64(seed ^ splitmix64(a)); }

inline uint64_t mix(uint64_t seed, uint64_t a, uint64_t b) { return mix(mix(seed, a), b); }

inline uint64_t mix(uint64_t seed, uint64_t a, uint64_t b, uint64_t c) {
    return mix(mix(seed, a, b), c);
}

// Uniform in (0,1); never returns exactly 0 so it is safe under log().
inline double u01(uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * (1.0 / 9007199254740992.0);
}

inline double uniform(uint64_t seed, uint64_t ctr) { return u01(mix(seed, ctr)); }

// Standard normal via Box-Muller on two counter-derived uniforms.
inline double gauss(uint64_t seed, uint64_t ctr) {
    const double u1 = u01(mix(seed, ctr, 0x5bd1e995));
    const double u2 = u01(mix(seed, ctr, 0xc2b2ae35));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Knuth's product method; adequate for the small per-word rates used here.
inline uint32_t poisson(uint64_t seed, uint64_t ctr, double lambda) {
    if (lambda <= 0.0) return 0;
    const double limit = std::exp(-lambda);
    double p = 1.0;
    uint32_t k = 0;
    while (true) {
        p *= u01(mix(seed, ctr, k));
        if (p <= limit) return k;
        ++k;
    }
}

}  // namespace dram_oracle

#endif
