#pragma once

#include <cstdint>

#include "fpp/lattice.hpp"

namespace fpp {

// Stateless counter-based randomness: every variate is a pure function of a
// 64-bit key, so trials are reproducible independently of evaluation order
// and trivially parallel.

inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Uniform in the open interval (0, 1); never returns an exact endpoint.
inline double to_unit_open(uint64_t x) {
    return (double(x >> 11) + 0.5) * 0x1.0p-53;
}

// Key of a canonical edge, independent of region, enumeration order and any
// coordinate padding beyond the edge's dimension.
inline uint64_t edge_key(const Edge& e) {
    uint64_t h = 0x452821e638d01377ull;
    for (int i = 0; i < e.base.dim; ++i)
        h = mix64(h ^ static_cast<uint64_t>(static_cast<int64_t>(e.base.c[i])));
    return mix64(h ^ static_cast<uint64_t>(e.axis + 1));
}

inline double uniform_from_key(uint64_t seed, uint64_t key) {
    return to_unit_open(mix64(mix64(seed) ^ key));
}

// Small keyed counter stream for samplers that need a sequence of variates.
class CounterStream {
public:
    CounterStream(uint64_t seed, uint64_t stream) : base_(mix64(mix64(seed) ^ mix64(stream))) {}

    double uniform(uint64_t counter) const { return to_unit_open(mix64(base_ ^ counter)); }
    uint64_t bits(uint64_t counter) const { return mix64(base_ ^ counter); }

private:
    uint64_t base_;
};

}  // namespace fpp
