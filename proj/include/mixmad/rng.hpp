#ifndef MIXMAD_RNG_HPP
#define MIXMAD_RNG_HPP

#include <cstdint>
#include <random>

namespace mixmad {

using Rng = std::mt19937_64;

/// Deterministically derives an independent stream seed from a base seed and
/// a salt (splitmix64 finalizer). Used so that e.g. the level-1 detector of
/// an L=2 ensemble sees the same stream as in an L=1 ensemble.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace mixmad

#endif
