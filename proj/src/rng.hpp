#ifndef CLINKD_RNG_HPP
#define CLINKD_RNG_HPP

#include <cstdint>

namespace clinkd {

// Deterministic stream generator: xoshiro256++ seeded through splitmix64.
// Pure integer arithmetic, so identical seeds yield identical streams on
// every platform. All randomness in the library flows through this class;
// there is no ambient entropy anywhere.
class Rng {
public:
    explicit Rng(uint64_t seed);

    uint64_t next_u64();

    // Uniform in [0, 1), 53-bit resolution.
    double uniform();

    // Standard normal via Box-Muller; consumes exactly two uniforms per call.
    double normal();

    // Derive an independent child stream (for per-item determinism).
    Rng fork(uint64_t salt) const;

private:
    uint64_t state_[4];
    uint64_t seed_;
};

// FNV-1a 64-bit over a byte string; also used for config hashing and the
// feature-hash embedder.
uint64_t fnv1a64(const void* data, size_t len, uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace clinkd

#endif
