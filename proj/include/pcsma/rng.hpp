#pragma once

#include <cstdint>

namespace pcsma {

// Seedable, portable 64-bit generator (xoshiro256++ seeded through splitmix64).
// Identical seeds produce identical streams on every platform; none of the
// implementation-defined std::<random> distributions are used anywhere.
//
// Stream splitting: child(k) derives an independent generator from the
// *original* seed and the stream id, never from the evolving state, so the
// split tree is stable no matter how many draws the parent has made.
// Dataset generation uses one child per (cell, sample) and one grandchild per
// role (graph topology, p-vector, simulation), documented in dataset.cpp.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Independent child stream; child(a) != child(b) for a != b.
    Rng child(std::uint64_t stream_id) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double next_double();

    // True with probability p (p <= 0 never, p >= 1 always).
    bool bernoulli(double p);

    // Uniform integer in [0, bound); bound must be > 0.
    std::uint64_t below(std::uint64_t bound);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t s_[4];
};

// splitmix64 mixing step, exposed for deterministic seed derivation.
std::uint64_t splitmix64(std::uint64_t& state);

} // namespace pcsma
