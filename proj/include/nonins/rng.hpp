#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace nonins {

/// Deterministic PRNG used for every sampling decision in the pipeline.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard. Bounded draws use rejection sampling on raw engine output rather
/// than std::uniform_int_distribution, whose algorithm is implementation
/// defined, so selections are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent stream for `key` under a global seed. Derived by hashing so
    /// that per-item streams do not depend on processing order.
    static Rng derive(std::uint64_t seed, std::string_view key);

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform integer in [lo, hi], inclusive on both ends.
    std::uint64_t uniform_between(std::uint64_t lo, std::uint64_t hi);

    /// Uniform real in [0, 1).
    double uniform_unit();

private:
    std::mt19937_64 engine_;
};

}  // namespace nonins
