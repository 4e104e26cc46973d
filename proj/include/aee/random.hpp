#pragma once

#include <cstdint>
#include <random>

namespace aee {

/// Seedable generator used by every randomized structure in the library.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard, so a seed reproduces the same stream on every platform. The
/// samplers below are written against the raw 64-bit output rather than the
/// <random> distributions (except binomial) so they are reproducible too.
///
/// Rng satisfies UniformRandomBitGenerator and may be handed to std
/// distributions. An instance must not be shared between threads; give each
/// worker its own, seeded distinctly (see derive_seed).
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

/// Mixes a base seed with a stream index; used to give trials and workers
/// independent generators.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

/// Uniform real in [0, 1) with 53 bits of resolution.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// True with probability q. Throws ParameterError unless 0 <= q <= 1.
bool bernoulli(Rng& rng, double q);

/// Draws from Bin(n, q). Throws ParameterError unless 0 <= q <= 1.
std::uint64_t binomial(Rng& rng, std::uint64_t n, double q);

/// Inverse-transform geometric draw: G = ceil(ln U / ln(1-p)), G >= 1, so
/// Pr[G = x] = p (1-p)^(x-1). Returns 1 for p == 1. Throws ParameterError
/// unless 0 < p <= 1.
std::uint64_t geometric(Rng& rng, double p);

/// Geometric sampler with ln(1-p) precomputed, for hot loops.
class GeometricSampler {
public:
    explicit GeometricSampler(double p);

    double p() const noexcept { return p_; }
    std::uint64_t operator()(Rng& rng) const;

private:
    double p_;
    double log_q_; // ln(1 - p); 0 marks the p == 1 bypass
};

} // namespace aee
