#pragma once

#include <cstdint>

#include "aee/random.hpp"

namespace aee {

/// Global knobs of an additive-error estimator for a known total count.
///
/// n_prime is the register ceiling ceil(2 (1 + eps/3) eps^-2 ln(2/delta)):
/// a register holding n_prime estimates the full n_total. Every estimator
/// sharing these parameters increments with the same probability p, which is
/// what lets callers decide whether to touch memory before hashing.
struct SamplingParams {
    double epsilon = 0.0;
    double delta = 0.0;
    std::uint64_t n_total = 0;
    std::uint64_t n_prime = 0;
    double p = 1.0;
    /// ceil(log2(1 + n_prime)): register width that can hold n_prime.
    unsigned required_bits = 0;
};

/// Throws ParameterError unless 0 < epsilon < 1, 0 < delta < 1 and n_total >= 1.
SamplingParams derive_params(double epsilon, double delta, std::uint64_t n_total);

/// ceil(2 (1 + eps/3) eps^-2 ln(2/delta)), without range checks.
std::uint64_t register_ceiling(double epsilon, double delta);

/// Smallest width holding every value in [0, n]: ceil(log2(1 + n)).
unsigned bits_for(std::uint64_t n) noexcept;

/// A register of `width_bits` bits plus the generation bit used by
/// deamortized downsampling.
struct Estimator {
    std::uint64_t value = 0;
    unsigned width_bits = 0;
    bool generation = false;

    Estimator() = default;
    explicit Estimator(unsigned width);

    std::uint64_t max_value() const noexcept {
        return width_bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width_bits) - 1;
    }
};

enum class UpdateStatus { ok, overflow };

/// Adds one with probability params.p. When the increment lands on a
/// saturated register the value is left untouched and overflow is returned;
/// estimator-core never rescales on its own.
[[nodiscard]] UpdateStatus pincrement(Estimator& est, const SamplingParams& params, Rng& rng);

/// Weighted add: floor(w p) deterministically, plus one with probability
/// w p - floor(w p). On overflow the register is left unchanged.
[[nodiscard]] UpdateStatus add_weighted(Estimator& est, const SamplingParams& params,
                                        std::uint64_t w, Rng& rng);

/// Splits w p into its integral part and the residual probability.
struct WeightSplit {
    std::uint64_t whole = 0;
    double residual = 0.0;
};
WeightSplit split_weight(std::uint64_t w, double p) noexcept;

inline double query(const Estimator& est, const SamplingParams& params) noexcept {
    return static_cast<double>(est.value) / params.p;
}

/// Upper bound W p (1 - p) on the variance of a register that absorbed total
/// weight W.
double counter_variance_bound(const SamplingParams& params, std::uint64_t total_weight) noexcept;

} // namespace aee
