#pragma once

#include <cstddef>
#include <cstdint>

#include "aee/estimator_array.hpp"

namespace aee {

/// Bytes of a 5-tuple flow identifier stored verbatim.
inline constexpr unsigned kFlowIdBytes = 13;

/// Fingerprint width that keeps the volume colliding with any tracked flow
/// below N*eps_f with probability 1 - delta_f:
/// ceil(max{log2(1/(alpha eps_f delta_f)), log2(e / (eps_f delta_f^alpha))}).
/// Throws ParameterError unless 0 < alpha <= 1 and 0 < eps_f, delta_f < 1.
unsigned fingerprint_length(double alpha, double eps_f, double delta_f);

/// Failure bound for a split of n_total packets into s_large packets of
/// large flows and s_small packets of small flows:
/// alpha^-1 2^-L S_L / (N eps_f) + (e 2^-L S_S / (N eps_f))^(1/alpha).
double collision_failure_prob(unsigned length_bits, double alpha, double eps_f,
                              std::uint64_t s_large, std::uint64_t s_small,
                              std::uint64_t n_total);

/// Largest collision_failure_prob over s_large = 0, step, ..., n_total with
/// s_small = n_total - s_large. Both terms are convex in the split, so the
/// grid always includes the two endpoints.
double max_failure_over_splits(unsigned length_bits, double alpha, double eps_f,
                               std::uint64_t n_total, std::size_t steps = 1000);

/// Low `length_bits` bits of a seeded hash of the key digest.
std::uint64_t fingerprint_of(std::uint64_t digest, unsigned length_bits, std::uint64_t seed) noexcept;

/// Per-entry layout of a cache table. key_bits == 0 means the full flow id.
struct EntryLayout {
    unsigned key_bits = 0;
    unsigned counter_bits = 32;
};

/// Key bytes plus counter bytes, each rounded up to whole bytes.
std::size_t entry_footprint(const EntryLayout& layout) noexcept;

/// Error and probability of a counter cache with w entries, fingerprint keys
/// and (eps, delta) estimators: N*(eps + 1/w + eps_f) with probability
/// 1 - delta - delta_f.
struct CacheBudget {
    double epsilon_total = 0.0;
    double probability = 0.0;
};
CacheBudget cache_budget(double epsilon, double delta, std::size_t width, double eps_f,
                         double delta_f);

/// Bytes of a cache whose counters form an estimator array: w entries of
/// key + slot bits, plus the heavy table.
double cache_memory_bytes(const ArrayConfig& array, unsigned key_bits);

} // namespace aee
