#pragma once

#include <cstddef>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "aee/estimator.hpp"
#include "aee/random.hpp"

namespace aee {

/// Layout of an estimator array whose slots hold the low bits of each count,
/// with counts of threshold or more carrying into a side table.
struct ArrayConfig {
    std::size_t width = 0;
    /// Per-slot capacity T, always a power of two; slots are log2(T) bits.
    std::uint64_t threshold = 0;
    unsigned slot_bits = 0;
    double delta_o = 0.0;
    /// Oversampling bound N' + sqrt(3 N' ln(1/delta_o)).
    double n_tilde = 0.0;
    /// floor(n_tilde / threshold): heavy slots possible unless oversampled.
    std::uint64_t heavy_capacity = 0;
    /// Bits needed for the largest in-contract extension value.
    unsigned extension_bits = 0;
};

/// N' + sqrt(3 N' ln(1/delta_o)); the total number of successful increments
/// across an array exceeds it with probability at most delta_o.
double oversampling_bound(std::uint64_t n_prime, double delta_o);

/// Space-minimizing threshold, rounded up to a byte-aligned power 2^(8z).
/// Falls back to 2^required_bits when the optimizer is undefined (width 1 or a
/// register ceiling too small for the logarithm to be positive).
std::uint64_t choose_threshold(std::size_t width, const SamplingParams& params, double n_tilde);

/// Throws ParameterError for width == 0 or delta_o outside (0,1).
ArrayConfig make_array_config(std::size_t width, const SamplingParams& params, double delta_o);

/// Same, with a caller-chosen threshold (must be a power of two, at most 2^32).
ArrayConfig make_array_config(std::size_t width, const SamplingParams& params, double delta_o,
                              std::uint64_t threshold);

/// Per heavy entry, the compact-table cost is ceil(log2 w) + this many bits
/// (the additive constant of the w*log2(T) + heavy*(log2 w + O(1)) formula).
inline constexpr unsigned kHeavyEntryOverheadBits = 4;

struct SpaceReport {
    /// Closed form: w*log2(T) + heavy_capacity*(ceil(log2 w) + overhead) bits.
    double analytical_bytes = 0.0;
    /// What this process holds: packed slots plus the hash-map nodes and buckets.
    double actual_bytes = 0.0;
};

enum class ArrayStatus { ok, oversampled };

/// w additive-error estimators sharing one sampling probability.
///
/// Slots are packed little-endian, log2(T)/8 bytes each. When a slot reaches
/// T it wraps and the carry goes to a heavy table keyed by slot index. The
/// number of heavy entries never exceeds floor(total increments / T); if it
/// exceeds the configured heavy capacity the array keeps working but reports
/// the epoch as oversampled.
class EstimatorArray {
public:
    EstimatorArray(std::size_t width, const SamplingParams& params, double delta_o);
    EstimatorArray(const ArrayConfig& config, const SamplingParams& params);

    /// Increments slot i with probability p.
    ArrayStatus pincrement(std::size_t i, Rng& rng);
    /// Adds floor(w p), plus one with the residual probability.
    ArrayStatus add(std::size_t i, std::uint64_t w, Rng& rng);
    /// Adds already-sampled register units (the caller flipped the coin).
    ArrayStatus add_raw(std::size_t i, std::uint64_t units);

    double query(std::size_t i) const;
    /// Register value: low bits + T * extension.
    std::uint64_t raw(std::size_t i) const;
    std::uint64_t low_bits(std::size_t i) const;
    std::uint64_t extension(std::size_t i) const;

    std::size_t width() const noexcept { return config_.width; }
    std::uint64_t total_increments() const noexcept { return total_; }
    std::size_t heavy_count() const noexcept { return heavy_.size(); }
    bool oversampled() const noexcept { return oversampled_; }
    SpaceReport memory() const;

    const ArrayConfig& config() const noexcept { return config_; }
    const SamplingParams& params() const noexcept { return params_; }

private:
    void check_index(std::size_t i) const;
    std::uint64_t load(std::size_t i) const noexcept;
    void store(std::size_t i, std::uint64_t v) noexcept;

    ArrayConfig config_;
    SamplingParams params_;
    std::size_t slot_bytes_;
    std::vector<std::uint8_t> slots_;
    std::unordered_map<std::uint32_t, std::uint64_t> heavy_;
    std::uint64_t total_ = 0;
    bool oversampled_ = false;
};

} // namespace aee
