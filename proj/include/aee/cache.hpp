#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "aee/estimator.hpp"
#include "aee/estimator_array.hpp"
#include "aee/fingerprint.hpp"
#include "aee/random.hpp"
#include "aee/scaling.hpp"

namespace aee {

enum class CachePolicy { space_saving, rap };
enum class KeyMode { full_id, fingerprint };
/// What query() returns for a key that is not resident.
enum class UnmonitoredPolicy { zero, min_count };

struct ExactCacheCounters {
    unsigned bits = 32;
};

struct AeeCacheCounters {
    SamplingParams params;
    double delta_o = 1e-6;
    std::uint64_t threshold = 0;
};

/// Registers whose p halves on overflow (MaxAccuracy) or on schedule
/// (MaxSpeed). Halving is applied eagerly; entries that drop to zero are
/// released.
struct DynamicCacheCounters {
    ScaleOptions scale;
    unsigned width_bits = 16;
};

using CacheCounterMode = std::variant<ExactCacheCounters, AeeCacheCounters, DynamicCacheCounters>;

struct CacheConfig {
    CachePolicy policy = CachePolicy::space_saving;
    std::size_t capacity = 1024;
    /// Entries per set; 0 makes the table fully associative.
    std::size_t ways = 0;
    KeyMode key_mode = KeyMode::full_id;
    unsigned fingerprint_bits = 24;
    CacheCounterMode counters = ExactCacheCounters{};
    UnmonitoredPolicy unmonitored = UnmonitoredPolicy::zero;
    std::uint64_t seed = 1;
};

/// Space Saving or RAP over a fully or set-associative table.
///
/// A full set evicts its minimal entry, lowest slot index first, and the
/// newcomer inherits that entry's count m plus its own weight. RAP admits the
/// newcomer only with probability u/(m+u). In estimator modes both rules run
/// on the sampled stream: u and m are register units and the coin is tossed
/// before the key is looked up.
class CacheTable {
public:
    explicit CacheTable(CacheConfig config);

    void update(std::string_view flow_key, std::uint64_t w, Rng& rng);
    double query(std::string_view flow_key) const;

    bool resident(std::string_view flow_key) const;
    std::size_t size() const noexcept { return occupied_; }
    std::size_t capacity() const noexcept { return config_.capacity; }
    std::size_t ways() const noexcept { return ways_; }
    std::size_t set_count() const noexcept { return sets_; }
    std::size_t set_of(std::string_view flow_key) const;

    /// Smallest register value in the key's set (0 while the set has a free slot).
    std::uint64_t min_count(std::string_view flow_key) const;
    /// Register value of every resident entry, in slot order.
    std::vector<std::uint64_t> resident_counts() const;

    double p() const;
    std::uint64_t admissions() const noexcept { return admissions_; }
    std::uint64_t rejections() const noexcept { return rejections_; }
    bool out_of_contract() const;

    EntryLayout layout() const;
    SpaceReport memory() const;
    const CacheConfig& config() const noexcept { return config_; }

private:
    using Key = std::variant<std::string, std::uint64_t>;

    struct IdHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };

    std::uint64_t digest_key(std::string_view flow_key, std::uint64_t& fp) const;
    std::optional<std::size_t> find(std::string_view flow_key, std::uint64_t digest,
                                    std::uint64_t fp) const;
    std::size_t set_index(std::uint64_t digest) const noexcept;

    std::uint64_t value(std::size_t slot) const;
    double estimate(std::size_t slot) const;
    void add_units(std::size_t slot, std::uint64_t units);

    bool less(std::size_t a, std::size_t b) const;
    void sift_down(std::size_t set, std::size_t pos);
    void rebuild_heaps();
    std::size_t min_slot(std::size_t set) const noexcept { return heap_[set * ways_]; }

    void admit(std::size_t slot, std::string_view flow_key, std::uint64_t fp);
    void release(std::size_t slot);
    void release_empty();

    CacheConfig config_;
    std::size_t ways_ = 0;
    std::size_t sets_ = 0;
    std::uint64_t set_seed_ = 0;
    std::uint64_t fp_seed_ = 0;

    std::vector<std::uint64_t> exact_;
    std::uint64_t exact_max_ = 0;
    std::optional<EstimatorArray> array_;
    std::optional<GeometricSampler> geo_;
    std::uint64_t geo_budget_ = 0;
    std::vector<Estimator> registers_;
    std::optional<ScaleController> controller_;

    std::vector<std::optional<Key>> keys_;
    std::unordered_map<std::string, std::size_t, IdHash, std::equal_to<>> by_id_;
    std::unordered_map<std::uint64_t, std::size_t> by_fp_;
    /// Per set, a binary min-heap of slot indices ordered by (value, slot).
    std::vector<std::size_t> heap_;
    std::vector<std::size_t> pos_;
    std::size_t occupied_ = 0;
    std::uint64_t admissions_ = 0;
    std::uint64_t rejections_ = 0;
};

} // namespace aee
