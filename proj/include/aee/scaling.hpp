#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "aee/estimator.hpp"
#include "aee/random.hpp"

namespace aee {

enum class ScaleMode { max_accuracy, max_speed };
enum class DownsampleKind { deterministic, probabilistic };

/// Sampling state shared by every counter of one structure when the total
/// count is not known in advance. p is always 2^-log2_inv_p.
struct ScaleState {
    unsigned log2_inv_p = 0;
    std::uint64_t n_seen = 0;
    std::uint64_t n_prime = 0;
    /// Unit trials left until (and including) the next sampled one.
    std::uint64_t geo_budget = 1;
    ScaleMode mode = ScaleMode::max_accuracy;
    DownsampleKind downsample_kind = DownsampleKind::deterministic;

    double p() const noexcept;
};

/// floor(value / 2), generation bit flipped.
void downsample_deterministic(Estimator& est) noexcept;

/// Bin(value, 1/2), generation bit flipped.
void downsample_probabilistic(Estimator& est, Rng& rng);

/// Visits positions [cursor, cursor + k) and downsamples every counter whose
/// generation differs from target_generation; counters already at the target
/// (downsampled early because they were touched) are left alone. Returns the
/// new cursor, which equals counters.size() once the sweep is complete.
/// Probabilistic sweeps need an rng.
std::size_t deamortized_sweep(std::span<Estimator> counters, std::size_t cursor, std::size_t k,
                              bool target_generation,
                              DownsampleKind kind = DownsampleKind::deterministic,
                              Rng* rng = nullptr);

/// log2(1/p) for the MaxSpeed schedule p = min{1, 2^-floor(log2(n/n_prime))}.
unsigned max_speed_exponent(std::uint64_t n_seen, std::uint64_t n_prime) noexcept;

/// Draws a fresh geometric skip budget for the state's current p and stores
/// it in state.geo_budget.
std::uint64_t skip_count(ScaleState& state, Rng& rng);

struct ScaleOptions {
    ScaleMode mode = ScaleMode::max_accuracy;
    DownsampleKind downsample = DownsampleKind::deterministic;
    /// Register ceiling N'; drives the MaxSpeed schedule.
    std::uint64_t n_prime = 0;
    /// Spread each halving over subsequent updates instead of rescaling
    /// everything at once.
    bool deamortized = false;
    /// Counters swept per update when deamortized; 0 picks
    /// ceil(counters / n_prime) so a sweep ends within the shortest epoch.
    std::size_t sweep_rate = 0;
};

/// Runs MaxAccuracy or MaxSpeed over a caller-owned array of estimators.
///
/// The owning structure (sketch, cache, single estimator) keeps the registers
/// in one contiguous span and passes it to every call, so "divide all
/// counters by two" reaches every register it owns. An update is split in two
/// phases so the sampling decision happens before the caller hashes the key:
///
///     ScaleController::Pending pending;
///     if (ctl.begin(store, w, rng, pending)) {
///         auto slots = locate(key);           // only on sampled updates
///         ctl.commit(store, slots, pending, rng);
///     }
///
/// All counters of one update share one coin. MaxAccuracy draws it per update;
/// MaxSpeed consumes a geometric skip budget. A controller and its store form
/// a single-writer unit.
class ScaleController {
public:
    struct Pending {
        std::uint64_t weight = 0;
        /// MaxSpeed: total register increment. MaxAccuracy: unused.
        std::uint64_t units = 0;
        /// MaxAccuracy: the residual coin was drawn in begin().
        bool coin_known = false;
        bool coin = false;
    };

    explicit ScaleController(const ScaleOptions& options);

    /// Phase one. Advances n, applies scheduled halvings and performs pending
    /// sweep work. Returns false when the update changes no counter.
    bool begin(std::span<Estimator> store, std::uint64_t w, Rng& rng, Pending& pending) {
        // MaxSpeed update that only spends skip budget: no schedule change,
        // no sweep, no sampled trial.
        if (options_.mode == ScaleMode::max_speed && !sweeping_ && w < state_.geo_budget &&
            state_.n_seen + w < next_rescale_ && state_.log2_inv_p < 64 &&
            (w >> state_.log2_inv_p) == 0) {
            state_.n_seen += w;
            state_.geo_budget -= w;
            pending = Pending{};
            pending.weight = w;
            return false;
        }
        return begin_slow(store, w, rng, pending);
    }

    /// Phase two: applies the update to the counters at `slots`.
    void commit(std::span<Estimator> store, std::span<const std::size_t> slots, Pending& pending,
                Rng& rng);

    template <class SlotsFn>
    void add(std::span<Estimator> store, std::uint64_t w, Rng& rng, SlotsFn&& slots_fn) {
        Pending pending;
        if (begin(store, w, rng, pending)) commit(store, slots_fn(), pending, rng);
    }

    void add(std::span<Estimator> store, std::span<const std::size_t> slots, std::uint64_t w,
             Rng& rng) {
        add(store, w, rng, [slots] { return slots; });
    }

    /// Brings one counter to the current generation (deamortized mode).
    void catch_up(std::span<Estimator> store, std::size_t slot, Rng& rng);

    /// Register value in units of the current p, accounting for a pending sweep.
    double scaled_value(const Estimator& est) const noexcept;
    double estimate(const Estimator& est) const noexcept { return scaled_value(est) / p(); }

    double p() const noexcept { return state_.p(); }
    const ScaleState& state() const noexcept { return state_; }
    const ScaleOptions& options() const noexcept { return options_; }
    std::uint64_t halvings() const noexcept { return halvings_; }
    /// MaxSpeed registers that hit their ceiling and saturated.
    std::uint64_t overflow_events() const noexcept { return overflow_events_; }
    bool sweep_active() const noexcept { return sweeping_; }
    bool target_generation() const noexcept { return target_generation_; }

private:
    bool begin_slow(std::span<Estimator> store, std::uint64_t w, Rng& rng, Pending& pending);
    void halve(std::span<Estimator> store, unsigned times, Rng& rng);
    void sweep_step(std::span<Estimator> store, Rng& rng);
    void catch_up_all(std::span<Estimator> store, std::span<const std::size_t> slots, Rng& rng);
    std::uint64_t consume_trials(std::uint64_t trials, Rng& rng);
    bool residual_coin(std::uint64_t residual, Rng& rng);
    void redraw_budget(Rng& rng);

    void commit_max_accuracy(std::span<Estimator> store, std::span<const std::size_t> slots,
                             Pending& pending, Rng& rng);
    void commit_max_speed(std::span<Estimator> store, std::span<const std::size_t> slots,
                          const Pending& pending, Rng& rng);

    ScaleOptions options_;
    ScaleState state_;
    GeometricSampler geo_{1.0};
    bool target_generation_ = false;
    bool sweeping_ = false;
    std::size_t cursor_ = 0;
    /// MaxSpeed: smallest n at which the schedule may lower p again.
    std::uint64_t next_rescale_ = 0;
    std::uint64_t halvings_ = 0;
    std::uint64_t overflow_events_ = 0;
};

} // namespace aee
