#include "aee/scaling.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "aee/errors.hpp"

namespace aee {

double ScaleState::p() const noexcept {
    return std::ldexp(1.0, -static_cast<int>(log2_inv_p));
}

void downsample_deterministic(Estimator& est) noexcept {
    est.value >>= 1;
    est.generation = !est.generation;
}

void downsample_probabilistic(Estimator& est, Rng& rng) {
    est.value = binomial(rng, est.value, 0.5);
    est.generation = !est.generation;
}

std::size_t deamortized_sweep(std::span<Estimator> counters, std::size_t cursor, std::size_t k,
                              bool target_generation, DownsampleKind kind, Rng* rng) {
    if (kind == DownsampleKind::probabilistic && rng == nullptr) {
        throw ParameterError("probabilistic sweep needs a random generator");
    }
    const std::size_t end = std::min(counters.size(), cursor + k);
    for (std::size_t i = cursor; i < end; ++i) {
        Estimator& est = counters[i];
        if (est.generation == target_generation) continue;
        if (kind == DownsampleKind::deterministic) {
            downsample_deterministic(est);
        } else {
            downsample_probabilistic(est, *rng);
        }
    }
    return std::max(end, cursor);
}

unsigned max_speed_exponent(std::uint64_t n_seen, std::uint64_t n_prime) noexcept {
    if (n_prime == 0 || n_seen < n_prime) return 0;
    // floor(log2(n / n')) == floor(log2(floor(n / n'))) once the ratio is >= 1.
    return static_cast<unsigned>(std::bit_width(n_seen / n_prime)) - 1;
}

std::uint64_t skip_count(ScaleState& state, Rng& rng) {
    state.geo_budget = GeometricSampler(state.p())(rng);
    return state.geo_budget;
}

ScaleController::ScaleController(const ScaleOptions& options) : options_(options) {
    if (options.mode == ScaleMode::max_speed && options.n_prime == 0) {
        throw ParameterError("MaxSpeed needs n_prime >= 1");
    }
    state_.n_prime = options.n_prime;
    state_.mode = options.mode;
    state_.downsample_kind = options.downsample;
    state_.geo_budget = 1;
    next_rescale_ = options.mode == ScaleMode::max_speed ? 0 : ~std::uint64_t{0};
}

void ScaleController::redraw_budget(Rng& rng) {
    geo_ = GeometricSampler(state_.p());
    state_.geo_budget = geo_(rng);
}

std::uint64_t ScaleController::consume_trials(std::uint64_t trials, Rng& rng) {
    std::uint64_t successes = 0;
    while (state_.geo_budget <= trials) {
        ++successes;
        trials -= state_.geo_budget;
        state_.geo_budget = geo_(rng);
    }
    state_.geo_budget -= trials;
    return successes;
}

bool ScaleController::residual_coin(std::uint64_t residual, Rng& rng) {
    if (residual == 0) return false;
    if (state_.log2_inv_p == 0) return true;
    return uniform01(rng) < std::ldexp(static_cast<double>(residual), -static_cast<int>(state_.log2_inv_p));
}

void ScaleController::halve(std::span<Estimator> store, unsigned times, Rng& rng) {
    if (times == 0) return;
    if (options_.deamortized) {
        for (unsigned t = 0; t < times; ++t) {
            if (sweeping_) {
                deamortized_sweep(store, cursor_, store.size(), target_generation_,
                                  options_.downsample, &rng);
            }
            target_generation_ = !target_generation_;
            cursor_ = 0;
            sweeping_ = !store.empty();
        }
    } else {
        const bool flip = (times & 1U) != 0;
        for (Estimator& est : store) {
            if (options_.downsample == DownsampleKind::deterministic) {
                est.value = times >= 64 ? 0 : est.value >> times;
            } else {
                est.value = binomial(rng, est.value, std::ldexp(1.0, -static_cast<int>(times)));
            }
            if (flip) est.generation = !est.generation;
        }
        if (flip) target_generation_ = !target_generation_;
    }
    state_.log2_inv_p += times;
    halvings_ += times;
    redraw_budget(rng);
}

void ScaleController::sweep_step(std::span<Estimator> store, Rng& rng) {
    if (!sweeping_) return;
    std::size_t rate = options_.sweep_rate;
    if (rate == 0) {
        const std::uint64_t n_prime = std::max<std::uint64_t>(options_.n_prime, 1);
        rate = static_cast<std::size_t>((store.size() + n_prime - 1) / n_prime);
        rate = std::max<std::size_t>(rate, 1);
    }
    cursor_ = deamortized_sweep(store, cursor_, rate, target_generation_, options_.downsample, &rng);
    if (cursor_ >= store.size()) sweeping_ = false;
}

void ScaleController::catch_up(std::span<Estimator> store, std::size_t slot, Rng& rng) {
    Estimator& est = store[slot];
    if (est.generation == target_generation_) return;
    if (options_.downsample == DownsampleKind::deterministic) {
        downsample_deterministic(est);
    } else {
        downsample_probabilistic(est, rng);
    }
}

void ScaleController::catch_up_all(std::span<Estimator> store, std::span<const std::size_t> slots,
                                   Rng& rng) {
    if (!sweeping_) return;
    for (std::size_t slot : slots) catch_up(store, slot, rng);
}

double ScaleController::scaled_value(const Estimator& est) const noexcept {
    if (est.generation == target_generation_) return static_cast<double>(est.value);
    if (options_.downsample == DownsampleKind::deterministic) {
        return static_cast<double>(est.value >> 1);
    }
    return static_cast<double>(est.value) / 2.0;
}

bool ScaleController::begin_slow(std::span<Estimator> store, std::uint64_t w, Rng& rng, Pending& pending) {
    pending = Pending{};
    pending.weight = w;
    sweep_step(store, rng);
    state_.n_seen += w;
    const unsigned k = state_.log2_inv_p;

    if (options_.mode == ScaleMode::max_speed) {
        if (state_.n_seen >= next_rescale_) {
            const unsigned target = max_speed_exponent(state_.n_seen, state_.n_prime);
            if (target > k) halve(store, target - k, rng);
            const unsigned shift = state_.log2_inv_p + 1;
            const bool fits = shift < 64 && state_.n_prime <= (~std::uint64_t{0} >> shift);
            next_rescale_ = fits ? state_.n_prime << shift : ~std::uint64_t{0};
        }
        const unsigned kk = state_.log2_inv_p;
        const std::uint64_t whole = kk >= 64 ? 0 : w >> kk;
        const std::uint64_t residual = kk >= 64 ? w : w - (whole << kk);
        pending.units = whole + consume_trials(residual, rng);
        return pending.units > 0;
    }

    const std::uint64_t whole = k >= 64 ? 0 : w >> k;
    if (whole == 0) {
        pending.coin_known = true;
        pending.coin = residual_coin(w, rng);
        return pending.coin;
    }
    return true;
}

void ScaleController::commit(std::span<Estimator> store, std::span<const std::size_t> slots,
                             Pending& pending, Rng& rng) {
    catch_up_all(store, slots, rng);
    if (options_.mode == ScaleMode::max_speed) {
        commit_max_speed(store, slots, pending, rng);
    } else {
        commit_max_accuracy(store, slots, pending, rng);
    }
}

void ScaleController::commit_max_speed(std::span<Estimator> store, std::span<const std::size_t> slots,
                                       const Pending& pending, Rng& /*rng*/) {
    for (std::size_t slot : slots) {
        Estimator& est = store[slot];
        const std::uint64_t room = est.max_value() - est.value;
        if (pending.units > room) {
            est.value = est.max_value();
            ++overflow_events_;
        } else {
            est.value += pending.units;
        }
    }
}

void ScaleController::commit_max_accuracy(std::span<Estimator> store,
                                          std::span<const std::size_t> slots, Pending& pending,
                                          Rng& rng) {
    const std::uint64_t w = pending.weight;
    auto whole_part = [&] {
        const unsigned k = state_.log2_inv_p;
        return k >= 64 ? std::uint64_t{0} : w >> k;
    };

    std::uint64_t w1 = 0;
    bool coin = pending.coin;
    if (!pending.coin_known) {
        w1 = whole_part();
        // Overflow event: halve everything until the deterministic part fits.
        for (;;) {
            bool overflow = false;
            for (std::size_t slot : slots) {
                const Estimator& est = store[slot];
                if (est.value > est.max_value() - std::min(w1, est.max_value())) overflow = true;
                if (w1 > est.max_value()) overflow = true;
            }
            if (!overflow) break;
            halve(store, 1, rng);
            catch_up_all(store, slots, rng);
            w1 = whole_part();
        }
        const unsigned k = state_.log2_inv_p;
        const std::uint64_t residual = k >= 64 ? w : w - (w1 << k);
        coin = residual_coin(residual, rng);
    }

    for (std::size_t slot : slots) {
        Estimator& est = store[slot];
        est.value += w1;
        if (!coin) continue;
        if (est.value >= est.max_value()) {
            halve(store, 1, rng);
            catch_up_all(store, slots, rng);
            w1 = whole_part();
        }
        est.value += 1;
    }
}

} // namespace aee
