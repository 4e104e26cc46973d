#include "aee/estimator.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "aee/errors.hpp"

namespace aee {

std::uint64_t register_ceiling(double epsilon, double delta) {
    const double raw = 2.0 * (1.0 + epsilon / 3.0) / (epsilon * epsilon) * std::log(2.0 / delta);
    return static_cast<std::uint64_t>(std::ceil(raw));
}

unsigned bits_for(std::uint64_t n) noexcept {
    // ceil(log2(1 + n)) == bit_width(n) for every n >= 0.
    return static_cast<unsigned>(std::bit_width(n));
}

SamplingParams derive_params(double epsilon, double delta, std::uint64_t n_total) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw ParameterError("epsilon must lie in (0,1), got " + std::to_string(epsilon));
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw ParameterError("delta must lie in (0,1), got " + std::to_string(delta));
    }
    if (n_total == 0) throw ParameterError("n_total must be at least 1");

    SamplingParams params;
    params.epsilon = epsilon;
    params.delta = delta;
    params.n_total = n_total;
    params.n_prime = register_ceiling(epsilon, delta);
    params.p = params.n_prime >= n_total
                   ? 1.0
                   : static_cast<double>(params.n_prime) / static_cast<double>(n_total);
    params.required_bits = bits_for(params.n_prime);
    return params;
}

Estimator::Estimator(unsigned width) : width_bits(width) {
    if (width == 0 || width > 64) {
        throw ParameterError("estimator width must lie in [1,64], got " + std::to_string(width));
    }
}

WeightSplit split_weight(std::uint64_t w, double p) noexcept {
    if (p >= 1.0) return {w, 0.0};
    const double scaled = static_cast<double>(w) * p;
    const double whole = std::floor(scaled);
    return {static_cast<std::uint64_t>(whole), scaled - whole};
}

UpdateStatus pincrement(Estimator& est, const SamplingParams& params, Rng& rng) {
    if (!bernoulli(rng, params.p)) return UpdateStatus::ok;
    if (est.value >= est.max_value()) return UpdateStatus::overflow;
    ++est.value;
    return UpdateStatus::ok;
}

UpdateStatus add_weighted(Estimator& est, const SamplingParams& params, std::uint64_t w, Rng& rng) {
    const WeightSplit split = split_weight(w, params.p);
    std::uint64_t inc = split.whole;
    if (split.residual > 0.0 && bernoulli(rng, split.residual)) ++inc;
    if (inc > est.max_value() - est.value) return UpdateStatus::overflow;
    est.value += inc;
    return UpdateStatus::ok;
}

double counter_variance_bound(const SamplingParams& params, std::uint64_t total_weight) noexcept {
    return static_cast<double>(total_weight) * params.p * (1.0 - params.p);
}

} // namespace aee
