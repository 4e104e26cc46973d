#include "aee/estimator_array.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "aee/errors.hpp"

namespace aee {

double oversampling_bound(std::uint64_t n_prime, double delta_o) {
    if (!(delta_o > 0.0 && delta_o <= 1.0)) {
        throw ParameterError("delta_o must lie in (0,1], got " + std::to_string(delta_o));
    }
    const double np = static_cast<double>(n_prime);
    return np + std::sqrt(3.0 * np * std::log(1.0 / delta_o));
}

std::uint64_t choose_threshold(std::size_t width, const SamplingParams& params, double n_tilde) {
    const unsigned fallback_bits = std::min(params.required_bits, 32U);
    const std::uint64_t fallback = std::uint64_t{1} << fallback_bits;
    if (width <= 1) return fallback;

    const double log_w = std::log2(static_cast<double>(width));
    const double inner = static_cast<double>(params.n_prime) * log_w / static_cast<double>(width);
    if (!(inner > 1.0)) return fallback;
    const double t_opt = n_tilde * log_w / (static_cast<double>(width) * std::log2(inner));

    for (unsigned z = 1; z <= 4; ++z) {
        const std::uint64_t t = std::uint64_t{1} << (8 * z);
        if (static_cast<double>(t) >= t_opt) return t;
    }
    return std::uint64_t{1} << 32;
}

ArrayConfig make_array_config(std::size_t width, const SamplingParams& params, double delta_o,
                              std::uint64_t threshold) {
    if (width == 0) throw ParameterError("array width must be at least 1");
    if (!(delta_o > 0.0 && delta_o < 1.0)) {
        throw ParameterError("delta_o must lie in (0,1), got " + std::to_string(delta_o));
    }
    if (!std::has_single_bit(threshold) || threshold > (std::uint64_t{1} << 32)) {
        throw ParameterError("threshold must be a power of two no larger than 2^32");
    }
    ArrayConfig cfg;
    cfg.width = width;
    cfg.delta_o = delta_o;
    cfg.n_tilde = oversampling_bound(params.n_prime, delta_o);
    cfg.threshold = threshold;
    cfg.slot_bits = static_cast<unsigned>(std::countr_zero(threshold));
    cfg.heavy_capacity = static_cast<std::uint64_t>(std::floor(cfg.n_tilde / static_cast<double>(threshold)));
    cfg.extension_bits = std::max(1U, bits_for(cfg.heavy_capacity));
    return cfg;
}

ArrayConfig make_array_config(std::size_t width, const SamplingParams& params, double delta_o) {
    if (width == 0) throw ParameterError("array width must be at least 1");
    const double n_tilde = oversampling_bound(params.n_prime, delta_o);
    return make_array_config(width, params, delta_o, choose_threshold(width, params, n_tilde));
}

EstimatorArray::EstimatorArray(std::size_t width, const SamplingParams& params, double delta_o)
    : EstimatorArray(make_array_config(width, params, delta_o), params) {}

EstimatorArray::EstimatorArray(const ArrayConfig& config, const SamplingParams& params)
    : config_(config),
      params_(params),
      slot_bytes_(std::max<std::size_t>(1, (config.slot_bits + 7) / 8)),
      slots_(config.width * slot_bytes_, 0) {}

void EstimatorArray::check_index(std::size_t i) const {
    if (i >= config_.width) {
        throw IndexError("slot " + std::to_string(i) + " outside array of width " +
                         std::to_string(config_.width));
    }
}

std::uint64_t EstimatorArray::load(std::size_t i) const noexcept {
    std::uint64_t v = 0;
    std::memcpy(&v, slots_.data() + i * slot_bytes_, slot_bytes_);
    return v;
}

void EstimatorArray::store(std::size_t i, std::uint64_t v) noexcept {
    std::memcpy(slots_.data() + i * slot_bytes_, &v, slot_bytes_);
}

ArrayStatus EstimatorArray::pincrement(std::size_t i, Rng& rng) {
    check_index(i);
    if (!bernoulli(rng, params_.p)) return oversampled_ ? ArrayStatus::oversampled : ArrayStatus::ok;
    return add_raw(i, 1);
}

ArrayStatus EstimatorArray::add(std::size_t i, std::uint64_t w, Rng& rng) {
    check_index(i);
    const WeightSplit split = split_weight(w, params_.p);
    std::uint64_t units = split.whole;
    if (split.residual > 0.0 && bernoulli(rng, split.residual)) ++units;
    if (units == 0) return oversampled_ ? ArrayStatus::oversampled : ArrayStatus::ok;
    return add_raw(i, units);
}

ArrayStatus EstimatorArray::add_raw(std::size_t i, std::uint64_t units) {
    check_index(i);
    total_ += units;
    std::uint64_t v = load(i) + units;
    if (v >= config_.threshold) {
        heavy_[static_cast<std::uint32_t>(i)] += v >> config_.slot_bits;
        v &= config_.threshold - 1;
        if (heavy_.size() > config_.heavy_capacity) oversampled_ = true;
    }
    store(i, v);
    return oversampled_ ? ArrayStatus::oversampled : ArrayStatus::ok;
}

std::uint64_t EstimatorArray::low_bits(std::size_t i) const {
    check_index(i);
    return load(i);
}

std::uint64_t EstimatorArray::extension(std::size_t i) const {
    check_index(i);
    const auto it = heavy_.find(static_cast<std::uint32_t>(i));
    return it == heavy_.end() ? 0 : it->second;
}

std::uint64_t EstimatorArray::raw(std::size_t i) const {
    return low_bits(i) + config_.threshold * extension(i);
}

double EstimatorArray::query(std::size_t i) const {
    return static_cast<double>(raw(i)) / params_.p;
}

SpaceReport EstimatorArray::memory() const {
    const double index_bits = std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(config_.width, 2))));
    SpaceReport report;
    report.analytical_bytes =
        (static_cast<double>(config_.width) * config_.slot_bits +
         static_cast<double>(config_.heavy_capacity) * (index_bits + kHeavyEntryOverheadBits)) /
        8.0;
    using Node = std::pair<const std::uint32_t, std::uint64_t>;
    report.actual_bytes = static_cast<double>(slots_.size()) +
                          static_cast<double>(heavy_.size()) * (sizeof(void*) + sizeof(Node)) +
                          static_cast<double>(heavy_.bucket_count()) * sizeof(void*);
    return report;
}

} // namespace aee
