#include "aee/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "aee/errors.hpp"
#include "aee/hash.hpp"

namespace aee {

namespace {

void check_split_params(double alpha, double eps_f) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0,1]");
    if (!(eps_f > 0.0 && eps_f < 1.0)) throw ParameterError("eps_f must lie in (0,1)");
}

} // namespace

unsigned fingerprint_length(double alpha, double eps_f, double delta_f) {
    check_split_params(alpha, eps_f);
    if (!(delta_f > 0.0 && delta_f < 1.0)) throw ParameterError("delta_f must lie in (0,1)");
    const double large = std::log2(1.0 / (alpha * eps_f * delta_f));
    const double small = std::log2(std::numbers::e / (eps_f * std::pow(delta_f, alpha)));
    return static_cast<unsigned>(std::ceil(std::max({large, small, 0.0})));
}

double collision_failure_prob(unsigned length_bits, double alpha, double eps_f,
                              std::uint64_t s_large, std::uint64_t s_small,
                              std::uint64_t n_total) {
    check_split_params(alpha, eps_f);
    if (n_total == 0 || s_large > n_total || s_small > n_total - s_large) {
        throw ParameterError("flow split must satisfy s_large + s_small <= n_total, n_total >= 1");
    }
    const double scale = std::ldexp(1.0, -static_cast<int>(std::min(length_bits, 2000U))) /
                         (static_cast<double>(n_total) * eps_f);
    const double large = static_cast<double>(s_large) * scale / alpha;
    const double small = std::pow(std::numbers::e * static_cast<double>(s_small) * scale, 1.0 / alpha);
    return large + small;
}

double max_failure_over_splits(unsigned length_bits, double alpha, double eps_f,
                               std::uint64_t n_total, std::size_t steps) {
    steps = std::max<std::size_t>(steps, 1);
    double worst = 0.0;
    for (std::size_t i = 0; i <= steps; ++i) {
        const auto s_large = static_cast<std::uint64_t>(
            std::llround(static_cast<double>(n_total) * static_cast<double>(i) / static_cast<double>(steps)));
        const std::uint64_t clamped = std::min(s_large, n_total);
        worst = std::max(worst, collision_failure_prob(length_bits, alpha, eps_f, clamped,
                                                       n_total - clamped, n_total));
    }
    return worst;
}

std::uint64_t fingerprint_of(std::uint64_t digest, unsigned length_bits, std::uint64_t seed) noexcept {
    const std::uint64_t h = seeded_hash(digest, seed);
    return length_bits >= 64 ? h : h & ((std::uint64_t{1} << length_bits) - 1);
}

std::size_t entry_footprint(const EntryLayout& layout) noexcept {
    const std::size_t key = layout.key_bits == 0 ? kFlowIdBytes : (layout.key_bits + 7) / 8;
    return key + (layout.counter_bits + 7) / 8;
}

CacheBudget cache_budget(double epsilon, double delta, std::size_t width, double eps_f,
                         double delta_f) {
    if (width == 0) throw ParameterError("cache width must be at least 1");
    CacheBudget b;
    b.epsilon_total = epsilon + 1.0 / static_cast<double>(width) + eps_f;
    b.probability = 1.0 - delta - delta_f;
    return b;
}

double cache_memory_bytes(const ArrayConfig& array, unsigned key_bits) {
    const double width = static_cast<double>(array.width);
    const double key_bytes = key_bits == 0 ? kFlowIdBytes : std::ceil(key_bits / 8.0);
    const double slot_bytes = std::ceil(array.slot_bits / 8.0);
    const unsigned index_bits = std::bit_width(array.width > 1 ? array.width - 1 : 1);
    const double heavy_bits = static_cast<double>(array.heavy_capacity) *
                              (index_bits + kHeavyEntryOverheadBits);
    return width * (key_bytes + slot_bytes) + heavy_bits / 8.0;
}

} // namespace aee
