#include "aee/random.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "aee/errors.hpp"

namespace aee {

namespace {

void check_probability(double q, const char* what) {
    if (!(q >= 0.0 && q <= 1.0)) {
        throw ParameterError(std::string(what) + ": probability must lie in [0,1], got " +
                             std::to_string(q));
    }
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    // splitmix64 finalizer over (base, stream)
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool bernoulli(Rng& rng, double q) {
    check_probability(q, "bernoulli");
    if (q >= 1.0) return true;
    return uniform01(rng) < q;
}

std::uint64_t binomial(Rng& rng, std::uint64_t n, double q) {
    check_probability(q, "binomial");
    if (n == 0 || q == 0.0) return 0;
    if (q == 1.0) return n;
    std::binomial_distribution<std::uint64_t> dist(n, q);
    return dist(rng);
}

std::uint64_t geometric(Rng& rng, double p) {
    return GeometricSampler(p)(rng);
}

GeometricSampler::GeometricSampler(double p) : p_(p), log_q_(0.0) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw ParameterError("geometric: p must lie in (0,1], got " + std::to_string(p));
    }
    if (p < 1.0) log_q_ = std::log1p(-p);
}

std::uint64_t GeometricSampler::operator()(Rng& rng) const {
    if (log_q_ == 0.0) return 1;
    // U in (0,1] so ln U is finite.
    const double u = 1.0 - uniform01(rng);
    const double g = std::ceil(std::log(u) / log_q_);
    if (g < 1.0) return 1;
    if (g >= 0x1.0p63) return std::uint64_t{1} << 63;
    return static_cast<std::uint64_t>(g);
}

} // namespace aee
