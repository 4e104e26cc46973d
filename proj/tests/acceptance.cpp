// One line per acceptance criterion; exit status is the number of failures.
// Pass criterion numbers as arguments to run only those.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "aee/cache.hpp"
#include "aee/estimator.hpp"
#include "aee/estimator_array.hpp"
#include "aee/fingerprint.hpp"
#include "aee/scaling.hpp"
#include "aee/sketch.hpp"
#include "aee/stats.hpp"
#include "aee/trace.hpp"

using namespace aee;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_of(const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome parameter_formula() {
    SamplingParams p;
    const double s = seconds_of([&] { p = derive_params(0.001, 0.0005, 1'000'000'000); });
    return {p.required_bits == 24 && s < 1.0,
            fmt("required_bits=%u n_prime=%llu (%.3g s)", p.required_bits,
                static_cast<unsigned long long>(p.n_prime), s)};
}

Outcome estimator_coverage() {
    const std::uint64_t n = 1'000'000;
    const SamplingParams params = derive_params(0.05, 0.05, n);
    const int trials = 1000;
    int failures = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(2001, t));
        Estimator est(params.required_bits);
        bool overflow = false;
        for (std::uint64_t i = 0; i < n; ++i) overflow |= pincrement(est, params, rng) == UpdateStatus::overflow;
        if (overflow || std::abs(query(est, params) - double(n)) > params.epsilon * double(n)) ++failures;
    }
    const double frac = failures / double(trials);
    return {frac <= 0.05 + 0.021, fmt("failure fraction %.3f over %d trials (limit 0.071)", frac, trials)};
}

Outcome heavy_counter_example() {
    const SamplingParams p = derive_params(0.001, 0.0005, 1'000'000'000);
    const ArrayConfig cfg = make_array_config(1024, p, 2e-15);
    const double bytes = EstimatorArray(cfg, p).memory().analytical_bytes;
    return {cfg.threshold == 65536 && cfg.heavy_capacity == 253 && bytes < 2.5 * 1024,
            fmt("T=%llu heavy=%llu analytical=%.2f B", static_cast<unsigned long long>(cfg.threshold),
                static_cast<unsigned long long>(cfg.heavy_capacity), bytes)};
}

Outcome weighted_variance() {
    SamplingParams params;
    params.p = 1.0 / 64;
    Rng gen(4004);
    std::vector<std::uint64_t> weights;
    std::uint64_t total = 0;
    const std::uint64_t target = 1'000'000;
    while (total < target) {
        const std::uint64_t w = std::min<std::uint64_t>(1 + gen() % 997, target - total);
        weights.push_back(w);
        total += w;
    }
    const int trials = 10000;
    std::vector<double> values(trials);
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(4005, t));
        Estimator est(32);
        for (std::uint64_t w : weights) (void)add_weighted(est, params, w, rng);
        values[t] = double(est.value);
    }
    const Summary s = summarize(values);
    double m4 = 0.0;
    for (double v : values) m4 += std::pow(v - s.mean, 4);
    m4 /= trials;
    const double var = s.stddev * s.stddev;
    const double se = std::sqrt(std::max(0.0, m4 - var * var) / trials);
    const double bound = counter_variance_bound(params, total);
    return {var <= bound + 5 * se,
            fmt("variance %.1f vs bound Wp(1-p)=%.1f (+5 SE=%.1f), mean %.1f vs Wp=%.1f", var, bound,
                5 * se, s.mean, double(total) * params.p)};
}

Outcome oversampling() {
    const std::uint64_t n = 10000;
    const SamplingParams params = derive_params(0.1, 0.1, n);
    const ArrayConfig cfg = make_array_config(64, params, 0.01);
    const int trials = 10000;
    int over = 0;
    for (int t = 0; t < trials; ++t) {
        Rng rng(derive_seed(5005, t));
        EstimatorArray arr(cfg, params);
        for (std::uint64_t i = 0; i < n; ++i) arr.pincrement(static_cast<std::size_t>(rng() % 64), rng);
        if (double(arr.total_increments()) > cfg.n_tilde) ++over;
    }
    const double frac = over / double(trials);
    const double limit = 0.01 + 3 * std::sqrt(0.01 * 0.99 / trials);
    return {frac <= limit, fmt("fraction above N~'=%.1f: %.4f (limit %.4f)", cfg.n_tilde, frac, limit)};
}

Outcome downsampling_comparison() {
    const std::uint64_t n = 1'000'000;
    const int trials = 100;
    std::vector<double> err[2];
    for (int kind = 0; kind < 2; ++kind) {
        ScaleOptions o;
        o.mode = ScaleMode::max_accuracy;
        o.downsample = kind == 0 ? DownsampleKind::deterministic : DownsampleKind::probabilistic;
        for (int t = 0; t < trials; ++t) {
            ScaleController ctl(o);
            std::vector<Estimator> store(1, Estimator(16));
            const std::size_t slot[1] = {0};
            Rng rng(derive_seed(6006 + kind, t));
            for (std::uint64_t i = 0; i < n; ++i) ctl.add(store, slot, 1, rng);
            err[kind].push_back(std::abs(ctl.estimate(store[0]) - double(n)));
        }
    }
    const double p_worse = welch_greater_p(err[0], err[1]);
    const double det = summarize(err[0]).mean, prob = summarize(err[1]).mean;
    return {p_worse >= 0.05,
            fmt("MAE deterministic %.1f, probabilistic %.1f, one-sided p(det worse)=%.3f", det, prob, p_worse)};
}

Outcome max_speed_schedule() {
    std::uint64_t checked = 0;
    for (std::uint64_t n_prime : {1ULL, 7ULL, 100ULL, 3001ULL}) {
        for (int seq = 0; seq < 10; ++seq) {
            ScaleOptions o;
            o.mode = ScaleMode::max_speed;
            o.n_prime = n_prime;
            ScaleController ctl(o);
            std::vector<Estimator> store(16, Estimator(20));
            Rng rng(derive_seed(7007 + n_prime, seq));
            std::uint64_t n = 0;
            for (int i = 0; i < 20000; ++i) {
                const std::uint64_t w = rng() % 4 == 0 ? 1 + rng() % 5000 : 1 + rng() % 3;
                const std::size_t slot[1] = {static_cast<std::size_t>(rng() % 16)};
                ctl.add(store, slot, w, rng);
                n += w;
                double expected = 1.0;
                for (std::uint64_t r = n / n_prime; r >= 2; r /= 2) expected /= 2;
                if (ctl.p() != expected) {
                    return {false, fmt("n=%llu n'=%llu p=%g expected %g", static_cast<unsigned long long>(n),
                                       static_cast<unsigned long long>(n_prime), ctl.p(), expected)};
                }
                ++checked;
            }
        }
    }
    return {true, fmt("%llu updates over 40 random weight sequences", static_cast<unsigned long long>(checked))};
}

Outcome sketch_properties() {
    const Trace trace = gen_zipf(100000, 50000, 1.0, 8008);
    const auto truth = exact_counts(trace);
    SketchConfig base;
    base.depth = 4;
    base.width = 512;
    base.seed = 8009;
    SketchConfig cu_cfg = base;
    cu_cfg.kind = SketchKind::conservative_update;
    SketchConfig aee_cfg = base;
    const SamplingParams unit = derive_params(0.05, 0.05, 1000);
    aee_cfg.counters = AeeCounters{unit, 0.01, 65536};
    Sketch cms(base), cu(cu_cfg), aee(aee_cfg);
    Rng r1(1), r2(1), r3(1);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        cms.update(trace.flow(i), 1, r1);
        cu.update(trace.flow(i), 1, r2);
        aee.update(trace.flow(i), 1, r3);
    }
    std::size_t one_sided = 0, dominated = 0, identical = 0;
    for (std::size_t f = 0; f < truth.size(); ++f) {
        const std::string& k = trace.flows()[f];
        const double c = cms.query(k), u = cu.query(k);
        one_sided += c >= double(truth[f]);
        dominated += u <= c && u >= double(truth[f]);
        identical += aee.query(k) == c;
    }
    const std::size_t n = truth.size();
    return {one_sided == n && dominated == n && identical == n && aee.p() == 1.0,
            fmt("%zu flows: one-sided %zu, CU<=CMS %zu, p=1 identical %zu", n, one_sided, dominated, identical)};
}

Outcome cache_guarantees() {
    std::size_t violations = 0;
    for (int t = 0; t < 100; ++t) {
        const Trace trace = gen_zipf(10000, 3000, 0.8 + 0.005 * t, derive_seed(9009, t));
        CacheConfig cfg;
        cfg.policy = CachePolicy::space_saving;
        cfg.capacity = 100;
        cfg.seed = t;
        CacheTable c(cfg);
        Rng rng(t);
        for (std::size_t i = 0; i < trace.size(); ++i) c.update(trace.flow(i), 1, rng);
        const auto truth = exact_counts(trace);
        const double bound = double(trace.total_weight()) / double(cfg.capacity);
        for (std::size_t f = 0; f < truth.size(); ++f) {
            if (std::abs(c.query(trace.flows()[f]) - double(truth[f])) > bound) ++violations;
        }
    }
    // RAP: full single-entry cache holding m, one arrival of weight w.
    const std::uint64_t m = 3, w = 1;
    const int trials = 100000;
    int admitted = 0;
    Rng rng(9010);
    for (int t = 0; t < trials; ++t) {
        CacheConfig cfg;
        cfg.policy = CachePolicy::rap;
        cfg.capacity = 1;
        CacheTable c(cfg);
        c.update("resident", m, rng);
        c.update("newcomer", w, rng);
        admitted += c.resident("newcomer");
    }
    const double q = double(w) / double(m + w);
    const double rate = admitted / double(trials);
    const double sigma = std::sqrt(q * (1 - q) / trials);
    const bool rap_ok = std::abs(rate - q) <= 3 * sigma;
    return {violations == 0 && rap_ok,
            fmt("SS bound violations %zu over 100 traces; RAP admit rate %.4f vs %.4f (3 sigma %.4f)", violations,
                rate, q, 3 * sigma)};
}

Outcome fingerprint_math() {
    const double alpha = 10.0 / 11.0;
    const unsigned l3 = fingerprint_length(alpha, 0.0003, 0.0003);
    const unsigned l32 = fingerprint_length(alpha, 0.00002, 0.00002);
    double worst_ratio = 0.0;
    for (double e : {0.005, 0.0003, 0.00002}) {
        const unsigned L = fingerprint_length(alpha, e, e);
        worst_ratio = std::max(worst_ratio, max_failure_over_splits(L, alpha, e, 1'000'000'000, 10000) / e);
    }
    return {l3 <= 24 && l32 <= 32 && worst_ratio <= 1.0,
            fmt("L(0.03%%)=%u, L(0.002%%)=%u, worst split bound / delta_f = %.3f", l3, l32, worst_ratio)};
}

double sketch_mops(const SketchConfig& cfg, const Trace& trace) {
    double best = 0.0;
    for (int rep = 0; rep < 3; ++rep) {
        Sketch s(cfg);
        Rng rng(rep);
        const double sec = seconds_of([&] {
            for (std::size_t i = 0; i < trace.size(); ++i) s.update(trace.flow(i), 1, rng);
        });
        best = std::max(best, double(trace.size()) / sec / 1e6);
    }
    return best;
}

Outcome speed_claims() {
    const Trace trace = gen_zipf(10'000'000, 1'000'000, 1.0, 11011);
    SketchConfig exact;
    exact.depth = 4;
    exact.width = 8192;
    SketchConfig fixed = exact;
    const SamplingParams params = derive_params(0.01, 0.01, trace.total_weight());
    fixed.counters = AeeCounters{params, 1e-6, 0};

    SketchConfig accuracy = exact, speed = exact;
    ScaleOptions o;
    o.n_prime = register_ceiling(0.02, 0.01);
    o.mode = ScaleMode::max_accuracy;
    accuracy.counters = DynamicCounters{o, 16};
    o.mode = ScaleMode::max_speed;
    speed.counters = DynamicCounters{o, 16};

    const double m_exact = sketch_mops(exact, trace);
    const double m_fixed = sketch_mops(fixed, trace);
    const double m_acc = sketch_mops(accuracy, trace);
    const double m_speed = sketch_mops(speed, trace);
    const bool ok = params.p <= 1.0 / 16 && m_fixed >= 2 * m_exact && m_speed >= 2 * m_acc;
    return {ok, fmt("p=%.4f: AEE %.1f vs exact %.1f Mops (x%.1f); 64KB MaxSpeed %.1f vs MaxAccuracy %.1f Mops (x%.1f)",
                    params.p, m_fixed, m_exact, m_fixed / m_exact, m_speed, m_acc, m_speed / m_acc)};
}

Outcome example_footprints() {
    const std::size_t full = entry_footprint({0, 32});
    const std::size_t compact = entry_footprint({24, 16});
    const double eps = std::ldexp(1.0, -13), delta = std::ldexp(1.0, -16);
    const SamplingParams p = derive_params(eps, delta, 1'000'000'000'000ULL);
    const ArrayConfig cfg = make_array_config(1024, p, 2e-15, std::uint64_t{1} << 24);
    const double kib = cache_memory_bytes(cfg, 24) / 1024;
    const bool ok = full == 17 && compact == 5 && cfg.slot_bits == 24 && std::round(kib * 10) / 10 == 6.2;
    return {ok, fmt("entries %zu vs %zu bytes; 24-bit example %.2f KiB (%llu heavy slots)", full, compact, kib,
                    static_cast<unsigned long long>(cfg.heavy_capacity))};
}

} // namespace

int main(int argc, char** argv) {
    struct Criterion {
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"parameter formula", parameter_formula},
        {"single-estimator coverage", estimator_coverage},
        {"heavy-counter example", heavy_counter_example},
        {"weighted variance", weighted_variance},
        {"oversampling bound", oversampling},
        {"downsampling comparison", downsampling_comparison},
        {"MaxSpeed schedule", max_speed_schedule},
        {"sketch structure", sketch_properties},
        {"cache guarantees", cache_guarantees},
        {"fingerprint math", fingerprint_math},
        {"relative speed", speed_claims},
        {"example footprints", example_footprints},
    };
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
    int failures = 0;
    int index = 0;
    int ran = 0;
    for (const Criterion& c : criteria) {
        ++index;
        if (!selected.empty() && std::find(selected.begin(), selected.end(), index) == selected.end()) continue;
        ++ran;
        Outcome o;
        double sec = 0.0;
        try {
            sec = seconds_of([&] { o = c.run(); });
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2d %-26s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str(), sec);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", ran - failures, ran);
    return failures;
}
