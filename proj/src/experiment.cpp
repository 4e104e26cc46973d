#include "aee/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <optional>
#include <thread>
#include <variant>

#include "aee/config.hpp"
#include "aee/errors.hpp"
#include "aee/estimator.hpp"
#include "aee/sketch.hpp"
#include "aee/stats.hpp"

namespace aee {

namespace {

bool fixed_p(CounterKind k) { return k == CounterKind::aee; }
bool dynamic_p(CounterKind k) { return k == CounterKind::max_accuracy || k == CounterKind::max_speed; }

bool is_cache(Algorithm a) {
    return a == Algorithm::ss || a == Algorithm::rap || a == Algorithm::dway_rap;
}

ScaleOptions scale_options(const ExperimentConfig& c) {
    ScaleOptions o;
    o.mode = c.counters == CounterKind::max_speed ? ScaleMode::max_speed : ScaleMode::max_accuracy;
    o.downsample = c.downsample;
    o.n_prime = register_ceiling(c.epsilon, c.delta);
    o.deamortized = c.deamortized;
    return o;
}

/// One register counting the whole stream.
class SingleCounter {
public:
    SingleCounter(const ExperimentConfig& c, std::uint64_t n_total) : kind_(c.counters) {
        if (fixed_p(kind_)) {
            params_ = derive_params(c.epsilon, c.delta, n_total);
            est_ = Estimator(c.register_bits);
        } else if (dynamic_p(kind_)) {
            est_ = Estimator(c.register_bits);
            ctl_.emplace(scale_options(c));
        }
    }

    void update(std::string_view, std::uint64_t w, Rng& rng) {
        if (kind_ == CounterKind::exact) {
            exact_ += w;
        } else if (ctl_) {
            static constexpr std::size_t kSlot[1] = {0};
            ctl_->add(std::span<Estimator>(&est_, 1), kSlot, w, rng);
        } else {
            const UpdateStatus s = w == 1 ? pincrement(est_, params_, rng)
                                          : add_weighted(est_, params_, w, rng);
            if (s == UpdateStatus::overflow) ++overflows_;
        }
    }

    double query(std::string_view) const {
        if (kind_ == CounterKind::exact) return static_cast<double>(exact_);
        if (ctl_) return ctl_->estimate(est_);
        return aee::query(est_, params_);
    }

    bool out_of_contract() const {
        return overflows_ > 0 || (ctl_ && ctl_->overflow_events() > 0);
    }

    SpaceReport memory() const {
        const double bits = kind_ == CounterKind::exact ? 64.0 : est_.width_bits;
        return {bits / 8.0, static_cast<double>(sizeof(*this))};
    }

private:
    CounterKind kind_;
    std::uint64_t exact_ = 0;
    SamplingParams params_;
    Estimator est_;
    std::optional<ScaleController> ctl_;
    std::uint64_t overflows_ = 0;
};

using Structure = std::variant<SingleCounter, Sketch, CacheTable>;

Structure make_structure(const ExperimentConfig& c, std::uint64_t n_total, std::uint64_t seed) {
    if (c.algorithm == Algorithm::aee_single) return SingleCounter(c, n_total);

    if (!is_cache(c.algorithm)) {
        SketchConfig sc;
        sc.kind = c.algorithm == Algorithm::cu ? SketchKind::conservative_update : SketchKind::count_min;
        sc.depth = c.depth;
        sc.width = c.width;
        sc.seed = seed;
        if (fixed_p(c.counters)) {
            sc.counters = AeeCounters{derive_params(c.epsilon, c.delta, n_total), c.delta_o, c.threshold};
        } else if (dynamic_p(c.counters)) {
            sc.counters = DynamicCounters{scale_options(c), c.register_bits};
        } else {
            sc.counters = ExactCounters{c.exact_bits};
        }
        return Sketch(std::move(sc));
    }

    CacheConfig cc;
    cc.policy = c.algorithm == Algorithm::ss ? CachePolicy::space_saving : CachePolicy::rap;
    cc.capacity = c.capacity;
    cc.ways = c.algorithm == Algorithm::dway_rap ? c.ways : 0;
    cc.key_mode = c.key_mode;
    cc.fingerprint_bits = c.fingerprint_bits;
    cc.seed = seed;
    if (fixed_p(c.counters)) {
        cc.counters = AeeCacheCounters{derive_params(c.epsilon, c.delta, n_total), c.delta_o, c.threshold};
    } else if (dynamic_p(c.counters)) {
        cc.counters = DynamicCacheCounters{scale_options(c), c.register_bits};
    } else {
        cc.counters = ExactCacheCounters{c.exact_bits};
    }
    return CacheTable(std::move(cc));
}

struct TrialResult {
    double normalized_error = 0.0;
    double per_flow_mae = 0.0;
    double on_arrival_error = 0.0;
    double throughput_mops = 0.0;
    SpaceReport memory;
    bool out_of_contract = false;
};

template <class S>
TrialResult run_trial(S& s, const ExperimentConfig& c, const Trace& trace,
                      const std::vector<std::uint64_t>& truth, Rng& rng) {
    TrialResult r;
    const double total = std::max<double>(1.0, static_cast<double>(trace.total_weight()));
    const bool single = c.algorithm == Algorithm::aee_single;

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    if (c.on_arrival) {
        std::vector<std::uint64_t> seen(truth.size(), 0);
        std::uint64_t seen_total = 0;
        double err = 0.0;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            const std::string_view key = trace.flow(i);
            const double so_far = single ? static_cast<double>(seen_total)
                                         : static_cast<double>(seen[trace.flow_index(i)]);
            err += std::abs(s.query(key) - so_far);
            s.update(key, trace.weight(i), rng);
            seen[trace.flow_index(i)] += trace.weight(i);
            seen_total += trace.weight(i);
        }
        r.on_arrival_error = trace.empty() ? 0.0 : err / static_cast<double>(trace.size()) / total;
    } else {
        for (std::size_t i = 0; i < trace.size(); ++i) s.update(trace.flow(i), trace.weight(i), rng);
    }
    const double seconds = std::chrono::duration<double>(clock::now() - start).count();
    r.throughput_mops = seconds > 0.0 ? static_cast<double>(trace.size()) / seconds / 1e6 : 0.0;

    double abs_sum = 0.0;
    std::size_t flows = 0;
    if (single) {
        abs_sum = std::abs(s.query({}) - static_cast<double>(trace.total_weight()));
        flows = 1;
    } else {
        for (std::size_t f = 0; f < truth.size(); ++f) {
            abs_sum += std::abs(s.query(trace.flows()[f]) - static_cast<double>(truth[f]));
        }
        flows = truth.size();
    }
    if (flows > 0) {
        r.per_flow_mae = abs_sum / static_cast<double>(flows);
        r.normalized_error = r.per_flow_mae / total;
    }
    r.memory = s.memory();
    r.out_of_contract = s.out_of_contract();
    return r;
}

} // namespace

void validate(const ExperimentConfig& c) {
    auto fail = [](const std::string& what) { throw ConfigError(what); };
    if (c.trials == 0) fail("trials must be at least 1");
    if (c.threads == 0) fail("threads must be at least 1");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) fail("epsilon must lie in (0,1)");
    if (!(c.delta > 0.0 && c.delta < 1.0)) fail("delta must lie in (0,1)");
    if (!(c.delta_o > 0.0 && c.delta_o < 1.0)) fail("delta_o must lie in (0,1)");
    if (c.register_bits == 0 || c.register_bits > 64) fail("register_bits must lie in [1,64]");

    const bool estimators = c.counters != CounterKind::exact;
    const unsigned need = bits_for(register_ceiling(c.epsilon, c.delta));
    const bool uses_register = c.algorithm == Algorithm::aee_single || dynamic_p(c.counters);
    if (estimators && uses_register && c.register_bits < need) {
        fail("register_bits " + std::to_string(c.register_bits) + " is below the " +
             std::to_string(need) + " bits the (epsilon, delta) register ceiling needs");
    }
    if (c.deamortized && is_cache(c.algorithm)) fail("caches support eager halving only");

    if (c.algorithm == Algorithm::cms || c.algorithm == Algorithm::cu) {
        if (c.depth == 0 || c.depth > Sketch::kMaxDepth) fail("depth must lie in [1,64]");
        if (c.width == 0) fail("width must be at least 1");
        if (c.counters == CounterKind::exact && c.exact_bits != 32 && c.exact_bits != 64) {
            fail("sketch exact_bits must be 32 or 64");
        }
    }
    if (is_cache(c.algorithm)) {
        if (c.capacity == 0) fail("capacity must be at least 1");
        if (c.algorithm == Algorithm::dway_rap &&
            (c.ways == 0 || c.ways > c.capacity || c.capacity % c.ways != 0)) {
            fail("capacity must be a multiple of ways");
        }
        if (c.key_mode == KeyMode::fingerprint && (c.fingerprint_bits == 0 || c.fingerprint_bits > 64)) {
            fail("fingerprint_bits must lie in [1,64]");
        }
        if (c.counters == CounterKind::exact && (c.exact_bits == 0 || c.exact_bits > 64)) {
            fail("exact_bits must lie in [1,64]");
        }
    }
    if (c.threshold != 0 && (c.threshold & (c.threshold - 1)) != 0) fail("threshold must be a power of two");
    if (c.trace_path.empty() && c.zipf_universe == 0) fail("zipf_universe must be at least 1");
    if (c.trace_path.empty() && !(c.zipf_skew >= 0.0)) fail("zipf_skew must be non-negative");
}

Trace build_trace(const ExperimentConfig& c) {
    if (!c.trace_path.empty()) return load_trace(c.trace_path);
    return gen_zipf(c.zipf_packets, c.zipf_universe, c.zipf_skew, c.trace_seed);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
    validate(config);
    return run_experiment(config, build_trace(config));
}

ExperimentReport run_experiment(const ExperimentConfig& config, const Trace& trace) {
    validate(config);
    const std::vector<std::uint64_t> truth = exact_counts(trace);
    const std::uint64_t n_total =
        config.n_total != 0 ? config.n_total : std::max<std::uint64_t>(1, trace.total_weight());

    std::vector<TrialResult> results(config.trials);
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (std::size_t t = next++; t < config.trials; t = next++) {
            try {
                Rng rng(derive_seed(config.seed, 2 * t));
                Structure s = make_structure(config, n_total, derive_seed(config.seed, 2 * t + 1));
                results[t] = std::visit([&](auto& st) { return run_trial(st, config, trace, truth, rng); }, s);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    const std::size_t threads = std::min(config.threads, config.trials);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);

    ExperimentReport report;
    report.config = config_pairs(config);
    report.trial_count = config.trials;
    report.total_weight = trace.total_weight();
    report.distinct_flows = config.algorithm == Algorithm::aee_single ? 1 : truth.size();

    auto column = [&](double TrialResult::*field) {
        std::vector<double> v;
        for (const TrialResult& r : results) v.push_back(r.*field);
        return summarize(v);
    };
    const Summary ne = column(&TrialResult::normalized_error);
    const Summary mae = column(&TrialResult::per_flow_mae);
    const Summary oa = column(&TrialResult::on_arrival_error);
    const Summary tp = column(&TrialResult::throughput_mops);
    report.normalized_error = ne.mean;
    report.normalized_error_ci = ne.halfwidth;
    report.per_flow_mae = mae.mean;
    report.per_flow_mae_ci = mae.halfwidth;
    report.on_arrival_error = oa.mean;
    report.on_arrival_error_ci = oa.halfwidth;
    report.throughput_mops = tp.mean;
    report.throughput_ci = tp.halfwidth;
    report.analytical_bytes = results.front().memory.analytical_bytes;
    report.actual_bytes = results.front().memory.actual_bytes;
    for (const TrialResult& r : results) report.out_of_contract_trials += r.out_of_contract ? 1 : 0;
    return report;
}

} // namespace aee
