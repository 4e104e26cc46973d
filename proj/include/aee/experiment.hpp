#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "aee/cache.hpp"
#include "aee/scaling.hpp"
#include "aee/trace.hpp"

namespace aee {

enum class Algorithm { aee_single, cms, cu, ss, rap, dway_rap };
/// exact: plain counters. aee: fixed p from a known stream length.
/// max_accuracy / max_speed: dynamic p over fixed-width registers.
enum class CounterKind { exact, aee, max_accuracy, max_speed };

struct ExperimentConfig {
    Algorithm algorithm = Algorithm::cms;
    CounterKind counters = CounterKind::exact;

    double epsilon = 0.01;
    double delta = 0.01;
    /// Stream length the fixed-p modes are sized for; 0 uses the trace weight.
    std::uint64_t n_total = 0;
    double delta_o = 1e-6;
    /// Estimator-array slot capacity; 0 picks the space-minimizing one.
    std::uint64_t threshold = 0;
    unsigned exact_bits = 32;
    /// Register width of aee-single and of the dynamic modes.
    unsigned register_bits = 16;
    DownsampleKind downsample = DownsampleKind::deterministic;
    bool deamortized = false;

    std::size_t depth = 4;
    std::size_t width = 1024;

    std::size_t capacity = 1024;
    std::size_t ways = 16;
    KeyMode key_mode = KeyMode::full_id;
    unsigned fingerprint_bits = 24;

    /// CSV trace; when empty a Zipf trace is generated.
    std::string trace_path;
    std::uint64_t zipf_packets = 1'000'000;
    std::uint64_t zipf_universe = 1'000'000;
    double zipf_skew = 1.0;
    std::uint64_t trace_seed = 1;

    std::size_t trials = 10;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    /// Also measure the error of each packet's flow just before its update.
    bool on_arrival = false;
};

struct ExperimentReport {
    /// The configuration as key/value pairs, in config-file order.
    std::vector<std::pair<std::string, std::string>> config;
    std::size_t trial_count = 0;
    std::uint64_t total_weight = 0;
    std::size_t distinct_flows = 0;
    /// Mean over flows of |estimate - truth| / total weight, end of stream.
    double normalized_error = 0.0;
    double normalized_error_ci = 0.0;
    /// Mean over flows of |estimate - truth|, end of stream.
    double per_flow_mae = 0.0;
    double per_flow_mae_ci = 0.0;
    /// Mean over packets of |estimate - truth so far| / total weight, queried
    /// before each update; 0 unless on_arrival is set.
    double on_arrival_error = 0.0;
    double on_arrival_error_ci = 0.0;
    double throughput_mops = 0.0;
    double throughput_ci = 0.0;
    double analytical_bytes = 0.0;
    double actual_bytes = 0.0;
    /// Trials in which an estimator left its contract (oversampled array or
    /// saturated register).
    std::size_t out_of_contract_trials = 0;

    bool operator==(const ExperimentReport&) const = default;
};

/// Throws ConfigError for inconsistent settings, before touching the trace.
void validate(const ExperimentConfig& config);

/// Loads or generates the configured trace.
Trace build_trace(const ExperimentConfig& config);

/// Runs the configured structure over `trace` once per trial, each with its
/// own derived seeds, and aggregates with 95% Student-t intervals (half-width
/// 0 for a single trial). Throughput times the update loop only.
ExperimentReport run_experiment(const ExperimentConfig& config, const Trace& trace);
ExperimentReport run_experiment(const ExperimentConfig& config);

} // namespace aee
