#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "aee/estimator.hpp"
#include "aee/estimator_array.hpp"
#include "aee/random.hpp"
#include "aee/scaling.hpp"

namespace aee {

enum class SketchKind { count_min, conservative_update };

/// Plain saturating counters of 32 or 64 bits (the baseline).
struct ExactCounters {
    unsigned bits = 32;
};

/// Estimator-array rows with a fixed sampling probability derived from a
/// known stream length.
struct AeeCounters {
    SamplingParams params;
    double delta_o = 1e-6;
    /// 0 picks the space-minimizing byte-aligned threshold.
    std::uint64_t threshold = 0;
};

/// Fixed-width registers whose sampling probability adapts to an unknown
/// stream length.
struct DynamicCounters {
    ScaleOptions scale;
    unsigned width_bits = 16;
};

using CounterMode = std::variant<ExactCounters, AeeCounters, DynamicCounters>;

struct SketchConfig {
    SketchKind kind = SketchKind::count_min;
    std::size_t depth = 4;
    std::size_t width = 1024;
    CounterMode counters = ExactCounters{};
    /// One seed per row; when empty, depth seeds are derived from `seed`.
    std::vector<std::uint64_t> hash_seeds;
    std::uint64_t seed = 1;
};

/// Error of a sketch whose counters are themselves (eps, delta) estimators:
/// eps_total = eps + e/w with probability 1 - (d*delta + e^-d).
struct ErrorBudget {
    double epsilon = 0.0;
    double epsilon_sketch = 0.0;
    double epsilon_total = 0.0;
    double delta = 0.0;
    double delta_estimators = 0.0;
    double delta_sketch = 0.0;
    double delta_total = 0.0;
};

ErrorBudget error_budget(std::size_t depth, std::size_t width, double epsilon, double delta);

/// Count-Min or Conservative-Update sketch over exact counters, fixed-p
/// estimator arrays, or dynamically scaled registers.
///
/// In the estimator modes the sampling decision is taken once per update,
/// before any hash is computed, and a sampled update moves every selected row
/// by the same amount. Conservative update compares raw register values; all
/// rows share p so the minimum is the same as on estimates.
class Sketch {
public:
    static constexpr std::size_t kMaxDepth = 64;

    explicit Sketch(SketchConfig config);

    void update(std::string_view flow_key, std::uint64_t w, Rng& rng);
    /// Minimum over rows of the row estimate (already scaled by 1/p).
    double query(std::string_view flow_key) const;

    /// Current sampling probability (1 in exact mode).
    double p() const;
    /// Row hashes evaluated by update() so far.
    std::uint64_t hash_evaluations() const noexcept { return hash_evaluations_; }
    /// True once any estimator row left its oversampling contract, or a
    /// dynamic register saturated.
    bool out_of_contract() const;
    SpaceReport memory() const;

    const SketchConfig& config() const noexcept { return config_; }
    const std::vector<std::uint64_t>& hash_seeds() const noexcept { return seeds_; }
    /// Column of `flow_key` in row `row`.
    std::size_t column(std::string_view flow_key, std::size_t row) const;
    const ScaleController* controller() const;
    /// Raw register of row `row`, column `col` (not scaled by 1/p).
    std::uint64_t cell(std::size_t row, std::size_t col) const;

private:
    template <class T>
    struct ExactRows {
        std::vector<T> cells;
    };
    struct AeeRows {
        std::vector<EstimatorArray> rows;
        GeometricSampler geo;
        std::uint64_t budget = 0;
    };
    struct DynamicRows {
        std::vector<Estimator> cells;
        ScaleController controller;
    };

    using Slots = std::array<std::size_t, kMaxDepth>;

    void locate(std::uint64_t digest, Slots& slots) const noexcept;

    template <class T>
    void update_exact(ExactRows<T>& rows, std::string_view key, std::uint64_t w);
    void update_aee(AeeRows& rows, std::string_view key, std::uint64_t w, Rng& rng);
    void update_dynamic(DynamicRows& rows, std::string_view key, std::uint64_t w, Rng& rng);

    SketchConfig config_;
    std::vector<std::uint64_t> seeds_;
    std::variant<ExactRows<std::uint32_t>, ExactRows<std::uint64_t>, AeeRows, DynamicRows> rows_;
    Slots scratch_{};
    std::uint64_t hash_evaluations_ = 0;
};

} // namespace aee
