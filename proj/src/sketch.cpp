#include "aee/sketch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <unordered_set>

#include "aee/errors.hpp"
#include "aee/hash.hpp"

namespace aee {

namespace {

template <class T>
T saturating_add(T c, std::uint64_t w) noexcept {
    constexpr std::uint64_t kMax = std::numeric_limits<T>::max();
    const std::uint64_t room = kMax - c;
    return w >= room ? static_cast<T>(kMax) : static_cast<T>(c + w);
}

} // namespace

ErrorBudget error_budget(std::size_t depth, std::size_t width, double epsilon, double delta) {
    if (depth == 0 || width == 0) throw ParameterError("sketch depth and width must be positive");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw ParameterError("epsilon must lie in [0,1)");
    if (!(delta >= 0.0 && delta < 1.0)) throw ParameterError("delta must lie in [0,1)");
    ErrorBudget b;
    b.epsilon = epsilon;
    b.epsilon_sketch = std::numbers::e / static_cast<double>(width);
    b.epsilon_total = epsilon + b.epsilon_sketch;
    b.delta = delta;
    b.delta_estimators = static_cast<double>(depth) * delta;
    b.delta_sketch = std::exp(-static_cast<double>(depth));
    b.delta_total = b.delta_estimators + b.delta_sketch;
    return b;
}

Sketch::Sketch(SketchConfig config) : config_(std::move(config)) {
    if (config_.depth == 0 || config_.depth > kMaxDepth) {
        throw ParameterError("sketch depth must lie in [1," + std::to_string(kMaxDepth) + "]");
    }
    if (config_.width == 0) throw ParameterError("sketch width must be at least 1");

    seeds_ = config_.hash_seeds;
    if (seeds_.empty()) {
        for (std::size_t j = 0; j < config_.depth; ++j) seeds_.push_back(derive_seed(config_.seed, j));
    }
    if (seeds_.size() != config_.depth) throw ParameterError("need exactly one hash seed per row");
    if (std::unordered_set<std::uint64_t>(seeds_.begin(), seeds_.end()).size() != seeds_.size()) {
        throw ParameterError("row hash seeds must be distinct");
    }

    const std::size_t cells = config_.depth * config_.width;
    if (const auto* exact = std::get_if<ExactCounters>(&config_.counters)) {
        if (exact->bits == 32) {
            rows_ = ExactRows<std::uint32_t>{std::vector<std::uint32_t>(cells, 0)};
        } else if (exact->bits == 64) {
            rows_ = ExactRows<std::uint64_t>{std::vector<std::uint64_t>(cells, 0)};
        } else {
            throw ParameterError("exact counters must be 32 or 64 bits");
        }
    } else if (const auto* aee = std::get_if<AeeCounters>(&config_.counters)) {
        const ArrayConfig layout =
            aee->threshold == 0
                ? make_array_config(config_.width, aee->params, aee->delta_o)
                : make_array_config(config_.width, aee->params, aee->delta_o, aee->threshold);
        AeeRows rows{{}, GeometricSampler(aee->params.p), 0};
        rows.rows.reserve(config_.depth);
        for (std::size_t j = 0; j < config_.depth; ++j) rows.rows.emplace_back(layout, aee->params);
        rows_ = std::move(rows);
    } else {
        const auto& dyn = std::get<DynamicCounters>(config_.counters);
        rows_ = DynamicRows{std::vector<Estimator>(cells, Estimator(dyn.width_bits)),
                            ScaleController(dyn.scale)};
    }
}

void Sketch::locate(std::uint64_t digest, Slots& slots) const noexcept {
    for (std::size_t j = 0; j < config_.depth; ++j) {
        slots[j] = j * config_.width + seeded_hash(digest, seeds_[j]) % config_.width;
    }
}

std::size_t Sketch::column(std::string_view flow_key, std::size_t row) const {
    if (row >= config_.depth) throw IndexError("row outside sketch");
    return seeded_hash(key_digest(flow_key), seeds_[row]) % config_.width;
}

template <class T>
void Sketch::update_exact(ExactRows<T>& rows, std::string_view key, std::uint64_t w) {
    if (w == 0) return;
    locate(key_digest(key), scratch_);
    hash_evaluations_ += config_.depth;
    auto& cells = rows.cells;
    if (config_.kind == SketchKind::count_min) {
        for (std::size_t j = 0; j < config_.depth; ++j) {
            T& c = cells[scratch_[j]];
            c = saturating_add(c, w);
        }
        return;
    }
    T lo = std::numeric_limits<T>::max();
    for (std::size_t j = 0; j < config_.depth; ++j) lo = std::min(lo, cells[scratch_[j]]);
    for (std::size_t j = 0; j < config_.depth; ++j) {
        T& c = cells[scratch_[j]];
        if (c == lo) c = saturating_add(c, w);
    }
}

void Sketch::update_aee(AeeRows& rows, std::string_view key, std::uint64_t w, Rng& rng) {
    std::uint64_t units;
    if (w == 1) {
        // Shared geometric skip: most updates end here without hashing.
        if (rows.budget == 0) rows.budget = rows.geo(rng);
        if (--rows.budget != 0) return;
        units = 1;
    } else {
        const WeightSplit split = split_weight(w, rows.geo.p());
        units = split.whole;
        if (split.residual > 0.0 && bernoulli(rng, split.residual)) ++units;
        if (units == 0) return;
    }

    locate(key_digest(key), scratch_);
    hash_evaluations_ += config_.depth;
    const std::size_t width = config_.width;
    if (config_.kind == SketchKind::count_min) {
        for (std::size_t j = 0; j < config_.depth; ++j) {
            rows.rows[j].add_raw(scratch_[j] - j * width, units);
        }
        return;
    }
    std::array<std::uint64_t, kMaxDepth> raw{};
    std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t j = 0; j < config_.depth; ++j) {
        raw[j] = rows.rows[j].raw(scratch_[j] - j * width);
        lo = std::min(lo, raw[j]);
    }
    for (std::size_t j = 0; j < config_.depth; ++j) {
        if (raw[j] == lo) rows.rows[j].add_raw(scratch_[j] - j * width, units);
    }
}

void Sketch::update_dynamic(DynamicRows& rows, std::string_view key, std::uint64_t w, Rng& rng) {
    std::span<Estimator> store(rows.cells);
    ScaleController& ctl = rows.controller;
    ScaleController::Pending pending;
    if (!ctl.begin(store, w, rng, pending)) return;

    locate(key_digest(key), scratch_);
    hash_evaluations_ += config_.depth;
    std::size_t n = config_.depth;
    if (config_.kind == SketchKind::conservative_update) {
        for (std::size_t j = 0; j < config_.depth; ++j) ctl.catch_up(store, scratch_[j], rng);
        std::uint64_t lo = std::numeric_limits<std::uint64_t>::max();
        for (std::size_t j = 0; j < config_.depth; ++j) lo = std::min(lo, store[scratch_[j]].value);
        n = 0;
        for (std::size_t j = 0; j < config_.depth; ++j) {
            if (store[scratch_[j]].value == lo) scratch_[n++] = scratch_[j];
        }
    }
    ctl.commit(store, std::span<const std::size_t>(scratch_.data(), n), pending, rng);
}

void Sketch::update(std::string_view flow_key, std::uint64_t w, Rng& rng) {
    switch (rows_.index()) {
    case 0: update_exact(std::get<0>(rows_), flow_key, w); break;
    case 1: update_exact(std::get<1>(rows_), flow_key, w); break;
    case 2: update_aee(std::get<2>(rows_), flow_key, w, rng); break;
    default: update_dynamic(std::get<3>(rows_), flow_key, w, rng); break;
    }
}

double Sketch::query(std::string_view flow_key) const {
    Slots slots;
    locate(key_digest(flow_key), slots);
    double best = std::numeric_limits<double>::infinity();
    const std::size_t width = config_.width;
    for (std::size_t j = 0; j < config_.depth; ++j) {
        double v = 0.0;
        switch (rows_.index()) {
        case 0: v = static_cast<double>(std::get<0>(rows_).cells[slots[j]]); break;
        case 1: v = static_cast<double>(std::get<1>(rows_).cells[slots[j]]); break;
        case 2: v = std::get<2>(rows_).rows[j].query(slots[j] - j * width); break;
        default: {
            const auto& dyn = std::get<3>(rows_);
            v = dyn.controller.estimate(dyn.cells[slots[j]]);
        }
        }
        best = std::min(best, v);
    }
    return best;
}

std::uint64_t Sketch::cell(std::size_t row, std::size_t col) const {
    if (row >= config_.depth || col >= config_.width) throw IndexError("cell outside sketch");
    const std::size_t i = row * config_.width + col;
    switch (rows_.index()) {
    case 0: return std::get<0>(rows_).cells[i];
    case 1: return std::get<1>(rows_).cells[i];
    case 2: return std::get<2>(rows_).rows[row].raw(col);
    default: return std::get<3>(rows_).cells[i].value;
    }
}

double Sketch::p() const {
    if (const auto* aee = std::get_if<AeeRows>(&rows_)) return aee->geo.p();
    if (const auto* dyn = std::get_if<DynamicRows>(&rows_)) return dyn->controller.p();
    return 1.0;
}

const ScaleController* Sketch::controller() const {
    if (const auto* dyn = std::get_if<DynamicRows>(&rows_)) return &dyn->controller;
    return nullptr;
}

bool Sketch::out_of_contract() const {
    if (const auto* aee = std::get_if<AeeRows>(&rows_)) {
        return std::any_of(aee->rows.begin(), aee->rows.end(),
                           [](const EstimatorArray& a) { return a.oversampled(); });
    }
    if (const auto* dyn = std::get_if<DynamicRows>(&rows_)) {
        return dyn->controller.overflow_events() > 0;
    }
    return false;
}

SpaceReport Sketch::memory() const {
    SpaceReport report;
    const double cells = static_cast<double>(config_.depth * config_.width);
    switch (rows_.index()) {
    case 0: report.analytical_bytes = report.actual_bytes = cells * 4; break;
    case 1: report.analytical_bytes = report.actual_bytes = cells * 8; break;
    case 2:
        for (const EstimatorArray& row : std::get<2>(rows_).rows) {
            const SpaceReport r = row.memory();
            report.analytical_bytes += r.analytical_bytes;
            report.actual_bytes += r.actual_bytes;
        }
        break;
    default: {
        const auto& dyn = std::get<3>(rows_);
        const unsigned gen_bits = dyn.controller.options().deamortized ? 1 : 0;
        report.analytical_bytes = cells * (dyn.cells.front().width_bits + gen_bits) / 8.0;
        report.actual_bytes = cells * sizeof(Estimator);
    }
    }
    return report;
}

} // namespace aee
