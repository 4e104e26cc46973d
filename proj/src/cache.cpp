#include "aee/cache.hpp"

#include <algorithm>
#include <string>

#include "aee/errors.hpp"
#include "aee/hash.hpp"

namespace aee {

CacheTable::CacheTable(CacheConfig config) : config_(std::move(config)) {
    if (config_.capacity == 0) throw ParameterError("cache capacity must be at least 1");
    ways_ = config_.ways == 0 ? config_.capacity : config_.ways;
    if (ways_ > config_.capacity || config_.capacity % ways_ != 0) {
        throw ParameterError("cache capacity must be a multiple of the way count");
    }
    sets_ = config_.capacity / ways_;
    if (config_.key_mode == KeyMode::fingerprint &&
        (config_.fingerprint_bits == 0 || config_.fingerprint_bits > 64)) {
        throw ParameterError("fingerprint length must lie in [1,64]");
    }
    set_seed_ = derive_seed(config_.seed, 0);
    fp_seed_ = derive_seed(config_.seed, 1);

    const std::size_t n = config_.capacity;
    if (const auto* exact = std::get_if<ExactCacheCounters>(&config_.counters)) {
        if (exact->bits == 0 || exact->bits > 64) throw ParameterError("exact counters need 1..64 bits");
        exact_.assign(n, 0);
        exact_max_ = exact->bits == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << exact->bits) - 1;
    } else if (const auto* aee = std::get_if<AeeCacheCounters>(&config_.counters)) {
        const ArrayConfig layout =
            aee->threshold == 0 ? make_array_config(n, aee->params, aee->delta_o)
                                : make_array_config(n, aee->params, aee->delta_o, aee->threshold);
        array_.emplace(layout, aee->params);
        geo_.emplace(aee->params.p);
    } else {
        const auto& dyn = std::get<DynamicCacheCounters>(config_.counters);
        if (dyn.scale.deamortized) {
            throw ParameterError("cache registers support eager halving only");
        }
        registers_.assign(n, Estimator(dyn.width_bits));
        controller_.emplace(dyn.scale);
    }

    keys_.resize(n);
    heap_.resize(n);
    pos_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        heap_[i] = i;
        pos_[i] = i % ways_;
    }
}

std::uint64_t CacheTable::digest_key(std::string_view flow_key, std::uint64_t& fp) const {
    const std::uint64_t digest = key_digest(flow_key);
    if (config_.key_mode == KeyMode::fingerprint) {
        fp = fingerprint_of(digest, config_.fingerprint_bits, fp_seed_);
        // Equal fingerprints must land in the same set.
        return fp;
    }
    fp = 0;
    return digest;
}

std::size_t CacheTable::set_index(std::uint64_t digest) const noexcept {
    return sets_ == 1 ? 0 : static_cast<std::size_t>(seeded_hash(digest, set_seed_) % sets_);
}

std::size_t CacheTable::set_of(std::string_view flow_key) const {
    std::uint64_t fp;
    return set_index(digest_key(flow_key, fp));
}

std::optional<std::size_t> CacheTable::find(std::string_view flow_key, std::uint64_t /*digest*/,
                                            std::uint64_t fp) const {
    if (config_.key_mode == KeyMode::fingerprint) {
        const auto it = by_fp_.find(fp);
        if (it == by_fp_.end()) return std::nullopt;
        return it->second;
    }
    const auto it = by_id_.find(flow_key);
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

bool CacheTable::resident(std::string_view flow_key) const {
    std::uint64_t fp;
    const std::uint64_t digest = digest_key(flow_key, fp);
    return find(flow_key, digest, fp).has_value();
}

std::uint64_t CacheTable::value(std::size_t slot) const {
    if (array_) return array_->raw(slot);
    if (controller_) return registers_[slot].value;
    return exact_[slot];
}

double CacheTable::estimate(std::size_t slot) const {
    if (array_) return array_->query(slot);
    if (controller_) return controller_->estimate(registers_[slot]);
    return static_cast<double>(exact_[slot]);
}

double CacheTable::p() const {
    if (array_) return array_->params().p;
    if (controller_) return controller_->p();
    return 1.0;
}

void CacheTable::add_units(std::size_t slot, std::uint64_t units) {
    if (array_) {
        array_->add_raw(slot, units);
    } else {
        std::uint64_t& c = exact_[slot];
        c = units >= exact_max_ - c ? exact_max_ : c + units;
    }
}

bool CacheTable::less(std::size_t a, std::size_t b) const {
    const std::uint64_t va = value(a);
    const std::uint64_t vb = value(b);
    return va < vb || (va == vb && a < b);
}

void CacheTable::sift_down(std::size_t set, std::size_t pos) {
    std::size_t* h = heap_.data() + set * ways_;
    const std::size_t n = ways_;
    for (;;) {
        const std::size_t l = 2 * pos + 1;
        if (l >= n) break;
        std::size_t c = l;
        if (l + 1 < n && less(h[l + 1], h[l])) c = l + 1;
        if (!less(h[c], h[pos])) break;
        std::swap(h[c], h[pos]);
        pos_[h[pos]] = pos;
        pos_[h[c]] = c;
        pos = c;
    }
}

void CacheTable::rebuild_heaps() {
    for (std::size_t set = 0; set < sets_; ++set) {
        for (std::size_t i = ways_ / 2; i-- > 0;) sift_down(set, i);
    }
}

void CacheTable::admit(std::size_t slot, std::string_view flow_key, std::uint64_t fp) {
    if (config_.key_mode == KeyMode::fingerprint) {
        keys_[slot] = Key(fp);
        by_fp_.emplace(fp, slot);
    } else {
        keys_[slot] = Key(std::string(flow_key));
        by_id_.emplace(std::string(flow_key), slot);
    }
    ++occupied_;
}

void CacheTable::release(std::size_t slot) {
    auto& key = keys_[slot];
    if (!key) return;
    if (const auto* fp = std::get_if<std::uint64_t>(&*key)) {
        by_fp_.erase(*fp);
    } else {
        by_id_.erase(std::get<std::string>(*key));
    }
    key.reset();
    --occupied_;
}

void CacheTable::release_empty() {
    for (std::size_t slot = 0; slot < keys_.size(); ++slot) {
        if (keys_[slot] && registers_[slot].value == 0) release(slot);
    }
}

void CacheTable::update(std::string_view flow_key, std::uint64_t w, Rng& rng) {
    if (w == 0) return;

    std::uint64_t units = w;
    double admit_units = static_cast<double>(w);
    ScaleController::Pending pending;
    if (array_) {
        if (w == 1) {
            if (geo_budget_ == 0) geo_budget_ = (*geo_)(rng);
            if (--geo_budget_ != 0) return;
            units = 1;
        } else {
            const WeightSplit split = split_weight(w, geo_->p());
            units = split.whole;
            if (split.residual > 0.0 && bernoulli(rng, split.residual)) ++units;
            if (units == 0) return;
        }
        admit_units = static_cast<double>(units);
    } else if (controller_) {
        const std::uint64_t before = controller_->halvings();
        const bool sampled = controller_->begin(registers_, w, rng, pending);
        if (controller_->halvings() != before) {
            release_empty();
            rebuild_heaps();
        }
        if (!sampled) return;
        if (pending.coin_known) {
            admit_units = 1.0;
        } else if (controller_->options().mode == ScaleMode::max_speed) {
            admit_units = static_cast<double>(pending.units);
        } else {
            admit_units = std::max(1.0, static_cast<double>(w) * controller_->p());
        }
    }

    std::uint64_t fp;
    const std::uint64_t digest = digest_key(flow_key, fp);
    std::optional<std::size_t> found = find(flow_key, digest, fp);
    std::size_t slot;
    if (found) {
        slot = *found;
    } else {
        slot = min_slot(set_index(digest));
        const std::uint64_t m = value(slot);
        if (m > 0 && config_.policy == CachePolicy::rap) {
            const double q = admit_units / (static_cast<double>(m) + admit_units);
            if (!bernoulli(rng, q)) {
                ++rejections_;
                return;
            }
        }
        release(slot);
        admit(slot, flow_key, fp);
        ++admissions_;
    }

    if (controller_) {
        const std::uint64_t before = controller_->halvings();
        const std::size_t one[1] = {slot};
        controller_->commit(registers_, one, pending, rng);
        if (controller_->halvings() != before) {
            release_empty();
            rebuild_heaps();
            return;
        }
    } else {
        add_units(slot, units);
    }
    sift_down(slot / ways_, pos_[slot]);
}

double CacheTable::query(std::string_view flow_key) const {
    std::uint64_t fp;
    const std::uint64_t digest = digest_key(flow_key, fp);
    if (const auto slot = find(flow_key, digest, fp)) return estimate(*slot);
    if (config_.unmonitored == UnmonitoredPolicy::zero) return 0.0;
    return static_cast<double>(value(min_slot(set_index(digest)))) / p();
}

std::uint64_t CacheTable::min_count(std::string_view flow_key) const {
    return value(min_slot(set_of(flow_key)));
}

std::vector<std::uint64_t> CacheTable::resident_counts() const {
    std::vector<std::uint64_t> out;
    out.reserve(occupied_);
    for (std::size_t slot = 0; slot < keys_.size(); ++slot) {
        if (keys_[slot]) out.push_back(value(slot));
    }
    return out;
}

bool CacheTable::out_of_contract() const {
    if (array_) return array_->oversampled();
    if (controller_) return controller_->overflow_events() > 0;
    return false;
}

EntryLayout CacheTable::layout() const {
    EntryLayout layout;
    layout.key_bits = config_.key_mode == KeyMode::fingerprint ? config_.fingerprint_bits : 0;
    if (const auto* exact = std::get_if<ExactCacheCounters>(&config_.counters)) {
        layout.counter_bits = exact->bits;
    } else if (array_) {
        layout.counter_bits = array_->config().slot_bits;
    } else {
        layout.counter_bits = std::get<DynamicCacheCounters>(config_.counters).width_bits;
    }
    return layout;
}

SpaceReport CacheTable::memory() const {
    SpaceReport report;
    const EntryLayout entry = layout();
    if (array_) {
        report.analytical_bytes = cache_memory_bytes(array_->config(), entry.key_bits);
    } else {
        report.analytical_bytes = static_cast<double>(config_.capacity * entry_footprint(entry));
    }

    const double n = static_cast<double>(config_.capacity);
    double counters = 0.0;
    if (array_) {
        counters = array_->memory().actual_bytes;
    } else if (controller_) {
        counters = n * sizeof(Estimator);
    } else {
        counters = n * sizeof(std::uint64_t);
    }
    double keys = n * sizeof(std::optional<Key>);
    for (const auto& [id, slot] : by_id_) keys += static_cast<double>(id.capacity() + 1 + sizeof(slot) + 2 * sizeof(void*));
    keys += static_cast<double>(by_fp_.size()) * (sizeof(std::uint64_t) + sizeof(std::size_t) + sizeof(void*));
    keys += static_cast<double>(by_id_.bucket_count() + by_fp_.bucket_count()) * sizeof(void*);
    report.actual_bytes = counters + keys + n * 2 * sizeof(std::size_t);
    return report;
}

} // namespace aee
