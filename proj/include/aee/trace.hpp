#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace aee {

struct TraceRecord {
    std::string flow_id;
    std::uint64_t weight = 1;

    bool operator==(const TraceRecord&) const = default;
};

/// A packet stream with interned flow ids. Each packet keeps a packed
/// reference into one buffer of id bytes, so walking the stream reads memory
/// sequentially until a key is actually hashed. Weights are stored only once
/// some record carries a weight other than 1.
class Trace {
public:
    void push(std::string_view flow_id, std::uint64_t weight = 1);

    std::size_t size() const noexcept { return index_.size(); }
    bool empty() const noexcept { return index_.empty(); }
    std::string_view flow(std::size_t i) const {
        const std::uint64_t ref = refs_[i];
        return {bytes_.data() + (ref >> kLengthBits), static_cast<std::size_t>(ref & kLengthMask)};
    }
    std::uint32_t flow_index(std::size_t i) const { return index_[i]; }
    std::uint64_t weight(std::size_t i) const { return weights_.empty() ? 1 : weights_[i]; }
    bool weighted() const noexcept { return !weights_.empty(); }

    /// Distinct flow ids in order of first appearance.
    const std::vector<std::string>& flows() const noexcept { return flows_; }
    std::uint64_t total_weight() const noexcept { return total_; }
    std::vector<TraceRecord> records() const;

private:
    static constexpr unsigned kLengthBits = 16;
    static constexpr std::uint64_t kLengthMask = (std::uint64_t{1} << kLengthBits) - 1;

    std::vector<std::string> flows_;
    std::string bytes_;
    std::vector<std::uint64_t> flow_refs_;
    std::vector<std::uint64_t> refs_;
    std::unordered_map<std::string, std::uint32_t> ids_;
    std::vector<std::uint32_t> index_;
    std::vector<std::uint64_t> weights_;
    std::uint64_t total_ = 0;
};

/// Reads `flow_id[,weight]` lines. The flow id is taken verbatim; a missing
/// weight means 1; blank lines are skipped. Throws ParseError with the 1-based
/// line number for an empty id, extra fields, or a weight that is not a
/// positive integer.
Trace parse_trace(std::istream& in);
Trace load_trace(const std::filesystem::path& path);

void write_trace(const Trace& trace, std::ostream& out);
void write_trace(const Trace& trace, const std::filesystem::path& path);

/// n unit-weight packets whose flow ranks follow Zipf(skew) over
/// `universe` flows named "f1", "f2", ...; rank 1 is the most frequent.
/// Throws ParameterError for universe == 0 or negative skew.
Trace gen_zipf(std::uint64_t n, std::uint64_t universe, double skew, std::uint64_t seed);

/// True total weight of every flow.
std::unordered_map<std::string, std::uint64_t> exact_oracle(const Trace& trace);

/// Same, indexed like trace.flows().
std::vector<std::uint64_t> exact_counts(const Trace& trace);

} // namespace aee
