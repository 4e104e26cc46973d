#include "aee/trace.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include "aee/errors.hpp"
#include "aee/random.hpp"

namespace aee {

void Trace::push(std::string_view flow_id, std::uint64_t weight) {
    if (flow_id.size() > kLengthMask) throw ParameterError("flow id longer than 65535 bytes");
    auto [it, inserted] = ids_.try_emplace(std::string(flow_id), static_cast<std::uint32_t>(flows_.size()));
    if (inserted) {
        flows_.push_back(it->first);
        flow_refs_.push_back((static_cast<std::uint64_t>(bytes_.size()) << kLengthBits) | flow_id.size());
        bytes_.append(flow_id);
    }
    refs_.push_back(flow_refs_[it->second]);
    if (weight != 1 && weights_.empty()) weights_.assign(index_.size(), 1);
    index_.push_back(it->second);
    if (!weights_.empty()) weights_.push_back(weight);
    total_ += weight;
}

std::vector<TraceRecord> Trace::records() const {
    std::vector<TraceRecord> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back({std::string(flow(i)), weight(i)});
    return out;
}

Trace parse_trace(std::istream& in) {
    Trace trace;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        const std::size_t comma = line.find(',');
        const std::string_view id = std::string_view(line).substr(0, comma);
        if (id.empty()) throw ParseError(line_no, "empty flow id");
        if (comma == std::string::npos) {
            trace.push(id);
            continue;
        }
        const std::string_view field = std::string_view(line).substr(comma + 1);
        if (field.find(',') != std::string_view::npos) throw ParseError(line_no, "too many fields");
        std::uint64_t weight = 0;
        const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), weight);
        if (ec != std::errc() || end != field.data() + field.size() || weight == 0) {
            throw ParseError(line_no, "weight must be a positive integer, got '" + std::string(field) + "'");
        }
        trace.push(id, weight);
    }
    return trace;
}

Trace load_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace " + path.string());
    return parse_trace(in);
}

void write_trace(const Trace& trace, std::ostream& out) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << trace.flow(i) << ',' << trace.weight(i) << '\n';
    }
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace " + path.string());
    write_trace(trace, out);
    if (!out) throw std::runtime_error("error writing trace " + path.string());
}

Trace gen_zipf(std::uint64_t n, std::uint64_t universe, double skew, std::uint64_t seed) {
    if (universe == 0) throw ParameterError("zipf universe must be at least 1");
    if (!(skew >= 0.0)) throw ParameterError("zipf skew must be non-negative");
    std::vector<double> mass(universe);
    for (std::uint64_t r = 0; r < universe; ++r) mass[r] = std::pow(static_cast<double>(r + 1), -skew);
    std::discrete_distribution<std::uint64_t> rank(mass.begin(), mass.end());

    Rng rng(seed);
    std::vector<std::string> names;
    names.reserve(universe);
    for (std::uint64_t r = 0; r < universe; ++r) names.push_back("f" + std::to_string(r + 1));
    Trace trace;
    for (std::uint64_t i = 0; i < n; ++i) trace.push(names[rank(rng)]);
    return trace;
}

std::vector<std::uint64_t> exact_counts(const Trace& trace) {
    std::vector<std::uint64_t> counts(trace.flows().size(), 0);
    for (std::size_t i = 0; i < trace.size(); ++i) counts[trace.flow_index(i)] += trace.weight(i);
    return counts;
}

std::unordered_map<std::string, std::uint64_t> exact_oracle(const Trace& trace) {
    const std::vector<std::uint64_t> counts = exact_counts(trace);
    std::unordered_map<std::string, std::uint64_t> out;
    out.reserve(counts.size());
    for (std::size_t f = 0; f < counts.size(); ++f) out.emplace(trace.flows()[f], counts[f]);
    return out;
}

} // namespace aee
