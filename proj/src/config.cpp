#include "aee/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>

#include "aee/errors.hpp"

namespace aee {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key));
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || end != value.data() + value.size()) bad_value(key, value);
    return out;
}

double parse_real(std::string_view key, std::string_view value) {
    return parse_number<double>(key, value);
}

bool parse_bool(std::string_view key, std::string_view value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    bad_value(key, value);
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

} // namespace

std::string_view to_string(Algorithm a) noexcept {
    switch (a) {
    case Algorithm::aee_single: return "aee-single";
    case Algorithm::cms: return "cms";
    case Algorithm::cu: return "cu";
    case Algorithm::ss: return "ss";
    case Algorithm::rap: return "rap";
    case Algorithm::dway_rap: return "dway-rap";
    }
    return "?";
}

std::string_view to_string(CounterKind c) noexcept {
    switch (c) {
    case CounterKind::exact: return "exact";
    case CounterKind::aee: return "aee";
    case CounterKind::max_accuracy: return "max-accuracy";
    case CounterKind::max_speed: return "max-speed";
    }
    return "?";
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view v) {
    if (key == "algorithm") {
        for (Algorithm a : {Algorithm::aee_single, Algorithm::cms, Algorithm::cu, Algorithm::ss,
                            Algorithm::rap, Algorithm::dway_rap}) {
            if (v == to_string(a)) {
                c.algorithm = a;
                return;
            }
        }
        bad_value(key, v);
    } else if (key == "counters") {
        for (CounterKind k : {CounterKind::exact, CounterKind::aee, CounterKind::max_accuracy,
                              CounterKind::max_speed}) {
            if (v == to_string(k)) {
                c.counters = k;
                return;
            }
        }
        bad_value(key, v);
    } else if (key == "epsilon") {
        c.epsilon = parse_real(key, v);
    } else if (key == "delta") {
        c.delta = parse_real(key, v);
    } else if (key == "n_total") {
        c.n_total = parse_number<std::uint64_t>(key, v);
    } else if (key == "delta_o") {
        c.delta_o = parse_real(key, v);
    } else if (key == "threshold") {
        c.threshold = parse_number<std::uint64_t>(key, v);
    } else if (key == "exact_bits") {
        c.exact_bits = parse_number<unsigned>(key, v);
    } else if (key == "register_bits") {
        c.register_bits = parse_number<unsigned>(key, v);
    } else if (key == "downsample") {
        if (v == "deterministic") {
            c.downsample = DownsampleKind::deterministic;
        } else if (v == "probabilistic") {
            c.downsample = DownsampleKind::probabilistic;
        } else {
            bad_value(key, v);
        }
    } else if (key == "deamortized") {
        c.deamortized = parse_bool(key, v);
    } else if (key == "depth") {
        c.depth = parse_number<std::size_t>(key, v);
    } else if (key == "width") {
        c.width = parse_number<std::size_t>(key, v);
    } else if (key == "capacity") {
        c.capacity = parse_number<std::size_t>(key, v);
    } else if (key == "ways") {
        c.ways = parse_number<std::size_t>(key, v);
    } else if (key == "key_mode") {
        if (v == "full-id") {
            c.key_mode = KeyMode::full_id;
        } else if (v == "fingerprint") {
            c.key_mode = KeyMode::fingerprint;
        } else {
            bad_value(key, v);
        }
    } else if (key == "fingerprint_bits") {
        c.fingerprint_bits = parse_number<unsigned>(key, v);
    } else if (key == "trace") {
        c.trace_path = std::string(v);
    } else if (key == "zipf_packets") {
        c.zipf_packets = parse_number<std::uint64_t>(key, v);
    } else if (key == "zipf_universe") {
        c.zipf_universe = parse_number<std::uint64_t>(key, v);
    } else if (key == "zipf_skew") {
        c.zipf_skew = parse_real(key, v);
    } else if (key == "trace_seed") {
        c.trace_seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "trials") {
        c.trials = parse_number<std::size_t>(key, v);
    } else if (key == "seed") {
        c.seed = parse_number<std::uint64_t>(key, v);
    } else if (key == "threads") {
        c.threads = parse_number<std::size_t>(key, v);
    } else if (key == "on_arrival") {
        c.on_arrival = parse_bool(key, v);
    } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
    }
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
        const std::string_view key = trim(view.substr(0, eq));
        const std::string_view value = trim(view.substr(eq + 1));
        if (key.empty()) throw ParseError(line_no, "missing key");
        try {
            apply_setting(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    return parse_config(in);
}

std::vector<std::pair<std::string, std::string>> config_pairs(const ExperimentConfig& c) {
    const auto b = [](bool v) { return std::string(v ? "true" : "false"); };
    return {
        {"algorithm", std::string(to_string(c.algorithm))},
        {"counters", std::string(to_string(c.counters))},
        {"epsilon", fmt(c.epsilon)},
        {"delta", fmt(c.delta)},
        {"n_total", std::to_string(c.n_total)},
        {"delta_o", fmt(c.delta_o)},
        {"threshold", std::to_string(c.threshold)},
        {"exact_bits", std::to_string(c.exact_bits)},
        {"register_bits", std::to_string(c.register_bits)},
        {"downsample", c.downsample == DownsampleKind::deterministic ? "deterministic" : "probabilistic"},
        {"deamortized", b(c.deamortized)},
        {"depth", std::to_string(c.depth)},
        {"width", std::to_string(c.width)},
        {"capacity", std::to_string(c.capacity)},
        {"ways", std::to_string(c.ways)},
        {"key_mode", c.key_mode == KeyMode::full_id ? "full-id" : "fingerprint"},
        {"fingerprint_bits", std::to_string(c.fingerprint_bits)},
        {"trace", c.trace_path},
        {"zipf_packets", std::to_string(c.zipf_packets)},
        {"zipf_universe", std::to_string(c.zipf_universe)},
        {"zipf_skew", fmt(c.zipf_skew)},
        {"trace_seed", std::to_string(c.trace_seed)},
        {"trials", std::to_string(c.trials)},
        {"seed", std::to_string(c.seed)},
        {"threads", std::to_string(c.threads)},
        {"on_arrival", b(c.on_arrival)},
    };
}

} // namespace aee
