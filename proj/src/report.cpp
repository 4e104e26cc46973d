#include "aee/report.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "aee/errors.hpp"
#include "json.hpp"

namespace aee {

namespace {

using nlohmann::ordered_json;

struct Field {
    const char* name;
    double ExperimentReport::*real = nullptr;
    std::size_t ExperimentReport::*count = nullptr;
    std::uint64_t ExperimentReport::*wide = nullptr;
};

const std::vector<Field>& fields() {
    static const std::vector<Field> kFields = {
        {"trial_count", nullptr, &ExperimentReport::trial_count},
        {"total_weight", nullptr, nullptr, &ExperimentReport::total_weight},
        {"distinct_flows", nullptr, &ExperimentReport::distinct_flows},
        {"normalized_error", &ExperimentReport::normalized_error},
        {"normalized_error_ci", &ExperimentReport::normalized_error_ci},
        {"per_flow_mae", &ExperimentReport::per_flow_mae},
        {"per_flow_mae_ci", &ExperimentReport::per_flow_mae_ci},
        {"on_arrival_error", &ExperimentReport::on_arrival_error},
        {"on_arrival_error_ci", &ExperimentReport::on_arrival_error_ci},
        {"throughput_mops", &ExperimentReport::throughput_mops},
        {"throughput_ci", &ExperimentReport::throughput_ci},
        {"analytical_bytes", &ExperimentReport::analytical_bytes},
        {"actual_bytes", &ExperimentReport::actual_bytes},
        {"out_of_contract_trials", nullptr, &ExperimentReport::out_of_contract_trials},
    };
    return kFields;
}

std::string format_real(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

std::string field_text(const ExperimentReport& r, const Field& f) {
    if (f.real) return format_real(r.*f.real);
    if (f.count) return std::to_string(r.*f.count);
    return std::to_string(r.*f.wide);
}

void set_field(ExperimentReport& r, const Field& f, std::string_view text, std::size_t line) {
    auto parse = [&](auto& out) {
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
        if (ec != std::errc() || end != text.data() + text.size()) {
            throw ParseError(line, std::string("bad value for ") + f.name);
        }
    };
    if (f.real) {
        parse(r.*f.real);
    } else if (f.count) {
        parse(r.*f.count);
    } else {
        parse(r.*f.wide);
    }
}

std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + '"';
}

std::vector<std::string> split_csv(const std::string& line, std::size_t line_no) {
    std::vector<std::string> cells(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cells.back() += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cells.back() += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            cells.emplace_back();
        } else if (ch != '\r') {
            cells.back() += ch;
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quote");
    return cells;
}

} // namespace

const std::vector<std::string>& report_metric_fields() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const Field& f : fields()) out.emplace_back(f.name);
        return out;
    }();
    return names;
}

std::string report_to_json(const ExperimentReport& r) {
    ordered_json j;
    ordered_json config = ordered_json::object();
    for (const auto& [k, v] : r.config) config[k] = v;
    j["config"] = config;
    for (const Field& f : fields()) {
        if (f.real) {
            j[f.name] = r.*f.real;
        } else if (f.count) {
            j[f.name] = r.*f.count;
        } else {
            j[f.name] = r.*f.wide;
        }
    }
    return j.dump(2);
}

ExperimentReport report_from_json(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(0, e.what());
    }
    ExperimentReport r;
    try {
        for (const auto& [k, v] : j.at("config").items()) r.config.emplace_back(k, v.get<std::string>());
        for (const Field& f : fields()) {
            const ordered_json& v = j.at(f.name);
            if (f.real) {
                r.*f.real = v.get<double>();
            } else if (f.count) {
                r.*f.count = v.get<std::size_t>();
            } else {
                r.*f.wide = v.get<std::uint64_t>();
            }
        }
    } catch (const ordered_json::exception& e) {
        throw ParseError(0, e.what());
    }
    return r;
}

void write_csv(std::span<const ExperimentReport> reports, std::ostream& out) {
    if (reports.empty()) return;
    const auto& keys = reports.front().config;
    bool first = true;
    for (const auto& kv : keys) {
        out << (first ? "" : ",") << quote(kv.first);
        first = false;
    }
    for (const Field& f : fields()) {
        out << (first ? "" : ",") << f.name;
        first = false;
    }
    out << '\n';
    for (const ExperimentReport& r : reports) {
        if (r.config.size() != keys.size()) throw std::invalid_argument("reports disagree on config keys");
        first = true;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (r.config[i].first != keys[i].first) throw std::invalid_argument("reports disagree on config keys");
            out << (first ? "" : ",") << quote(r.config[i].second);
            first = false;
        }
        for (const Field& f : fields()) {
            out << (first ? "" : ",") << field_text(r, f);
            first = false;
        }
        out << '\n';
    }
}

std::vector<ExperimentReport> read_csv(std::istream& in) {
    std::vector<ExperimentReport> out;
    std::string line;
    if (!std::getline(in, line)) return out;
    const std::vector<std::string> header = split_csv(line, 1);
    const std::size_t metrics = fields().size();
    if (header.size() < metrics) throw ParseError(1, "header lacks metric columns");
    const std::size_t config_cols = header.size() - metrics;
    for (std::size_t i = 0; i < metrics; ++i) {
        if (header[config_cols + i] != fields()[i].name) {
            throw ParseError(1, "unexpected column '" + header[config_cols + i] + "'");
        }
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> cells = split_csv(line, line_no);
        if (cells.size() != header.size()) throw ParseError(line_no, "wrong number of columns");
        ExperimentReport r;
        for (std::size_t i = 0; i < config_cols; ++i) r.config.emplace_back(header[i], cells[i]);
        for (std::size_t i = 0; i < metrics; ++i) set_field(r, fields()[i], cells[config_cols + i], line_no);
        out.push_back(std::move(r));
    }
    return out;
}

void emit_reports(std::span<const ExperimentReport> reports, const std::filesystem::path& path,
                  ReportFormat format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report " + path.string());
    if (format == ReportFormat::csv) {
        write_csv(reports, out);
    } else {
        ordered_json arr = ordered_json::array();
        for (const ExperimentReport& r : reports) arr.push_back(ordered_json::parse(report_to_json(r)));
        out << (reports.size() == 1 ? arr.front().dump(2) : arr.dump(2)) << '\n';
    }
    if (!out) throw std::runtime_error("error writing report " + path.string());
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format) {
    emit_reports(std::span<const ExperimentReport>(&report, 1), path, format);
}

} // namespace aee
