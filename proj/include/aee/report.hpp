#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "aee/experiment.hpp"

namespace aee {

enum class ReportFormat { json, csv };

/// Metric columns, in the order they appear in JSON and after the config
/// columns in CSV.
const std::vector<std::string>& report_metric_fields();

std::string report_to_json(const ExperimentReport& report);
/// Throws ParseError on malformed input or a missing field.
ExperimentReport report_from_json(std::string_view text);

/// CSV with one header row (config keys, then metric fields) and one row per
/// report, so a sweep over memory budgets becomes one table. All reports must
/// share the same config keys.
void write_csv(std::span<const ExperimentReport> reports, std::ostream& out);
std::vector<ExperimentReport> read_csv(std::istream& in);

/// Writes one report (JSON) or a table of reports (CSV). Throws
/// std::runtime_error on I/O failure.
void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format);
void emit_reports(std::span<const ExperimentReport> reports, const std::filesystem::path& path,
                  ReportFormat format);

} // namespace aee
