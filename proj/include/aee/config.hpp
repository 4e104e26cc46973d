#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aee/experiment.hpp"

namespace aee {

/// Experiment configuration as `key = value` text. '#' starts a comment and
/// blank lines are ignored. Keys and accepted values are listed in README.md;
/// config_pairs() emits every key in its canonical order.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Sets one key. Throws ConfigError for an unknown key or a malformed value.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

std::vector<std::pair<std::string, std::string>> config_pairs(const ExperimentConfig& config);

std::string_view to_string(Algorithm a) noexcept;
std::string_view to_string(CounterKind c) noexcept;

} // namespace aee
