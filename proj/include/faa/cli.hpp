// Copyright 2026 The FAA-Sim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "faa/experiment.hpp"

namespace faa::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Exit : int { ok = 0, runtime_failure = 1, invalid_config = 2 };

struct Diagnostic {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  /// Dotted config path, e.g. "faa.M"; empty for document-level problems.
  std::string path;
  std::string message;

  std::string str() const;
};

struct ParsedConfig {
  std::optional<experiment::ExperimentConfig> config;
  std::vector<Diagnostic> diagnostics;

  bool ok() const;
  std::size_t error_count() const;
};

/// Applies `--a.b=value` style overrides to a JSON document. Values that parse
/// as JSON are used as such, anything else as a string.
void apply_overrides(nlohmann::json& doc, std::span<const std::string> overrides);

/// Reads and validates a config document. Every violated invariant becomes a
/// diagnostic naming its config path; unknown keys are warnings.
ParsedConfig parse_config(const nlohmann::json& doc);
ParsedConfig parse_config_text(std::string_view text, std::span<const std::string> overrides = {});
ParsedConfig load_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// Field-level invariant checks on an already-typed config.
std::vector<Diagnostic> validate_config(const experiment::ExperimentConfig& cfg);

/// Full config echo; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const experiment::ExperimentConfig& cfg);

/// Runs the experiment and writes every artifact to cfg.output_dir. Returns the
/// report document that was written to report.json.
nlohmann::json run_experiment(const experiment::ExperimentConfig& cfg, std::ostream& log);

Exit run(const std::filesystem::path& config_path, std::span<const std::string> overrides, std::ostream& out,
         std::ostream& err);
Exit validate(const std::filesystem::path& config_path, std::span<const std::string> overrides, std::ostream& out);

enum class FeatureSplit { population, train, test, base };
std::optional<FeatureSplit> feature_split_from_string(std::string_view s);

Exit export_features(const std::filesystem::path& config_path, std::span<const std::string> overrides,
                     const std::filesystem::path& out_path, FeatureSplit split, std::ostream& err);

}  // namespace faa::cli
