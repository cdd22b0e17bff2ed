#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "codelink/pipeline.hpp"

namespace codelink {

/// A partially specified PipelineConfig, one tier of the precedence chain
/// (defaults < CODELINK_WORKERS env < config file < flags).
struct PartialConfig {
  std::optional<std::string> repo_location;
  std::optional<std::string> checkout_ref;
  std::optional<std::string> build_command;
  std::optional<std::string> build_working_dir;
  std::optional<double> build_timeout;
  std::optional<std::vector<std::string>> build_env;
  std::optional<std::vector<std::string>> binary_paths;
  std::optional<bool> allow_globs;
  std::optional<std::vector<ExtractorSpec>> extractors;
  std::optional<DecompilerSpec> decompiler;
  std::optional<bool> strip_leading_underscores;
  std::optional<bool> strip_compiler_suffixes;
  std::optional<std::vector<std::string>> suffix_patterns;
  std::optional<std::string> mode;
  std::optional<bool> include_unmapped;
  std::optional<bool> require_unique;
  std::optional<std::string> export_format;
  std::optional<unsigned> workers;
  std::optional<std::string> workspace;
  std::optional<bool> strip_binaries;
  std::optional<std::string> strip_tool;
  std::optional<std::string> vcs_client;
  std::optional<bool> copy_local;
};

/// Parses a JSON config file mirroring PipelineConfig field names in
/// snake_case. Unknown keys (at any level) and type mismatches throw
/// ConfigFileError naming the key.
PartialConfig load_config_file(const std::filesystem::path& path);

/// Overlays `over` onto `base`, field by field.
void merge_config(PartialConfig& base, const PartialConfig& over);

struct CliCreate {
  PipelineConfig config;
};
struct CliStats {
  std::filesystem::path dataset;
};
struct CliHelp {};

using CliCommand = std::variant<CliCreate, CliStats, CliHelp>;

std::string usage_text();

/// Parses the full command line (argv without the program name). Total: any
/// input either yields a command or throws UsageError naming the offending
/// flag (or ConfigFileError for --config problems) — never crashes.
CliCommand parse_cli(const std::vector<std::string>& args,
                     const std::map<std::string, std::string>& env);

/// Same, reading CODELINK_WORKERS from the process environment.
CliCommand parse_cli(const std::vector<std::string>& args);

}  // namespace codelink
