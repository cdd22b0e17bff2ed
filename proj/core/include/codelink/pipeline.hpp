#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codelink/binary.hpp"
#include "codelink/error.hpp"
#include "codelink/mapping.hpp"
#include "codelink/metrics.hpp"
#include "codelink/repo.hpp"
#include "codelink/source.hpp"

namespace codelink {

enum class ExportFormat { csv, jsonl, both };

unsigned default_worker_count();

struct PipelineConfig {
  RepoSource repo;
  BuildSpec build;
  BinaryTargets binaries;
  std::vector<ExtractorSpec> extractors = {default_c_extractor()};
  DecompilerSpec decompiler;
  NameNormalization rules;
  MappingPolicy policy;
  ExportFormat export_format = ExportFormat::csv;
  unsigned workers = default_worker_count();
  std::filesystem::path workspace;
  bool strip_binaries = false;
  std::string strip_tool = "strip";
  AcquireOptions acquire;

  static ExtractorSpec default_c_extractor();
};

struct RunReport {
  std::filesystem::path csv_path;    // empty when not exported
  std::filesystem::path jsonl_path;  // empty when not exported
  std::filesystem::path manifest_path;
  std::filesystem::path report_path;
  std::filesystem::path trace_path;
  StageMetrics metrics;
  MappingStats mapping_stats;
  std::uint64_t source_function_count = 0;
  std::uint64_t decompiled_function_count = 0;
  std::uint64_t record_count = 0;
  double scheduling_overhead_bound_seconds = 0;
  std::vector<ItemError> extraction_errors;
  std::vector<ItemError> extraction_notes;
  std::vector<ItemError> decompilation_errors;
  std::vector<ItemError> decompilation_notes;
};

/// Serialized effective configuration (deterministic key order); embedded
/// in the dataset manifest and useful for debugging.
std::string config_to_json(const PipelineConfig& config);

/// Runs the five-stage pipeline: acquire/build (strict, sequential), then
/// extraction and decompilation fan-outs on one bounded worker pool, then
/// mapping, then export. Writes the dataset, manifest.json,
/// run_report.json, and trace.jsonl under config.workspace. Fatal stage
/// errors are thrown annotated with the stage name (a best-effort
/// run_report.json is still written).
RunReport run_pipeline(const PipelineConfig& config);

}  // namespace codelink
