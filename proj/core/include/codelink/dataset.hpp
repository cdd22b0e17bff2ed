#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "codelink/mapping.hpp"
#include "codelink/metrics.hpp"

namespace codelink {

/// The twelve dataset columns, in schema order.
const std::vector<std::string>& dataset_columns();

/// Writes RFC 4180 CSV (UTF-8, LF line endings) with the fixed header. The
/// five dictionary columns are canonical JSON objects (sorted keys, no
/// extra whitespace) embedded in quoted cells. Returns the data row count.
std::uint64_t export_csv(const std::vector<MappedRecord>& records,
                         const std::filesystem::path& out_path);

/// One JSON object per line, keys in schema order, dictionary fields as
/// native JSON objects. Returns the row count.
std::uint64_t export_jsonl(const std::vector<MappedRecord>& records,
                           const std::filesystem::path& out_path);

/// Inverse of export_jsonl. Schema violations throw SchemaError with the
/// line number and offending key (or UID, for mismatched map key sets).
std::vector<MappedRecord> import_jsonl(const std::filesystem::path& path);

struct DatasetManifest {
  std::string tool_version;
  std::string created_at;  // RFC 3339 UTC
  std::string repo;
  std::string build_command;
  std::vector<std::string> binaries;
  std::uint64_t record_count = 0;
  StageMetrics stage_metrics;
  std::string config_json;  // full effective configuration, serialized
};

/// Writes `manifest.json` beside the dataset with deterministic key order.
/// Returns the manifest path.
std::filesystem::path write_manifest(const DatasetManifest& manifest,
                                     const std::filesystem::path& out_dir);

/// Checks a written manifest against the actual dataset row count.
bool manifest_matches_rowcount(const std::filesystem::path& manifest_path,
                               std::uint64_t actual_rows);

/// Minimal RFC 4180 reader used by the stats subcommand: handles quoted
/// cells, doubled quotes, and embedded CR/LF.
std::vector<std::vector<std::string>> read_csv_rows(const std::filesystem::path& path);

}  // namespace codelink
