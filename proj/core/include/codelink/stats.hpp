#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>

namespace codelink {

struct DatasetStats {
  std::uint64_t records = 0;
  std::uint64_t mapped = 0;      // rows with at least one source entry
  std::uint64_t unmapped = 0;    // rows with empty maps
  std::uint64_t ambiguous = 0;   // rows with more than one source entry
  std::map<std::string, std::uint64_t> per_language;
  std::map<std::string, std::uint64_t> per_binary;
};

/// Reads a dataset (.csv or .jsonl), validating the header and the
/// row-level invariant that the five dictionary columns share one key set.
/// Throws SchemaError (with line numbers) / IoError.
DatasetStats compute_stats(const std::filesystem::path& dataset_path);

void print_stats(const DatasetStats& stats, std::ostream& out);

}  // namespace codelink
