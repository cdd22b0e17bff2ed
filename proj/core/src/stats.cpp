#include "codelink/stats.hpp"

#include <set>

#include "codelink/dataset.hpp"
#include "codelink/error.hpp"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace codelink {
namespace {

void tally(DatasetStats& stats, const std::string& bin, const std::string& language,
           std::size_t key_count) {
  ++stats.records;
  if (key_count == 0) {
    ++stats.unmapped;
  } else {
    ++stats.mapped;
    if (key_count > 1) ++stats.ambiguous;
  }
  ++stats.per_binary[bin.empty() ? "(none)" : bin];
  ++stats.per_language[language.empty() ? "(none)" : language];
}

DatasetStats stats_from_csv(const fs::path& path) {
  const auto rows = read_csv_rows(path);
  if (rows.empty()) {
    throw Error(errc::schema_error, "line 1: missing header row");
  }
  const auto& columns = dataset_columns();
  if (rows.front() != columns) {
    throw Error(errc::schema_error, "line 1: header does not match the dataset schema");
  }

  DatasetStats stats;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string line = "line " + std::to_string(r + 1);
    if (row.size() != columns.size()) {
      throw Error(errc::schema_error,
                  line + ": expected " + std::to_string(columns.size()) +
                      " columns, found " + std::to_string(row.size()));
    }
    // Columns 7..11 are the five dictionary cells.
    std::set<std::string> keys;
    for (std::size_t c = 7; c < 12; ++c) {
      json obj = json::parse(row[c], nullptr, false);
      if (obj.is_discarded() || !obj.is_object()) {
        throw Error(errc::schema_error,
                    line + ": column '" + columns[c] + "' is not a JSON object");
      }
      std::set<std::string> cell_keys;
      for (auto it = obj.cbegin(); it != obj.cend(); ++it) cell_keys.insert(it.key());
      if (c == 7) {
        keys = std::move(cell_keys);
      } else if (cell_keys != keys) {
        throw Error(errc::schema_error,
                    line + ": column '" + columns[c] +
                        "' key set differs from 'source_files'");
      }
    }
    tally(stats, row[4], row[6], keys.size());
  }
  return stats;
}

DatasetStats stats_from_jsonl(const fs::path& path) {
  DatasetStats stats;
  for (const auto& record : import_jsonl(path)) {
    tally(stats, record.decompiled.bin, record.language, record.source_files.size());
  }
  return stats;
}

}  // namespace

DatasetStats compute_stats(const fs::path& dataset_path) {
  const auto ext = dataset_path.extension();
  if (ext == ".jsonl") return stats_from_jsonl(dataset_path);
  return stats_from_csv(dataset_path);
}

void print_stats(const DatasetStats& stats, std::ostream& out) {
  out << "records: " << stats.records << ", mapped: " << stats.mapped
      << ", unmapped: " << stats.unmapped << ", ambiguous: " << stats.ambiguous
      << "\n";
  if (!stats.per_language.empty()) {
    out << "by language:\n";
    for (const auto& [language, count] : stats.per_language) {
      out << "  " << language << ": " << count << "\n";
    }
  }
  if (!stats.per_binary.empty()) {
    out << "by binary:\n";
    for (const auto& [bin, count] : stats.per_binary) {
      out << "  " << bin << ": " << count << "\n";
    }
  }
}

}  // namespace codelink
