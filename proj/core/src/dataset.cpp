#include "codelink/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "codelink/error.hpp"
#include "codelink/util.hpp"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace codelink {
namespace {

std::string csv_escape(std::string_view cell, bool force_quote) {
  const bool needs_quote =
      force_quote || cell.find_first_of(",\"\r\n") != std::string_view::npos;
  if (!needs_quote) return std::string(cell);
  std::string out;
  out.reserve(cell.size() + 2);
  out.push_back('"');
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Canonical JSON object: std::map iteration gives sorted keys; dump() emits
// no extra whitespace.
template <typename Map>
json to_json_object(const Map& map) {
  json obj = json::object();
  for (const auto& [key, value] : map) {
    obj[key] = value;
  }
  return obj;
}

json to_json_object(const std::map<std::string, std::optional<std::string>>& map) {
  json obj = json::object();
  for (const auto& [key, value] : map) {
    if (value) {
      obj[key] = *value;
    } else {
      obj[key] = nullptr;
    }
  }
  return obj;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(errc::io_error, "cannot open " + path.string() + " for writing");
  }
  return out;
}

[[noreturn]] void schema_error(std::size_t line, const std::string& what) {
  throw Error(errc::schema_error, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

const std::vector<std::string>& dataset_columns() {
  static const std::vector<std::string> kColumns = {
      "decompiled_uid", "assembly", "architecture", "name", "bin",
      "decompiled_definition", "language", "source_files", "source_definitions",
      "source_file_start_bytes", "source_file_end_bytes", "class_names"};
  return kColumns;
}

std::uint64_t export_csv(const std::vector<MappedRecord>& records,
                         const fs::path& out_path) {
  std::ofstream out = open_out(out_path);

  const auto& columns = dataset_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out << ',';
    out << columns[i];
  }
  out << '\n';

  for (const auto& record : records) {
    const auto& dec = record.decompiled;
    out << csv_escape(dec.decompiled_uid, false) << ','
        << csv_escape(dec.assembly, false) << ','
        << csv_escape(dec.architecture, false) << ','
        << csv_escape(dec.name, false) << ','
        << csv_escape(dec.bin, false) << ','
        << csv_escape(dec.decompiled_definition, false) << ','
        << csv_escape(record.language, false) << ','
        << csv_escape(to_json_object(record.source_files).dump(), true) << ','
        << csv_escape(to_json_object(record.source_definitions).dump(), true) << ','
        << csv_escape(to_json_object(record.source_file_start_bytes).dump(), true) << ','
        << csv_escape(to_json_object(record.source_file_end_bytes).dump(), true) << ','
        << csv_escape(to_json_object(record.class_names).dump(), true) << '\n';
  }
  out.flush();
  if (!out) {
    throw Error(errc::io_error, "write failed for " + out_path.string());
  }
  return records.size();
}

std::uint64_t export_jsonl(const std::vector<MappedRecord>& records,
                           const fs::path& out_path) {
  std::ofstream out = open_out(out_path);
  for (const auto& record : records) {
    const auto& dec = record.decompiled;
    ordered_json row;
    row["decompiled_uid"] = dec.decompiled_uid;
    row["assembly"] = dec.assembly;
    row["architecture"] = dec.architecture;
    row["name"] = dec.name;
    row["bin"] = dec.bin;
    row["decompiled_definition"] = dec.decompiled_definition;
    row["language"] = record.language;

    auto insert_map = [&row](const char* key, const json& obj) {
      ordered_json dest = ordered_json::object();
      for (auto it = obj.cbegin(); it != obj.cend(); ++it) {
        dest[it.key()] = it.value();
      }
      row[key] = std::move(dest);
    };
    insert_map("source_files", to_json_object(record.source_files));
    insert_map("source_definitions", to_json_object(record.source_definitions));
    insert_map("source_file_start_bytes", to_json_object(record.source_file_start_bytes));
    insert_map("source_file_end_bytes", to_json_object(record.source_file_end_bytes));
    insert_map("class_names", to_json_object(record.class_names));

    out << row.dump() << '\n';
  }
  out.flush();
  if (!out) {
    throw Error(errc::io_error, "write failed for " + out_path.string());
  }
  return records.size();
}

std::vector<MappedRecord> import_jsonl(const fs::path& path) {
  const std::string text = read_file(path);

  std::vector<MappedRecord> records;
  std::size_t line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) {
      schema_error(line_no, "not a JSON object");
    }

    const auto& columns = dataset_columns();
    for (const auto& key : columns) {
      if (!row.contains(key)) schema_error(line_no, "missing key '" + key + "'");
    }
    for (auto it = row.cbegin(); it != row.cend(); ++it) {
      if (std::find(columns.begin(), columns.end(), it.key()) == columns.end()) {
        schema_error(line_no, "unexpected key '" + it.key() + "'");
      }
    }

    for (const char* key :
         {"decompiled_uid", "assembly", "architecture", "name", "bin",
          "decompiled_definition", "language"}) {
      if (!row[key].is_string()) schema_error(line_no, "key '" + std::string(key) + "' must be a string");
    }
    for (const char* key : {"source_files", "source_definitions",
                            "source_file_start_bytes", "source_file_end_bytes",
                            "class_names"}) {
      if (!row[key].is_object()) schema_error(line_no, "key '" + std::string(key) + "' must be an object");
    }

    MappedRecord record;
    auto& dec = record.decompiled;
    dec.decompiled_uid = row["decompiled_uid"].get<std::string>();
    dec.assembly = row["assembly"].get<std::string>();
    dec.architecture = row["architecture"].get<std::string>();
    dec.name = row["name"].get<std::string>();
    dec.bin = row["bin"].get<std::string>();
    dec.decompiled_definition = row["decompiled_definition"].get<std::string>();
    record.language = row["language"].get<std::string>();

    // Addresses are carried inside the uid ("<bin>::<0xaddr>::<name>").
    const auto& uid = dec.decompiled_uid;
    const auto first = uid.find("::0x");
    if (first != std::string::npos) {
      dec.address = std::strtoull(uid.c_str() + first + 4, nullptr, 16);
    }

    for (auto it = row["source_files"].cbegin(); it != row["source_files"].cend(); ++it) {
      if (!it.value().is_string()) schema_error(line_no, "source_files['" + it.key() + "'] must be a string");
      record.source_files.emplace(it.key(), it.value().get<std::string>());
    }
    for (auto it = row["source_definitions"].cbegin();
         it != row["source_definitions"].cend(); ++it) {
      if (!it.value().is_string()) schema_error(line_no, "source_definitions['" + it.key() + "'] must be a string");
      record.source_definitions.emplace(it.key(), it.value().get<std::string>());
    }
    for (auto it = row["source_file_start_bytes"].cbegin();
         it != row["source_file_start_bytes"].cend(); ++it) {
      if (!it.value().is_number_unsigned() && !it.value().is_number_integer()) {
        schema_error(line_no, "source_file_start_bytes['" + it.key() + "'] must be an integer");
      }
      record.source_file_start_bytes.emplace(it.key(), it.value().get<std::uint64_t>());
    }
    for (auto it = row["source_file_end_bytes"].cbegin();
         it != row["source_file_end_bytes"].cend(); ++it) {
      if (!it.value().is_number_unsigned() && !it.value().is_number_integer()) {
        schema_error(line_no, "source_file_end_bytes['" + it.key() + "'] must be an integer");
      }
      record.source_file_end_bytes.emplace(it.key(), it.value().get<std::uint64_t>());
    }
    for (auto it = row["class_names"].cbegin(); it != row["class_names"].cend(); ++it) {
      if (it.value().is_null()) {
        record.class_names.emplace(it.key(), std::nullopt);
      } else if (it.value().is_string()) {
        record.class_names.emplace(it.key(), it.value().get<std::string>());
      } else {
        schema_error(line_no, "class_names['" + it.key() + "'] must be a string or null");
      }
    }

    // The five dictionaries must share one key set.
    for (const auto& [uid_key, unused] : record.source_files) {
      (void)unused;
      if (!record.source_definitions.contains(uid_key) ||
          !record.source_file_start_bytes.contains(uid_key) ||
          !record.source_file_end_bytes.contains(uid_key) ||
          !record.class_names.contains(uid_key)) {
        schema_error(line_no, "uid '" + uid_key + "' missing from a sibling dictionary");
      }
    }
    const std::size_t n = record.source_files.size();
    if (record.source_definitions.size() != n ||
        record.source_file_start_bytes.size() != n ||
        record.source_file_end_bytes.size() != n || record.class_names.size() != n) {
      std::string offender;
      auto first_extra = [&](const auto& map) {
        for (const auto& [k, v] : map) {
          (void)v;
          if (!record.source_files.contains(k)) return k;
        }
        return std::string();
      };
      offender = first_extra(record.source_definitions);
      if (offender.empty()) offender = first_extra(record.source_file_start_bytes);
      if (offender.empty()) offender = first_extra(record.source_file_end_bytes);
      if (offender.empty()) {
        for (const auto& [k, v] : record.class_names) {
          (void)v;
          if (!record.source_files.contains(k)) {
            offender = k;
            break;
          }
        }
      }
      schema_error(line_no, "uid '" + offender + "' missing from a sibling dictionary");
    }

    records.push_back(std::move(record));
  }
  return records;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  const std::string text = read_file(path);

  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool in_quotes = false;
  bool row_has_content = false;

  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < n && text[i + 1] == '"') {
          cell.push_back('"');
          i += 2;
          continue;
        }
        in_quotes = false;
        ++i;
        continue;
      }
      cell.push_back(c);
      ++i;
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        ++i;
        break;
      case ',':
        row.push_back(std::move(cell));
        cell.clear();
        row_has_content = true;
        ++i;
        break;
      case '\r':
        if (i + 1 < n && text[i + 1] == '\n') ++i;
        [[fallthrough]];
      case '\n':
        if (row_has_content || !cell.empty() || !row.empty()) {
          row.push_back(std::move(cell));
          cell.clear();
          rows.push_back(std::move(row));
          row.clear();
          row_has_content = false;
        }
        ++i;
        break;
      default:
        cell.push_back(c);
        row_has_content = true;
        ++i;
        break;
    }
  }
  if (row_has_content || !cell.empty() || !row.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace codelink
