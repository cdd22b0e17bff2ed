#include "codelink/source.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <set>

#include "codelink/subprocess.hpp"
#include "codelink/util.hpp"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace codelink {
namespace {

bool command_on_path(const std::string& command) {
  const auto words = split_ws(command);
  if (words.empty()) return false;
  const std::string& exe = words.front();
  if (exe.find('/') != std::string::npos) {
    return ::access(exe.c_str(), X_OK) == 0;
  }
  const char* path = std::getenv("PATH");
  if (!path) return false;
  std::string_view rest(path);
  while (!rest.empty()) {
    const auto colon = rest.find(':');
    const std::string_view dir =
        colon == std::string_view::npos ? rest : rest.substr(0, colon);
    rest = colon == std::string_view::npos ? std::string_view{} : rest.substr(colon + 1);
    if (dir.empty()) continue;
    const std::string full = std::string(dir) + "/" + exe;
    if (::access(full.c_str(), X_OK) == 0) return true;
  }
  return false;
}

bool is_vcs_metadata_dir(const fs::path& name) {
  return name == ".git" || name == ".hg" || name == ".svn";
}

// Re-encodes definitions when the file is not valid UTF-8 so that every
// exported string is UTF-8; offsets keep referring to the original bytes.
void fix_encoding(std::string_view file_bytes, FileScan& scan) {
  if (is_valid_utf8(file_bytes)) return;
  for (auto& fn : scan.functions) {
    fn.definition = latin1_to_utf8(fn.definition);
  }
}

FileScan run_external_extractor(const ExtractorSpec& spec, const fs::path& abs_path,
                                const std::string& rel_path,
                                std::string_view file_bytes) {
  FileScan scan;
  RunOptions run;
  run.timeout_seconds = 600;
  run.stdout_mode = StdioMode::to_string;
  run.stderr_mode = StdioMode::to_string;
  const auto result =
      run_shell(spec.kind + " " + shell_quote(abs_path.string()), run);
  if (result.timed_out) {
    scan.scan_error = "extractor timed out";
    return scan;
  }
  if (result.exit_code != 0) {
    scan.scan_error = "extractor exited with code " + std::to_string(result.exit_code);
    return scan;
  }

  std::size_t line_no = 0;
  std::string_view rest = result.stdout_text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      scan.scan_error = "line " + std::to_string(line_no) + " is not a JSON object";
      return scan;
    }
    for (const char* key : {"name", "start_byte", "end_byte", "class_name"}) {
      if (!obj.contains(key)) {
        scan.scan_error =
            "line " + std::to_string(line_no) + " missing key '" + key + "'";
        return scan;
      }
    }
    if (!obj["name"].is_string() || !obj["start_byte"].is_number_unsigned() ||
        !obj["end_byte"].is_number_unsigned() ||
        !(obj["class_name"].is_string() || obj["class_name"].is_null())) {
      scan.scan_error = "line " + std::to_string(line_no) + " has a mistyped field";
      return scan;
    }

    SourceFunction fn;
    fn.name = obj["name"].get<std::string>();
    fn.start_byte = obj["start_byte"].get<std::uint64_t>();
    fn.end_byte = obj["end_byte"].get<std::uint64_t>();
    if (fn.start_byte >= fn.end_byte || fn.end_byte > file_bytes.size()) {
      scan.scan_error = "line " + std::to_string(line_no) + " has an invalid byte span";
      return scan;
    }
    if (!obj["class_name"].is_null()) {
      fn.qualified_class = obj["class_name"].get<std::string>();
    }
    fn.language = spec.language;
    fn.file = rel_path;
    fn.definition = std::string(
        file_bytes.substr(fn.start_byte, fn.end_byte - fn.start_byte));
    fn.uid = rel_path + "::" + fn.name + "::" + std::to_string(fn.start_byte);
    scan.functions.push_back(std::move(fn));
  }
  std::sort(scan.functions.begin(), scan.functions.end(),
            [](const SourceFunction& a, const SourceFunction& b) {
              return a.start_byte < b.start_byte;
            });
  return scan;
}

}  // namespace

std::size_t ExtractorRegistry::register_extractor(const ExtractorSpec& spec) {
  if (spec.file_patterns.empty()) {
    throw std::invalid_argument("extractor has no file patterns");
  }
  // Builtins may be named plainly ("c-scanner") or explicitly
  // ("builtin:c-scanner"); anything else is an external command line.
  std::string kind = spec.kind;
  const bool explicit_builtin = kind.starts_with("builtin:");
  if (explicit_builtin) kind = kind.substr(8);
  if (kind == kBuiltinCScanner) {
    ExtractorSpec normalized = spec;
    normalized.kind = kBuiltinCScanner;
    specs_.push_back(std::move(normalized));
    return specs_.size() - 1;
  }
  if (explicit_builtin) {
    throw Error(errc::unknown_builtin, "'" + kind + "'");
  }
  if (!command_on_path(spec.kind)) {
    throw Error(errc::external_command_not_found, "'" + spec.kind + "'");
  }
  specs_.push_back(spec);
  return specs_.size() - 1;
}

const ExtractorSpec* ExtractorRegistry::match(const std::string& rel_path) const {
  // Later registrations win on overlap.
  for (auto it = specs_.rbegin(); it != specs_.rend(); ++it) {
    for (const auto& pattern : it->file_patterns) {
      if (glob_match(pattern, rel_path)) return &*it;
    }
  }
  return nullptr;
}

std::vector<std::pair<fs::path, const ExtractorSpec*>> discover_source_files(
    const fs::path& repo_root, const ExtractorRegistry& registry,
    const std::vector<fs::path>& excluded_dirs) {
  std::vector<fs::path> excluded_canon;
  for (const auto& d : excluded_dirs) {
    std::error_code ec;
    const auto canon = fs::weakly_canonical(d, ec);
    excluded_canon.push_back(ec ? d : canon);
  }

  std::vector<std::pair<std::string, fs::path>> matched;  // (rel, abs)
  std::error_code ec;
  fs::recursive_directory_iterator it(repo_root,
                                      fs::directory_options::skip_permission_denied, ec);
  const fs::recursive_directory_iterator end;
  while (!ec && it != end) {
    const fs::path& p = it->path();
    if (it->is_directory(ec)) {
      bool excluded = is_vcs_metadata_dir(p.filename());
      if (!excluded) {
        std::error_code cec;
        const auto canon = fs::weakly_canonical(p, cec);
        for (const auto& ex : excluded_canon) {
          if (!cec && canon == ex) {
            excluded = true;
            break;
          }
        }
      }
      if (excluded) {
        it.disable_recursion_pending();
      }
    } else if (it->is_regular_file(ec)) {
      matched.emplace_back(relative_to(p, repo_root), p);
    }
    it.increment(ec);
  }

  std::sort(matched.begin(), matched.end());

  std::vector<std::pair<fs::path, const ExtractorSpec*>> out;
  for (const auto& [rel, abs] : matched) {
    if (const ExtractorSpec* spec = registry.match(rel)) {
      out.emplace_back(abs, spec);
    }
  }
  return out;
}

FileScan extract_file(const fs::path& abs_path, const std::string& rel_path,
                      const ExtractorSpec& extractor) {
  FileScan scan;
  std::string bytes;
  try {
    bytes = read_file(abs_path);
  } catch (const Error& e) {
    scan.scan_error = e.what();
    return scan;
  }
  if (extractor.kind == kBuiltinCScanner) {
    scan = extract_c_functions(bytes, rel_path, extractor.language);
  } else {
    scan = run_external_extractor(extractor, abs_path, rel_path, bytes);
  }
  fix_encoding(bytes, scan);
  return scan;
}

ExtractionResult finalize_extraction(
    std::vector<std::pair<std::string, FileScan>> per_file) {
  ExtractionResult out;
  std::sort(per_file.begin(), per_file.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::set<std::string> seen_uids;
  for (auto& [rel, scan] : per_file) {
    if (scan.scan_error) {
      out.errors.push_back({rel, *scan.scan_error});
    }
    for (const auto& note : scan.notes) {
      out.notes.push_back({rel, note});
    }
    std::stable_sort(scan.functions.begin(), scan.functions.end(),
                     [](const SourceFunction& a, const SourceFunction& b) {
                       return a.start_byte < b.start_byte;
                     });
    for (auto& fn : scan.functions) {
      if (!seen_uids.insert(fn.uid).second) {
        out.errors.push_back({rel, "duplicate function uid '" + fn.uid + "' dropped"});
        continue;
      }
      out.functions.push_back(std::move(fn));
    }
  }
  return out;
}

ExtractionResult extract_all(const fs::path& repo_root,
                             const ExtractorRegistry& registry,
                             const std::vector<fs::path>& excluded_dirs) {
  if (registry.empty()) {
    throw Error(errc::no_extractors_registered, "register at least one extractor");
  }
  std::vector<std::pair<std::string, FileScan>> per_file;
  for (const auto& [abs, spec] : discover_source_files(repo_root, registry, excluded_dirs)) {
    const std::string rel = relative_to(abs, repo_root);
    per_file.emplace_back(rel, extract_file(abs, rel, *spec));
  }
  return finalize_extraction(std::move(per_file));
}

}  // namespace codelink
