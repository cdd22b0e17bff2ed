#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codelink/error.hpp"

namespace codelink {

/// One function definition found in a source file. `definition` is the
/// exact text of bytes [start_byte, end_byte) of the file (transcoded from
/// Latin-1 only when the file is not valid UTF-8; offsets always refer to
/// the original file bytes).
struct SourceFunction {
  std::string uid;  // "<repo-relative-file>::<name>::<start_byte>"
  std::string name;
  std::optional<std::string> qualified_class;
  std::string language;
  std::string file;  // repo-relative, '/' separators
  std::uint64_t start_byte = 0;
  std::uint64_t end_byte = 0;
  std::string definition;

  friend bool operator==(const SourceFunction&, const SourceFunction&) = default;
};

struct ExtractorSpec {
  std::string language;
  std::vector<std::string> file_patterns;  // case-sensitive globs
  std::string kind;  // builtin name ("c-scanner") or external command
};

inline constexpr const char* kBuiltinCScanner = "c-scanner";

/// Registry of per-language extractors. Later registrations win when file
/// patterns overlap.
class ExtractorRegistry {
 public:
  /// Validates the spec (builtin name known, external command on PATH) and
  /// adds it. Returns a handle (the registration index). Throws
  /// UnknownBuiltin / ExternalCommandNotFound.
  std::size_t register_extractor(const ExtractorSpec& spec);

  /// The extractor responsible for `rel_path`, or nullptr when no pattern
  /// matches.
  const ExtractorSpec* match(const std::string& rel_path) const;

  bool empty() const { return specs_.empty(); }
  const std::vector<ExtractorSpec>& specs() const { return specs_; }

 private:
  std::vector<ExtractorSpec> specs_;
};

/// Result of scanning one file. `scan_error` is set when the scan aborted
/// (unbalanced braces); the functions found before the error point are
/// still returned. `notes` records skipped constructs (e.g. K&R-style
/// definitions).
struct FileScan {
  std::vector<SourceFunction> functions;
  std::vector<std::string> notes;
  std::optional<std::string> scan_error;
};

/// Comment-, string-, and preprocessor-aware brace scanner for C. Returns
/// every top-level function definition in file order. Never throws on
/// arbitrary byte input.
FileScan extract_c_functions(std::string_view file_bytes,
                             const std::string& rel_path,
                             const std::string& language = "C");

/// Deterministic (lexicographic) list of source files matched to their
/// extractor. Skips version-control metadata directories and everything
/// under any of `excluded_dirs` (the workspace output directory).
std::vector<std::pair<std::filesystem::path, const ExtractorSpec*>>
discover_source_files(const std::filesystem::path& repo_root,
                      const ExtractorRegistry& registry,
                      const std::vector<std::filesystem::path>& excluded_dirs = {});

/// Extracts one file with the chosen extractor (builtin scanner or external
/// command). Pure with respect to the registry; safe to call in parallel
/// for distinct files.
FileScan extract_file(const std::filesystem::path& abs_path,
                      const std::string& rel_path,
                      const ExtractorSpec& extractor);

struct ExtractionResult {
  std::vector<SourceFunction> functions;  // ordered by (file, start_byte)
  std::vector<ItemError> errors;          // per-file failures
  std::vector<ItemError> notes;           // per-file skip notes
};

/// Sorts per-file results into the global (file, start_byte) order and
/// drops exact UID duplicates (recording an error per duplicate).
ExtractionResult finalize_extraction(std::vector<std::pair<std::string, FileScan>> per_file);

/// Walks the repository and extracts every matched file sequentially.
/// Throws NoExtractorsRegistered when the registry is empty; per-file
/// problems are collected, not fatal.
ExtractionResult extract_all(const std::filesystem::path& repo_root,
                             const ExtractorRegistry& registry,
                             const std::vector<std::filesystem::path>& excluded_dirs = {});

}  // namespace codelink
