#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "codelink/binary.hpp"
#include "codelink/source.hpp"

namespace codelink {

/// Rules for normalizing decompiled symbol names before comparison.
/// Suffix patterns are regexes stripped repeatedly until fixpoint; a single
/// leading underscore is then stripped when the name carries exactly one
/// (names with two or more are left alone so that normalization stays
/// idempotent).
struct NameNormalization {
  bool strip_leading_underscores = true;
  bool strip_compiler_suffixes = true;
  std::vector<std::string> suffix_patterns = default_suffix_patterns();

  static std::vector<std::string> default_suffix_patterns();
};

struct MappingPolicy {
  enum class Mode { exact, lenient };
  Mode mode = Mode::exact;
  bool include_unmapped = false;
  bool require_unique = false;
};

/// One dataset row: a decompiled function plus UID-keyed dictionaries over
/// every matching source function. The five maps always share one key set;
/// an empty key set means the record is unmapped. `language` is the single
/// language of the mapped sources, or "" when unmapped or when the match
/// set mixes languages (such records are flagged ambiguous).
struct MappedRecord {
  DecompiledFunction decompiled;
  std::map<std::string, std::string> source_files;
  std::map<std::string, std::string> source_definitions;
  std::map<std::string, std::uint64_t> source_file_start_bytes;
  std::map<std::string, std::uint64_t> source_file_end_bytes;
  std::map<std::string, std::optional<std::string>> class_names;
  std::string language;

  bool unmapped() const { return source_files.empty(); }

  friend bool operator==(const MappedRecord&, const MappedRecord&) = default;
};

struct MappingStats {
  std::uint64_t matched = 0;
  std::uint64_t unmatched_decompiled = 0;
  std::uint64_t ambiguous = 0;

  friend bool operator==(const MappingStats&, const MappingStats&) = default;
};

struct MappingResult {
  std::vector<MappedRecord> records;  // ordered by (bin, address, name)
  MappingStats stats;
};

std::string normalize_name(std::string_view name, const NameNormalization& rules);

/// The pairwise match predicate. Placeholder decompiled names never match.
/// Exact mode: normalize(dec.name) == src.name. Lenient mode additionally
/// accepts the qualified form "<class>::<name>" and any name whose
/// normalized form ends with "::" + src.name.
bool is_potential_match(const SourceFunction& src, const DecompiledFunction& dec,
                        const NameNormalization& rules, const MappingPolicy& policy);

/// Aligns every decompiled function with all matching source functions.
/// Indexes sources by name internally but is output-equivalent to the
/// brute-force pairwise scan over is_potential_match. Throws DuplicateUid.
MappingResult map_functions(const std::vector<SourceFunction>& sources,
                            const std::vector<DecompiledFunction>& decompiled,
                            const NameNormalization& rules,
                            const MappingPolicy& policy);

}  // namespace codelink
