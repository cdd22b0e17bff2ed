#include "codelink/mapping.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <unordered_map>

namespace codelink {
namespace {

std::string strip_suffixes(std::string name, const std::vector<std::regex>& patterns) {
  // Removal-only rewriting: iterate to fixpoint (bounded by the length).
  for (std::size_t round = 0; round <= name.size() + 1; ++round) {
    std::string next = name;
    for (const auto& re : patterns) {
      next = std::regex_replace(next, re, "");
    }
    if (next == name) break;
    name = std::move(next);
  }
  return name;
}

std::string strip_one_underscore(std::string name) {
  // Only names with exactly one leading underscore are stripped; stripping
  // from deeper runs would make normalization non-idempotent.
  if (name.size() >= 1 && name[0] == '_' && (name.size() < 2 || name[1] != '_')) {
    name.erase(0, 1);
  }
  return name;
}

std::vector<std::regex> compile_patterns(const std::vector<std::string>& patterns) {
  std::vector<std::regex> out;
  out.reserve(patterns.size());
  for (const auto& p : patterns) {
    out.emplace_back(p);
  }
  return out;
}

std::string normalize_with(const std::string& name, const NameNormalization& rules,
                           const std::vector<std::regex>& compiled) {
  std::string result = name;
  if (rules.strip_compiler_suffixes) {
    result = strip_suffixes(std::move(result), compiled);
  }
  if (rules.strip_leading_underscores) {
    result = strip_one_underscore(std::move(result));
  }
  return result;
}

bool lenient_namespace_match(const std::string& normalized, const SourceFunction& src) {
  if (src.qualified_class &&
      normalized == *src.qualified_class + "::" + src.name) {
    return true;
  }
  return normalized.ends_with("::" + src.name);
}

}  // namespace

std::vector<std::string> NameNormalization::default_suffix_patterns() {
  return {R"(\.part\.\d+$)", R"(\.isra\.\d+$)", R"(\.constprop\.\d+$)",
          R"(\.cold$)", R"(\.plt$)"};
}

std::string normalize_name(std::string_view name, const NameNormalization& rules) {
  const auto compiled =
      rules.strip_compiler_suffixes ? compile_patterns(rules.suffix_patterns)
                                    : std::vector<std::regex>{};
  return normalize_with(std::string(name), rules, compiled);
}

bool is_potential_match(const SourceFunction& src, const DecompiledFunction& dec,
                        const NameNormalization& rules, const MappingPolicy& policy) {
  if (is_placeholder_name(dec.name)) return false;
  const std::string normalized = normalize_name(dec.name, rules);
  if (normalized == src.name) return true;
  if (policy.mode == MappingPolicy::Mode::lenient) {
    return lenient_namespace_match(normalized, src);
  }
  return false;
}

MappingResult map_functions(const std::vector<SourceFunction>& sources,
                            const std::vector<DecompiledFunction>& decompiled,
                            const NameNormalization& rules,
                            const MappingPolicy& policy) {
  {
    std::set<std::string> uids;
    for (const auto& src : sources) {
      if (!uids.insert(src.uid).second) {
        throw Error(errc::duplicate_uid, "source uid '" + src.uid + "'");
      }
    }
    uids.clear();
    for (const auto& dec : decompiled) {
      if (!uids.insert(dec.decompiled_uid).second) {
        throw Error(errc::duplicate_uid, "decompiled uid '" + dec.decompiled_uid + "'");
      }
    }
  }

  std::unordered_map<std::string, std::vector<const SourceFunction*>> by_name;
  for (const auto& src : sources) {
    by_name[src.name].push_back(&src);
  }

  const auto compiled =
      rules.strip_compiler_suffixes ? compile_patterns(rules.suffix_patterns)
                                    : std::vector<std::regex>{};

  MappingResult result;
  for (const auto& dec : decompiled) {
    // Candidate sources, keyed by uid for deterministic one-to-many maps.
    std::map<std::string, const SourceFunction*> candidates;
    if (!is_placeholder_name(dec.name)) {
      const std::string normalized = normalize_with(dec.name, rules, compiled);
      if (auto it = by_name.find(normalized); it != by_name.end()) {
        for (const auto* src : it->second) candidates.emplace(src->uid, src);
      }
      if (policy.mode == MappingPolicy::Mode::lenient) {
        // Any "::"-suffix of the normalized name is a potential plain name
        // (covers both the qualified-equality and namespace-suffix rules).
        for (std::size_t pos = normalized.find("::"); pos != std::string::npos;
             pos = normalized.find("::", pos + 1)) {
          const std::string tail = normalized.substr(pos + 2);
          if (tail.empty()) continue;
          if (auto it = by_name.find(tail); it != by_name.end()) {
            for (const auto* src : it->second) candidates.emplace(src->uid, src);
          }
        }
      }
    }

    if (candidates.empty()) {
      ++result.stats.unmatched_decompiled;
      if (!policy.include_unmapped) continue;
      MappedRecord record;
      record.decompiled = dec;
      record.language = "";
      result.records.push_back(std::move(record));
      continue;
    }

    ++result.stats.matched;
    std::set<std::string> languages;
    MappedRecord record;
    record.decompiled = dec;
    for (const auto& [uid, src] : candidates) {
      record.source_files.emplace(uid, src->file);
      record.source_definitions.emplace(uid, src->definition);
      record.source_file_start_bytes.emplace(uid, src->start_byte);
      record.source_file_end_bytes.emplace(uid, src->end_byte);
      record.class_names.emplace(uid, src->qualified_class);
      languages.insert(src->language);
    }
    const bool mixed_language = languages.size() > 1;
    record.language = mixed_language ? "" : *languages.begin();
    if (mixed_language || (policy.require_unique && candidates.size() > 1)) {
      ++result.stats.ambiguous;
    }
    result.records.push_back(std::move(record));
  }

  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const MappedRecord& a, const MappedRecord& b) {
                     const auto& x = a.decompiled;
                     const auto& y = b.decompiled;
                     if (x.bin != y.bin) return x.bin < y.bin;
                     if (x.address != y.address) return x.address < y.address;
                     return x.name < y.name;
                   });
  return result;
}

}  // namespace codelink
