#include "codelink/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <regex>

#include "codelink/util.hpp"
#include "codelink/version.hpp"

#include "json_internal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace codelink {
namespace {

[[noreturn]] void usage_error(const std::string& what) {
  throw Error(errc::usage_error, what);
}

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(errc::config_file_error, "'" + key + "': " + what);
}

std::optional<ExportFormat> parse_export_format(const std::string& value) {
  if (value == "csv") return ExportFormat::csv;
  if (value == "jsonl") return ExportFormat::jsonl;
  if (value == "both") return ExportFormat::both;
  return std::nullopt;
}

std::string export_format_to_string(ExportFormat format) {
  switch (format) {
    case ExportFormat::csv: return "csv";
    case ExportFormat::jsonl: return "jsonl";
    case ExportFormat::both: return "both";
  }
  return "csv";
}

std::optional<MappingPolicy::Mode> parse_mode(const std::string& value) {
  if (value == "exact") return MappingPolicy::Mode::exact;
  if (value == "lenient") return MappingPolicy::Mode::lenient;
  return std::nullopt;
}

unsigned parse_workers(const std::string& value, const std::string& flag_name) {
  char* end = nullptr;
  const unsigned long parsed = std::strtoul(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || parsed == 0 || parsed > 4096) {
    usage_error("invalid value '" + value + "' for " + flag_name +
                " (workers must be an integer >= 1)");
  }
  return static_cast<unsigned>(parsed);
}

void reject_unknown_keys(const json& obj, const std::string& prefix,
                         std::initializer_list<const char*> known) {
  for (auto it = obj.cbegin(); it != obj.cend(); ++it) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return it.key() == k;
        }) == known.end()) {
      config_error(prefix.empty() ? it.key() : prefix + "." + it.key(),
                   "unknown key");
    }
  }
}

std::string need_string(const json& obj, const std::string& key) {
  if (!obj.is_string()) config_error(key, "expected a string");
  return obj.get<std::string>();
}

bool need_bool(const json& obj, const std::string& key) {
  if (!obj.is_boolean()) config_error(key, "expected a boolean");
  return obj.get<bool>();
}

double need_number(const json& obj, const std::string& key) {
  if (!obj.is_number()) config_error(key, "expected a number");
  return obj.get<double>();
}

std::vector<std::string> need_string_array(const json& obj, const std::string& key) {
  if (!obj.is_array()) config_error(key, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& item : obj) {
    if (!item.is_string()) config_error(key, "expected an array of strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

DecompilerSpec parse_decompiler_object(const json& obj) {
  if (!obj.is_object()) config_error("decompiler", "expected an object");
  reject_unknown_keys(obj, "decompiler", {"kind", "command", "timeout"});
  DecompilerSpec spec;
  if (obj.contains("kind")) {
    spec.kind = need_string(obj["kind"], "decompiler.kind");
    if (spec.kind != "elf-symtab" && spec.kind != "external" && spec.kind != "fixture") {
      config_error("decompiler.kind", "must be elf-symtab, external, or fixture");
    }
  }
  if (obj.contains("command")) {
    spec.command = need_string(obj["command"], "decompiler.command");
  }
  if (obj.contains("timeout")) {
    spec.timeout_seconds = need_number(obj["timeout"], "decompiler.timeout");
    if (spec.timeout_seconds <= 0) config_error("decompiler.timeout", "must be positive");
  }
  return spec;
}

std::vector<ExtractorSpec> parse_extractors_array(const json& arr) {
  if (!arr.is_array()) config_error("extractors", "expected an array");
  std::vector<ExtractorSpec> out;
  for (const auto& item : arr) {
    if (!item.is_object()) config_error("extractors", "expected objects");
    reject_unknown_keys(item, "extractors", {"language", "file_patterns", "kind"});
    ExtractorSpec spec;
    if (!item.contains("language") || !item.contains("kind")) {
      config_error("extractors", "entries need 'language' and 'kind'");
    }
    spec.language = need_string(item["language"], "extractors.language");
    spec.kind = need_string(item["kind"], "extractors.kind");
    if (item.contains("file_patterns")) {
      spec.file_patterns = need_string_array(item["file_patterns"],
                                             "extractors.file_patterns");
    }
    if (spec.file_patterns.empty()) {
      config_error("extractors.file_patterns", "must not be empty");
    }
    out.push_back(std::move(spec));
  }
  return out;
}

PipelineConfig finalize(const PartialConfig& merged,
                        const std::vector<ExtractorSpec>& extra_extractors) {
  PipelineConfig config;

  if (merged.repo_location) config.repo.location = *merged.repo_location;
  if (merged.checkout_ref) config.repo.checkout_ref = *merged.checkout_ref;
  if (merged.build_command) config.build.command = *merged.build_command;
  if (merged.build_working_dir) config.build.working_dir = *merged.build_working_dir;
  if (merged.build_timeout) config.build.timeout_seconds = *merged.build_timeout;
  if (merged.build_env) config.build.env = *merged.build_env;
  if (merged.binary_paths) config.binaries.paths = *merged.binary_paths;
  if (merged.allow_globs) config.binaries.allow_globs = *merged.allow_globs;
  if (merged.extractors) config.extractors = *merged.extractors;
  config.extractors.insert(config.extractors.end(), extra_extractors.begin(),
                           extra_extractors.end());
  if (merged.decompiler) config.decompiler = *merged.decompiler;
  if (merged.strip_leading_underscores) {
    config.rules.strip_leading_underscores = *merged.strip_leading_underscores;
  }
  if (merged.strip_compiler_suffixes) {
    config.rules.strip_compiler_suffixes = *merged.strip_compiler_suffixes;
  }
  if (merged.suffix_patterns) config.rules.suffix_patterns = *merged.suffix_patterns;
  if (merged.mode) {
    const auto mode = parse_mode(*merged.mode);
    if (!mode) usage_error("invalid mapping mode '" + *merged.mode + "'");
    config.policy.mode = *mode;
  }
  if (merged.include_unmapped) config.policy.include_unmapped = *merged.include_unmapped;
  if (merged.require_unique) config.policy.require_unique = *merged.require_unique;
  if (merged.export_format) {
    const auto format = parse_export_format(*merged.export_format);
    if (!format) usage_error("invalid value for --format");
    config.export_format = *format;
  }
  if (merged.workers) config.workers = *merged.workers;
  if (merged.workspace) config.workspace = *merged.workspace;
  if (merged.strip_binaries) config.strip_binaries = *merged.strip_binaries;
  if (merged.strip_tool) config.strip_tool = *merged.strip_tool;
  if (merged.vcs_client) config.acquire.client_command = *merged.vcs_client;
  if (merged.copy_local) config.acquire.copy_local = *merged.copy_local;

  // Cross-field validation.
  if (config.repo.location.empty()) usage_error("missing <REPO> argument");
  if (config.workspace.empty()) usage_error("missing <OUTPUT_DIR> argument");
  if (config.build.command.empty()) usage_error("--build is required");
  if (config.build.timeout_seconds <= 0) usage_error("build timeout must be positive");
  if (config.binaries.paths.empty()) usage_error("--bin is required at least once");
  if (config.workers < 1) usage_error("invalid value for workers");
  if (config.decompiler.kind == "external" && !config.decompiler.command) {
    usage_error("--decompiler external:<CMD> requires a command");
  }
  for (const auto& pattern : config.rules.suffix_patterns) {
    try {
      std::regex re(pattern);
    } catch (const std::regex_error& e) {
      throw Error(errc::config_file_error,
                  "'rules.suffix_patterns': bad regex '" + pattern + "': " + e.what());
    }
  }
  for (const auto& spec : config.extractors) {
    if (spec.language.empty()) usage_error("extractor language must not be empty");
    if (spec.file_patterns.empty()) {
      usage_error("extractor for '" + spec.language + "' has no file patterns");
    }
  }
  return config;
}

}  // namespace

PartialConfig load_config_file(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw Error(errc::config_file_error, e.what());
  }
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(errc::config_file_error, path.string() + " is not a JSON object");
  }

  reject_unknown_keys(doc, "",
                      {"repo", "build", "binaries", "extractors", "decompiler",
                       "rules", "policy", "export_format", "workers", "workspace",
                       "strip_binaries", "strip_tool", "acquire"});

  PartialConfig out;
  if (doc.contains("repo")) {
    const auto& repo = doc["repo"];
    if (!repo.is_object()) config_error("repo", "expected an object");
    reject_unknown_keys(repo, "repo", {"location", "checkout_ref"});
    if (repo.contains("location")) {
      out.repo_location = need_string(repo["location"], "repo.location");
    }
    if (repo.contains("checkout_ref")) {
      out.checkout_ref = need_string(repo["checkout_ref"], "repo.checkout_ref");
    }
  }
  if (doc.contains("build")) {
    const auto& build = doc["build"];
    if (!build.is_object()) config_error("build", "expected an object");
    reject_unknown_keys(build, "build", {"command", "working_dir", "timeout", "env"});
    if (build.contains("command")) {
      out.build_command = need_string(build["command"], "build.command");
    }
    if (build.contains("working_dir")) {
      out.build_working_dir = need_string(build["working_dir"], "build.working_dir");
    }
    if (build.contains("timeout")) {
      out.build_timeout = need_number(build["timeout"], "build.timeout");
      if (*out.build_timeout <= 0) config_error("build.timeout", "must be positive");
    }
    if (build.contains("env")) {
      out.build_env = need_string_array(build["env"], "build.env");
    }
  }
  if (doc.contains("binaries")) {
    const auto& binaries = doc["binaries"];
    if (!binaries.is_object()) config_error("binaries", "expected an object");
    reject_unknown_keys(binaries, "binaries", {"paths", "allow_globs"});
    if (binaries.contains("paths")) {
      out.binary_paths = need_string_array(binaries["paths"], "binaries.paths");
    }
    if (binaries.contains("allow_globs")) {
      out.allow_globs = need_bool(binaries["allow_globs"], "binaries.allow_globs");
    }
  }
  if (doc.contains("extractors")) {
    out.extractors = parse_extractors_array(doc["extractors"]);
  }
  if (doc.contains("decompiler")) {
    out.decompiler = parse_decompiler_object(doc["decompiler"]);
  }
  if (doc.contains("rules")) {
    const auto& rules = doc["rules"];
    if (!rules.is_object()) config_error("rules", "expected an object");
    reject_unknown_keys(rules, "rules",
                        {"strip_leading_underscores", "strip_compiler_suffixes",
                         "suffix_patterns"});
    if (rules.contains("strip_leading_underscores")) {
      out.strip_leading_underscores =
          need_bool(rules["strip_leading_underscores"], "rules.strip_leading_underscores");
    }
    if (rules.contains("strip_compiler_suffixes")) {
      out.strip_compiler_suffixes =
          need_bool(rules["strip_compiler_suffixes"], "rules.strip_compiler_suffixes");
    }
    if (rules.contains("suffix_patterns")) {
      out.suffix_patterns = need_string_array(rules["suffix_patterns"],
                                              "rules.suffix_patterns");
    }
  }
  if (doc.contains("policy")) {
    const auto& policy = doc["policy"];
    if (!policy.is_object()) config_error("policy", "expected an object");
    reject_unknown_keys(policy, "policy",
                        {"mode", "include_unmapped", "require_unique"});
    if (policy.contains("mode")) {
      out.mode = need_string(policy["mode"], "policy.mode");
      if (!parse_mode(*out.mode)) {
        config_error("policy.mode", "must be 'exact' or 'lenient'");
      }
    }
    if (policy.contains("include_unmapped")) {
      out.include_unmapped = need_bool(policy["include_unmapped"],
                                       "policy.include_unmapped");
    }
    if (policy.contains("require_unique")) {
      out.require_unique = need_bool(policy["require_unique"], "policy.require_unique");
    }
  }
  if (doc.contains("export_format")) {
    out.export_format = need_string(doc["export_format"], "export_format");
    if (!parse_export_format(*out.export_format)) {
      config_error("export_format", "must be csv, jsonl, or both");
    }
  }
  if (doc.contains("workers")) {
    const auto& workers = doc["workers"];
    if (!workers.is_number_unsigned() || workers.get<std::uint64_t>() == 0 ||
        workers.get<std::uint64_t>() > 4096) {
      config_error("workers", "must be an integer >= 1");
    }
    out.workers = workers.get<unsigned>();
  }
  if (doc.contains("workspace")) {
    out.workspace = need_string(doc["workspace"], "workspace");
  }
  if (doc.contains("strip_binaries")) {
    out.strip_binaries = need_bool(doc["strip_binaries"], "strip_binaries");
  }
  if (doc.contains("strip_tool")) {
    out.strip_tool = need_string(doc["strip_tool"], "strip_tool");
  }
  if (doc.contains("acquire")) {
    const auto& acquire = doc["acquire"];
    if (!acquire.is_object()) config_error("acquire", "expected an object");
    reject_unknown_keys(acquire, "acquire", {"client_command", "copy_local"});
    if (acquire.contains("client_command")) {
      out.vcs_client = need_string(acquire["client_command"], "acquire.client_command");
    }
    if (acquire.contains("copy_local")) {
      out.copy_local = need_bool(acquire["copy_local"], "acquire.copy_local");
    }
  }
  return out;
}

void merge_config(PartialConfig& base, const PartialConfig& over) {
  auto overlay = [](auto& dst, const auto& src) {
    if (src) dst = src;
  };
  overlay(base.repo_location, over.repo_location);
  overlay(base.checkout_ref, over.checkout_ref);
  overlay(base.build_command, over.build_command);
  overlay(base.build_working_dir, over.build_working_dir);
  overlay(base.build_timeout, over.build_timeout);
  overlay(base.build_env, over.build_env);
  overlay(base.binary_paths, over.binary_paths);
  overlay(base.allow_globs, over.allow_globs);
  overlay(base.extractors, over.extractors);
  overlay(base.decompiler, over.decompiler);
  overlay(base.strip_leading_underscores, over.strip_leading_underscores);
  overlay(base.strip_compiler_suffixes, over.strip_compiler_suffixes);
  overlay(base.suffix_patterns, over.suffix_patterns);
  overlay(base.mode, over.mode);
  overlay(base.include_unmapped, over.include_unmapped);
  overlay(base.require_unique, over.require_unique);
  overlay(base.export_format, over.export_format);
  overlay(base.workers, over.workers);
  overlay(base.workspace, over.workspace);
  overlay(base.strip_binaries, over.strip_binaries);
  overlay(base.strip_tool, over.strip_tool);
  overlay(base.vcs_client, over.vcs_client);
  overlay(base.copy_local, over.copy_local);
}

std::string usage_text() {
  return std::string("codelink ") + std::string(kVersion) + R"(
Builds a repository, extracts source and decompiled functions, aligns them
by symbol name, and exports the pairs as a machine-learning dataset.

USAGE:
  codelink create <REPO> <OUTPUT_DIR> --build <CMD> --bin <PATH>... [options]
  codelink stats <DATASET>
  codelink --help

CREATE OPTIONS:
  --build <CMD>          build command, run through the shell in the repo root
  --bin <PATH>           expected built binary (repeatable; globs allowed)
  --decompiler <SPEC>    elf-symtab (default), external:<CMD>, or fixture
                         (<CMD> runs with {binary} substituted, emitting
                         JSON lines on stdout)
  --extractor <LANG=CMD> external extractor command for files *.<lang>
  --format <F>           csv (default), jsonl, or both
  --workers <N>          worker pool size (default: logical CPUs, capped at 32)
  --lenient              enable namespace-aware lenient matching
  --include-unmapped     keep decompiled functions with no source match
  --require-unique       flag one-to-many matches as ambiguous
  --strip                run the configured strip tool on binaries first
  --config <FILE>        JSON config file (flags override file values;
                         CODELINK_WORKERS sits below the file)

EXIT CODES:
  0 success, 1 fatal pipeline error, 2 usage or configuration error
)";
}

std::string config_to_json(const PipelineConfig& config) {
  ordered_json doc;
  ordered_json repo;
  repo["location"] = config.repo.location;
  if (config.repo.checkout_ref) repo["checkout_ref"] = *config.repo.checkout_ref;
  doc["repo"] = std::move(repo);

  ordered_json build;
  build["command"] = config.build.command;
  build["working_dir"] = config.build.working_dir;
  build["timeout"] = config.build.timeout_seconds;
  build["env"] = config.build.env;
  doc["build"] = std::move(build);

  ordered_json binaries;
  binaries["paths"] = config.binaries.paths;
  binaries["allow_globs"] = config.binaries.allow_globs;
  doc["binaries"] = std::move(binaries);

  ordered_json extractors = ordered_json::array();
  for (const auto& spec : config.extractors) {
    ordered_json e;
    e["language"] = spec.language;
    e["file_patterns"] = spec.file_patterns;
    e["kind"] = spec.kind;
    extractors.push_back(std::move(e));
  }
  doc["extractors"] = std::move(extractors);

  ordered_json decompiler;
  decompiler["kind"] = config.decompiler.kind;
  if (config.decompiler.command) decompiler["command"] = *config.decompiler.command;
  decompiler["timeout"] = config.decompiler.timeout_seconds;
  doc["decompiler"] = std::move(decompiler);

  ordered_json rules;
  rules["strip_leading_underscores"] = config.rules.strip_leading_underscores;
  rules["strip_compiler_suffixes"] = config.rules.strip_compiler_suffixes;
  rules["suffix_patterns"] = config.rules.suffix_patterns;
  doc["rules"] = std::move(rules);

  ordered_json policy;
  policy["mode"] =
      config.policy.mode == MappingPolicy::Mode::exact ? "exact" : "lenient";
  policy["include_unmapped"] = config.policy.include_unmapped;
  policy["require_unique"] = config.policy.require_unique;
  doc["policy"] = std::move(policy);

  doc["export_format"] = export_format_to_string(config.export_format);
  doc["workers"] = config.workers;
  doc["workspace"] = config.workspace.string();
  doc["strip_binaries"] = config.strip_binaries;
  doc["strip_tool"] = config.strip_tool;

  ordered_json acquire;
  acquire["client_command"] = config.acquire.client_command;
  acquire["copy_local"] = config.acquire.copy_local;
  doc["acquire"] = std::move(acquire);

  return doc.dump();
}

CliCommand parse_cli(const std::vector<std::string>& args,
                     const std::map<std::string, std::string>& env) {
  for (const auto& arg : args) {
    if (arg == "--help" || arg == "-h" || arg == "help") return CliHelp{};
  }
  if (args.empty()) {
    usage_error("expected a command ('create' or 'stats')");
  }

  const std::string& command = args.front();
  if (command == "stats") {
    if (args.size() < 2) usage_error("stats: missing <DATASET> argument");
    if (args.size() > 2) usage_error("stats: unexpected argument '" + args[2] + "'");
    return CliStats{fs::path(args[1])};
  }
  if (command != "create") {
    usage_error("unknown command '" + command + "'");
  }

  PartialConfig flags;
  std::vector<ExtractorSpec> flag_extractors;
  std::optional<fs::path> config_file;
  std::vector<std::string> positionals;
  std::vector<std::string> bin_flags;

  auto next_value = [&args](std::size_t& i, const std::string& flag) -> std::string {
    if (i + 1 >= args.size()) usage_error(flag + " requires a value");
    return args[++i];
  };

  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg == "--build") {
      flags.build_command = next_value(i, arg);
    } else if (arg == "--bin") {
      bin_flags.push_back(next_value(i, arg));
    } else if (arg == "--decompiler") {
      const std::string value = next_value(i, arg);
      DecompilerSpec spec;
      if (value == "elf-symtab") {
        spec.kind = "elf-symtab";
      } else if (value == "fixture") {
        spec.kind = "fixture";
      } else if (value.starts_with("external:") && value.size() > 9) {
        spec.kind = "external";
        spec.command = value.substr(9);
      } else {
        usage_error("invalid value '" + value +
                    "' for --decompiler (use elf-symtab, external:<CMD>, or fixture)");
      }
      flags.decompiler = spec;
    } else if (arg == "--extractor") {
      const std::string value = next_value(i, arg);
      const auto eq = value.find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 >= value.size()) {
        usage_error("invalid value '" + value + "' for --extractor (use LANG=CMD)");
      }
      ExtractorSpec spec;
      spec.language = value.substr(0, eq);
      spec.kind = value.substr(eq + 1);
      std::string ext = spec.language;
      std::transform(ext.begin(), ext.end(), ext.begin(),
                     [](unsigned char c) { return std::tolower(c); });
      spec.file_patterns = {"*." + ext};
      flag_extractors.push_back(std::move(spec));
    } else if (arg == "--format") {
      const std::string value = next_value(i, arg);
      if (!parse_export_format(value)) {
        usage_error("invalid value '" + value + "' for --format");
      }
      flags.export_format = value;
    } else if (arg == "--workers") {
      flags.workers = parse_workers(next_value(i, arg), "--workers");
    } else if (arg == "--lenient") {
      flags.mode = "lenient";
    } else if (arg == "--include-unmapped") {
      flags.include_unmapped = true;
    } else if (arg == "--require-unique") {
      flags.require_unique = true;
    } else if (arg == "--strip") {
      flags.strip_binaries = true;
    } else if (arg == "--config") {
      config_file = fs::path(next_value(i, arg));
    } else if (arg.starts_with("-") && arg.size() > 1) {
      usage_error("unknown flag '" + arg + "'");
    } else {
      positionals.push_back(arg);
    }
  }

  if (positionals.size() > 2) {
    usage_error("unexpected argument '" + positionals[2] + "'");
  }
  if (!positionals.empty()) flags.repo_location = positionals[0];
  if (positionals.size() > 1) flags.workspace = positionals[1];
  if (!bin_flags.empty()) flags.binary_paths = bin_flags;

  // Precedence: defaults < CODELINK_WORKERS < config file < flags.
  PartialConfig merged;
  if (auto it = env.find("CODELINK_WORKERS"); it != env.end()) {
    merged.workers = parse_workers(it->second, "CODELINK_WORKERS");
  }
  if (config_file) {
    merge_config(merged, load_config_file(*config_file));
  }
  merge_config(merged, flags);

  return CliCreate{finalize(merged, flag_extractors)};
}

CliCommand parse_cli(const std::vector<std::string>& args) {
  std::map<std::string, std::string> env;
  if (const char* workers = std::getenv("CODELINK_WORKERS")) {
    env.emplace("CODELINK_WORKERS", workers);
  }
  return parse_cli(args, env);
}

}  // namespace codelink
