#include <algorithm>
#include <cstdio>
#include <string>
#include <unordered_set>

#include "codelink/binary.hpp"
#include "codelink/subprocess.hpp"
#include "codelink/util.hpp"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace codelink {
namespace {

bool is_hex_digit(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

std::string substitute_binary(const std::string& command_template,
                              const std::string& binary_path) {
  static constexpr std::string_view kToken = "{binary}";
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const auto hit = command_template.find(kToken, pos);
    if (hit == std::string::npos) {
      out += command_template.substr(pos);
      return out;
    }
    out += command_template.substr(pos, hit - pos);
    out += binary_path;
    pos = hit + kToken.size();
  }
}

std::string log_name_for(const std::string& bin_rel) {
  std::string name = bin_rel;
  std::replace(name.begin(), name.end(), '/', '_');
  return name;
}

std::string uid_for(const DecompiledFunction& fn) {
  char addr[32];
  std::snprintf(addr, sizeof addr, "0x%llx",
                static_cast<unsigned long long>(fn.address));
  return fn.bin + "::" + addr + "::" + fn.name;
}

/// Parses the JSON-lines decompiler protocol. `min_address` is 1 for real
/// backends and 0 for the fixture backend.
std::vector<DecompiledFunction> parse_protocol(std::string_view text,
                                               const std::string& bin_rel,
                                               std::uint64_t min_address) {
  std::vector<DecompiledFunction> out;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;

    const std::string where = "line " + std::to_string(line_no);
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw Error(errc::protocol_error, where + " is not valid JSON");
    }
    for (const char* key : {"name", "address", "architecture", "assembly", "definition"}) {
      if (!obj.contains(key)) {
        throw Error(errc::protocol_error, where + " missing key '" + key + "'");
      }
    }
    if (!obj["name"].is_string() || !obj["architecture"].is_string() ||
        !obj["assembly"].is_string() || !obj["definition"].is_string()) {
      throw Error(errc::protocol_error, where + " has a mistyped string field");
    }
    if (!obj["address"].is_number_integer() && !obj["address"].is_number_unsigned()) {
      throw Error(errc::protocol_error, where + " key 'address' must be an integer");
    }
    std::uint64_t address = 0;
    if (obj["address"].is_number_unsigned()) {
      address = obj["address"].get<std::uint64_t>();
    } else {
      const auto signed_addr = obj["address"].get<std::int64_t>();
      if (signed_addr < 0) {
        throw Error(errc::protocol_error, where + " key 'address' must be >= 0");
      }
      address = static_cast<std::uint64_t>(signed_addr);
    }
    if (address < min_address) {
      throw Error(errc::protocol_error,
                  where + " key 'address' must be >= " + std::to_string(min_address));
    }

    DecompiledFunction fn;
    fn.name = obj["name"].get<std::string>();
    fn.address = address;
    fn.architecture = obj["architecture"].get<std::string>();
    fn.assembly = obj["assembly"].get<std::string>();
    fn.decompiled_definition = obj["definition"].get<std::string>();
    fn.bin = bin_rel;
    fn.decompiled_uid = uid_for(fn);
    if (!seen.insert(fn.decompiled_uid).second) {
      throw Error(errc::protocol_error,
                  where + " repeats function (address, name) '" + fn.decompiled_uid + "'");
    }
    out.push_back(std::move(fn));
  }
  return out;
}

}  // namespace

bool is_placeholder_name(std::string_view name) {
  if (name.empty()) return true;
  static constexpr std::string_view kPrefixes[] = {"thunk_FUN_", "FUN_", "SUB_", "LAB_"};
  for (const auto prefix : kPrefixes) {
    if (!name.starts_with(prefix)) continue;
    const std::string_view tail = name.substr(prefix.size());
    if (tail.size() < 6 || tail.size() > 16) continue;
    if (std::all_of(tail.begin(), tail.end(), is_hex_digit)) return true;
  }
  return false;
}

std::vector<DecompiledFunction> run_external_decompiler(const DecompilerSpec& spec,
                                                        const fs::path& binary_path,
                                                        const std::string& bin_rel,
                                                        const fs::path& workspace) {
  if (spec.kind != "external" || !spec.command) {
    throw std::invalid_argument("decompiler spec is not an external command");
  }
  const std::string command = substitute_binary(*spec.command, binary_path.string());

  RunOptions run;
  run.timeout_seconds = spec.timeout_seconds;
  run.stdout_mode = StdioMode::to_string;
  if (workspace.empty()) {
    run.stderr_mode = StdioMode::to_string;
  } else {
    run.stderr_mode = StdioMode::to_file;
    run.stderr_file =
        workspace / "logs" / ("decompile." + log_name_for(bin_rel) + ".stderr");
  }

  const auto result = run_shell(command, run);
  if (result.timed_out) {
    throw Error(errc::decompiler_timeout,
                bin_rel + " after " + std::to_string(spec.timeout_seconds) + "s");
  }
  if (result.exit_code != 0) {
    std::string detail = bin_rel + " exited with code " + std::to_string(result.exit_code);
    if (!run.stderr_file.empty()) {
      detail += " (stderr: " + run.stderr_file.string() + ")";
    }
    throw Error(errc::decompiler_failed, detail);
  }
  return parse_protocol(result.stdout_text, bin_rel, 1);
}

std::vector<DecompiledFunction> read_fixture_sidecar(const fs::path& binary_path,
                                                     const std::string& bin_rel) {
  const fs::path sidecar = binary_path.string() + ".dec.jsonl";
  std::error_code ec;
  if (!fs::is_regular_file(sidecar, ec)) {
    throw Error(errc::decompiler_failed, "sidecar " + sidecar.string() + " not found");
  }
  return parse_protocol(read_file(sidecar), bin_rel, 0);
}

std::vector<DecompiledFunction> decompile_binary(const DecompilerSpec& spec,
                                                 const fs::path& binary_path,
                                                 const std::string& bin_rel,
                                                 const fs::path& workspace) {
  if (spec.kind == "elf-symtab") {
    return read_elf_functions(read_file(binary_path), bin_rel);
  }
  if (spec.kind == "external") {
    return run_external_decompiler(spec, binary_path, bin_rel, workspace);
  }
  if (spec.kind == "fixture") {
    return read_fixture_sidecar(binary_path, bin_rel);
  }
  throw std::invalid_argument("unknown decompiler kind '" + spec.kind + "'");
}

void finalize_decompiled(std::vector<DecompiledFunction>& functions) {
  for (auto& fn : functions) {
    fn.decompiled_uid = uid_for(fn);
  }
  std::sort(functions.begin(), functions.end(),
            [](const DecompiledFunction& a, const DecompiledFunction& b) {
              if (a.bin != b.bin) return a.bin < b.bin;
              if (a.address != b.address) return a.address < b.address;
              return a.name < b.name;
            });
}

DecompileResult decompile_all(const std::vector<fs::path>& binaries,
                              const fs::path& repo_root, const DecompilerSpec& spec,
                              const fs::path& workspace) {
  if (binaries.empty()) {
    throw std::invalid_argument("binary list is empty");
  }

  DecompileResult out;
  std::size_t hard_failures = 0;
  for (const auto& bin : binaries) {
    const std::string rel = relative_to(bin, repo_root);
    const unsigned attempts = spec.kind == "external" ? 2 : 1;
    for (unsigned attempt = 1; attempt <= attempts; ++attempt) {
      try {
        auto fns = decompile_binary(spec, bin, rel, workspace);
        out.functions.insert(out.functions.end(),
                             std::make_move_iterator(fns.begin()),
                             std::make_move_iterator(fns.end()));
        break;
      } catch (const Error& e) {
        if (e.code() == errc::no_symbols) {
          // Stripped binary: an expected condition, not a failure.
          out.notes.push_back({rel, e.what()});
          break;
        }
        if (attempt < attempts) continue;
        out.errors.push_back({rel, e.what()});
        ++hard_failures;
      }
    }
  }

  if (hard_failures == binaries.size()) {
    throw Error(errc::all_binaries_failed,
                "all " + std::to_string(binaries.size()) + " binaries failed");
  }
  finalize_decompiled(out.functions);
  return out;
}

}  // namespace codelink
