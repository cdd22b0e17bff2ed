#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "codelink/error.hpp"

namespace codelink {

/// One function recovered from a binary. `assembly` is disassembly text
/// when a real decompiler backend supplies it; the built-in symbol-table
/// backend emits an uppercase hex dump of the function bytes instead (a
/// documented degraded representation). `decompiled_definition` is pseudo-C
/// text and is empty for the symbol-table backend.
struct DecompiledFunction {
  std::string decompiled_uid;  // "<bin>::<0xaddress>::<name>"
  std::string name;
  std::uint64_t address = 0;
  std::string architecture;
  std::string bin;  // repo-relative path of the binary
  std::string assembly;
  std::string decompiled_definition;

  friend bool operator==(const DecompiledFunction&,
                         const DecompiledFunction&) = default;
};

struct DecompilerSpec {
  std::string kind = "elf-symtab";  // "elf-symtab" | "external" | "fixture"
  std::optional<std::string> command;  // required for "external"; {binary} substituted
  double timeout_seconds = 1800;       // per binary
};

/// True iff `name` is empty or matches the placeholder pattern decompilers
/// assign to unnamed functions: ^(FUN|SUB|LAB|thunk_FUN)_[0-9a-fA-F]{6,16}$.
bool is_placeholder_name(std::string_view name);

/// Parses an ELF image (32/64-bit, either endianness) and returns one
/// record per STT_FUNC symbol with non-zero size and non-empty name, read
/// from .symtab (falling back to .dynsym). Bounds-checked throughout: never
/// reads past the buffer. Throws NotAnElf / MalformedElf / NoSymbols.
std::vector<DecompiledFunction> read_elf_functions(std::string_view binary_bytes,
                                                   const std::string& bin_rel);

/// Runs an external decompiler: `{binary}` in spec.command is replaced with
/// the absolute binary path, the command runs under the shell, and stdout
/// is parsed as JSON lines {"name","address","architecture","assembly",
/// "definition"}. stderr is preserved under <workspace>/logs/ when a
/// workspace is given. Throws DecompilerTimeout / DecompilerFailed /
/// ProtocolError (with the offending line number and key).
std::vector<DecompiledFunction> run_external_decompiler(
    const DecompilerSpec& spec, const std::filesystem::path& binary_path,
    const std::string& bin_rel, const std::filesystem::path& workspace = {});

/// Fixture backend: reads the sidecar file `<binary>.dec.jsonl` carrying
/// the same JSON-lines schema as the external protocol. Address 0 is
/// permitted here (records that declare no address).
std::vector<DecompiledFunction> read_fixture_sidecar(
    const std::filesystem::path& binary_path, const std::string& bin_rel);

/// Dispatches one binary to the backend selected by `spec`.
std::vector<DecompiledFunction> decompile_binary(
    const DecompilerSpec& spec, const std::filesystem::path& binary_path,
    const std::string& bin_rel, const std::filesystem::path& workspace = {});

struct DecompileResult {
  std::vector<DecompiledFunction> functions;  // ordered by (bin, address, name)
  std::vector<ItemError> errors;  // hard per-binary failures (skipped binaries)
  std::vector<ItemError> notes;   // e.g. stripped binaries with no symbols
};

/// Sequential driver over all binaries: per-binary failures are reported
/// and skipped; external-backend failures are retried once. Throws
/// AllBinariesFailed when every binary failed hard.
DecompileResult decompile_all(const std::vector<std::filesystem::path>& binaries,
                              const std::filesystem::path& repo_root,
                              const DecompilerSpec& spec,
                              const std::filesystem::path& workspace = {});

/// Shared ordering + UID assignment used by both the sequential driver and
/// the parallel pipeline: sorts by (bin, address, name) and stamps
/// decompiled_uid.
void finalize_decompiled(std::vector<DecompiledFunction>& functions);

}  // namespace codelink
