#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codelink {

/// Failure categories surfaced by the pipeline. Fatal conditions are thrown
/// as Error; per-file and per-binary conditions are collected as ItemError
/// entries in the run report instead.
enum class errc {
  source_not_found,
  clone_failed,
  ref_not_found,
  build_timeout,
  build_failed,
  binary_missing,
  unknown_builtin,
  external_command_not_found,
  no_extractors_registered,
  scan_error,
  not_an_elf,
  malformed_elf,
  no_symbols,
  decompiler_timeout,
  decompiler_failed,
  protocol_error,
  all_binaries_failed,
  duplicate_uid,
  schema_error,
  io_error,
  usage_error,
  config_file_error,
  cycle_detected,
};

std::string_view to_string(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

/// One non-fatal problem tied to a single work item (a source file, a
/// binary, a dataset line, ...).
struct ItemError {
  std::string item;
  std::string message;

  friend bool operator==(const ItemError&, const ItemError&) = default;
};

}  // namespace codelink
