#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace codelink {

enum class StdioMode { devnull, to_file, to_string };

struct RunOptions {
  std::filesystem::path cwd;          // empty = inherit
  std::vector<std::string> env;       // KEY=VALUE overrides for the child
  double timeout_seconds = 0;         // 0 = no timeout
  StdioMode stdout_mode = StdioMode::devnull;
  StdioMode stderr_mode = StdioMode::devnull;
  std::filesystem::path stdout_file;
  std::filesystem::path stderr_file;
};

struct RunResult {
  int exit_code = -1;     // 128+signal when terminated by a signal
  bool timed_out = false;
  double duration_seconds = 0;
  std::string stdout_text;
  std::string stderr_text;
};

/// Runs `/bin/sh -c command`. The child is placed in its own process group
/// and the whole group is killed on timeout. Throws Error(errc::io_error)
/// only for setup failures (fork, redirect targets); a failing or timed-out
/// child is reported through the result.
RunResult run_shell(const std::string& command, const RunOptions& options);

/// Same, but exec's argv[0] directly (no shell).
RunResult run_argv(const std::vector<std::string>& argv,
                   const RunOptions& options);

}  // namespace codelink
