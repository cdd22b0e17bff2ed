#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace codelink {

/// Where a repository comes from: an existing local directory or a remote
/// URL understood by the version-control client (https://, http://, git://,
/// ssh://, file://, or scp-like user@host:path).
struct RepoSource {
  std::string location;
  std::optional<std::string> checkout_ref;
};

struct BuildSpec {
  std::string command;
  std::string working_dir = ".";
  double timeout_seconds = 3600;
  std::vector<std::string> env;  // KEY=VALUE overrides
};

struct BinaryTargets {
  std::vector<std::string> paths;  // repo-relative, may contain globs
  bool allow_globs = true;
};

enum class BuildStatus { succeeded, failed, timed_out };

struct BuildReport {
  BuildStatus status = BuildStatus::failed;
  int exit_code = -1;
  double duration_seconds = 0;
  std::filesystem::path stdout_path;
  std::filesystem::path stderr_path;
};

struct AcquireOptions {
  std::string client_command = "git";
  bool copy_local = false;
  double clone_timeout_seconds = 3600;
};

bool is_remote_location(const std::string& location);

/// Returns the repository root. Local directories are used in place (or
/// copied into the workspace when `copy_local` is set); remote URLs are
/// cloned into the workspace and `checkout_ref` is checked out if present.
/// For local sources `checkout_ref` is ignored: the source tree is never
/// mutated. Throws SourceNotFound / CloneFailed / RefNotFound.
std::filesystem::path acquire(const RepoSource& source,
                              const std::filesystem::path& workspace,
                              const AcquireOptions& options = {});

/// Runs the build command through the platform shell in
/// repo_root/working_dir. stdout/stderr are captured bit-exactly into
/// <workspace>/logs/build.stdout and <workspace>/logs/build.stderr; those
/// files exist after return even on failure or timeout. Failure and timeout
/// are reported through the status, not thrown.
BuildReport execute_build(const std::filesystem::path& repo_root,
                          const BuildSpec& spec,
                          const std::filesystem::path& workspace);

/// Resolves the target list against the built tree. Globs (when allowed)
/// must match at least one regular file; literal paths must be regular
/// files. Output is deduplicated and ordered lexicographically by
/// repo-relative path. Throws BinaryMissing naming every unresolved entry.
std::vector<std::filesystem::path> resolve_binaries(
    const std::filesystem::path& repo_root, const BinaryTargets& targets);

}  // namespace codelink
