#include "codelink/repo.hpp"

#include <algorithm>
#include <regex>

#include "codelink/error.hpp"
#include "codelink/subprocess.hpp"
#include "codelink/util.hpp"

namespace fs = std::filesystem;

namespace codelink {
namespace {

bool has_url_scheme(const std::string& location) {
  static const char* kSchemes[] = {"https://", "http://", "git://", "ssh://",
                                   "file://"};
  for (const char* s : kSchemes) {
    if (location.starts_with(s)) return true;
  }
  return false;
}

bool is_scp_like(const std::string& location) {
  // user@host:path — no slash before the '@', a ':' after the host part.
  static const std::regex re(R"(^[A-Za-z0-9._~-]+@[A-Za-z0-9._-]+:.+$)");
  return std::regex_match(location, re);
}

// "https://example.com/repo.git" -> "repo"
std::string repo_name_from_url(const std::string& url) {
  std::string s = url;
  while (!s.empty() && (s.back() == '/' || s.back() == '\\')) s.pop_back();
  auto slash = s.find_last_of("/:");
  std::string name = slash == std::string::npos ? s : s.substr(slash + 1);
  if (name.ends_with(".git")) name.resize(name.size() - 4);
  if (name.empty()) name = "repo";
  return name;
}

std::string tail_of(const std::string& text, std::size_t max_len = 400) {
  if (text.size() <= max_len) return text;
  return "..." + text.substr(text.size() - max_len);
}

}  // namespace

bool is_remote_location(const std::string& location) {
  return has_url_scheme(location) || is_scp_like(location);
}

fs::path acquire(const RepoSource& source, const fs::path& workspace,
                 const AcquireOptions& options) {
  std::error_code ec;
  const fs::path as_path(source.location);
  if (fs::is_directory(as_path, ec)) {
    const fs::path canonical = fs::weakly_canonical(as_path, ec);
    const fs::path root = ec ? fs::absolute(as_path) : canonical;
    if (!options.copy_local) {
      return root;
    }
    const fs::path dest = workspace / "src" / root.filename();
    fs::create_directories(dest.parent_path());
    fs::copy(root, dest,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    return dest;
  }

  if (!is_remote_location(source.location)) {
    throw Error(errc::source_not_found,
                "'" + source.location + "' is not an existing directory or a "
                "recognized remote URL");
  }

  const fs::path dest = workspace / repo_name_from_url(source.location);
  fs::create_directories(workspace);

  RunOptions run;
  run.timeout_seconds = options.clone_timeout_seconds;
  run.stdout_mode = StdioMode::to_file;
  run.stderr_mode = StdioMode::to_string;
  run.stdout_file = workspace / "logs" / "clone.stdout";
  const auto clone = run_argv(
      {options.client_command, "clone", source.location, dest.string()}, run);
  write_file(workspace / "logs" / "clone.stderr", clone.stderr_text);
  if (clone.timed_out || clone.exit_code != 0) {
    throw Error(errc::clone_failed,
                "'" + source.location + "' (exit " + std::to_string(clone.exit_code) +
                    "): " + tail_of(clone.stderr_text));
  }

  if (source.checkout_ref) {
    RunOptions co;
    co.cwd = dest;
    co.timeout_seconds = options.clone_timeout_seconds;
    co.stderr_mode = StdioMode::to_string;
    const auto checkout =
        run_argv({options.client_command, "checkout", *source.checkout_ref}, co);
    if (checkout.timed_out || checkout.exit_code != 0) {
      throw Error(errc::ref_not_found,
                  "'" + *source.checkout_ref + "': " + tail_of(checkout.stderr_text));
    }
  }
  return dest;
}

BuildReport execute_build(const fs::path& repo_root, const BuildSpec& spec,
                          const fs::path& workspace) {
  if (spec.command.empty()) {
    throw std::invalid_argument("build command is empty");
  }
  if (spec.timeout_seconds <= 0) {
    throw std::invalid_argument("build timeout must be positive");
  }
  std::error_code ec;
  if (!fs::is_directory(repo_root, ec)) {
    throw Error(errc::io_error, "repo root " + repo_root.string() + " does not exist");
  }

  BuildReport report;
  report.stdout_path = workspace / "logs" / "build.stdout";
  report.stderr_path = workspace / "logs" / "build.stderr";

  RunOptions run;
  run.cwd = repo_root / spec.working_dir;
  run.env = spec.env;
  run.timeout_seconds = spec.timeout_seconds;
  run.stdout_mode = StdioMode::to_file;
  run.stderr_mode = StdioMode::to_file;
  run.stdout_file = report.stdout_path;
  run.stderr_file = report.stderr_path;

  const auto result = run_shell(spec.command, run);
  report.exit_code = result.exit_code;
  report.duration_seconds = result.duration_seconds;
  report.status = result.timed_out ? BuildStatus::timed_out
                  : result.exit_code == 0 ? BuildStatus::succeeded
                                          : BuildStatus::failed;
  return report;
}

std::vector<fs::path> resolve_binaries(const fs::path& repo_root,
                                       const BinaryTargets& targets) {
  if (targets.paths.empty()) {
    throw std::invalid_argument("binary target list is empty");
  }

  std::vector<std::string> matched_rel;
  std::vector<std::string> unresolved;

  std::vector<std::string> all_files;  // lazily filled for glob targets
  auto list_files = [&]() -> const std::vector<std::string>& {
    if (all_files.empty()) {
      std::error_code ec;
      for (fs::recursive_directory_iterator it(
               repo_root, fs::directory_options::skip_permission_denied, ec), end;
           it != end; it.increment(ec)) {
        if (ec) break;
        if (it->is_regular_file(ec)) {
          all_files.push_back(relative_to(it->path(), repo_root));
        }
      }
    }
    return all_files;
  };

  for (const auto& target : targets.paths) {
    if (targets.allow_globs && has_glob_chars(target)) {
      bool any = false;
      for (const auto& rel : list_files()) {
        if (glob_match(target, rel)) {
          matched_rel.push_back(rel);
          any = true;
        }
      }
      if (!any) unresolved.push_back(target);
    } else {
      std::error_code ec;
      const fs::path abs = repo_root / target;
      if (fs::is_regular_file(abs, ec)) {
        matched_rel.push_back(fs::path(target).generic_string());
      } else {
        unresolved.push_back(target);
      }
    }
  }

  if (!unresolved.empty()) {
    std::string msg;
    for (const auto& u : unresolved) {
      if (!msg.empty()) msg += ", ";
      msg += u;
    }
    throw Error(errc::binary_missing, msg);
  }

  std::sort(matched_rel.begin(), matched_rel.end());
  matched_rel.erase(std::unique(matched_rel.begin(), matched_rel.end()),
                    matched_rel.end());

  std::vector<fs::path> out;
  out.reserve(matched_rel.size());
  for (const auto& rel : matched_rel) {
    out.push_back(repo_root / rel);
  }
  return out;
}

}  // namespace codelink
