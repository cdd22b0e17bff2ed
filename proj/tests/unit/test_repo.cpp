#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "codelink/error.hpp"
#include "codelink/repo.hpp"
#include "codelink/subprocess.hpp"
#include "codelink/util.hpp"
#include "support/temp_dir.hpp"

using namespace codelink;
using testsupport::TempDir;
namespace fs = std::filesystem;

namespace {

errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return errc::io_error;
}

// A bare repository with one commit holding hello.c, served over file://.
fs::path make_bare_fixture(const fs::path& base) {
  const fs::path work = base / "seed";
  const fs::path bare = base / "fixture.git";
  fs::create_directories(work);
  testsupport::write_text(work / "hello.c", "int hello(void) { return 7; }\n");

  auto git = [&](const std::vector<std::string>& args, const fs::path& cwd) {
    RunOptions options;
    options.cwd = cwd;
    options.stderr_mode = StdioMode::to_string;
    std::vector<std::string> argv = {"git"};
    argv.insert(argv.end(), args.begin(), args.end());
    const auto result = run_argv(argv, options);
    REQUIRE(result.exit_code == 0);
  };
  git({"init", "-q", "."}, work);
  git({"-c", "user.email=test@example.com", "-c", "user.name=test", "add", "."}, work);
  git({"-c", "user.email=test@example.com", "-c", "user.name=test", "commit", "-q",
       "-m", "seed"},
      work);
  git({"clone", "-q", "--bare", work.string(), bare.string()}, base);
  return bare;
}

}  // namespace

TEST_CASE("remote location detection") {
  CHECK(is_remote_location("https://example.com/repo.git"));
  CHECK(is_remote_location("git://example.com/repo"));
  CHECK(is_remote_location("ssh://host/path"));
  CHECK(is_remote_location("file:///tmp/repo.git"));
  CHECK(is_remote_location("user@host:path/repo.git"));
  CHECK_FALSE(is_remote_location("/tmp/some/dir"));
  CHECK_FALSE(is_remote_location("relative/dir"));
  CHECK_FALSE(is_remote_location("ftp://example.com/repo"));  // unsupported scheme
}

TEST_CASE("acquire: unsupported scheme is SourceNotFound, not a clone attempt") {
  TempDir tmp;
  CHECK(code_of([&] {
          acquire({"ftp://example.com/repo.git", std::nullopt}, tmp.path / "ws");
        }) == errc::source_not_found);
}

TEST_CASE("acquire uses local directories in place and is idempotent") {
  TempDir tmp;
  const fs::path repo = tmp.path / "demo";
  fs::create_directories(repo);
  testsupport::write_text(repo / "a.c", "int f(void) { return 0; }\n");

  const auto first = acquire({repo.string(), std::nullopt}, tmp.path / "ws");
  const auto second = acquire({repo.string(), std::nullopt}, tmp.path / "ws");
  CHECK(first == second);
  CHECK(fs::equivalent(first, repo));
  // No mutation: the workspace stays empty for local sources.
  CHECK_FALSE(fs::exists(tmp.path / "ws" / "demo"));
}

TEST_CASE("acquire copies local sources when requested") {
  TempDir tmp;
  const fs::path repo = tmp.path / "demo";
  fs::create_directories(repo / "src");
  testsupport::write_text(repo / "src" / "a.c", "int f(void) { return 0; }\n");

  AcquireOptions options;
  options.copy_local = true;
  const auto root = acquire({repo.string(), std::nullopt}, tmp.path / "ws", options);
  CHECK(root != repo);
  CHECK(fs::exists(root / "src" / "a.c"));
}

TEST_CASE("acquire: missing local path is SourceNotFound") {
  TempDir tmp;
  CHECK(code_of([&] {
          acquire({(tmp.path / "nope").string(), std::nullopt}, tmp.path / "ws");
        }) == errc::source_not_found);
}

TEST_CASE("acquire clones a remote url into the workspace") {
  TempDir tmp;
  const auto bare = make_bare_fixture(tmp.path);
  const fs::path workspace = tmp.path / "ws";

  RepoSource source{"file://" + bare.string(), std::nullopt};
  const auto root = acquire(source, workspace);
  CHECK(root == workspace / "fixture");
  CHECK(fs::is_directory(root / ".git"));
  CHECK(fs::exists(root / "hello.c"));
}

TEST_CASE("acquire checks out a requested ref and flags unknown refs") {
  TempDir tmp;
  const auto bare = make_bare_fixture(tmp.path);

  RepoSource good{"file://" + bare.string(), "master"};
  bool master_ok = true;
  try {
    acquire(good, tmp.path / "ws1");
  } catch (const Error&) {
    // Default branch naming differs across git versions; fall back to main.
    master_ok = false;
  }
  if (!master_ok) {
    RepoSource main_ref{"file://" + bare.string(), "main"};
    CHECK_NOTHROW(acquire(main_ref, tmp.path / "ws2"));
  }

  RepoSource bad{"file://" + bare.string(), "no-such-ref"};
  CHECK(code_of([&] { acquire(bad, tmp.path / "ws3"); }) == errc::ref_not_found);
}

TEST_CASE("acquire: clone failure captures stderr") {
  TempDir tmp;
  RepoSource source{"file://" + (tmp.path / "missing.git").string(), std::nullopt};
  CHECK(code_of([&] { acquire(source, tmp.path / "ws"); }) == errc::clone_failed);
  CHECK(fs::exists(tmp.path / "ws" / "logs" / "clone.stderr"));
}

TEST_CASE("execute_build runs make and leaves logs behind") {
  TempDir tmp;
  const fs::path repo = tmp.path / "repo";
  fs::create_directories(repo);
  testsupport::write_text(repo / "Makefile",
                          "all:\n\techo building\n\ttouch out.bin\n");

  const auto report = execute_build(repo, {"make", ".", 60, {}}, tmp.path / "ws");
  CHECK(report.status == BuildStatus::succeeded);
  CHECK(report.exit_code == 0);
  CHECK(report.duration_seconds >= 0.0);
  CHECK(fs::exists(repo / "out.bin"));
  CHECK(fs::exists(report.stdout_path));
  CHECK(fs::exists(report.stderr_path));
  CHECK(testsupport::read_text(report.stdout_path).find("building") != std::string::npos);
}

TEST_CASE("execute_build: failing command reports its exit code") {
  TempDir tmp;
  const fs::path repo = tmp.path / "repo";
  fs::create_directories(repo);
  const auto report = execute_build(repo, {"false", ".", 60, {}}, tmp.path / "ws");
  CHECK(report.status == BuildStatus::failed);
  CHECK(report.exit_code == 1);
  CHECK(fs::exists(report.stdout_path));
  CHECK(fs::exists(report.stderr_path));
}

TEST_CASE("execute_build: timeout kills the build after ~timeout seconds") {
  TempDir tmp;
  const fs::path repo = tmp.path / "repo";
  fs::create_directories(repo);
  const auto report = execute_build(repo, {"sleep 10", ".", 0.5, {}}, tmp.path / "ws");
  CHECK(report.status == BuildStatus::timed_out);
  CHECK(report.duration_seconds >= 0.4);
  CHECK(report.duration_seconds < 5.0);
  CHECK(fs::exists(report.stdout_path));
  CHECK(fs::exists(report.stderr_path));
}

TEST_CASE("execute_build applies env overrides and working_dir") {
  TempDir tmp;
  const fs::path repo = tmp.path / "repo";
  fs::create_directories(repo / "sub");
  BuildSpec spec;
  spec.command = "printf '%s' \"$CODELINK_BUILD_FLAG\" > flag.txt";
  spec.working_dir = "sub";
  spec.env = {"CODELINK_BUILD_FLAG=on"};
  const auto report = execute_build(repo, spec, tmp.path / "ws");
  CHECK(report.status == BuildStatus::succeeded);
  CHECK(testsupport::read_text(repo / "sub" / "flag.txt") == "on");
}

TEST_CASE("resolve_binaries returns lexicographic repo-relative order") {
  TempDir tmp;
  const fs::path repo = tmp.path / "repo";
  fs::create_directories(repo);
  testsupport::write_text(repo / "tool", "x");
  testsupport::write_text(repo / "main_app", "x");

  const auto resolved = resolve_binaries(repo, {{"tool", "main_app"}, true});
  REQUIRE(resolved.size() == 2);
  CHECK(resolved[0].filename() == "main_app");
  CHECK(resolved[1].filename() == "tool");
}

TEST_CASE("resolve_binaries expands globs and deduplicates") {
  TempDir tmp;
  const fs::path repo = tmp.path / "repo";
  fs::create_directories(repo / "bin");
  testsupport::write_text(repo / "bin" / "libc.so", "x");
  testsupport::write_text(repo / "bin" / "liba.so", "x");
  testsupport::write_text(repo / "bin" / "libb.so", "x");
  testsupport::write_text(repo / "bin" / "notes.txt", "x");

  const auto resolved =
      resolve_binaries(repo, {{"bin/*.so", "bin/liba.so"}, true});
  REQUIRE(resolved.size() == 3);
  CHECK(resolved[0].filename() == "liba.so");
  CHECK(resolved[1].filename() == "libb.so");
  CHECK(resolved[2].filename() == "libc.so");
}

TEST_CASE("resolve_binaries names every unresolved target") {
  TempDir tmp;
  const fs::path repo = tmp.path / "repo";
  fs::create_directories(repo);
  testsupport::write_text(repo / "present", "x");
  try {
    resolve_binaries(repo, {{"present", "missing", "also-missing-*"}, true});
    FAIL("expected BinaryMissing");
  } catch (const Error& e) {
    CHECK(e.code() == errc::binary_missing);
    const std::string what = e.what();
    CHECK(what.find("missing") != std::string::npos);
    CHECK(what.find("also-missing-*") != std::string::npos);
  }
}

TEST_CASE("resolve_binaries treats glob chars literally when globs disabled") {
  TempDir tmp;
  const fs::path repo = tmp.path / "repo";
  fs::create_directories(repo);
  testsupport::write_text(repo / "lib*.so", "x");  // literal asterisk in name
  const auto resolved = resolve_binaries(repo, {{"lib*.so"}, false});
  REQUIRE(resolved.size() == 1);
}
