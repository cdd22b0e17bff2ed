#pragma once

#include <filesystem>

#ifndef CODELINK_FIXTURES_DIR
#define CODELINK_FIXTURES_DIR "tests/fixtures"
#endif

#ifndef CODELINK_CLI_PATH
#define CODELINK_CLI_PATH "codelink"
#endif

namespace testsupport {

inline std::filesystem::path fixtures_dir() {
  return std::filesystem::path(CODELINK_FIXTURES_DIR);
}

inline std::filesystem::path cli_path() {
  return std::filesystem::path(CODELINK_CLI_PATH);
}

/// Copies the bundled demo repository into `dest_base` so builds never
/// touch the checked-in fixture tree.
inline std::filesystem::path copy_demo_repo(const std::filesystem::path& dest_base) {
  const auto src = fixtures_dir() / "demo-c-repo";
  const auto dest = dest_base / "demo-c-repo";
  std::filesystem::create_directories(dest_base);
  std::filesystem::copy(src, dest, std::filesystem::copy_options::recursive);
  return dest;
}

}  // namespace testsupport
