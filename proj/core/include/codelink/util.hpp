#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace codelink {

/// Reads a whole file as raw bytes. Throws Error(errc::io_error).
std::string read_file(const std::filesystem::path& path);

/// Writes bytes, creating parent directories as needed. Throws on failure.
void write_file(const std::filesystem::path& path, std::string_view data);

bool is_valid_utf8(std::string_view bytes);

/// Maps every byte to the equivalent Unicode code point (U+0000..U+00FF).
std::string latin1_to_utf8(std::string_view bytes);

/// Returns the input if it is valid UTF-8, otherwise the Latin-1 decoding.
std::string ensure_utf8(std::string_view bytes);

/// Shell-style glob match (`*`, `?`, `[...]`), case-sensitive. When the
/// pattern contains a '/', it is matched against the full relative path and
/// '*' does not cross path separators; otherwise it is matched against the
/// final path component.
bool glob_match(std::string_view pattern, std::string_view rel_path);

bool has_glob_chars(std::string_view s);

/// Uppercase hex dump, bytes space-separated, wrapped at 16 bytes per line.
std::string hex_dump(std::string_view bytes);

/// Current UTC time as RFC 3339 (e.g. "2025-03-14T09:26:53Z").
std::string rfc3339_utc_now();

/// Single-quotes a string for POSIX sh.
std::string shell_quote(std::string_view s);

/// Repo-relative path with '/' separators; falls back to the absolute path
/// if `p` is not under `root`.
std::string relative_to(const std::filesystem::path& p,
                        const std::filesystem::path& root);

std::vector<std::string> split_ws(std::string_view s);

}  // namespace codelink
