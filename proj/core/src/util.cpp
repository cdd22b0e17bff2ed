#include "codelink/util.hpp"

#include <fnmatch.h>

#include <cctype>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "codelink/error.hpp"

namespace codelink {

std::string_view to_string(errc code) {
  switch (code) {
    case errc::source_not_found: return "SourceNotFound";
    case errc::clone_failed: return "CloneFailed";
    case errc::ref_not_found: return "RefNotFound";
    case errc::build_timeout: return "BuildTimeout";
    case errc::build_failed: return "BuildFailed";
    case errc::binary_missing: return "BinaryMissing";
    case errc::unknown_builtin: return "UnknownBuiltin";
    case errc::external_command_not_found: return "ExternalCommandNotFound";
    case errc::no_extractors_registered: return "NoExtractorsRegistered";
    case errc::scan_error: return "ScanError";
    case errc::not_an_elf: return "NotAnElf";
    case errc::malformed_elf: return "MalformedElf";
    case errc::no_symbols: return "NoSymbols";
    case errc::decompiler_timeout: return "DecompilerTimeout";
    case errc::decompiler_failed: return "DecompilerFailed";
    case errc::protocol_error: return "ProtocolError";
    case errc::all_binaries_failed: return "AllBinariesFailed";
    case errc::duplicate_uid: return "DuplicateUid";
    case errc::schema_error: return "SchemaError";
    case errc::io_error: return "IoError";
    case errc::usage_error: return "UsageError";
    case errc::config_file_error: return "ConfigFileError";
    case errc::cycle_detected: return "CycleDetected";
  }
  return "UnknownError";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(errc::io_error, "cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw Error(errc::io_error, "read failed for " + path.string());
  }
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view data) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(errc::io_error, "cannot open " + path.string() + " for writing");
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  out.flush();
  if (!out) {
    throw Error(errc::io_error, "write failed for " + path.string());
  }
}

bool is_valid_utf8(std::string_view bytes) {
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(bytes[i]);
    std::size_t len;
    unsigned cp;
    if (c < 0x80) {
      i += 1;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char cc = static_cast<unsigned char>(bytes[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // Overlongs, surrogates, and values past U+10FFFF are invalid.
    if (len == 2 && cp < 0x80) return false;
    if (len == 3 && cp < 0x800) return false;
    if (len == 4 && cp < 0x10000) return false;
    if (cp >= 0xD800 && cp <= 0xDFFF) return false;
    if (cp > 0x10FFFF) return false;
    i += len;
  }
  return true;
}

std::string latin1_to_utf8(std::string_view bytes) {
  std::string out;
  out.reserve(bytes.size());
  for (char ch : bytes) {
    const unsigned char c = static_cast<unsigned char>(ch);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back(static_cast<char>(0xC0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
  }
  return out;
}

std::string ensure_utf8(std::string_view bytes) {
  if (is_valid_utf8(bytes)) return std::string(bytes);
  return latin1_to_utf8(bytes);
}

bool has_glob_chars(std::string_view s) {
  return s.find_first_of("*?[") != std::string_view::npos;
}

bool glob_match(std::string_view pattern, std::string_view rel_path) {
  const std::string pat(pattern);
  if (pattern.find('/') != std::string_view::npos) {
    const std::string path(rel_path);
    return ::fnmatch(pat.c_str(), path.c_str(), FNM_PATHNAME) == 0;
  }
  const auto slash = rel_path.rfind('/');
  const std::string base(slash == std::string_view::npos ? rel_path
                                                         : rel_path.substr(slash + 1));
  return ::fnmatch(pat.c_str(), base.c_str(), 0) == 0;
}

std::string hex_dump(std::string_view bytes) {
  static const char digits[] = "0123456789ABCDEF";
  std::string out;
  if (bytes.empty()) return out;
  out.reserve(bytes.size() * 3);
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    if (i != 0) {
      out.push_back(i % 16 == 0 ? '\n' : ' ');
    }
    const unsigned char c = static_cast<unsigned char>(bytes[i]);
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xF]);
  }
  return out;
}

std::string rfc3339_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out.push_back(c);
    }
  }
  out.push_back('\'');
  return out;
}

std::string relative_to(const std::filesystem::path& p,
                        const std::filesystem::path& root) {
  std::error_code ec;
  const auto rel = std::filesystem::relative(p, root, ec);
  if (ec || rel.empty() || rel.native().starts_with("..")) {
    return ensure_utf8(p.generic_string());
  }
  // Paths land in JSON/CSV output, which must stay valid UTF-8.
  return ensure_utf8(rel.generic_string());
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace codelink
