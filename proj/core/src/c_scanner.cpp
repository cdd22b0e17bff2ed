#include <array>
#include <string>
#include <string_view>

#include "codelink/source.hpp"
#include "codelink/util.hpp"

namespace codelink {
namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

bool is_ident_start(unsigned char c) {
  return c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool is_ident_char(unsigned char c) {
  return is_ident_start(c) || (c >= '0' && c <= '9');
}

// Decorators that may sit between a parameter list and the body; their
// parenthesized arguments must not displace the function-name candidate.
bool is_decorator(std::string_view ident) {
  return ident == "__attribute__" || ident == "__asm__" || ident == "__asm" ||
         ident == "__declspec";
}

/// Scanner state shared by the helpers below. Tracks brace/paren nesting
/// with full awareness of comments, string/char literals, and preprocessor
/// lines so that braces inside them never affect nesting.
struct Scanner {
  std::string_view src;
  std::size_t i = 0;
  bool at_line_start = true;

  bool eof() const { return i >= src.size(); }
  unsigned char cur() const { return static_cast<unsigned char>(src[i]); }
  unsigned char peek() const {
    return i + 1 < src.size() ? static_cast<unsigned char>(src[i + 1]) : 0;
  }

  void skip_line_comment() {
    i += 2;
    while (!eof()) {
      const char c = src[i];
      if (c == '\\') {
        // Backslash-newline continues the comment.
        if (i + 1 < src.size() && src[i + 1] == '\n') {
          i += 2;
          continue;
        }
        if (i + 2 < src.size() && src[i + 1] == '\r' && src[i + 2] == '\n') {
          i += 3;
          continue;
        }
      }
      if (c == '\n') {
        ++i;
        at_line_start = true;
        return;
      }
      ++i;
    }
  }

  void skip_block_comment() {
    i += 2;
    while (!eof()) {
      if (src[i] == '*' && i + 1 < src.size() && src[i + 1] == '/') {
        i += 2;
        return;
      }
      ++i;
    }
  }

  void skip_literal(char quote) {
    ++i;
    while (!eof()) {
      const char c = src[i];
      if (c == '\\' && i + 1 < src.size()) {
        i += 2;
        continue;
      }
      ++i;
      if (c == quote) return;
    }
  }

  // Consumes one logical preprocessor line including continuations,
  // comments, and literals embedded in it.
  void skip_preprocessor() {
    ++i;  // '#'
    while (!eof()) {
      const char c = src[i];
      if (c == '\\') {
        if (i + 1 < src.size() && src[i + 1] == '\n') {
          i += 2;
          continue;
        }
        if (i + 2 < src.size() && src[i + 1] == '\r' && src[i + 2] == '\n') {
          i += 3;
          continue;
        }
        ++i;
        continue;
      }
      if (c == '\n') {
        ++i;
        at_line_start = true;
        return;
      }
      if (c == '/' && peek() == '*') {
        skip_block_comment();
        continue;
      }
      if (c == '/' && peek() == '/') {
        skip_line_comment();
        return;
      }
      if (c == '"' || c == '\'') {
        skip_literal(c);
        continue;
      }
      ++i;
    }
  }
};

}  // namespace

FileScan extract_c_functions(std::string_view file_bytes, const std::string& rel_path,
                             const std::string& language) {
  FileScan result;
  Scanner s{file_bytes};

  int brace_depth = 0;
  int paren_depth = 0;        // meaningful only at brace depth 0, outside bodies
  int transparent_braces = 0; // extern "C" { ... } wrappers

  std::size_t decl_start = npos;
  std::string cand_name;
  bool cand_open = false;      // inside the candidate's parameter parens
  bool cand_complete = false;  // parameter list fully closed
  bool decorator_parens = false;
  bool tokens_after_params = false;

  std::string last_ident;
  bool last_was_ident = false;
  bool pending_extern = false;    // saw "extern"
  bool pending_extern_c = false;  // saw extern "<string>"

  bool in_body = false;
  std::string fn_name;
  std::size_t fn_start = npos;

  auto reset_decl = [&] {
    decl_start = npos;
    cand_name.clear();
    cand_open = cand_complete = decorator_parens = false;
    tokens_after_params = false;
    last_ident.clear();
    last_was_ident = false;
    pending_extern = pending_extern_c = false;
    paren_depth = 0;
  };

  auto at_top = [&] { return !in_body && brace_depth == 0; };

  auto emit = [&](std::size_t end_byte) {
    SourceFunction fn;
    fn.name = fn_name;
    fn.language = language;
    fn.file = rel_path;
    fn.start_byte = fn_start;
    fn.end_byte = end_byte;
    fn.definition = std::string(file_bytes.substr(fn_start, end_byte - fn_start));
    fn.uid = rel_path + "::" + fn.name + "::" + std::to_string(fn.start_byte);
    result.functions.push_back(std::move(fn));
  };

  while (!s.eof()) {
    const unsigned char c = s.cur();

    if (c == '\n') {
      s.at_line_start = true;
      ++s.i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
      ++s.i;
      continue;
    }
    if (c == '#' && s.at_line_start) {
      s.skip_preprocessor();
      continue;
    }
    s.at_line_start = false;

    if (c == '/' && s.peek() == '/') {
      s.skip_line_comment();
      continue;
    }
    if (c == '/' && s.peek() == '*') {
      s.skip_block_comment();
      continue;
    }

    // From here on `c` begins a code token.
    if (at_top() && paren_depth == 0 && decl_start == npos && c != '}') {
      decl_start = s.i;
    }

    if (c == '"' || c == '\'') {
      if (at_top() && paren_depth == 0 && c == '"' && pending_extern) {
        pending_extern_c = true;
      }
      last_was_ident = false;
      s.skip_literal(static_cast<char>(c));
      continue;
    }

    if (is_ident_start(c)) {
      const std::size_t tok_start = s.i;
      while (!s.eof() && is_ident_char(s.cur())) ++s.i;
      if (at_top() && paren_depth == 0) {
        const std::string_view tok = file_bytes.substr(tok_start, s.i - tok_start);
        if (cand_complete && !is_decorator(tok)) tokens_after_params = true;
        last_ident.assign(tok);
        last_was_ident = true;
        pending_extern = (tok == "extern");
        if (!pending_extern) pending_extern_c = false;
      }
      continue;
    }

    if (c >= '0' && c <= '9') {
      while (!s.eof() && (is_ident_char(s.cur()) || s.cur() == '.')) ++s.i;
      if (at_top() && paren_depth == 0) {
        last_was_ident = false;
        if (cand_complete) tokens_after_params = true;
      }
      continue;
    }

    switch (c) {
      case '(':
        if (at_top()) {
          if (paren_depth == 0) {
            if (last_was_ident && is_decorator(last_ident)) {
              decorator_parens = true;
            } else if (last_was_ident) {
              cand_name = last_ident;
              cand_open = true;
              cand_complete = false;
              decorator_parens = false;
              tokens_after_params = false;
            } else {
              cand_name.clear();
              cand_open = cand_complete = false;
              decorator_parens = false;
            }
          }
          ++paren_depth;
        }
        last_was_ident = false;
        pending_extern = pending_extern_c = false;
        break;

      case ')':
        if (at_top() && paren_depth > 0) {
          --paren_depth;
          if (paren_depth == 0) {
            if (cand_open) {
              cand_complete = true;
              cand_open = false;
            }
            decorator_parens = false;
          }
        }
        last_was_ident = false;
        break;

      case '{':
        if (at_top() && paren_depth == 0 && pending_extern_c) {
          ++transparent_braces;
          reset_decl();
        } else if (at_top() && paren_depth == 0 && cand_complete && !cand_name.empty()) {
          in_body = true;
          fn_name = cand_name;
          fn_start = decl_start;
          brace_depth = 1;
        } else {
          ++brace_depth;
        }
        last_was_ident = false;
        pending_extern = pending_extern_c = false;
        break;

      case '}':
        if (brace_depth == 0) {
          if (transparent_braces > 0) {
            --transparent_braces;
            reset_decl();
          } else {
            result.scan_error = "unbalanced '}' at byte " + std::to_string(s.i);
            ++s.i;
            return result;
          }
        } else {
          --brace_depth;
          if (brace_depth == 0) {
            if (in_body) {
              emit(s.i + 1);
              in_body = false;
              reset_decl();
            }
            // A non-function brace group (struct body, initializer list)
            // stays part of the current declaration.
          }
        }
        last_was_ident = false;
        break;

      case ';':
        if (at_top() && paren_depth == 0) {
          if (cand_complete && tokens_after_params) {
            result.notes.push_back("possible K&R-style definition of '" + cand_name +
                                   "' skipped near byte " + std::to_string(s.i));
          }
          reset_decl();
        }
        last_was_ident = false;
        break;

      case '=':
        if (at_top() && paren_depth == 0) {
          cand_name.clear();
          cand_open = cand_complete = false;
        }
        last_was_ident = false;
        break;

      default:
        last_was_ident = false;
        pending_extern = pending_extern_c = false;
        break;
    }
    ++s.i;
  }

  if (brace_depth > 0) {
    result.scan_error =
        "unexpected end of file at brace depth " + std::to_string(brace_depth);
  }
  return result;
}

}  // namespace codelink
