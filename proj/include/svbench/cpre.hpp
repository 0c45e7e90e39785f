#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// C source preprocessing: comment stripping, include scanning, LOC counting.
// The lexer follows C11 lexical rules for comments and string/character
// literals only. Trigraphs are not honored.

namespace svbench::cpre {

struct StripResult {
  std::string text;
  bool unterminated_block_comment = false;
};

/// Removes `//` and `/* */` comments. Block comments become one space, line
/// comments vanish up to (not including) their newline. A backslash-newline
/// inside a line comment continues the comment. Literal bytes are untouched.
StripResult strip_comments_checked(std::string_view c_source);

inline std::string strip_comments(std::string_view c_source) {
  return strip_comments_checked(c_source).text;
}

struct IncludeReport {
  std::vector<std::string> standard_includes;
  std::vector<std::string> custom_includes;
  bool has_import = false;

  bool empty() const {
    return standard_includes.empty() && custom_includes.empty() && !has_import;
  }
};

/// True for the C11 standard headers plus pthread.h.
bool is_standard_header(std::string_view name);

/// Classifies every `#include` / `#import` directive. Expects comment-stripped
/// input. Angle-bracket includes of whitelisted headers are standard; every
/// other include is custom. Names are de-duplicated in first-seen order.
IncludeReport scan_includes(std::string_view c_source);

/// The training-corpus criterion: no includes or imports of any kind.
bool is_self_contained(std::string_view c_source);

/// Lines holding at least one non-whitespace character.
std::size_t count_loc(std::string_view c_source);

}  // namespace svbench::cpre
