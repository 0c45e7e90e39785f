#include "svbench/cpre.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace svbench::cpre {

namespace {

// Copies a string or character literal starting at `pos` (the opening quote).
// Ends after the closing quote, or before an unescaped newline, or at EOF.
std::size_t copy_literal(std::string_view src, std::size_t pos, std::string& out) {
  const char quote = src[pos];
  out += quote;
  ++pos;
  while (pos < src.size()) {
    const char c = src[pos];
    if (c == '\\') {
      out += c;
      if (pos + 1 < src.size()) out += src[pos + 1];
      pos += 2;
      continue;
    }
    if (c == '\n') return pos;
    out += c;
    ++pos;
    if (c == quote) return pos;
  }
  return pos;
}

// Skips a line comment starting at `pos` ("//"). Returns the index of the
// terminating newline, or src.size().
std::size_t skip_line_comment(std::string_view src, std::size_t pos) {
  pos += 2;
  while (pos < src.size()) {
    const std::size_t hit = src.find_first_of("\\\n", pos);
    if (hit == std::string_view::npos) return src.size();
    if (src[hit] == '\n') return hit;
    // Backslash: a following newline (or CRLF) splices the next line in.
    if (hit + 1 < src.size() && src[hit + 1] == '\n') {
      pos = hit + 2;
    } else if (hit + 2 < src.size() && src[hit + 1] == '\r' && src[hit + 2] == '\n') {
      pos = hit + 3;
    } else {
      pos = hit + 1;
    }
  }
  return src.size();
}

constexpr std::array<std::string_view, 30> kStandardHeaders = {
    "assert.h",   "complex.h",  "ctype.h",    "errno.h",       "fenv.h",
    "float.h",    "inttypes.h", "iso646.h",   "limits.h",      "locale.h",
    "math.h",     "setjmp.h",   "signal.h",   "stdalign.h",    "stdarg.h",
    "stdatomic.h", "stdbool.h", "stddef.h",   "stdint.h",      "stdio.h",
    "stdlib.h",   "stdnoreturn.h", "string.h", "tgmath.h",     "threads.h",
    "time.h",     "uchar.h",    "wchar.h",    "wctype.h",      "pthread.h"};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

void push_unique(std::vector<std::string>& v, std::string name) {
  if (std::find(v.begin(), v.end(), name) == v.end()) v.push_back(std::move(name));
}

}  // namespace

StripResult strip_comments_checked(std::string_view src) {
  StripResult result;
  std::string& out = result.text;
  out.reserve(src.size());
  std::size_t pos = 0;
  while (pos < src.size()) {
    const std::size_t hit = src.find_first_of("\"'/", pos);
    if (hit == std::string_view::npos) {
      out.append(src.substr(pos));
      break;
    }
    out.append(src.substr(pos, hit - pos));
    pos = hit;
    const char c = src[pos];
    if (c == '"' || c == '\'') {
      pos = copy_literal(src, pos, out);
      continue;
    }
    const char next = pos + 1 < src.size() ? src[pos + 1] : '\0';
    if (next == '/') {
      pos = skip_line_comment(src, pos);
    } else if (next == '*') {
      const std::size_t close = src.find("*/", pos + 2);
      out += ' ';
      if (close == std::string_view::npos) {
        result.unterminated_block_comment = true;
        pos = src.size();
      } else {
        pos = close + 2;
      }
    } else {
      out += c;
      ++pos;
    }
  }
  return result;
}

bool is_standard_header(std::string_view name) {
  return std::find(kStandardHeaders.begin(), kStandardHeaders.end(), name) !=
         kStandardHeaders.end();
}

IncludeReport scan_includes(std::string_view src) {
  IncludeReport report;
  std::size_t pos = 0;
  while (pos <= src.size()) {
    std::size_t eol = src.find('\n', pos);
    if (eol == std::string_view::npos) eol = src.size();
    std::string_view line = src.substr(pos, eol - pos);
    pos = eol + 1;

    std::size_t i = 0;
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size() || line[i] != '#') continue;
    ++i;
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t word_end = i;
    while (word_end < line.size() && (std::isalpha(static_cast<unsigned char>(line[word_end])) ||
                                      line[word_end] == '_'))
      ++word_end;
    const std::string_view directive = line.substr(i, word_end - i);
    const bool is_import = directive == "import";
    if (directive != "include" && directive != "include_next" && !is_import) continue;
    if (is_import) {
      report.has_import = true;
      continue;
    }
    i = word_end;
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) continue;
    const char open = line[i];
    if (open == '<' || open == '"') {
      const char close = open == '<' ? '>' : '"';
      const std::size_t end = line.find(close, i + 1);
      std::string name(line.substr(i + 1, (end == std::string_view::npos ? line.size() : end) - i - 1));
      if (open == '<' && is_standard_header(name)) {
        push_unique(report.standard_includes, std::move(name));
      } else {
        push_unique(report.custom_includes, std::move(name));
      }
    } else {
      // Computed include (`#include MACRO`): undecidable, so custom.
      std::size_t end = i;
      while (end < line.size() && !is_space(line[end])) ++end;
      push_unique(report.custom_includes, std::string(line.substr(i, end - i)));
    }
  }
  std::erase_if(report.standard_includes, [&](const std::string& s) {
    return std::find(report.custom_includes.begin(), report.custom_includes.end(), s) !=
           report.custom_includes.end();
  });
  return report;
}

bool is_self_contained(std::string_view c_source) {
  return scan_includes(strip_comments(c_source)).empty();
}

std::size_t count_loc(std::string_view src) {
  std::size_t count = 0;
  bool line_has_code = false;
  for (char c : src) {
    if (c == '\n') {
      if (line_has_code) ++count;
      line_has_code = false;
    } else if (!is_space(c)) {
      line_has_code = true;
    }
  }
  if (line_has_code) ++count;
  return count;
}

}  // namespace svbench::cpre
