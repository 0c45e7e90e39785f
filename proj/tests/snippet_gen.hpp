#pragma once

// Random C-like snippets mixing comments, literals holding comment markers,
// escapes and line continuations.

#include <random>
#include <string>
#include <vector>

namespace testgen {

inline std::string random_snippet(std::mt19937_64& rng) {
  static const std::vector<std::string> pieces = {
      "int x = 1;", "\n", "\n\n", "  ", "\t", "a/b", "/", "*", "x*/y", "\\", "\\\n", "\\\r\n",
      "// line comment\n", "// continued \\\n still comment\n", "//", "/* block */",
      "/* multi\n line\n block */", "/**/", "/*/ tricky */", "/* unterminated",
      "\"str // not comment\"", "\"str /* not */ comment\"", "\"esc \\\" quote // x\"",
      "\"back\\\\\"", "'\\''", "'/'", "'\"'", "'\\\\'", "\"unterminated // x\n",
      "'a", "\"line\\\ncontinued\"", "#include <stdio.h>\n", "#include \"my.h\" // c\n",
      "return 0;", "}", "{", "f(\"/*\", '*', \"*/\");", "\r\n", "\"\"", "''", "x = y / *p;",
  };
  std::uniform_int_distribution<std::size_t> count(0, 14);
  std::uniform_int_distribution<std::size_t> pick(0, pieces.size() - 1);
  std::string out;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) out += pieces[pick(rng)];
  return out;
}

}  // namespace testgen
