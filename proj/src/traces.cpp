#include "svbench/traces.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include "svbench/error.hpp"
#include "svbench/io.hpp"
#include "svbench/seeded.hpp"

namespace svbench {

namespace {
constexpr std::array<std::string_view, 4> kClassNames = {"ManifestBug", "LatentBug", "NoViolation", "Incomplete"};
constexpr std::array<std::string_view, 3> kFormatNames = {"Html", "PlainText", "Stripped"};
constexpr std::array<std::string_view, 6> kPresetNames = {"ManifestOnly", "Expanded", "Filtered",
                                                          "All",          "Balanced", "Mixed"};

template <typename E, std::size_t N>
std::optional<E> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    const auto& n = names[i];
    if (n.size() == s.size() && std::equal(n.begin(), n.end(), s.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
        }))
      return static_cast<E>(i);
  }
  return std::nullopt;
}
}  // namespace

std::string_view to_string(TraceClass c) { return kClassNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(TraceFormat f) { return kFormatNames[static_cast<std::size_t>(f)]; }
std::optional<TraceClass> trace_class_from_string(std::string_view s) { return lookup<TraceClass>(kClassNames, s); }
std::optional<TraceFormat> trace_format_from_string(std::string_view s) {
  if (s == "html" || s == "HTML") return TraceFormat::Html;
  if (s == "plain" || s == "plaintext" || s == "text") return TraceFormat::PlainText;
  return lookup<TraceFormat>(kFormatNames, s);
}

}  // namespace svbench

namespace svbench::traces {

std::string_view to_string(CorpusPreset p) { return kPresetNames[static_cast<std::size_t>(p)]; }
// "manifest-only", "manifest_only" and "ManifestOnly" all name the same preset.
std::optional<CorpusPreset> corpus_preset_from_string(std::string_view s) {
  std::string squeezed;
  for (char c : s)
    if (c != '-' && c != '_') squeezed += c;
  return lookup<CorpusPreset>(kPresetNames, squeezed);
}

TraceClass classify_trace(std::string_view raw_html, const ClassifyOptions& options) {
  if (!options.manifest_marker.empty() && raw_html.find(options.manifest_marker) != std::string_view::npos)
    return TraceClass::ManifestBug;
  if (!options.error_marker.empty() && raw_html.find(options.error_marker) != std::string_view::npos)
    return TraceClass::LatentBug;
  for (const auto& m : options.incomplete_markers)
    if (!m.empty() && raw_html.find(m) != std::string_view::npos) return TraceClass::Incomplete;
  return TraceClass::NoViolation;
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

enum class TokKind { Text, StartTag, EndTag, Comment, Declaration };

struct Attr {
  std::string name;  // lowercase
  std::string value;
  std::size_t begin = 0;  // span in the token's raw text, leading whitespace included
  std::size_t end = 0;
};

struct Token {
  TokKind kind = TokKind::Text;
  std::string_view raw;
  std::string name;  // lowercase tag name
  std::vector<Attr> attrs;
  bool self_closing = false;

  const std::string* attr(std::string_view n) const {
    for (const auto& a : attrs)
      if (a.name == n) return &a.value;
    return nullptr;
  }
  bool has_class(std::string_view cls) const {
    const std::string* c = attr("class");
    if (!c) return false;
    std::size_t i = 0;
    while (i < c->size()) {
      while (i < c->size() && std::isspace(static_cast<unsigned char>((*c)[i]))) ++i;
      std::size_t j = i;
      while (j < c->size() && !std::isspace(static_cast<unsigned char>((*c)[j]))) ++j;
      if (std::string_view(*c).substr(i, j - i) == cls) return true;
      i = j;
    }
    return false;
  }
};

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)); }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.'; }

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool iequals_at(std::string_view text, std::size_t at, std::string_view word) {
  if (at + word.size() > text.size()) return false;
  for (std::size_t i = 0; i < word.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(text[at + i])) != word[i]) return false;
  return true;
}

/// Parses a tag at text[at] == '<'. Returns its length, or 0 when the bytes
/// do not form a well-formed tag.
std::size_t parse_tag(std::string_view text, std::size_t at, Token& tok) {
  std::size_t i = at + 1;
  bool closing = false;
  if (i < text.size() && text[i] == '/') closing = true, ++i;
  if (i >= text.size() || !is_alpha(text[i])) return 0;
  const std::size_t name_start = i;
  while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '-')) ++i;
  tok.name = lower(text.substr(name_start, i - name_start));
  tok.attrs.clear();
  tok.self_closing = false;
  for (;;) {
    const std::size_t ws_start = i;
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size()) return 0;
    if (text[i] == '>') {
      ++i;
      break;
    }
    if (text[i] == '/' && i + 1 < text.size() && text[i + 1] == '>') {
      if (closing) return 0;
      tok.self_closing = true;
      i += 2;
      break;
    }
    if (closing || i == ws_start) return 0;  // attributes need separating whitespace
    if (!(is_alpha(text[i]) || text[i] == '_' || text[i] == ':' || text[i] == '@')) return 0;
    Attr a;
    a.begin = ws_start - at;
    const std::size_t an = i;
    while (i < text.size() && (is_name_char(text[i]) || text[i] == '@')) ++i;
    a.name = lower(text.substr(an, i - an));
    std::size_t j = i;
    while (j < text.size() && is_space(text[j])) ++j;
    if (j < text.size() && text[j] == '=') {
      ++j;
      while (j < text.size() && is_space(text[j])) ++j;
      if (j >= text.size()) return 0;
      if (text[j] == '"' || text[j] == '\'') {
        const auto close = text.find(text[j], j + 1);
        if (close == std::string_view::npos) return 0;
        a.value = std::string(text.substr(j + 1, close - j - 1));
        i = close + 1;
      } else {
        const std::size_t vs = j;
        while (j < text.size() && !is_space(text[j]) && std::string_view("\"'=<>`").find(text[j]) == std::string_view::npos)
          ++j;
        if (j == vs) return 0;
        a.value = std::string(text.substr(vs, j - vs));
        i = j;
      }
    }
    a.end = i - at;
    tok.attrs.push_back(std::move(a));
  }
  tok.kind = closing ? TokKind::EndTag : TokKind::StartTag;
  tok.raw = text.substr(at, i - at);
  return i - at;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t text_start = 0;
  std::size_t i = 0;
  auto flush_text = [&](std::size_t end) {
    if (end > text_start) {
      Token t;
      t.kind = TokKind::Text;
      t.raw = text.substr(text_start, end - text_start);
      out.push_back(std::move(t));
    }
  };
  while (i < text.size()) {
    const std::size_t lt = text.find('<', i);
    if (lt == std::string_view::npos) break;
    Token tok;
    std::size_t len = 0;
    if (text.compare(lt, 4, "<!--") == 0) {
      const auto end = text.find("-->", lt + 4);
      len = (end == std::string_view::npos ? text.size() : end + 3) - lt;
      tok.kind = TokKind::Comment;
      tok.raw = text.substr(lt, len);
    } else if (lt + 2 < text.size() && text[lt + 1] == '!' && is_alpha(text[lt + 2])) {
      const auto end = text.find('>', lt);
      if (end != std::string_view::npos) {
        len = end + 1 - lt;
        tok.kind = TokKind::Declaration;
        tok.raw = text.substr(lt, len);
      }
    } else {
      len = parse_tag(text, lt, tok);
    }
    if (len == 0) {
      i = lt + 1;
      continue;
    }
    flush_text(lt);
    const bool raw_text = tok.kind == TokKind::StartTag && !tok.self_closing && (tok.name == "script" || tok.name == "style");
    const std::string name = tok.name;
    out.push_back(std::move(tok));
    i = lt + len;
    text_start = i;
    if (raw_text) {
      std::size_t k = i;
      for (;; ++k) {
        k = text.find("</", k);
        if (k == std::string_view::npos || iequals_at(text, k + 2, name)) break;
      }
      const std::size_t end = k == std::string_view::npos ? text.size() : k;
      flush_text(end);
      i = text_start = end;
    }
  }
  flush_text(text.size());
  return out;
}

bool is_timestamp_attr(const std::string& name) {
  return name == "timestamp" || name == "data-timestamp" || name == "data-time" || name == "data-ts" ||
         name == "time";
}

bool is_timestamp_element(const Token& t) {
  return t.name == "time" || t.has_class("timestamp") || t.has_class("time") || t.has_class("ts") ||
         t.has_class("log-time");
}

bool is_timestamp_line(std::string_view line) {
  static const std::regex re(
      R"(^\s*\[?(\d{4}-\d{2}-\d{2}[T ])?\d{2}:\d{2}:\d{2}([.,]\d+)?(Z|[+-]\d{2}:?\d{2})?\]?\s*$)");
  return std::regex_match(line.begin(), line.end(), re);
}

bool is_void_element(const std::string& n) {
  static const std::set<std::string> v = {"area", "base", "br",   "col",   "embed",  "hr",    "img",
                                          "input", "link", "meta", "param", "source", "track", "wbr"};
  return v.count(n) > 0;
}

bool is_block_element(const std::string& n) {
  static const std::set<std::string> b = {
      "address", "article", "aside", "blockquote", "body", "br", "dd", "details", "div", "dl", "dt", "fieldset",
      "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "html", "li", "main", "nav",
      "ol", "p", "pre", "section", "summary", "table", "tbody", "td", "th", "thead", "tr", "ul"};
  return b.count(n) > 0;
}

/// Tag with its timestamp attributes cut out; byte-identical otherwise.
std::string without_timestamp_attrs(const Token& t) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& a : t.attrs) {
    if (!is_timestamp_attr(a.name)) continue;
    out.append(t.raw.substr(pos, a.begin - pos));
    pos = a.end;
  }
  out.append(t.raw.substr(pos));
  return out;
}

/// Skips from a start tag at tokens[i] to just past its matching end tag.
std::size_t skip_element(const std::vector<Token>& toks, std::size_t i) {
  const Token& open = toks[i];
  if (open.self_closing || is_void_element(open.name)) return i + 1;
  int depth = 0;
  for (std::size_t k = i; k < toks.size(); ++k) {
    if (toks[k].name != open.name) continue;
    if (toks[k].kind == TokKind::StartTag && !toks[k].self_closing) ++depth;
    else if (toks[k].kind == TokKind::EndTag && --depth == 0) return k + 1;
  }
  return toks.size();
}

/// Tracks whether the walk is inside a log-message element.
struct LogMsgTracker {
  std::vector<std::pair<std::string, bool>> stack;
  int inside = 0;

  void on(const Token& t) {
    if (t.kind == TokKind::StartTag && !t.self_closing && !is_void_element(t.name)) {
      const bool msg = t.has_class("log-msg");
      stack.emplace_back(t.name, msg);
      inside += msg;
    } else if (t.kind == TokKind::EndTag) {
      for (std::size_t k = stack.size(); k-- > 0;) {
        if (stack[k].first != t.name) continue;
        for (std::size_t m = k; m < stack.size(); ++m) inside -= stack[m].second;
        stack.resize(k);
        break;
      }
    }
  }
  bool in_message() const { return inside > 0; }
};

}  // namespace

std::string clean_html(std::string_view raw_html) {
  const auto toks = tokenize(raw_html);
  std::string out;
  out.reserve(raw_html.size());
  LogMsgTracker tracker;
  bool after_removed = false;  // previous token was dropped
  for (std::size_t i = 0; i < toks.size();) {
    const Token& t = toks[i];
    switch (t.kind) {
      case TokKind::Comment:
      case TokKind::Declaration:
        ++i;
        after_removed = true;
        continue;
      case TokKind::StartTag:
        if (t.name == "head" || t.name == "style" || t.name == "script" || is_timestamp_element(t)) {
          i = skip_element(toks, i);
          after_removed = true;
          continue;
        }
        if (t.name == "html" || t.name == "body" || t.name == "meta" || t.name == "link") {
          ++i;
          after_removed = true;
          continue;
        }
        tracker.on(t);
        out += without_timestamp_attrs(t);
        ++i;
        after_removed = false;
        continue;
      case TokKind::EndTag:
        if (t.name == "html" || t.name == "body") {
          ++i;
          after_removed = true;
          continue;
        }
        tracker.on(t);
        out.append(t.raw);
        ++i;
        after_removed = false;
        continue;
      case TokKind::Text: break;
    }
    ++i;
    const bool follows_removed = after_removed;
    after_removed = false;
    if (tracker.in_message()) {
      out.append(t.raw);
      continue;
    }
    // Between messages: drop bare timestamp lines.
    const std::string_view text = t.raw;
    std::string kept;
    bool dropped = false;
    std::size_t pos = 0;
    for (;;) {
      const auto nl = text.find('\n', pos);
      const bool last = nl == std::string_view::npos;
      const std::string_view line = text.substr(pos, last ? std::string_view::npos : nl - pos);
      if (!line.empty() && is_timestamp_line(line)) {
        dropped = true;
      } else {
        kept.append(line);
        if (!last) kept.push_back('\n');
      }
      if (last) break;
      pos = nl + 1;
    }
    // Layout left behind by removed boilerplate collapses to at most one break.
    if ((follows_removed || dropped) && kept.find_first_not_of(" \t\r\n") == std::string::npos) {
      if (!out.empty() && out.back() != '\n' && kept.find('\n') != std::string::npos) out.push_back('\n');
      after_removed = true;
      continue;
    }
    out += kept;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Entities

namespace {

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

const std::map<std::string_view, std::uint32_t>& named_entities() {
  static const std::map<std::string_view, std::uint32_t> m = {
      {"amp", '&'},     {"lt", '<'},       {"gt", '>'},      {"quot", '"'},     {"apos", '\''},
      {"nbsp", ' '},    {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}, {"laquo", 0x00AB},
      {"raquo", 0x00BB}, {"copy", 0x00A9}, {"reg", 0x00AE},   {"times", 0x00D7}, {"divide", 0x00F7},
      {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"bull", 0x2022},
      {"middot", 0x00B7}, {"larr", 0x2190}, {"rarr", 0x2192}, {"uarr", 0x2191}, {"darr", 0x2193},
      {"le", 0x2264},   {"ge", 0x2265},    {"ne", 0x2260},    {"tab", '\t'},     {"newline", '\n'}};
  return m;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto amp = text.find('&', i);
    if (amp == std::string_view::npos) {
      out.append(text.substr(i));
      break;
    }
    out.append(text.substr(i, amp - i));
    const auto semi = text.find(';', amp + 1);
    if (semi == std::string_view::npos || semi - amp > 12) {
      out.push_back('&');
      i = amp + 1;
      continue;
    }
    const std::string_view body = text.substr(amp + 1, semi - amp - 1);
    std::optional<std::uint32_t> cp;
    if (body.size() >= 2 && body[0] == '#') {
      const bool hex = body[1] == 'x' || body[1] == 'X';
      const std::string_view digits = body.substr(hex ? 2 : 1);
      if (!digits.empty() && digits.size() <= 8 &&
          std::all_of(digits.begin(), digits.end(),
                      [&](char c) { return hex ? std::isxdigit(static_cast<unsigned char>(c)) : std::isdigit(static_cast<unsigned char>(c)); })) {
        const auto v = std::stoul(std::string(digits), nullptr, hex ? 16 : 10);
        if (v > 0 && v <= 0x10FFFF && !(v >= 0xD800 && v <= 0xDFFF)) cp = static_cast<std::uint32_t>(v);
      }
    } else if (auto it = named_entities().find(body); it != named_entities().end()) {
      cp = it->second;
    }
    if (!cp) {
      out.push_back('&');
      i = amp + 1;
      continue;
    }
    append_utf8(out, *cp);
    i = semi + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Plain text

namespace {

bool is_level_element(const Token& t) { return t.has_class("log-level") || t.has_class("level"); }

/// "[DEBUG] " style prefix at the start of a message.
std::size_t level_prefix_length(std::string_view s) {
  static const std::array<std::string_view, 9> levels = {"TRACE", "DEBUG", "INFO",  "WARN", "WARNING",
                                                         "ERROR", "FATAL", "APP",   "SMT"};
  if (s.empty() || s[0] != '[') return 0;
  const auto close = s.find(']');
  if (close == std::string_view::npos) return 0;
  const auto name = s.substr(1, close - 1);
  if (std::find(levels.begin(), levels.end(), name) == levels.end()) return 0;
  std::size_t n = close + 1;
  if (n < s.size() && s[n] == ' ') ++n;
  return n;
}

}  // namespace

std::string to_plaintext(std::string_view raw_html) {
  const std::string cleaned = clean_html(raw_html);
  const auto toks = tokenize(cleaned);
  std::string out;
  bool pending_break = false;
  bool message_start = false;  // next text begins a log message
  LogMsgTracker tracker;
  for (std::size_t i = 0; i < toks.size();) {
    const Token& t = toks[i];
    if (t.kind == TokKind::StartTag && is_level_element(t)) {
      i = skip_element(toks, i);
      continue;
    }
    if (t.kind == TokKind::StartTag || t.kind == TokKind::EndTag) {
      const bool was_inside = tracker.in_message();
      tracker.on(t);
      if (t.name == "br") {
        out.push_back('\n');
        pending_break = false;
      } else if (is_block_element(t.name)) {
        pending_break = true;
      }
      if (t.kind == TokKind::StartTag && t.has_class("log-msg")) message_start = true;
      else if (!was_inside && tracker.in_message()) message_start = true;
      ++i;
      continue;
    }
    if (t.kind != TokKind::Text) {
      ++i;
      continue;
    }
    ++i;
    std::string text = decode_entities(t.raw);
    if (message_start && tracker.in_message()) {
      text.erase(0, level_prefix_length(text));
      message_start = false;
    }
    if (pending_break) {
      if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        if (text.find('\n') != std::string::npos) continue;  // layout between blocks
        if (out.empty() || out.back() == '\n') continue;
      }
      if (!out.empty() && out.back() != '\n') out.push_back('\n');
      if (!text.empty() && text[0] == '\n') text.erase(0, 1);
      pending_break = false;
    }
    out += text;
  }
  if (pending_break && !out.empty() && out.back() != '\n') out.push_back('\n');
  return out;
}

StrippedTrace strip_to_error_lines(std::string_view plaintext, const StripOptions& options) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < plaintext.size()) {
    const auto nl = plaintext.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(plaintext.substr(pos));
      break;
    }
    lines.push_back(plaintext.substr(pos, nl - pos));
    pos = nl + 1;
  }
  StrippedTrace r;
  r.total_lines = lines.size();

  auto has_any = [](std::string_view line, const std::vector<std::string>& needles, bool prefix) {
    if (prefix) {
      const auto first = line.find_first_not_of(" \t");
      if (first == std::string_view::npos) return false;
      line.remove_prefix(first);
    }
    for (const auto& n : needles)
      if (prefix ? line.substr(0, n.size()) == n : line.find(n) != std::string_view::npos) return true;
    return false;
  };

  std::vector<char> keep(lines.size(), 0);
  bool any = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!has_any(lines[i], options.markers, false)) continue;
    any = true;
    const std::size_t lo = i >= options.window ? i - options.window : 0;
    const std::size_t hi = std::min(lines.size() - 1, i + options.window);
    for (std::size_t k = lo; k <= hi; ++k) keep[k] = 1;
    for (std::size_t k = lo; k-- > 0;)
      if (has_any(lines[k], options.anchors, true)) {
        keep[k] = 1;
        break;
      }
  }
  if (!any) {
    r.no_error_lines = true;
    r.reduction = plaintext.empty() ? 0 : 1;
    return r;
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!keep[i]) continue;
    r.text.append(lines[i]);
    r.text.push_back('\n');
    ++r.kept_lines;
  }
  if (!plaintext.empty() && plaintext.back() != '\n' && keep.back()) r.text.pop_back();
  r.reduction = plaintext.empty() ? 0 : 1.0 - static_cast<double>(r.text.size()) / static_cast<double>(plaintext.size());
  return r;
}

TraceDocument make_document(std::string source_id, std::string source_c_path, std::string raw_html,
                            const ClassifyOptions& classify, const StripOptions& strip) {
  TraceDocument d;
  d.source_id = std::move(source_id);
  d.source_c_path = std::move(source_c_path);
  d.raw_html = std::move(raw_html);
  d.trace_class = classify_trace(d.raw_html, classify);
  d.cleaned_html = clean_html(d.raw_html);
  d.plaintext = to_plaintext(d.raw_html);
  d.stripped = strip_to_error_lines(*d.plaintext, strip).text;
  return d;
}

const std::string& text_in(const TraceDocument& doc, TraceFormat format) {
  const std::optional<std::string>* slot = nullptr;
  switch (format) {
    case TraceFormat::Html: slot = &doc.cleaned_html; break;
    case TraceFormat::PlainText: slot = &doc.plaintext; break;
    case TraceFormat::Stripped: slot = &doc.stripped; break;
  }
  if (!slot->has_value())
    throw Error(ErrorCode::FormatUnavailable,
                "trace " + doc.source_id + " has no " + std::string(svbench::to_string(format)) + " form");
  return **slot;
}

std::vector<TraceDocument> load_trace_store(const std::filesystem::path& dir, const ClassifyOptions& classify,
                                            const StripOptions& strip) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, "trace directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".html") files.push_back(e.path());
  std::vector<TraceDocument> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    auto rel = std::filesystem::relative(f, dir);
    rel.replace_extension();
    auto c_path = f;
    c_path.replace_extension(".c");
    out.push_back(make_document(rel.generic_string(), std::filesystem::exists(c_path) ? c_path.string() : "",
                                io::read_file(f), classify, strip));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.source_id < b.source_id; });
  return out;
}

// ---------------------------------------------------------------------------
// Composition and packing

namespace {

std::vector<std::size_t> ids_of_class(const std::vector<TraceDocument>& store, TraceClass c) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < store.size(); ++i)
    if (store[i].trace_class == c) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return store[a].source_id < store[b].source_id; });
  return idx;
}

std::vector<std::size_t> sample(std::vector<std::size_t> pool, std::size_t n, TraceClass c, std::uint64_t seed,
                                const std::vector<TraceDocument>& store) {
  if (pool.size() < n)
    throw Error(ErrorCode::InsufficientClassSupply, std::string(svbench::to_string(c)) + ": requested " +
                                                        std::to_string(n) + ", store has " + std::to_string(pool.size()));
  auto rng = seeded_engine(seed, {0x5eed, static_cast<std::uint32_t>(c)});
  seeded_shuffle(std::span<std::size_t>(pool), rng);
  pool.resize(n);
  std::sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) { return store[a].source_id < store[b].source_id; });
  return pool;
}

}  // namespace

CorpusSelection compose_corpus(const std::vector<TraceDocument>& store, const CorpusSpec& spec) {
  std::set<std::string_view> seen;
  for (const auto& d : store)
    if (!seen.insert(d.source_id).second) throw Error(ErrorCode::InvalidArgument, "duplicate trace id " + d.source_id);

  const auto manifest = ids_of_class(store, TraceClass::ManifestBug);
  const auto latent = ids_of_class(store, TraceClass::LatentBug);
  const auto clean = ids_of_class(store, TraceClass::NoViolation);
  const auto incomplete = ids_of_class(store, TraceClass::Incomplete);

  std::vector<std::size_t> chosen;
  auto add = [&](const std::vector<std::size_t>& v) { chosen.insert(chosen.end(), v.begin(), v.end()); };
  switch (spec.preset) {
    case CorpusPreset::ManifestOnly: add(manifest); break;
    case CorpusPreset::Expanded:
      add(sample(manifest, spec.manifest_count, TraceClass::ManifestBug, spec.seed, store));
      add(latent);
      break;
    case CorpusPreset::Filtered:
      add(manifest), add(latent), add(clean);
      break;
    case CorpusPreset::All:
      add(manifest), add(latent), add(clean), add(incomplete);
      break;
    case CorpusPreset::Balanced:
      add(manifest);
      add(sample(clean, manifest.size(), TraceClass::NoViolation, spec.seed, store));
      break;
    case CorpusPreset::Mixed:
      add(sample(manifest, spec.manifest_count, TraceClass::ManifestBug, spec.seed, store));
      add(sample(latent, spec.latent_count, TraceClass::LatentBug, spec.seed, store));
      break;
  }
  auto rng = seeded_engine(spec.seed, {0x0dd, static_cast<std::uint32_t>(spec.preset)});
  seeded_shuffle(std::span<std::size_t>(chosen), rng);

  CorpusSelection sel;
  sel.indices = std::move(chosen);
  for (std::size_t i : sel.indices) ++sel.composition[static_cast<std::size_t>(store[i].trace_class)];
  return sel;
}

namespace {

std::string drop_lines_with(const std::string& text, const std::string& marker) {
  std::string out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    const std::size_t end = nl == std::string::npos ? text.size() : nl + 1;
    const std::string_view line(text.data() + pos, end - pos);
    if (line.find(marker) == std::string_view::npos) out.append(line);
    pos = end;
  }
  return out;
}

}  // namespace

PackedCorpus pack_corpus(const std::vector<TraceDocument>& store, const CorpusSelection& selection,
                         const CorpusSpec& spec, const std::filesystem::path& output_path, const PackOptions& options) {
  std::string body;
  PackedCorpus p;
  nlohmann::json ids = nlohmann::json::array();
  for (std::size_t k = 0; k < selection.indices.size(); ++k) {
    const auto& doc = store.at(selection.indices[k]);
    std::string text = text_in(doc, spec.format);
    if (options.drop_verdict_lines) text = drop_lines_with(text, options.manifest_marker);
    if (options.prepend_source) {
      if (doc.source_c_path.empty())
        throw Error(ErrorCode::FormatUnavailable, "trace " + doc.source_id + " has no paired C source");
      std::string src = io::read_file(doc.source_c_path);
      if (!src.empty() && src.back() != '\n') src.push_back('\n');
      text = src + text;
    }
    if (k) body += options.separator;
    body += text;
    ++p.composition[static_cast<std::size_t>(doc.trace_class)];
    ids.push_back(doc.source_id);
  }
  p.document_count = selection.indices.size();
  p.byte_count = body.size();
  p.estimated_tokens = prompts::estimate_tokens(body);
  p.output_path = output_path.string();
  io::write_file_atomic(output_path, body);

  nlohmann::json manifest = to_json(p);
  manifest["preset"] = to_string(spec.preset);
  manifest["format"] = svbench::to_string(spec.format);
  manifest["seed"] = spec.seed;
  manifest["manifest_count"] = spec.manifest_count;
  manifest["latent_count"] = spec.latent_count;
  manifest["separator"] = options.separator;
  manifest["prepend_source"] = options.prepend_source;
  manifest["drop_verdict_lines"] = options.drop_verdict_lines;
  manifest["documents"] = ids;
  io::write_file_atomic(output_path.string() + ".manifest.json", manifest.dump(2) + "\n");
  return p;
}

nlohmann::json to_json(const PackedCorpus& p) {
  nlohmann::json comp;
  for (TraceClass c : kAllTraceClasses) comp[std::string(svbench::to_string(c))] = p.composition[static_cast<std::size_t>(c)];
  return {{"document_count", p.document_count},
          {"byte_count", p.byte_count},
          {"estimated_tokens", p.estimated_tokens},
          {"composition", comp},
          {"output_path", p.output_path}};
}

InformalizeRequest build_informalize_request(const TraceDocument& doc, std::string_view c_source,
                                             const prompts::TemplateSet& templates) {
  InformalizeRequest r;
  const std::string trace = doc.plaintext ? *doc.plaintext : to_plaintext(doc.raw_html);
  r.degenerate = trace.find_first_not_of(" \t\r\n") == std::string::npos;
  r.prompt.task_id = doc.source_id;
  r.prompt.text = prompts::fill_placeholders(templates.informalize(), {{"c_code", std::string(c_source)}, {"trace", trace}});
  r.prompt.estimated_tokens = prompts::estimate_tokens(r.prompt.text);
  return r;
}

}  // namespace svbench::traces
