#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <random>
#include <algorithm>

#include "mock_server.hpp"
#include "trace_gen.hpp"
#include "svbench/error.hpp"
#include "svbench/runner.hpp"
#include "svbench/io.hpp"
#include "svbench/traces.hpp"

using namespace svbench;
using namespace svbench::traces;

namespace {

std::string fixture(const std::string& name) { return io::read_file(prompts::data_dir() / "traces" / name); }

std::string wrap_document(const std::string& body) {
  return "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Report</title>\n"
         "<style>.log-msg { color: red; } div > span {}</style>\n"
         "<script>function toggle(a) { if (a < b) return; }</script>\n</head>\n<body>\n"
         "<!-- generated -->\n" +
         body + "</body>\n</html>\n";
}


std::vector<std::string> ids(const std::vector<TraceDocument>& store, const CorpusSelection& sel) {
  std::vector<std::string> out;
  for (auto i : sel.indices) out.push_back(store[i].source_id);
  return out;
}

}  // namespace

TEST_CASE("classification") {
  CHECK(classify_trace(fixture("c3_excerpt.html")) == TraceClass::ManifestBug);
  CHECK(classify_trace("") == TraceClass::NoViolation);
  CHECK(classify_trace("<div>ret = (Error (Null dereference, []))</div>") == TraceClass::LatentBug);
  CHECK(classify_trace("<div>Analysis incomplete: fuel exhausted</div>") == TraceClass::Incomplete);
  CHECK(classify_trace("<div>Analysis incomplete (Error (x))</div>") == TraceClass::LatentBug);
  ClassifyOptions opt;
  opt.incomplete_markers = {"GAVE UP"};
  CHECK(classify_trace("<div>GAVE UP</div>", opt) == TraceClass::Incomplete);
  CHECK(classify_trace("<div>Analysis incomplete</div>", opt) == TraceClass::NoViolation);
}

TEST_CASE("C.3 excerpt converts byte-exact") {
  const auto html = fixture("c3_excerpt.html");
  const auto expected = fixture("c3_excerpt.txt");
  CHECK(to_plaintext(html) == expected);
  CHECK(clean_html(html) == html);
  // Full report around the same messages.
  CHECK(to_plaintext(wrap_document(html)) == expected);
  CHECK(clean_html(wrap_document(html)) == html);
}

TEST_CASE("timestamps are removed") {
  const std::string body = "<div class=\"log-msg DEBUG\">first</div>\n";
  const std::string with_line = "<div class=\"log-msg DEBUG\">first</div>\n2024-05-01 12:00:03.120\n";
  CHECK(clean_html(with_line) == body);
  CHECK(clean_html("<div class=\"log-msg DEBUG\" data-timestamp=\"1714557600\">x</div>\n") ==
        "<div class=\"log-msg DEBUG\">x</div>\n");
  CHECK(clean_html("<div class=\"log-msg DEBUG\"><span class=\"timestamp\">12:00:01</span>x</div>\n") ==
        "<div class=\"log-msg DEBUG\">x</div>\n");
  // A timestamp-like line inside a message body is message text.
  const std::string inner = "<div class=\"log-msg DEBUG\">value\n12:00:01\n</div>\n";
  CHECK(clean_html(inner) == inner);
}

TEST_CASE("plain-text details") {
  CHECK(to_plaintext("a &lt; b &amp;&amp; c &gt; d") == "a < b && c > d");
  CHECK(to_plaintext("plain text\nwith lines\n") == "plain text\nwith lines\n");
  CHECK(to_plaintext("&#65;&#x42;&#X43;&nbsp;&bogus; &amp") == "ABC &bogus; &amp");
  CHECK(to_plaintext("&#233;") == "\xC3\xA9");
  // Not tags: no name, bad attribute syntax.
  CHECK(to_plaintext("if (x<y) return; x < 3; a <b c!> d") == "if (x<y) return; x < 3; a <b c!> d");
  CHECK(to_plaintext("<div class=\"log-msg INFO\">[INFO] started</div>") == "started\n");
  CHECK(to_plaintext("<div class=\"log-msg INFO\"><span class=\"log-level\">INFO</span> started</div>") == " started\n");
  CHECK(to_plaintext("<div>a</div><div>b</div>") == "a\nb\n");
  CHECK(to_plaintext("<div>a<br>b</div>") == "a\nb\n");
  CHECK(to_plaintext("<p>a <b>bold</b> c</p>") == "a bold c\n");
  CHECK(to_plaintext("<details><summary>Step 1</summary><div>x = 1</div></details>") == "Step 1\nx = 1\n");
  CHECK(to_plaintext("") == "");
}

TEST_CASE("to_plaintext is idempotent on its output") {
  std::mt19937_64 rng(17);
  // Trace-shaped pieces: escaped C operators, never text that decodes into markup.
  const std::vector<std::string> pieces = {
      "<div class=\"log-msg DEBUG\">", "</div>", "\n", "Executing statement: x = 1;", "STORE:", "  ( (x, 1))",
      " &lt; 10", "p-&gt;next", " &amp;&amp; ", "(Error (", "<span>", "</span>", "<br>", "a < b", "if (p)",
      "<details>", "</details>", "&quot;s&quot;", "  ", "<div class=\"log-msg TRACE\">[TRACE] ", "Bug is manifest!!"};
  for (int i = 0; i < 500; ++i) {
    std::string doc;
    const int n = static_cast<int>(rng() % 30);
    for (int k = 0; k < n; ++k) doc += pieces[rng() % pieces.size()];
    const auto once = to_plaintext(doc);
    INFO(doc);
    CHECK(to_plaintext(once) == once);
    CHECK(classify_trace(clean_html(doc)) == classify_trace(doc));
  }
}

TEST_CASE("stripping to error lines") {
  const auto plain = fixture("c3_excerpt.txt");
  const auto s = strip_to_error_lines(plain);
  CHECK_FALSE(s.no_error_lines);
  CHECK(s.text.find("(Error (Accessing uninitialized memory") != std::string::npos);
  CHECK(s.text.find("Bug is manifest!!") != std::string::npos);
  CHECK(s.kept_lines < s.total_lines);
  CHECK(s.reduction > 0);

  const auto none = strip_to_error_lines("Executing statement: x = 1;\nSTORE:\n  ( (x, 1))\n");
  CHECK(none.no_error_lines);
  CHECK(none.text.empty());

  std::string hundred;
  for (int i = 0; i < 100; ++i)
    hundred += i == 60 ? "ret = (Error (Null dereference))\n"
                       : (i % 10 == 0 ? "Executing statement: step " + std::to_string(i) + "\n" : "  filler " + std::to_string(i) + "\n");
  const auto h = strip_to_error_lines(hundred);
  CHECK(h.kept_lines <= 7);
  CHECK(h.kept_lines == 6);  // window of 5 + line 50
  CHECK(h.text.find("Executing statement: step 50") != std::string::npos);
  CHECK(h.text.find("filler 58") != std::string::npos);
  CHECK(h.text.find("filler 57") == std::string::npos);
  StripOptions wide;
  wide.window = 4;
  CHECK(strip_to_error_lines(hundred, wide).kept_lines == 10);
}

TEST_CASE("documents and formats") {
  const auto doc = make_document("c3", "", fixture("c3_excerpt.html"));
  CHECK(doc.trace_class == TraceClass::ManifestBug);
  CHECK(text_in(doc, TraceFormat::PlainText) == fixture("c3_excerpt.txt"));
  TraceDocument bare;
  bare.source_id = "x";
  CHECK_THROWS_AS(text_in(bare, TraceFormat::Stripped), Error);
}

TEST_CASE("trace store loading pairs sources by basename") {
  const auto dir = std::filesystem::temp_directory_path() / "svbench_trace_store";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir / "sub");
  io::write_file_atomic(dir / "b.html", fixture("c3_excerpt.html"));
  io::write_file_atomic(dir / "b.c", fixture("c3_program.c"));
  io::write_file_atomic(dir / "sub" / "a.html", "<div class=\"log-msg DEBUG\">done</div>\n");
  const auto store = load_trace_store(dir);
  REQUIRE(store.size() == 2);
  CHECK(store[0].source_id == "b");
  CHECK(store[0].source_c_path == (dir / "b.c").string());
  CHECK(store[1].source_id == "sub/a");
  CHECK(store[1].source_c_path.empty());
  CHECK(store[1].trace_class == TraceClass::NoViolation);
  std::filesystem::remove_all(dir);
}

TEST_CASE("corpus presets") {
  const auto store = testgen::synthetic_store(30, 40, 200, 5);
  auto count = [&](CorpusPreset p, std::size_t manifest = 10, std::size_t latent = 12) {
    CorpusSpec spec;
    spec.preset = p;
    spec.manifest_count = manifest;
    spec.latent_count = latent;
    spec.seed = 1;
    return compose_corpus(store, spec);
  };
  CHECK(count(CorpusPreset::ManifestOnly).indices.size() == 30);
  const auto expanded = count(CorpusPreset::Expanded);
  CHECK(expanded.indices.size() == 50);
  CHECK(expanded.composition[0] == 10);
  CHECK(count(CorpusPreset::Filtered).indices.size() == 270);
  CHECK(count(CorpusPreset::All).indices.size() == 275);
  const auto balanced = count(CorpusPreset::Balanced);
  CHECK(balanced.indices.size() == 60);
  CHECK(balanced.composition[0] == balanced.composition[2]);
  const auto mixed = count(CorpusPreset::Mixed);
  CHECK(mixed.composition == ClassCounts{10, 12, 0, 0});

  try {
    count(CorpusPreset::Expanded, 754);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientClassSupply);
    CHECK(std::string(e.what()).find("ManifestBug") != std::string::npos);
  }
  CHECK_THROWS_AS(compose_corpus(testgen::synthetic_store(10, 0, 5, 0), CorpusSpec{CorpusPreset::Balanced}), Error);
}

TEST_CASE("composition is reproducible and seed-dependent") {
  const auto store = testgen::synthetic_store(50, 50, 300, 0);
  CorpusSpec spec;
  spec.preset = CorpusPreset::Balanced;
  spec.seed = 7;
  const auto a = ids(store, compose_corpus(store, spec));
  CHECK(a == ids(store, compose_corpus(store, spec)));
  // Store order does not matter.
  auto reversed = store;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(a == ids(reversed, compose_corpus(reversed, spec)));
  spec.seed = 8;
  CHECK(a != ids(store, compose_corpus(store, spec)));
}

TEST_CASE("packing") {
  const auto dir = std::filesystem::temp_directory_path() / "svbench_pack";
  std::filesystem::remove_all(dir);
  const auto store = testgen::synthetic_store(3, 0, 0, 0);
  CorpusSpec spec;
  spec.format = TraceFormat::PlainText;
  const auto sel = compose_corpus(store, spec);
  const auto packed = pack_corpus(store, sel, spec, dir / "c.txt");
  std::size_t parts = 0;
  for (const auto& d : store) parts += d.plaintext->size();
  const PackOptions defaults;
  CHECK(packed.document_count == 3);
  CHECK(packed.byte_count == parts + 2 * defaults.separator.size());
  CHECK(io::read_file(dir / "c.txt").size() == packed.byte_count);
  CHECK(packed.estimated_tokens == (packed.byte_count + 3) / 4);
  CHECK(packed.composition == sel.composition);
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "c.txt.manifest.json"));
  CHECK(manifest.at("documents").size() == 3);
  CHECK(manifest.at("preset") == "ManifestOnly");

  const auto empty = pack_corpus(store, CorpusSelection{}, spec, dir / "e.txt");
  CHECK(empty.document_count == 0);
  CHECK(empty.byte_count == 0);
  CHECK(empty.estimated_tokens == 0);
  CHECK(io::read_file(dir / "e.txt").empty());

  auto missing = store;
  missing[0].stripped.reset();
  spec.format = TraceFormat::Stripped;
  CHECK_THROWS_AS(pack_corpus(missing, sel, spec, dir / "x.txt"), Error);

  // Verdict removal and source prepending.
  auto docs = std::vector<TraceDocument>{make_document("c3", (prompts::data_dir() / "traces" / "c3_program.c").string(),
                                                       fixture("c3_excerpt.html"))};
  spec.format = TraceFormat::PlainText;
  PackOptions opt;
  opt.drop_verdict_lines = true;
  opt.prepend_source = true;
  pack_corpus(docs, compose_corpus(docs, spec), spec, dir / "v.txt", opt);
  const auto v = io::read_file(dir / "v.txt");
  CHECK(v.find("Bug is manifest") == std::string::npos);
  CHECK(v.rfind("void exit(int status);", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("informalize request") {
  const auto doc = make_document("c3", "", fixture("c3_excerpt.html"));
  const auto src = fixture("c3_program.c");
  const auto r = build_informalize_request(doc, src);
  CHECK_FALSE(r.degenerate);
  CHECK(r.prompt.text.find(src) != std::string::npos);
  CHECK(r.prompt.text.find(fixture("c3_excerpt.txt")) != std::string::npos);
  CHECK(r.prompt.text.find(src) < r.prompt.text.find("Executing statement"));
  const auto empty = build_informalize_request(make_document("e", "", ""), src);
  CHECK(empty.degenerate);
}

TEST_CASE("acceptance-scale composition") {
  const auto store = testgen::synthetic_store(3208, 4294, 27000, 500);
  const auto start = std::chrono::steady_clock::now();
  CorpusSpec spec;
  spec.seed = 3;
  spec.preset = CorpusPreset::ManifestOnly;
  CHECK(compose_corpus(store, spec).indices.size() == 3208);
  spec.preset = CorpusPreset::Expanded;
  const auto e = compose_corpus(store, spec);
  CHECK(e.indices.size() == 5048);
  CHECK(e.composition[0] == 754);
  spec.preset = CorpusPreset::Filtered;
  CHECK(compose_corpus(store, spec).indices.size() == 34502);
  spec.preset = CorpusPreset::Balanced;
  CHECK(compose_corpus(store, spec).indices.size() == 6416);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(10));
}

TEST_CASE("informalize prompt round-trips through the runner") {
  testgen::MockServer server([](const std::string& prompt, const nlohmann::json&) {
    testgen::MockReply r;
    r.content = prompt.find("(Error (Accessing uninitialized memory") != std::string::npos
                    ? "The variable x is read before it is initialised."
                    : "no trace seen";
    return r;
  });
  const auto req = build_informalize_request(make_document("c3", "", fixture("c3_excerpt.html")), fixture("c3_program.c"));
  ModelEndpoint e;
  e.name = "mock";
  e.base_url = server.base_url();
  e.request_timeout = 10;
  runner::RunnerOptions opt;
  opt.max_input_tokens = 100000;
  const auto rec = runner::execute_task(e, req.prompt, opt);
  CHECK(rec.status == RunStatus::Ok);
  CHECK(rec.raw_response == "The variable x is read before it is initialised.");
  CHECK(server.bodies().at(0).at("messages").at(0).at("content") == req.prompt.text);
}
