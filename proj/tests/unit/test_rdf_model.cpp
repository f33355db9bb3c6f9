#include <filesystem>
#include <random>

#include "doctest.h"
#include "sparql_assist/rdf_model.hpp"
#include "support.hpp"

using namespace sparql_assist;
using test_support::isomorphic;
using test_support::read_fixture;

namespace {

Graph nt(std::string_view text) { return parse_ntriples(text).graph; }

Graph random_graph(std::mt19937& rng) {
  static const std::vector<std::string> iris = {"http://x/a", "http://x/b", "http://x/p", "http://x/q",
                                                "http://y/Thing", "urn:z:1"};
  static const std::vector<std::string> texts = {"plain", "with \"quote\"", "multi\nline", "Größe", "a\\b", ""};
  static const std::vector<std::string> langs = {"en", "de", "pt-br"};
  std::uniform_int_distribution<int> pick(0, 99);
  Graph g;
  int n = 1 + pick(rng) % 12;
  for (int i = 0; i < n; ++i) {
    Node s = pick(rng) % 4 == 0 ? Node(BlankNode{"b" + std::to_string(pick(rng) % 3)})
                                : Node(Iri(iris[pick(rng) % iris.size()]));
    Iri p(iris[pick(rng) % iris.size()]);
    Node o;
    switch (pick(rng) % 5) {
      case 0: o = Iri(iris[pick(rng) % iris.size()]); break;
      case 1: o = BlankNode{"b" + std::to_string(pick(rng) % 3)}; break;
      case 2: o = Literal(texts[pick(rng) % texts.size()], langs[pick(rng) % langs.size()]); break;
      case 3: o = Literal(std::to_string(pick(rng)), Iri(std::string(vocab::kXsd) + "integer")); break;
      default: o = Literal(texts[pick(rng) % texts.size()]);
    }
    g.insert(Triple(s, p, o));
  }
  return g;
}

}  // namespace

TEST_CASE("Iri rejects empty, whitespace and angle brackets") {
  CHECK_THROWS_AS(Iri(""), std::invalid_argument);
  CHECK_THROWS_AS(Iri("http://x/a b"), std::invalid_argument);
  CHECK_THROWS_AS(Iri("http://x/<a>"), std::invalid_argument);
  CHECK(Iri("http://x/a") == Iri("http://x/a"));
  CHECK(Iri("http://x/a") != Iri("http://x/A"));
  CHECK(Iri("http://semanticscience.org/resource/SIO_000253").local_name() == "SIO_000253");
  CHECK(Iri("http://x/ns#frag").local_name() == "frag");
}

TEST_CASE("Literal lang tags are lowercased and exclusive with datatypes") {
  Literal l("hi", "EN-GB");
  REQUIRE(l.lang());
  CHECK(*l.lang() == "en-gb");
  CHECK_FALSE(l.datatype());
  CHECK_THROWS(Literal("x", "not a tag"));
  CHECK_THROWS(Literal("x", "abcdefghi"));
  CHECK(normalize_lang_tag("De-AT") == "de-at");
}

TEST_CASE("Triple subject may not be a literal") {
  CHECK_THROWS_AS(Triple(Literal("x"), Iri("http://x/p"), Iri("http://x/o")), std::invalid_argument);
}

TEST_CASE("parse_ntriples lowercases language tags") {
  Graph g = nt("<http://x/a> <http://x/p> \"hi\"@EN .");
  REQUIRE(g.size() == 1);
  const auto& lit = std::get<Literal>(g.begin()->object);
  CHECK(lit.lexical() == "hi");
  CHECK(lit.lang() == std::optional<std::string>("en"));
}

TEST_CASE("parse_ntriples of empty text is empty") {
  CHECK(nt("").empty());
  CHECK(nt("# only a comment\n\n").empty());
}

TEST_CASE("lenient mode skips a malformed line with a diagnostic") {
  auto r = parse_ntriples(read_fixture("malformed.nt"), ParseMode::kLenient);
  CHECK(r.graph.size() == 2);
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].line == 2);
}

TEST_CASE("strict mode reports the failing line") {
  try {
    parse_ntriples(read_fixture("malformed.nt"), ParseMode::kStrict);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("parse_ntriples handles escapes, blanks and datatypes") {
  Graph g = nt(
      "_:b1 <http://x/p> \"a\\tb\\u00E9\\U0001F600\" .\n"
      "<http://x/s> <http://x/p> \"5\"^^<http://www.w3.org/2001/XMLSchema#integer> .\n");
  REQUIRE(g.size() == 2);
  bool saw_blank = false;
  for (const auto& t : g) {
    if (is_blank(t.subject)) {
      saw_blank = true;
      CHECK(std::get<Literal>(t.object).lexical() == "a\tb\xC3\xA9\xF0\x9F\x98\x80");
    } else {
      CHECK(std::get<Literal>(t.object).datatype()->str() == vocab::kXsdInteger);
    }
  }
  CHECK(saw_blank);
}

TEST_CASE("a byte-order mark is skipped") {
  CHECK(nt("\xEF\xBB\xBF<http://x/a> <http://x/p> <http://x/b> .").size() == 1);
  CHECK(parse_turtle("\xEF\xBB\xBF<http://x/a> <http://x/p> <http://x/b> .").size() == 1);
}

TEST_CASE("parse_turtle expands prefixes") {
  Graph g = parse_turtle("@prefix dc: <http://purl.org/dc/elements/1.1/> . <http://x/a> dc:title \"T\" .");
  REQUIRE(g.size() == 1);
  CHECK(g.begin()->predicate.str() == "http://purl.org/dc/elements/1.1/title");
}

TEST_CASE("the a keyword expands to rdf:type") {
  Graph g = parse_turtle("<http://x/a> a <http://x/C> .");
  REQUIRE(g.size() == 1);
  CHECK(g.begin()->predicate.str() == vocab::kRdfType);
}

TEST_CASE("abbreviated turtle equals its hand-expanded N-Triples") {
  Graph ttl = parse_turtle(read_fixture("abbrev.ttl"));
  Graph ref = nt(read_fixture("abbrev.nt"));
  CHECK(ttl.size() == 14);
  CHECK(isomorphic(ttl, ref));
}

TEST_CASE("SPARQL-style PREFIX and BASE are accepted") {
  Graph g = parse_turtle("PREFIX ex: <http://e/>\nBASE <http://b/>\nex:a ex:p <rel> .");
  REQUIRE(g.size() == 1);
  CHECK(std::get<Iri>(g.begin()->object).str() == "http://b/rel");
}

TEST_CASE("unsupported constructs are named") {
  try {
    parse_turtle("<http://x/a> <http://x/p> ( 1 2 ) .");
    FAIL("expected an error");
  } catch (const UnsupportedConstructError& e) {
    CHECK(e.construct().rfind("collection", 0) == 0);
  }
  try {
    parse_turtle("<http://x/a> <http://x/p> [ <http://x/q> 1 ] .");
    FAIL("expected an error");
  } catch (const UnsupportedConstructError& e) {
    CHECK(e.construct().rfind("blank node property list", 0) == 0);
  }
}

TEST_CASE("turtle syntax errors carry line and column") {
  try {
    parse_turtle("@prefix ex: <http://e/> .\nex:a ex:p .");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() > 0);
  }
  CHECK_THROWS_AS(parse_turtle("nope:a <http://x/p> 1 ."), ParseError);
}

TEST_CASE("graph_merge identities") {
  Graph g = nt("<http://x/a> <http://x/p> <http://x/b> .\n_:b <http://x/p> \"v\" .");
  Graph empty;
  CHECK(isomorphic(graph_merge({g, g}), g));
  CHECK(isomorphic(graph_merge({empty, g}), g));
  CHECK(graph_merge({}).empty());
}

TEST_CASE("graph_merge keeps blank nodes from different sources apart") {
  Graph g1 = nt("_:b <http://x/p> \"one\" .");
  Graph g2 = nt("_:b <http://x/p> \"two\" .");
  Graph m = graph_merge({g1, g2});
  std::set<std::string> subjects;
  for (const auto& t : m) subjects.insert(std::get<BlankNode>(t.subject).label);
  CHECK(subjects.size() == 2);
  CHECK(subjects.count("g0_b") == 1);
  CHECK(subjects.count("g1_b") == 1);
}

TEST_CASE("fixture graphs parse the same from both renderings") {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(test_support::fixture_path("roundtrip"))) {
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  REQUIRE(files.size() == 10);
  for (const auto& file : files) {
    CAPTURE(file);
    Graph g = nt(read_fixture("roundtrip/" + file.filename().string()));
    CHECK(!g.empty());
    Graph via_ttl = parse_turtle(render_turtle(g, {{"ex", "http://example.org/ns#"}, {"dc", "http://purl.org/dc/elements/1.1/"}}));
    Graph via_nt = nt(render_ntriples(g));
    CHECK(isomorphic(via_ttl, via_nt));
    CHECK(isomorphic(via_nt, g));
  }
}

TEST_CASE("property: random graphs round-trip through both renderers") {
  std::mt19937 rng(7);
  for (int i = 0; i < 300; ++i) {
    Graph g = random_graph(rng);
    Graph via_ttl = parse_turtle(render_turtle(g, {{"x", "http://x/"}}));
    Graph via_nt = nt(render_ntriples(g));
    REQUIRE(isomorphic(via_ttl, via_nt));
    REQUIRE(isomorphic(via_nt, g));
  }
}

TEST_CASE("property: parsing is deterministic") {
  std::string text = read_fixture("abbrev.ttl");
  Graph a = parse_turtle(text);
  Graph b = parse_turtle(text);
  CHECK(a == b);
  CHECK(render_ntriples(a) == render_ntriples(b));
}

TEST_CASE("property: graph_merge is commutative and associative up to relabeling") {
  std::mt19937 rng(11);
  for (int i = 0; i < 100; ++i) {
    Graph a = random_graph(rng), b = random_graph(rng), c = random_graph(rng);
    // identical inputs share a blank-node scope, which is not associative
    if (a == b || b == c || a == c) continue;
    REQUIRE(isomorphic(graph_merge({a, b}), graph_merge({b, a})));
    REQUIRE(isomorphic(graph_merge({graph_merge({a, b}), c}), graph_merge({a, graph_merge({b, c})})));
  }
}

TEST_CASE("resolve_iri follows reference resolution") {
  CHECK(resolve_iri("http://a/b/c/d;p?q", "g") == "http://a/b/c/g");
  CHECK(resolve_iri("http://a/b/c/d;p?q", "../g") == "http://a/b/g");
  CHECK(resolve_iri("http://a/b/c/d;p?q", "#s") == "http://a/b/c/d;p?q#s");
  CHECK(resolve_iri("http://a/b/c/d;p?q", "//g") == "http://g");
  CHECK(resolve_iri("http://a/b/c/d;p?q", "http://other/x") == "http://other/x");
}
