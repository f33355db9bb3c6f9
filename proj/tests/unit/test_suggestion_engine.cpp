#include <algorithm>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "sparql_assist/suggestion_engine.hpp"
#include "support.hpp"

using namespace sparql_assist;
using test_support::read_fixture;

namespace {

KnowledgeBase kb_from(std::string_view turtle, const std::string& key = "test") {
  Graph g = parse_turtle(turtle);
  return add_graph(KnowledgeBase{}, g, key, LoadStatus{LoadState::kLoaded, "", g.size(), {}});
}

KnowledgeBase kb_from_fixtures(std::initializer_list<const char*> names) {
  KnowledgeBase kb;
  for (const char* name : names) {
    Graph g = parse_turtle(read_fixture(name));
    g.set_source(Iri(std::string("http://fixtures/") + name));
    kb = add_graph(kb, g, name, LoadStatus{LoadState::kLoaded, "", g.size(), {}});
  }
  return kb;
}

std::vector<Suggestion> run(std::string_view text, const KnowledgeBase& kb, const SuggestOptions& opts = {},
                            const Registry* registry = nullptr) {
  return suggest(derive_context(text, text.size()), kb, registry, opts);
}

std::vector<std::string> inserts(const std::vector<Suggestion>& v) {
  std::vector<std::string> out;
  for (const auto& s : v) out.push_back(s.insert_text);
  return out;
}

std::ptrdiff_t rank_of(const std::vector<Suggestion>& v, const std::string& insert_text) {
  auto it = std::find_if(v.begin(), v.end(), [&](const Suggestion& s) { return s.insert_text == insert_text; });
  return it == v.end() ? -1 : it - v.begin();
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("a focus individual's own property precedes an equal one") {
  KnowledgeBase kb = kb_from(
      "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
      "<http://x/i> <http://x/p1> \"v\" .\n"
      "<http://x/p1> rdfs:label \"prop\" . <http://x/p2> rdfs:label \"prop\" .\n"
      "<http://x/j> <http://x/p2> \"w\" .");
  auto out = run("SELECT * WHERE { <http://x/i> ", kb);
  auto p1 = rank_of(out, "<http://x/p1>");
  auto p2 = rank_of(out, "<http://x/p2>");
  REQUIRE(p1 >= 0);
  REQUIRE(p2 >= 0);
  CHECK(p1 < p2);
  CHECK(out[static_cast<std::size_t>(p1)].score.context_boost == 0);
  CHECK(out[static_cast<std::size_t>(p2)].score.context_boost == 2);
}

TEST_CASE("a typed variable partial puts that variable first") {
  KnowledgeBase kb = kb_from("<http://x/xylophone> <http://x/p> <http://x/b> .");
  auto out = run("SELECT ?x ?y WHERE { ?x", kb);
  REQUIRE(!out.empty());
  CHECK(out[0].insert_text == "?x");
  CHECK(out[0].provenance.kind == ProvenanceKind::kQueryLocal);
  CHECK_FALSE(has(inserts(out), "?y"));
}

TEST_CASE("variables lead at subject position") {
  KnowledgeBase kb = kb_from("<http://x/a> <http://x/p> <http://x/b> .");
  auto out = run("SELECT ?x ?y WHERE { ?x ?p ?o . ", kb);
  REQUIRE(out.size() >= 3);
  CHECK(inserts(out)[0] == "?o");
  CHECK(has(inserts(out), "?x"));
  CHECK(has(inserts(out), "<http://x/a>"));
  CHECK(rank_of(out, "?y") < rank_of(out, "<http://x/a>"));
}

TEST_CASE("sio prefix at predicate lists the three properties by label") {
  KnowledgeBase kb = kb_from_fixtures({"sio.ttl"});
  SuggestOptions opts;
  opts.langs = LangPref({"en"});
  auto out = run("PREFIX sio: <http://semanticscience.org/resource/> SELECT ?x WHERE { ?x sio:", kb, opts);
  // hand ranking: equal boost and tier, so by normalized label
  CHECK(inserts(out) == std::vector<std::string>{"sio:SIO_000008", "sio:SIO_000253", "sio:SIO_000300"});
  CHECK(out[0].display_label == "has attribute");
  CHECK(out[1].display_label == "has participant");
  CHECK(out[2].display_label == "has value");
  for (const auto& s : out) {
    CHECK(s.kind == TermKind::kProperty);
    CHECK(s.provenance.kind == ProvenanceKind::kOntology);
    CHECK(s.provenance.iri == Iri("http://fixtures/sio.ttl"));
  }
}

TEST_CASE("German preference switches display labels") {
  KnowledgeBase kb = kb_from_fixtures({"sio.ttl"});
  SuggestOptions opts;
  opts.langs = LangPref({"de", "en"});
  auto out = run("PREFIX sio: <http://semanticscience.org/resource/> SELECT ?x WHERE { ?x sio:", kb, opts);
  REQUIRE(out.size() == 3);
  CHECK(out[0].display_label == "hat Attribut");
  CHECK(out[0].lang == "de");
}

TEST_CASE("opaque identifiers match by local name") {
  KnowledgeBase kb = kb_from_fixtures({"sio.ttl"});
  auto out = run("PREFIX sio: <http://semanticscience.org/resource/> SELECT * WHERE { ?x sio:SIO_0002", kb);
  CHECK(inserts(out) == std::vector<std::string>{"sio:SIO_000253"});
}

TEST_CASE("labels match at predicate position without a prefix") {
  KnowledgeBase kb = kb_from_fixtures({"dc_bilingual.ttl"});
  SuggestOptions opts;
  opts.langs = LangPref({"en"});
  auto out = run("PREFIX dc: <http://purl.org/dc/elements/1.1/> SELECT * WHERE { ?d tit", kb, opts);
  REQUIRE(!out.empty());
  CHECK(out[0].insert_text == "dc:title");
  auto de = run("SELECT * WHERE { ?d Urh", kb, opts);
  REQUIRE(!de.empty());
  CHECK(de[0].insert_text == "<http://purl.org/dc/elements/1.1/creator>");
  CHECK(de[0].display_label == "Urheber");
}

TEST_CASE("registry filtering by input class and subclass closure") {
  Registry reg;
  reg.add(RegistryService{Iri("http://s/S"), Iri("http://x/Protein"), {Iri("http://x/pX")}, std::nullopt});
  const char* data = "<http://x/g1> a <http://x/Gene> .\n";
  SuggestOptions opts;
  opts.registry_enabled = true;
  KnowledgeBase without = kb_from(data);
  CHECK(rank_of(run("SELECT * WHERE { <http://x/g1> ", without, opts, &reg), "<http://x/pX>") == -1);
  KnowledgeBase with = kb_from(std::string(data) +
                               "<http://x/Gene> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://x/Protein> .");
  auto out = run("SELECT * WHERE { <http://x/g1> ", with, opts, &reg);
  auto at = rank_of(out, "<http://x/pX>");
  REQUIRE(at >= 0);
  CHECK(out[static_cast<std::size_t>(at)].provenance.kind == ProvenanceKind::kRegistry);
  CHECK(out[static_cast<std::size_t>(at)].provenance.iri == Iri("http://s/S"));
  opts.registry_enabled = false;
  CHECK(rank_of(run("SELECT * WHERE { <http://x/g1> ", with, opts, &reg), "<http://x/pX>") == -1);
}

TEST_CASE("registry types come from query patterns as well") {
  Registry reg = parse_registry(read_fixture("registry.tsv"));
  SuggestOptions opts;
  opts.registry_enabled = true;
  KnowledgeBase kb = kb_from_fixtures({"sio.ttl"});
  auto out = inserts(run("SELECT * WHERE { ?c a <http://example.org/onto/Company> . ?c ", kb, opts, &reg));
  CHECK(has(out, "<http://example.org/onto/employs>"));
  CHECK_FALSE(has(out, "<http://example.org/onto/age>"));
  // no focus types, every service passes
  auto any = inserts(run("SELECT * WHERE { ?c ", kb, opts, &reg));
  CHECK(has(any, "<http://example.org/onto/age>"));
  CHECK(has(any, "<http://example.org/onto/employs>"));
}

TEST_CASE("parse_registry") {
  Registry reg = parse_registry(read_fixture("registry.tsv"));
  REQUIRE(reg.services().size() == 3);
  CHECK(reg.services()[0].attached_properties.size() == 2);
  CHECK(reg.services()[0].label == std::optional<std::string>("age lookup"));
  CHECK_FALSE(reg.services()[2].label);
  CHECK_THROWS_AS(parse_registry("http://s\thttp://c\t\n"), ParseError);
  CHECK_THROWS_AS(parse_registry("http://s\thttp://c\thttp://p\nhttp://s\thttp://c\thttp://q\n"), ParseError);
  CHECK_THROWS_AS(parse_registry("only one field\n"), ParseError);
}

TEST_CASE("registry_filter examples") {
  Registry reg;
  reg.add(RegistryService{Iri("http://s/S"), Iri("http://x/Protein"), {Iri("http://x/p")}, std::nullopt});
  KnowledgeBase kb;
  CHECK(registry_filter(reg, {Iri("http://x/Protein")}, kb) == std::set<Iri>{Iri("http://x/p")});
  CHECK(registry_filter(reg, {Iri("http://x/Gene")}, kb).empty());
  CHECK(registry_filter(reg, {}, kb) == std::set<Iri>{Iri("http://x/p")});
}

TEST_CASE("property: registry_filter equals exhaustive pair enumeration") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    auto cls = [](std::size_t i) { return Iri("http://x/C" + std::to_string(i)); };
    std::string ttl;
    std::map<std::size_t, std::set<std::size_t>> parents;
    for (std::size_t i = 0; i < 10; ++i) {
      for (std::size_t j = 0; j < 10; ++j) {
        if (i != j && rng() % 7 == 0) {
          parents[i].insert(j);
          ttl += "<" + cls(i).str() + "> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <" + cls(j).str() + "> .\n";
        }
      }
    }
    KnowledgeBase kb = kb_from(ttl);
    Registry reg;
    for (int s = 0; s < 5; ++s) {
      reg.add(RegistryService{Iri("http://s/" + std::to_string(s)), cls(rng() % 10),
                              {Iri("http://p/" + std::to_string(rng() % 8))}, std::nullopt});
    }
    std::set<Iri> focus;
    for (std::size_t i = 0; i < 10; ++i) {
      if (rng() % 4 == 0) focus.insert(cls(i));
    }
    // reachability by repeated relaxation over the parent relation
    auto reaches = [&](std::size_t from, std::size_t to) {
      std::set<std::size_t> seen{from};
      bool grew = true;
      while (grew) {
        grew = false;
        for (std::size_t a : std::set<std::size_t>(seen)) {
          for (std::size_t b : parents[a]) grew |= seen.insert(b).second;
        }
      }
      return seen.count(to) > 0;
    };
    std::set<Iri> want;
    for (const auto& svc : reg.services()) {
      bool accepted = focus.empty();
      for (std::size_t i = 0; i < 10 && !accepted; ++i) {
        if (!focus.count(cls(i))) continue;
        for (std::size_t j = 0; j < 10; ++j) {
          if (svc.input_class == cls(j) && reaches(i, j)) accepted = true;
        }
      }
      if (accepted) want.insert(svc.attached_properties.begin(), svc.attached_properties.end());
    }
    REQUIRE(registry_filter(reg, focus, kb) == want);
  }
}

TEST_CASE("suggest_syntax examples") {
  auto words = [](std::string_view text) {
    std::vector<std::string> out;
    for (const auto& s : suggest_syntax(derive_context(text, text.size()))) {
      CHECK(s.provenance.kind == ProvenanceKind::kSyntax);
      CHECK(s.kind == TermKind::kKeyword);
      out.push_back(s.insert_text);
    }
    return out;
  };
  auto empty = words("");
  for (const char* w : {"SELECT", "ASK", "PREFIX", "BASE"}) CHECK(has(empty, w));
  CHECK_FALSE(has(empty, "WHERE"));
  CHECK(std::is_sorted(empty.begin(), empty.end()));
  auto star = words("SELECT * ");
  CHECK(has(star, "WHERE"));
  CHECK(has(star, "FROM"));
  CHECK(has(star, "FROM NAMED"));
  CHECK_FALSE(has(star, "SELECT"));
  CHECK(words("SELECT * WHERE { ?s ?p ?o . OPT") == std::vector<std::string>{"OPTIONAL"});
  CHECK(words("SELECT * WHERE { ?s ?p ?o . opt") == std::vector<std::string>{"OPTIONAL"});
  auto mods = words("SELECT * WHERE { ?x ?p ?o } ");
  CHECK(has(mods, "ORDER BY"));
  CHECK(has(mods, "LIMIT"));
  CHECK_FALSE(has(mods, "WHERE"));
  CHECK(has(words("SELECT * WHERE { ?x ?p ?o } ORDER BY "), "DESC"));
}

TEST_CASE("a is offered at predicate position and classes only after it") {
  KnowledgeBase kb = kb_from_fixtures({"instances.nt"});
  auto pred = run("SELECT * WHERE { ?s ", kb);
  CHECK(has(inserts(pred), "a"));
  auto typed = inserts(run("SELECT * WHERE { ?s a ", kb));
  CHECK(has(typed, "<http://example.org/onto/Person>"));
  CHECK_FALSE(has(typed, "<http://example.org/data/alice>"));
  auto obj = inserts(run("SELECT * WHERE { ?s <http://example.org/onto/knows> ", kb));
  CHECK(has(obj, "<http://example.org/data/bob>"));
  CHECK(has(obj, "?s"));
  CHECK_FALSE(has(obj, "<http://example.org/onto/Person>"));
}

TEST_CASE("connected individuals lend their properties to a variable") {
  KnowledgeBase kb = kb_from_fixtures({"instances.nt"});
  auto out = run(
      "SELECT * WHERE { <http://example.org/data/alice> <http://example.org/onto/knows> ?friend . ?friend ", kb);
  auto at = rank_of(out, "<http://example.org/onto/knows>");
  REQUIRE(at >= 0);
  CHECK(out[static_cast<std::size_t>(at)].score.context_boost == 0);
  auto far = rank_of(out, "<http://example.org/onto/foundedIn>");
  REQUIRE(far >= 0);
  CHECK(out[static_cast<std::size_t>(far)].score.context_boost == 2);
}

TEST_CASE("IRIs render as prefixed names when a prefix is declared") {
  auto ctx = derive_context("PREFIX dc: <http://purl.org/dc/elements/1.1/> ", 47);
  CHECK(render_iri(ctx, Iri("http://purl.org/dc/elements/1.1/title")) == "dc:title");
  CHECK(render_iri(ctx, Iri("http://purl.org/dc/terms/title")) == "<http://purl.org/dc/terms/title>");
  CHECK(render_iri(ctx, Iri("http://purl.org/dc/elements/1.1/x,y")) == "dc:x\\,y");
  CHECK(render_iri(ctx, Iri("http://purl.org/dc/elements/1.1/x\u00D7y")) == "<http://purl.org/dc/elements/1.1/x\u00D7y>");
}

TEST_CASE("apply_suggestion examples") {
  Suggestion title;
  title.insert_text = "dc:title";
  std::string text = "PREFIX dc: <http://purl.org/dc/elements/1.1/> SELECT * WHERE { ?x ";
  auto ctx = derive_context(text, text.size());
  CHECK(ctx.position == ClausePosition::kPredicate);
  Splice s = apply_suggestion(text, text.size(), ctx, title);
  CHECK(s.text == text + "dc:title ");
  CHECK(s.cursor == s.text.size());
  CHECK(derive_context(s.text, s.cursor).position == ClausePosition::kObject);

  std::string partial = "PREFIX dc: <http://purl.org/dc/elements/1.1/> SELECT * WHERE { ?x tit";
  Splice r = apply_suggestion(partial, partial.size(), derive_context(partial, partial.size()), title);
  CHECK(r.text == text + "dc:title ");
  CHECK(r.text.find("titdc:title") == std::string::npos);

  // text right of the cursor is preserved
  std::string mid = "SELECT * WHERE { ?x ti }";
  Splice m = apply_suggestion(mid, 22, derive_context(mid, 22), title);
  CHECK(m.text == "SELECT * WHERE { ?x dc:title  }");
  CHECK(m.cursor == 29);
}

namespace {

struct Corpus {
  KnowledgeBase kb = kb_from_fixtures({"sio.ttl", "dc_bilingual.ttl", "instances.nt"});
  std::vector<std::pair<std::string, std::size_t>> cases;
  Corpus() {
    for (const auto& e : nlohmann::json::parse(read_fixture("context_corpus.json"))) {
      std::string text = e["text"];
      cases.emplace_back(text, e.contains("cursor") ? e["cursor"].get<std::size_t>() : text.size());
    }
  }
};

const Corpus& corpus() {
  static Corpus c;
  return c;
}

std::string random_query(std::mt19937& rng) {
  static const std::vector<std::string> parts = {
      "SELECT ", "* ", "?x ", "?y ", "WHERE ", "{ ", "} ", ". ", "; ", ", ", "a ", "PREFIX dc: <http://purl.org/dc/elements/1.1/> ",
      "dc:", "dc:ti", "<http://example.org/data/alice> ", "<http://example.org/onto/knows> ", "<http://example.org/onto/Pe",
      "PREFIX sio: <http://semanticscience.org/resource/> ", "sio:", "sio:SIO_0", "OPTIONAL ", "FILTER(", ") ", "has ",
      "?", "ti", "Ur", "\"str\" ", "FROM ", "OPT", "kno", "ali"};
  std::string q;
  int n = 1 + static_cast<int>(rng() % 12);
  for (int i = 0; i < n; ++i) q += parts[rng() % parts.size()];
  return q;
}

}  // namespace

TEST_CASE("property: position discipline") {
  std::mt19937 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::string q = random_query(rng);
    auto ctx = derive_context(q, q.size());
    auto out = suggest(ctx, corpus().kb, nullptr, SuggestOptions{});
    CAPTURE(q);
    for (const auto& s : out) {
      if (ctx.position == ClausePosition::kSubject) REQUIRE(s.kind != TermKind::kProperty);
      if (ctx.position == ClausePosition::kPredicate) {
        REQUIRE((s.kind == TermKind::kProperty || s.insert_text == "a"));
      }
      if (ctx.position == ClausePosition::kUnknown || ctx.position == ClausePosition::kKeyword ||
          ctx.position == ClausePosition::kPrologue) {
        REQUIRE(s.provenance.kind == ProvenanceKind::kSyntax);
      }
    }
  }
}

TEST_CASE("property: limit, deduplication and determinism") {
  std::mt19937 rng(4);
  for (int i = 0; i < 1000; ++i) {
    std::string q = random_query(rng);
    auto ctx = derive_context(q, q.size());
    SuggestOptions opts;
    opts.limit = 1 + rng() % 6;
    auto out = suggest(ctx, corpus().kb, nullptr, opts);
    REQUIRE(out.size() <= opts.limit);
    std::set<std::string> keys;
    for (const auto& s : out) REQUIRE(keys.insert(s.iri ? s.iri->str() : s.insert_text).second);
    REQUIRE(out == suggest(ctx, corpus().kb, nullptr, opts));
    for (std::size_t k = 1; k < out.size(); ++k) REQUIRE(out[k - 1].score <= out[k].score);
    // a smaller limit is a prefix of a larger one
    SuggestOptions wide = opts;
    wide.limit = opts.limit + 5;
    auto more = suggest(ctx, corpus().kb, nullptr, wide);
    REQUIRE(std::equal(out.begin(), out.end(), more.begin()));
  }
}

TEST_CASE("property: every suggestion splices in as one token") {
  std::mt19937 rng(9);
  auto check = [](const std::string& text, std::size_t cursor, const std::vector<Suggestion>& out,
                  const QueryContext& ctx) {
    for (const auto& s : out) {
      Splice sp = apply_suggestion(text, cursor, ctx, s);
      std::size_t start = sp.cursor - 1 - s.insert_text.size();
      REQUIRE(sp.text.compare(start, s.insert_text.size(), s.insert_text) == 0);
      auto toks = tokenize(sp.text);
      bool found = false;
      for (const auto& t : toks) {
        if (t.start == start && t.end == start + s.insert_text.size()) found = true;
      }
      CAPTURE(sp.text);
      REQUIRE(found);
      auto one = tokenize(s.insert_text);
      REQUIRE(one.size() == 1);
      REQUIRE((one[0].kind == TokenKind::kVar || one[0].kind == TokenKind::kIriRef ||
               one[0].kind == TokenKind::kPName || one[0].kind == TokenKind::kKeyword ||
               one[0].kind == TokenKind::kAKeyword));
    }
  };
  for (const auto& [text, cursor] : corpus().cases) {
    auto ctx = derive_context(text, cursor);
    SuggestOptions opts;
    opts.limit = 100;
    check(text, cursor, suggest(ctx, corpus().kb, nullptr, opts), ctx);
  }
  for (int i = 0; i < 1000; ++i) {
    std::string q = random_query(rng);
    auto ctx = derive_context(q, q.size());
    check(q, q.size(), suggest(ctx, corpus().kb, nullptr, SuggestOptions{}), ctx);
  }
}

TEST_CASE("property: preferential ranking") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    std::string ttl = "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n";
    std::set<int> own;
    for (int p = 0; p < 8; ++p) {
      ttl += "<http://x/p" + std::to_string(p) + "> rdfs:label \"" + (rng() % 2 ? "alpha" : "beta") + "\"@en .\n";
      if (rng() % 3 == 0) {
        own.insert(p);
        ttl += "<http://x/focus> <http://x/p" + std::to_string(p) + "> \"v\" .\n";
      } else {
        ttl += "<http://x/other> <http://x/p" + std::to_string(p) + "> \"v\" .\n";
      }
    }
    KnowledgeBase kb = kb_from(ttl);
    SuggestOptions opts;
    opts.limit = 50;
    opts.langs = LangPref({"en"});
    auto out = run("SELECT * WHERE { <http://x/focus> ", kb, opts);
    for (const auto& a : out) {
      for (const auto& b : out) {
        if (a.kind != TermKind::kProperty || b.kind != TermKind::kProperty) continue;
        if (a.score.lang_tier != b.score.lang_tier || a.score.match_tier != b.score.match_tier) continue;
        auto in_own = [&](const Suggestion& s) {
          for (int p : own) {
            if (s.insert_text == "<http://x/p" + std::to_string(p) + ">") return true;
          }
          return false;
        };
        if (in_own(a) && !in_own(b)) REQUIRE(rank_of(out, a.insert_text) < rank_of(out, b.insert_text));
      }
    }
  }
}
