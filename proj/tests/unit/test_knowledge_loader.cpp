#include <filesystem>
#include <random>

#include "doctest.h"
#include "reference.hpp"
#include "sparql_assist/knowledge_loader.hpp"
#include "stubs.hpp"
#include "support.hpp"

using namespace sparql_assist;
using test_support::fixture_path;
using test_support::read_fixture;

namespace fs = std::filesystem;

namespace {

const std::string kOnto = "http://example.org/onto/";
const std::string kData = "http://example.org/data/";

Graph ttl(std::string_view text) { return parse_turtle(text); }

const Term* find(const std::vector<Term>& terms, const std::string& iri) {
  for (const auto& t : terms) {
    if (t.iri.str() == iri) return &t;
  }
  return nullptr;
}

std::set<Iri> iris(std::initializer_list<std::string> v) {
  std::set<Iri> out;
  for (const auto& s : v) out.insert(Iri(s));
  return out;
}

fs::path temp_dir(const std::string& tag) {
  static std::mt19937 rng(std::random_device{}());
  fs::path p = fs::temp_directory_path() / ("sa_" + tag + "_" + std::to_string(rng()));
  fs::create_directories(p);
  return p;
}

FetchPolicy offline() {
  FetchPolicy p;
  p.allow_network = false;
  return p;
}

}  // namespace

TEST_CASE("extract_terms maps declarations to kinds and labels") {
  auto terms = extract_terms(ttl(
      "@prefix owl: <http://www.w3.org/2002/07/owl#> . @prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
      "<http://x/p> a owl:ObjectProperty ; rdfs:label \"has part\"@en ."));
  const Term* p = find(terms, "http://x/p");
  REQUIRE(p);
  CHECK(p->kinds == KindSet{TermKind::kProperty});
  CHECK(p->labels.at("en") == std::vector<std::string>{"has part"});
}

TEST_CASE("undeclared predicates become properties") {
  auto terms = extract_terms(ttl("<http://x/a> <http://x/p> <http://x/b> ."));
  REQUIRE(terms.size() == 3);
  CHECK(find(terms, "http://x/a")->kinds == KindSet{TermKind::kIndividual});
  CHECK(find(terms, "http://x/b")->kinds == KindSet{TermKind::kIndividual});
  CHECK(find(terms, "http://x/p")->kinds == KindSet{TermKind::kProperty});
}

TEST_CASE("bilingual fixture yields one term per IRI with both languages") {
  auto terms = extract_terms(ttl(read_fixture("dc_bilingual.ttl")));
  const Term* title = find(terms, "http://purl.org/dc/elements/1.1/title");
  REQUIRE(title);
  CHECK(title->labels.at("en") == std::vector<std::string>{"title"});
  CHECK(title->labels.at("de") == std::vector<std::string>{"Titel"});
  CHECK(title->descriptions.size() == 2);
  CHECK(title->kinds == KindSet{TermKind::kProperty});
  int dc = 0;
  for (const auto& t : terms) dc += t.iri.str().rfind("http://purl.org/dc/", 0) == 0;
  CHECK(dc == 7);
}

TEST_CASE("classes, subclasses and ontology headers") {
  auto terms = extract_terms(ttl(read_fixture("sio.ttl")));
  const std::string sio = "http://semanticscience.org/resource/";
  CHECK(find(terms, sio + "SIO_000006")->kinds == KindSet{TermKind::kOntClass});
  CHECK(find(terms, sio + "SIO_000395")->kinds == KindSet{TermKind::kOntClass});
  CHECK(find(terms, sio + "SIO_000253")->kinds == KindSet{TermKind::kProperty});
  CHECK(find(terms, sio + "SIO_000300")->kinds == KindSet{TermKind::kProperty});
  CHECK(find(terms, "http://semanticscience.org/ontology/sio.owl")->kinds == KindSet{TermKind::kGraph});
  CHECK_FALSE(find(terms, "http://www.w3.org/2002/07/owl#Class"));
}

TEST_CASE("undeclared labeled IRIs are indexed as individuals") {
  auto terms = extract_terms(ttl(
      "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
      "<http://x/thing> rdfs:label \"thing\" . rdfs:label rdfs:label \"label\" ."));
  CHECK(find(terms, "http://x/thing")->kinds.empty());
  auto index = build_index(terms);
  CHECK(index.find(Iri("http://x/thing"))->kinds == KindSet{TermKind::kIndividual});
  CHECK(index.find(Iri(vocab::kRdfsLabel))->kinds == KindSet{TermKind::kProperty});
  // a later declaration replaces the fallback
  auto later = swap_generation(index, extract_terms(ttl(
      "<http://x/thing> a <http://www.w3.org/2002/07/owl#Class> .")));
  CHECK(later.find(Iri("http://x/thing"))->kinds == KindSet{TermKind::kOntClass});
}

TEST_CASE("extract_profiles records properties, types and class profiles") {
  KnowledgeBase kb;
  auto out = extract_profiles(ttl("<http://x/a> a <http://x/C> . <http://x/a> <http://x/p> <http://x/b> ."), kb);
  CHECK(out.individual_properties.at(Iri("http://x/a")) == iris({vocab::kRdfType, "http://x/p"}));
  CHECK(out.class_properties.at(Iri("http://x/C")).count(Iri("http://x/p")) == 1);
  CHECK(out.types_of.at(Iri("http://x/a")) == iris({"http://x/C"}));

  auto same = extract_profiles(Graph{}, kb);
  CHECK(same.individual_properties.empty());
  CHECK(same.index.generation() == kb.index.generation() + 1);
}

TEST_CASE("three-individual fixture profiles") {
  Graph g = parse_ntriples(read_fixture("instances.nt")).graph;
  auto kb = extract_profiles(g, KnowledgeBase{});
  const std::string label = vocab::kRdfsLabel, type = vocab::kRdfType;
  CHECK(kb.individual_properties.size() == 3);
  CHECK(kb.individual_properties.at(Iri(kData + "alice")) == iris({type, label, kOnto + "knows", kOnto + "age"}));
  CHECK(kb.individual_properties.at(Iri(kData + "bob")) == iris({type, label, kOnto + "worksFor"}));
  CHECK(kb.individual_properties.at(Iri(kData + "acme")) == iris({type, label, kOnto + "foundedIn"}));
  CHECK(kb.class_properties.at(Iri(kOnto + "Person")) ==
        iris({label, kOnto + "knows", kOnto + "age", kOnto + "worksFor"}));
  CHECK(kb.class_properties.at(Iri(kOnto + "Company")) == iris({label, kOnto + "foundedIn"}));
  CHECK(kb.types_of.at(Iri(kData + "bob")) == iris({kOnto + "Person"}));
  for (const auto& [iri, props] : kb.individual_properties) {
    const Term* t = kb.index.find(iri);
    REQUIRE(t);
    CHECK(t->kinds.has(TermKind::kIndividual));
  }
}

TEST_CASE("subclass closure is reflexive, transitive and cycle safe") {
  KnowledgeBase kb = extract_profiles(
      ttl("@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n"
          "<http://x/A> rdfs:subClassOf <http://x/B> . <http://x/B> rdfs:subClassOf <http://x/C> .\n"
          "<http://x/C> rdfs:subClassOf <http://x/A> . <http://x/D> rdfs:subClassOf <http://x/B> ."),
      KnowledgeBase{});
  CHECK(kb.superclasses(Iri("http://x/A")) == iris({"http://x/A", "http://x/B", "http://x/C"}));
  CHECK(kb.superclasses(Iri("http://x/D")) == iris({"http://x/A", "http://x/B", "http://x/C", "http://x/D"}));
  CHECK(kb.superclasses(Iri("http://x/Z")) == iris({"http://x/Z"}));
}

TEST_CASE("load_graph from a local path and a file IRI") {
  auto r = load_graph(fixture_path("sio.ttl"), offline(), nullptr);
  CHECK(r.status.state == LoadState::kLoaded);
  CHECK(r.graph.size() == 23);
  auto r2 = load_graph("file://" + fixture_path("instances.nt"), offline(), nullptr);
  CHECK(r2.status.state == LoadState::kLoaded);
  CHECK(r2.graph.size() == 10);
  auto missing = load_graph(fixture_path("nope.ttl"), offline(), nullptr);
  CHECK(missing.status.state == LoadState::kFailed);
  CHECK(missing.graph.empty());
}

TEST_CASE("network disabled never calls the fetcher") {
  stubs::DocumentServer server;
  server.add("http://example.org/onto.ttl", read_fixture("sio.ttl"), "text/turtle");
  auto r = load_graph("http://example.org/onto.ttl", offline(), server.fetcher());
  CHECK(r.status.state == LoadState::kFailed);
  CHECK(r.status.reason == "network disabled");
  CHECK(r.graph.empty());
  CHECK(server.calls() == 0);

  EndpointSource ep{"http://example.org/sparql", std::nullopt, 10, 100};
  auto e = preload_endpoint(ep, offline(), server.fetcher());
  CHECK(e.status.state == LoadState::kFailed);
  CHECK(server.calls() == 0);
}

TEST_CASE("cache hit within TTL makes no request") {
  auto dir = temp_dir("cache");
  stubs::DocumentServer server;
  server.add("http://example.org/onto", read_fixture("sio.ttl"), "text/turtle; charset=utf-8");
  FetchPolicy policy;
  policy.cache_dir = dir.string();
  auto first = load_graph("http://example.org/onto", policy, server.fetcher());
  REQUIRE(first.status.state == LoadState::kLoaded);
  CHECK(server.calls() == 1);
  auto second = load_graph("http://example.org/onto", policy, server.fetcher());
  CHECK(second.from_cache);
  CHECK(server.calls() == 1);
  CHECK(render_ntriples(first.graph) == render_ntriples(second.graph));

  std::string hash = sha256_hex("http://example.org/onto");
  CHECK(fs::exists(dir / (hash + ".body")));
  CHECK(fs::exists(dir / (hash + ".meta")));

  // a fresh cache serves even when the network is off
  policy.allow_network = false;
  CHECK(load_graph("http://example.org/onto", policy, server.fetcher()).status.state == LoadState::kLoaded);

  // an expired entry is refetched
  policy.allow_network = true;
  policy.cache_ttl = std::chrono::seconds(0);
  load_graph("http://example.org/onto", policy, server.fetcher());
  CHECK(server.calls() == 2);
  fs::remove_all(dir);
}

TEST_CASE("parser choice by content type, extension, then sniffing") {
  stubs::DocumentServer server;
  std::string nt = read_fixture("instances.nt");
  server.add("http://e/by-type", nt, "application/n-triples");
  server.add("http://e/by-ext.nt", nt, "application/octet-stream");
  server.add("http://e/sniff", read_fixture("dc_bilingual.ttl"), "");
  server.add("http://e/sniff-nt", nt, "text/plain");
  FetchPolicy policy;
  for (const char* url : {"http://e/by-type", "http://e/by-ext.nt", "http://e/sniff-nt"}) {
    auto r = load_graph(url, policy, server.fetcher());
    CAPTURE(url);
    CHECK(r.status.state == LoadState::kLoaded);
    CHECK(r.graph.size() == 10);
  }
  auto r = load_graph("http://e/sniff", policy, server.fetcher());
  CHECK(r.status.state == LoadState::kLoaded);
  CHECK(r.graph.size() == 23);
}

TEST_CASE("fetch failures become failed statuses") {
  stubs::DocumentServer server;
  server.add("http://e/bad", "this is not rdf {", "text/turtle");
  server.add("http://e/big", std::string(2048, ' '), "text/turtle");
  FetchPolicy policy;
  auto r = load_graph("http://e/missing", policy, server.fetcher());
  CHECK(r.status.state == LoadState::kFailed);
  CHECK(r.status.reason.find("404") != std::string::npos);
  CHECK(load_graph("http://e/bad", policy, server.fetcher()).status.state == LoadState::kFailed);
  policy.max_bytes = 1024;
  auto big = load_graph("http://e/big", policy, server.fetcher());
  CHECK(big.status.state == LoadState::kFailed);
  CHECK(big.status.reason == "over size limit");
}

TEST_CASE("remote N-Triples are parsed leniently") {
  stubs::DocumentServer server;
  server.add("http://e/m.nt", read_fixture("malformed.nt"), "application/n-triples");
  auto r = load_graph("http://e/m.nt", FetchPolicy{}, server.fetcher());
  CHECK(r.status.state == LoadState::kLoaded);
  CHECK(r.graph.size() == 2);
  CHECK(r.diagnostics.size() == 1);
}

TEST_CASE("preload_endpoint reads labeled classes") {
  stubs::DocumentServer server;
  EndpointSource ep{"http://e/sparql", std::nullopt, 100, 1000};
  std::string label_url = "http://e/sparql?query=";
  stubs::Endpoint endpoint;
  auto fixture = nlohmann::json::parse(read_fixture("endpoint_labels.json"));
  for (const auto& row : fixture["results"]["bindings"]) endpoint.state->label_rows.push_back(row);
  auto r = preload_endpoint(ep, FetchPolicy{}, endpoint.fetcher());
  CHECK(r.status.state == LoadState::kLoaded);
  REQUIRE(r.terms.size() == 2);
  for (const auto& t : r.terms) CHECK(t.kinds == KindSet{TermKind::kOntClass});
  CHECK(find(r.terms, kOnto + "Gene")->labels.at("en") == std::vector<std::string>{"gene"});
  CHECK(find(r.terms, kOnto + "Protein")->labels.at("de") == std::vector<std::string>{"Protein"});
}

TEST_CASE("preload_endpoint with an empty result set") {
  stubs::Endpoint endpoint;
  auto r = preload_endpoint(EndpointSource{"http://e/sparql", std::nullopt, 100, 1000}, FetchPolicy{},
                            endpoint.fetcher());
  CHECK(r.terms.empty());
  CHECK(r.status.state == LoadState::kLoaded);
}

TEST_CASE("preload_endpoint pages with one request per page") {
  stubs::Endpoint endpoint;
  for (int i = 0; i < 3; ++i) {
    endpoint.state->label_rows.push_back(
        stubs::label_row(kOnto + "T" + std::to_string(i), "term " + std::to_string(i), "en"));
  }
  auto r = preload_endpoint(EndpointSource{"http://e/sparql", std::nullopt, 1, 1000}, FetchPolicy{},
                            endpoint.fetcher());
  CHECK(r.terms.size() == 3);
  CHECK(endpoint.state->label_requests == 3);
  CHECK(endpoint.state->predicate_requests == 1);
  CHECK(r.requests == 4);
}

TEST_CASE("preload_endpoint honors the row cap and default graph") {
  stubs::Endpoint endpoint;
  for (int i = 0; i < 10; ++i) {
    endpoint.state->label_rows.push_back(stubs::label_row(kOnto + "T" + std::to_string(i), "t", "en"));
  }
  stubs::DocumentServer urls;
  auto inner = endpoint.fetcher();
  std::vector<std::string> seen;
  Fetcher spy = [&](const FetchRequest& req) {
    seen.push_back(req.url);
    CHECK(req.accept == kSparqlResultsAccept);
    return inner(req);
  };
  auto r = preload_endpoint(EndpointSource{"http://e/sparql", Iri("http://e/graph"), 3, 5}, FetchPolicy{}, spy);
  CHECK(r.terms.size() == 5);
  REQUIRE(!seen.empty());
  CHECK(seen[0].find("default-graph-uri=http%3A%2F%2Fe%2Fgraph") != std::string::npos);
}

TEST_CASE("preload_endpoint keeps rows received before a failure") {
  stubs::Endpoint endpoint;
  for (int i = 0; i < 4; ++i) endpoint.state->label_rows.push_back(stubs::label_row(kOnto + "T" + std::to_string(i), "t", "en"));
  auto inner = endpoint.fetcher();
  int n = 0;
  Fetcher flaky = [&](const FetchRequest& req) {
    if (++n == 2) return FetchResponse{500, "", "", ""};
    return inner(req);
  };
  auto r = preload_endpoint(EndpointSource{"http://e/sparql", std::nullopt, 2, 1000}, FetchPolicy{}, flaky);
  CHECK(r.status.state == LoadState::kFailed);
  CHECK(r.terms.size() == 2);
}

TEST_CASE("endpoint queries have the documented shape") {
  CHECK(endpoint_label_query(10, 20).find("LIMIT 10 OFFSET 20") != std::string::npos);
  CHECK(endpoint_label_query(10, 20).find("<http://www.w3.org/2000/01/rdf-schema#label>") != std::string::npos);
  CHECK(endpoint_predicate_query(5, 0).rfind("SELECT DISTINCT ?p", 0) == 0);
}

TEST_CASE("ensure_from_graphs loads FROM graphs once") {
  stubs::DocumentServer server;
  server.add("http://example.org/instances", read_fixture("instances.nt"), "application/n-triples");
  std::string q = "SELECT * FROM <http://example.org/instances> WHERE { ?s ";
  auto ctx = derive_context(q, q.size());
  FetchPolicy policy;
  auto kb = ensure_from_graphs(ctx, KnowledgeBase{}, policy, server.fetcher());
  CHECK(server.calls() == 1);
  auto hits = kb.index.prefix_search("ali", LangPref({"en"}), {}, 5);
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].entry->term->iri.str() == kData + "alice");
  CHECK(kb.loaded_graphs.at("http://example.org/instances").state == LoadState::kLoaded);

  auto again = ensure_from_graphs(ctx, kb, policy, server.fetcher());
  CHECK(server.calls() == 1);
  CHECK(again.index.generation() == kb.index.generation());

  auto none = derive_context("SELECT * WHERE { ", 17);
  auto same = ensure_from_graphs(none, kb, policy, server.fetcher());
  CHECK(same.index.generation() == kb.index.generation());
}

TEST_CASE("a failed FROM graph is not retried within the TTL") {
  stubs::DocumentServer server;
  std::string q = "SELECT * FROM <http://example.org/missing> FROM NAMED <http://example.org/named> WHERE { ";
  auto ctx = derive_context(q, q.size());
  auto kb = ensure_from_graphs(ctx, KnowledgeBase{}, FetchPolicy{}, server.fetcher());
  CHECK(server.calls() == 2);
  CHECK(kb.loaded_graphs.at("http://example.org/missing").state == LoadState::kFailed);
  ensure_from_graphs(ctx, kb, FetchPolicy{}, server.fetcher());
  CHECK(server.calls() == 2);
  ensure_from_graphs(ctx, KnowledgeBase{}, FetchPolicy{}, server.fetcher(), false);
  CHECK(server.calls() == 3);
}

TEST_CASE("sha256_hex") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("FetchPolicy validation") {
  FetchPolicy p;
  CHECK_NOTHROW(p.validate());
  p.max_bytes = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = FetchPolicy{};
  p.timeout = std::chrono::milliseconds(0);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

namespace {

Graph random_rdf(std::mt19937& rng) {
  static const std::vector<std::string> subjects = {"http://x/a", "http://x/b", "http://x/C", "http://x/D"};
  static const std::vector<std::string> preds = {"http://x/p", "http://x/q", vocab::kRdfType, vocab::kRdfsLabel,
                                                 vocab::kRdfsComment, vocab::kRdfsSubClassOf};
  static const std::vector<std::string> objects = {"http://x/a", "http://x/C", "http://x/D", vocab::kOwlClass,
                                                   vocab::kOwlObjectProperty, vocab::kRdfProperty};
  Graph g;
  int n = 1 + static_cast<int>(rng() % 10);
  for (int i = 0; i < n; ++i) {
    Iri s(subjects[rng() % subjects.size()]);
    Iri p(preds[rng() % preds.size()]);
    if (p.str() == vocab::kRdfsLabel || p.str() == vocab::kRdfsComment) {
      g.insert(Triple(s, p, Literal("text " + std::to_string(rng() % 3), std::vector<std::string>{"en", "de"}[rng() % 2])));
    } else {
      g.insert(Triple(s, p, Iri(objects[rng() % objects.size()])));
    }
  }
  return g;
}

std::map<std::string, Term> without_source(std::map<std::string, Term> m) {
  for (auto& [k, t] : m) t.source.reset();
  return m;
}

}  // namespace

TEST_CASE("property: extract_terms commutes with graph merge") {
  std::mt19937 rng(61);
  for (int i = 0; i < 500; ++i) {
    Graph a = random_rdf(rng), b = random_rdf(rng);
    auto merged = extract_terms(graph_merge({a, b}));
    auto ta = extract_terms(a), tb = extract_terms(b);
    ta.insert(ta.end(), tb.begin(), tb.end());
    auto want = without_source(reference::merge_by_iri(ta));
    auto got = without_source(reference::merge_by_iri(merged));
    CAPTURE(render_ntriples(a));
    CAPTURE(render_ntriples(b));
    REQUIRE(got.size() == want.size());
    for (const auto& [iri, t] : want) {
      REQUIRE(got.count(iri));
      CHECK(got.at(iri).kinds == t.kinds);
      CHECK(got.at(iri).labels == t.labels);
      CHECK(got.at(iri).descriptions == t.descriptions);
    }
  }
}

TEST_CASE("property: profiles are monotone") {
  std::mt19937 rng(71);
  for (int i = 0; i < 300; ++i) {
    KnowledgeBase kb = extract_profiles(random_rdf(rng), KnowledgeBase{});
    KnowledgeBase more = extract_profiles(random_rdf(rng), kb);
    for (const auto& [iri, props] : kb.individual_properties) {
      REQUIRE(more.individual_properties.count(iri));
      for (const auto& p : props) REQUIRE(more.individual_properties.at(iri).count(p));
    }
  }
}
