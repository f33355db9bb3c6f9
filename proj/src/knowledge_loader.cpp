#include "sparql_assist/knowledge_loader.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "json.hpp"

namespace sparql_assist {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view load_state_name(LoadState s) noexcept {
  switch (s) {
    case LoadState::kLoaded: return "loaded";
    case LoadState::kFailed: return "failed";
    case LoadState::kPending: return "pending";
  }
  return "pending";
}

std::set<Iri> KnowledgeBase::superclasses(const Iri& cls) const {
  std::set<Iri> seen{cls};
  std::vector<Iri> stack{cls};
  while (!stack.empty()) {
    Iri c = std::move(stack.back());
    stack.pop_back();
    auto it = subclass_of.find(c);
    if (it == subclass_of.end()) continue;
    for (const Iri& sup : it->second) {
      if (seen.insert(sup).second) stack.push_back(sup);
    }
  }
  return seen;
}

void FetchPolicy::validate() const {
  if (timeout.count() <= 0) throw std::invalid_argument("fetch.timeout must be positive");
  if (max_bytes == 0) throw std::invalid_argument("fetch.max_bytes must be positive");
  if (cache_ttl.count() < 0) throw std::invalid_argument("fetch.cache_ttl must not be negative");
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

bool is_class_meta(const std::string& iri) { return iri == vocab::kOwlClass || iri == vocab::kRdfsClass; }

bool is_property_meta(const std::string& iri) {
  return iri == vocab::kOwlObjectProperty || iri == vocab::kOwlDatatypeProperty ||
         iri == vocab::kOwlAnnotationProperty || iri == vocab::kRdfProperty;
}

bool is_schema_predicate(const std::string& iri) {
  for (std::string_view ns : {vocab::kRdf, vocab::kRdfs, vocab::kOwl}) {
    if (iri.compare(0, ns.size(), ns) == 0) return true;
  }
  return false;
}

/// Declared kinds of every IRI mentioned in `g`, as a union of what each
/// triple says on its own. An empty set means no declaration.
std::map<Iri, KindSet> classify(const Graph& g) {
  std::map<Iri, KindSet> kinds;
  auto mark = [&](const Node& n, std::optional<TermKind> k) {
    const auto* iri = std::get_if<Iri>(&n);
    if (!iri) return;
    auto& set = kinds[*iri];
    // reserved vocabulary is never an individual
    if (k && (*k != TermKind::kIndividual || !effective_kinds(*iri, {}).empty())) set.add(*k);
  };
  for (const Triple& t : g) {
    const std::string& p = t.predicate.str();
    kinds[t.predicate].add(TermKind::kProperty);
    const auto* obj = std::get_if<Iri>(&t.object);
    if (p == vocab::kRdfType && obj) {
      const std::string& type = obj->str();
      if (is_class_meta(type)) {
        mark(t.subject, TermKind::kOntClass);
      } else if (is_property_meta(type)) {
        mark(t.subject, TermKind::kProperty);
      } else if (type == vocab::kOwlOntology) {
        mark(t.subject, TermKind::kGraph);
      } else if (type == vocab::kOwlNamedIndividual) {
        mark(t.subject, TermKind::kIndividual);
      } else {
        mark(t.subject, TermKind::kIndividual);
        mark(t.object, TermKind::kOntClass);
      }
    } else if (p == vocab::kRdfsSubClassOf) {
      mark(t.subject, TermKind::kOntClass);
      mark(t.object, TermKind::kOntClass);
    } else if (is_schema_predicate(p)) {
      mark(t.subject, std::nullopt);
    } else {
      mark(t.subject, TermKind::kIndividual);
      mark(t.object, TermKind::kIndividual);
    }
  }
  return kinds;
}

struct Profiles {
  std::map<Iri, std::set<Iri>> individual_properties;
  std::map<Iri, std::set<Iri>> class_properties;
  std::map<Iri, std::set<Iri>> subclass_of;
  std::map<Iri, std::set<Iri>> types_of;
};

Profiles profiles_of(const Graph& g, const std::map<Iri, KindSet>& kinds) {
  Profiles out;
  std::map<Iri, std::set<Iri>> predicates_of;
  for (const Triple& t : g) {
    const auto* subj = std::get_if<Iri>(&t.subject);
    if (!subj) continue;
    const auto* obj = std::get_if<Iri>(&t.object);
    if (t.predicate.str() == vocab::kRdfsSubClassOf && obj) out.subclass_of[*subj].insert(*obj);
    auto k = kinds.find(*subj);
    if (k == kinds.end() || !effective_kinds(*subj, k->second).has(TermKind::kIndividual)) continue;
    out.individual_properties[*subj].insert(t.predicate);
    if (t.predicate.str() == vocab::kRdfType && obj) {
      out.types_of[*subj].insert(*obj);
    } else {
      predicates_of[*subj].insert(t.predicate);
    }
  }
  for (const auto& [individual, types] : out.types_of) {
    auto preds = predicates_of.find(individual);
    if (preds == predicates_of.end()) continue;
    for (const Iri& c : types) out.class_properties[c].insert(preds->second.begin(), preds->second.end());
  }
  return out;
}

void merge_into(std::map<Iri, std::set<Iri>>& dst, const std::map<Iri, std::set<Iri>>& src) {
  for (const auto& [k, v] : src) dst[k].insert(v.begin(), v.end());
}

void apply_profiles(KnowledgeBase& kb, const Profiles& p) {
  merge_into(kb.individual_properties, p.individual_properties);
  merge_into(kb.class_properties, p.class_properties);
  merge_into(kb.subclass_of, p.subclass_of);
  merge_into(kb.types_of, p.types_of);
}

std::vector<Term> terms_from(const Graph& g, const std::map<Iri, KindSet>& kinds) {
  std::map<Iri, Term> terms;
  for (const auto& [iri, k] : kinds) terms.emplace(iri, Term{iri, k, {}, {}, g.source()});
  for (const Triple& t : g) {
    const auto* subj = std::get_if<Iri>(&t.subject);
    const auto* lit = std::get_if<Literal>(&t.object);
    if (!subj || !lit) continue;
    const std::string& p = t.predicate.str();
    if (p != vocab::kRdfsLabel && p != vocab::kRdfsComment) continue;
    auto it = terms.find(*subj);
    if (it == terms.end()) continue;
    const std::string lang = lit->lang().value_or("");
    if (p == vocab::kRdfsLabel) {
      it->second.add_label(lang, lit->lexical());
    } else {
      it->second.add_description(lang, lit->lexical());
    }
  }
  std::vector<Term> out;
  out.reserve(terms.size());
  for (auto& [iri, term] : terms) out.push_back(std::move(term));
  return out;
}

}  // namespace

std::vector<Term> extract_terms(const Graph& g) { return terms_from(g, classify(g)); }

KnowledgeBase extract_profiles(const Graph& g, const KnowledgeBase& kb) {
  KnowledgeBase out = kb;
  Profiles p = profiles_of(g, classify(g));
  std::vector<Term> stubs;
  for (const auto& [iri, props] : p.individual_properties) {
    stubs.push_back(Term{iri, KindSet{TermKind::kIndividual}, {}, {}, g.source()});
  }
  apply_profiles(out, p);
  out.index = swap_generation(kb.index, std::move(stubs));
  return out;
}

KnowledgeBase add_graph(const KnowledgeBase& kb, const Graph& g, const std::string& source_key, LoadStatus status) {
  KnowledgeBase out = kb;
  auto kinds = classify(g);
  apply_profiles(out, profiles_of(g, kinds));
  out.index = swap_generation(kb.index, terms_from(g, kinds));
  out.loaded_graphs[source_key] = std::move(status);
  return out;
}

// ---------------------------------------------------------------------------
// Loading

namespace {

enum class Syntax { kTurtle, kNTriples, kUnknown };

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return out;
}

Syntax syntax_from_content_type(std::string_view content_type) {
  std::string ct = lower(content_type.substr(0, content_type.find(';')));
  while (!ct.empty() && ct.back() == ' ') ct.pop_back();
  if (ct == "text/turtle" || ct == "application/x-turtle") return Syntax::kTurtle;
  if (ct == "application/n-triples") return Syntax::kNTriples;
  return Syntax::kUnknown;
}

Syntax syntax_from_name(std::string_view name) {
  std::string n = lower(name.substr(0, name.find_first_of("?#")));
  if (ends_with(n, ".ttl")) return Syntax::kTurtle;
  if (ends_with(n, ".nt")) return Syntax::kNTriples;
  return Syntax::kUnknown;
}

/// N-Triples when every statement line starts with an IRI or blank label.
Syntax sniff(std::string_view body) {
  std::istringstream in{std::string(body)};
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    std::size_t i = line.find_first_not_of(" \t\r");
    if (i == std::string::npos || line[i] == '#') continue;
    std::string_view rest = std::string_view(line).substr(i);
    if (!starts_with(rest, "<") && !starts_with(rest, "_:")) return Syntax::kTurtle;
    any = true;
  }
  return any ? Syntax::kNTriples : Syntax::kTurtle;
}

bool is_http(std::string_view s) {
  std::string l = lower(s.substr(0, 8));
  return starts_with(l, "http://") || starts_with(l, "https://");
}

LoadStatus failed(std::string reason) {
  return LoadStatus{LoadState::kFailed, std::move(reason), 0, std::chrono::system_clock::now()};
}

struct CacheEntry {
  std::string body;
  std::string content_type;
  std::chrono::system_clock::time_point fetched_at;
};

fs::path cache_base(const FetchPolicy& policy, std::string_view source) {
  return fs::path(policy.cache_dir) / sha256_hex(source);
}

std::optional<CacheEntry> read_cache(const FetchPolicy& policy, std::string_view source) {
  if (policy.cache_dir.empty()) return std::nullopt;
  fs::path base = cache_base(policy, source);
  std::ifstream meta(base.string() + ".meta");
  std::ifstream body(base.string() + ".body", std::ios::binary);
  if (!meta || !body) return std::nullopt;
  std::string line;
  std::getline(meta, line);
  // source TAB content-type TAB fetch time (seconds since epoch)
  auto t1 = line.find('\t');
  auto t2 = line.find('\t', t1 == std::string::npos ? t1 : t1 + 1);
  if (t1 == std::string::npos || t2 == std::string::npos || line.substr(0, t1) != source) return std::nullopt;
  CacheEntry entry;
  entry.content_type = line.substr(t1 + 1, t2 - t1 - 1);
  try {
    entry.fetched_at = std::chrono::system_clock::time_point(std::chrono::seconds(std::stoll(line.substr(t2 + 1))));
  } catch (const std::exception&) {
    return std::nullopt;
  }
  std::ostringstream ss;
  ss << body.rdbuf();
  entry.body = ss.str();
  return entry;
}

void write_cache(const FetchPolicy& policy, std::string_view source, const CacheEntry& entry) {
  if (policy.cache_dir.empty()) return;
  std::error_code ec;
  fs::create_directories(policy.cache_dir, ec);
  fs::path base = cache_base(policy, source);
  {
    std::ofstream body(base.string() + ".body", std::ios::binary | std::ios::trunc);
    body << entry.body;
  }
  std::ofstream meta(base.string() + ".meta", std::ios::trunc);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(entry.fetched_at.time_since_epoch()).count();
  meta << source << '\t' << entry.content_type << '\t' << secs << '\n';
}

bool fresh(const CacheEntry& e, const FetchPolicy& policy) {
  return std::chrono::system_clock::now() - e.fetched_at < policy.cache_ttl;
}

LoadResult parse_body(const std::string& body, std::string_view content_type, std::string_view source,
                      const std::optional<Iri>& graph_iri, bool remote) {
  LoadResult out;
  Syntax syntax = syntax_from_content_type(content_type);
  if (syntax == Syntax::kUnknown) syntax = syntax_from_name(source);
  if (syntax == Syntax::kUnknown) syntax = sniff(strip_bom(body));
  try {
    if (syntax == Syntax::kNTriples) {
      ParseResult r = parse_ntriples(body, remote ? ParseMode::kLenient : ParseMode::kStrict);
      out.graph = std::move(r.graph);
      out.diagnostics = std::move(r.diagnostics);
    } else {
      out.graph = parse_turtle(body, graph_iri);
    }
  } catch (const ParseError& e) {
    out.graph = Graph();
    out.status = failed(std::string("parse error: ") + e.what());
    return out;
  }
  out.graph.set_source(graph_iri);
  out.status = LoadStatus{LoadState::kLoaded, "", out.graph.size(), std::chrono::system_clock::now()};
  return out;
}

}  // namespace

LoadResult load_graph(std::string_view source, const FetchPolicy& policy, const Fetcher& fetcher) {
  if (!is_http(source)) {
    std::string path(source);
    if (starts_with(lower(source.substr(0, 7)), "file://")) path = path.substr(7);
    std::error_code ec;
    auto size = fs::file_size(path, ec);
    if (ec) {
      LoadResult out;
      out.status = failed("cannot read " + path);
      return out;
    }
    if (size > policy.max_bytes) {
      LoadResult out;
      out.status = failed("over size limit");
      return out;
    }
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string uri = "file://" + fs::absolute(path).lexically_normal().string();
    std::optional<Iri> graph_iri;
    if (is_valid_iri(uri)) graph_iri = Iri(uri);
    return parse_body(ss.str(), "", path, graph_iri, false);
  }

  std::optional<Iri> graph_iri;
  if (is_valid_iri(source)) graph_iri = Iri(std::string(source));
  if (auto cached = read_cache(policy, source); cached && fresh(*cached, policy)) {
    LoadResult out = parse_body(cached->body, cached->content_type, source, graph_iri, true);
    out.from_cache = true;
    return out;
  }
  if (!policy.allow_network) {
    LoadResult out;
    out.status = failed("network disabled");
    return out;
  }
  if (!fetcher) {
    LoadResult out;
    out.status = failed("no fetcher configured");
    return out;
  }
  FetchResponse resp = fetcher(FetchRequest{std::string(source), std::string(kTurtleAccept), policy.timeout,
                                            policy.max_bytes});
  if (!resp.ok()) {
    LoadResult out;
    out.status = failed(!resp.error.empty() ? resp.error : "HTTP status " + std::to_string(resp.status));
    return out;
  }
  if (resp.body.size() > policy.max_bytes) {
    LoadResult out;
    out.status = failed("over size limit");
    return out;
  }
  LoadResult out = parse_body(resp.body, resp.content_type, source, graph_iri, true);
  if (out.status.state == LoadState::kLoaded) {
    write_cache(policy, source, CacheEntry{resp.body, resp.content_type, std::chrono::system_clock::now()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Endpoints

namespace {

std::string url_encode(std::string_view s) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-' || c == '_' ||
        c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

std::string endpoint_url(const EndpointSource& src, const std::string& query) {
  std::string url = src.url;
  url += src.url.find('?') == std::string::npos ? '?' : '&';
  url += "query=" + url_encode(query);
  if (src.default_graph) url += "&default-graph-uri=" + url_encode(src.default_graph->str());
  return url;
}

/// One SPARQL JSON result binding as a node; nullopt for unknown shapes.
std::optional<Node> binding_node(const json& b) {
  if (!b.is_object() || !b.contains("type") || !b.contains("value")) return std::nullopt;
  const std::string type = b["type"].get<std::string>();
  const std::string value = b["value"].get<std::string>();
  if (type == "uri") {
    if (!is_valid_iri(value)) return std::nullopt;
    return Iri(value);
  }
  if (type == "bnode") return BlankNode{value};
  if (type == "literal" || type == "typed-literal") {
    if (b.contains("xml:lang")) {
      if (auto tag = normalize_lang_tag(b["xml:lang"].get<std::string>())) return Literal(value, *tag);
    }
    if (b.contains("datatype")) {
      std::string dt = b["datatype"].get<std::string>();
      if (is_valid_iri(dt)) return Literal(value, Iri(dt));
    }
    return Literal(value);
  }
  return std::nullopt;
}

}  // namespace

std::string endpoint_label_query(std::size_t limit, std::size_t offset) {
  return "SELECT ?term ?label ?type WHERE { ?term <" + vocab::kRdfsLabel + "> ?label OPTIONAL { ?term <" +
         vocab::kRdfType + "> ?type } } ORDER BY ?term LIMIT " + std::to_string(limit) + " OFFSET " +
         std::to_string(offset);
}

std::string endpoint_predicate_query(std::size_t limit, std::size_t offset) {
  return "SELECT DISTINCT ?p WHERE { ?s ?p ?o } ORDER BY ?p LIMIT " + std::to_string(limit) + " OFFSET " +
         std::to_string(offset);
}

EndpointResult preload_endpoint(const EndpointSource& src, const FetchPolicy& policy, const Fetcher& fetcher) {
  EndpointResult out;
  if (!policy.allow_network) {
    out.status = failed("network disabled");
    return out;
  }
  if (!fetcher) {
    out.status = failed("no fetcher configured");
    return out;
  }
  const std::size_t page = std::max<std::size_t>(src.page_size, 1);
  Graph g(src.default_graph);
  std::string error;

  // Runs one paged query; `row` turns a binding object into triples.
  auto harvest = [&](auto make_query, auto row) {
    for (std::size_t offset = 0; offset < src.row_cap && error.empty(); offset += page) {
      std::size_t limit = std::min(page, src.row_cap - offset);
      // One extra row tells whether another page exists.
      bool more_allowed = offset + limit < src.row_cap;
      FetchResponse resp = fetcher(FetchRequest{endpoint_url(src, make_query(limit + (more_allowed ? 1 : 0), offset)),
                                                std::string(kSparqlResultsAccept), policy.timeout, policy.max_bytes});
      ++out.requests;
      if (!resp.ok()) {
        error = !resp.error.empty() ? resp.error : "HTTP status " + std::to_string(resp.status);
        return;
      }
      std::size_t rows = 0;
      try {
        json doc = json::parse(resp.body);
        const json& bindings = doc.at("results").at("bindings");
        for (const json& b : bindings) {
          if (++rows > limit) break;
          row(b);
        }
      } catch (const std::exception& e) {
        error = std::string("bad SPARQL results: ") + e.what();
        return;
      }
      if (rows <= limit) return;
    }
  };

  harvest(endpoint_label_query, [&](const json& b) {
    auto term = b.contains("term") ? binding_node(b["term"]) : std::nullopt;
    auto label = b.contains("label") ? binding_node(b["label"]) : std::nullopt;
    if (!term || !std::holds_alternative<Iri>(*term)) return;
    if (label && std::holds_alternative<Literal>(*label)) g.insert(Triple(*term, Iri(vocab::kRdfsLabel), *label));
    if (b.contains("type")) {
      auto type = binding_node(b["type"]);
      if (type && std::holds_alternative<Iri>(*type)) g.insert(Triple(*term, Iri(vocab::kRdfType), *type));
    }
  });
  std::set<Iri> predicates;
  harvest(endpoint_predicate_query, [&](const json& b) {
    auto p = b.contains("p") ? binding_node(b["p"]) : std::nullopt;
    if (!p || !std::holds_alternative<Iri>(*p)) return;
    predicates.insert(std::get<Iri>(*p));
    // A self-typed statement marks the IRI as a property without inventing data.
    g.insert(Triple(std::get<Iri>(*p), Iri(vocab::kRdfType), Iri(vocab::kRdfProperty)));
  });

  // rdfs:label and rdf:type only carry the rows; they are terms only if the
  // endpoint reported them as predicates.
  for (Term& t : extract_terms(g)) {
    bool carrier = t.iri.str() == vocab::kRdfsLabel || t.iri.str() == vocab::kRdfType;
    if (carrier && !predicates.count(t.iri)) continue;
    if (is_valid_iri(src.url)) t.source = Iri(src.url);
    out.terms.push_back(std::move(t));
  }
  if (error.empty()) {
    out.status = LoadStatus{LoadState::kLoaded, "", g.size(), std::chrono::system_clock::now()};
  } else {
    out.status = failed(error);
    out.status.triples = g.size();
  }
  return out;
}

KnowledgeBase ensure_from_graphs(const QueryContext& ctx, const KnowledgeBase& kb, const FetchPolicy& policy,
                                 const Fetcher& fetcher, bool include_named) {
  std::vector<Iri> sources = ctx.from_graphs;
  if (include_named) sources.insert(sources.end(), ctx.from_named.begin(), ctx.from_named.end());
  KnowledgeBase out = kb;
  auto now = std::chrono::system_clock::now();
  for (const Iri& iri : sources) {
    auto it = out.loaded_graphs.find(iri.str());
    if (it != out.loaded_graphs.end()) {
      if (it->second.state != LoadState::kFailed || now - it->second.at < policy.cache_ttl) continue;
    }
    LoadResult r = load_graph(iri.str(), policy, fetcher);
    if (r.status.state == LoadState::kLoaded) {
      r.graph.set_source(iri);
      out = add_graph(out, r.graph, iri.str(), r.status);
    } else {
      out.loaded_graphs[iri.str()] = r.status;
    }
  }
  return out;
}

}  // namespace sparql_assist
