#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sparql_assist/rdf_model.hpp"
#include "sparql_assist/sparql_context.hpp"
#include "sparql_assist/term_index.hpp"

namespace sparql_assist {

enum class LoadState { kLoaded, kFailed, kPending };

std::string_view load_state_name(LoadState s) noexcept;

struct LoadStatus {
  LoadState state = LoadState::kPending;
  std::string reason;  // set when failed
  std::size_t triples = 0;
  std::chrono::system_clock::time_point at{};
};

struct KnowledgeBase {
  TermIndex index;
  std::map<Iri, std::set<Iri>> individual_properties;
  std::map<Iri, std::set<Iri>> class_properties;
  std::map<Iri, std::set<Iri>> subclass_of;  // direct rdfs:subClassOf edges
  std::map<Iri, std::set<Iri>> types_of;
  std::map<std::string, LoadStatus> loaded_graphs;  // keyed by source IRI or path

  /// Reflexive-transitive rdfs:subClassOf closure upward from `cls`.
  std::set<Iri> superclasses(const Iri& cls) const;
};

struct FetchPolicy {
  std::chrono::milliseconds timeout{10'000};
  std::size_t max_bytes = 64u << 20;
  std::string cache_dir;  // empty disables the disk cache
  std::chrono::seconds cache_ttl{86'400};
  bool allow_network = true;

  /// Throws std::invalid_argument naming the bad field.
  void validate() const;
};

struct FetchRequest {
  std::string url;
  std::string accept;
  std::chrono::milliseconds timeout{10'000};
  std::size_t max_bytes = 64u << 20;
};

struct FetchResponse {
  int status = 0;  // 0 when the transport failed
  std::string body;
  std::string content_type;
  std::string error;

  bool ok() const noexcept { return status >= 200 && status < 300 && error.empty(); }
};

/// Network capability. Everything that touches the network goes through one.
using Fetcher = std::function<FetchResponse(const FetchRequest&)>;

/// HTTP(S) fetcher: follows up to 5 redirects, aborts past max_bytes.
Fetcher http_fetcher();

struct EndpointSource {
  std::string url;
  std::optional<Iri> default_graph;
  std::size_t page_size = 1000;
  std::size_t row_cap = 50'000;
};

inline constexpr std::string_view kTurtleAccept = "text/turtle, application/n-triples;q=0.9, */*;q=0.1";
inline constexpr std::string_view kSparqlResultsAccept = "application/sparql-results+json";

/// Terms of every IRI in `g`: kinds from rdf:type declarations, predicate
/// use and rdfs:subClassOf; labels from rdfs:label; descriptions from
/// rdfs:comment. Sorted by IRI.
std::vector<Term> extract_terms(const Graph& g);

/// Adds the individual and class profiles and subclass edges of `g` to a
/// copy of `kb`. Profiled individuals are added to the index; the
/// generation always advances.
KnowledgeBase extract_profiles(const Graph& g, const KnowledgeBase& kb);

/// extract_terms + extract_profiles in one snapshot swap, recording `status`
/// under `source_key`.
KnowledgeBase add_graph(const KnowledgeBase& kb, const Graph& g, const std::string& source_key, LoadStatus status);

struct LoadResult {
  Graph graph;
  std::vector<Diagnostic> diagnostics;
  LoadStatus status;
  bool from_cache = false;
};

/// Loads an http(s) IRI, a file: IRI or a local path. Never throws; failures
/// come back as a failed status with an empty graph.
LoadResult load_graph(std::string_view source, const FetchPolicy& policy, const Fetcher& fetcher);

struct EndpointResult {
  std::vector<Term> terms;
  LoadStatus status;
  std::size_t requests = 0;
};

/// Harvests labeled resources and predicates from a SPARQL endpoint with
/// paged SELECT queries. Rows received before a failure are kept.
EndpointResult preload_endpoint(const EndpointSource& src, const FetchPolicy& policy, const Fetcher& fetcher);

/// The label and predicate queries for one page.
std::string endpoint_label_query(std::size_t limit, std::size_t offset);
std::string endpoint_predicate_query(std::size_t limit, std::size_t offset);

/// Loads every FROM (and, if `include_named`, FROM NAMED) graph of `ctx` not
/// yet loaded, or failed longer ago than the cache TTL.
KnowledgeBase ensure_from_graphs(const QueryContext& ctx, const KnowledgeBase& kb, const FetchPolicy& policy,
                                 const Fetcher& fetcher, bool include_named = true);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

}  // namespace sparql_assist
