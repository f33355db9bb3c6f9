#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "sparql_assist/knowledge_loader.hpp"
#include "sparql_assist/rdf_model.hpp"
#include "sparql_assist/sparql_context.hpp"
#include "sparql_assist/term_index.hpp"

namespace sparql_assist {

enum class ProvenanceKind { kOntology, kRegistry, kSyntax, kQueryLocal };

std::string_view provenance_name(ProvenanceKind k) noexcept;

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::kSyntax;
  std::optional<Iri> iri;  // source graph or service
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Lower sorts earlier, compared lexicographically.
struct ScoreTuple {
  int context_boost = 0;
  std::size_t lang_tier = 0;
  int match_tier = 0;
  std::string normalized_label;
  std::string iri;

  friend auto operator<=>(const ScoreTuple&, const ScoreTuple&) = default;
  friend bool operator==(const ScoreTuple&, const ScoreTuple&) = default;
};

struct Suggestion {
  std::string insert_text;
  std::string display_label;
  std::optional<std::string> description;
  std::optional<Iri> iri;
  TermKind kind = TermKind::kKeyword;
  std::string lang;
  ScoreTuple score;
  Provenance provenance;

  friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

struct RegistryService {
  Iri iri;
  Iri input_class;
  std::set<Iri> attached_properties;
  std::optional<std::string> label;
};

class Registry {
 public:
  /// Throws std::invalid_argument on a duplicate IRI or an empty property set.
  void add(RegistryService service);
  const std::vector<RegistryService>& services() const noexcept { return services_; }
  bool empty() const noexcept { return services_.empty(); }

 private:
  std::vector<RegistryService> services_;
};

/// Tab-separated records: service IRI, input class IRI, comma-separated
/// property IRIs, optional label. `#` lines and blank lines are skipped.
/// Throws ParseError with the line number on a bad record.
Registry parse_registry(std::string_view text);
Registry load_registry(const std::string& path);

struct SuggestOptions {
  LangPref langs;
  std::size_t limit = 20;
  bool include_syntax = true;
  bool registry_enabled = false;
  std::size_t connectivity_depth = 2;
};

std::vector<Suggestion> suggest(const QueryContext& ctx, const KnowledgeBase& kb, const Registry* registry,
                                const SuggestOptions& opts);

/// Keywords legal at the cursor, filtered by the partial token ignoring case,
/// in alphabetical order.
std::vector<Suggestion> suggest_syntax(const QueryContext& ctx);

/// Properties attached by services whose input class is a superclass (or
/// equal) of some focus type. Every service passes when focus_types is empty.
std::set<Iri> registry_filter(const Registry& registry, const std::set<Iri>& focus_types, const KnowledgeBase& kb);

/// Declared types of the focus subject: from the knowledge base for an IRI,
/// plus `rdf:type` patterns on it in the query.
std::set<Iri> focus_types(const QueryContext& ctx, const KnowledgeBase& kb);

/// Shortest form of `iri` under the context's prefixes that tokenizes as a
/// single PNAME, else `<iri>`.
std::string render_iri(const QueryContext& ctx, const Iri& iri);

struct Splice {
  std::string text;
  std::size_t cursor = 0;
};

/// Replaces the partial token (or inserts at the cursor) with the
/// suggestion's text plus one space; the cursor lands after the space.
Splice apply_suggestion(std::string_view text, std::size_t cursor, const QueryContext& ctx, const Suggestion& s);

}  // namespace sparql_assist
