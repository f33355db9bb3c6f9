#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sparql_assist {

namespace vocab {
inline constexpr std::string_view kRdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
inline constexpr std::string_view kRdfs = "http://www.w3.org/2000/01/rdf-schema#";
inline constexpr std::string_view kOwl = "http://www.w3.org/2002/07/owl#";
inline constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";

inline const std::string kRdfType = std::string(kRdf) + "type";
inline const std::string kRdfProperty = std::string(kRdf) + "Property";
inline const std::string kRdfsLabel = std::string(kRdfs) + "label";
inline const std::string kRdfsComment = std::string(kRdfs) + "comment";
inline const std::string kRdfsClass = std::string(kRdfs) + "Class";
inline const std::string kRdfsSubClassOf = std::string(kRdfs) + "subClassOf";
inline const std::string kOwlClass = std::string(kOwl) + "Class";
inline const std::string kOwlObjectProperty = std::string(kOwl) + "ObjectProperty";
inline const std::string kOwlDatatypeProperty = std::string(kOwl) + "DatatypeProperty";
inline const std::string kOwlAnnotationProperty = std::string(kOwl) + "AnnotationProperty";
inline const std::string kOwlNamedIndividual = std::string(kOwl) + "NamedIndividual";
inline const std::string kOwlOntology = std::string(kOwl) + "Ontology";
inline const std::string kXsdString = std::string(kXsd) + "string";
inline const std::string kXsdInteger = std::string(kXsd) + "integer";
inline const std::string kXsdDecimal = std::string(kXsd) + "decimal";
inline const std::string kXsdDouble = std::string(kXsd) + "double";
inline const std::string kXsdBoolean = std::string(kXsd) + "boolean";
}  // namespace vocab

/// An absolute IRI. Compared by exact string equality, never normalized.
class Iri {
 public:
  Iri() = default;
  /// Throws std::invalid_argument when `value` is empty or contains
  /// whitespace or angle brackets.
  explicit Iri(std::string value);

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  /// Text after the last '#' or '/', or the whole IRI when neither occurs.
  std::string_view local_name() const noexcept;

  friend auto operator<=>(const Iri&, const Iri&) = default;
  friend bool operator==(const Iri&, const Iri&) = default;

 private:
  std::string value_;
};

bool is_valid_iri(std::string_view value) noexcept;

struct BlankNode {
  std::string label;
  friend auto operator<=>(const BlankNode&, const BlankNode&) = default;
  friend bool operator==(const BlankNode&, const BlankNode&) = default;
};

/// A literal. At most one of `lang` / `datatype` is set; `lang` is stored
/// lowercased.
class Literal {
 public:
  Literal() = default;
  explicit Literal(std::string lexical) : lexical_(std::move(lexical)) {}
  Literal(std::string lexical, std::string lang);
  Literal(std::string lexical, Iri datatype);

  const std::string& lexical() const noexcept { return lexical_; }
  const std::optional<std::string>& lang() const noexcept { return lang_; }
  const std::optional<Iri>& datatype() const noexcept { return datatype_; }

  friend auto operator<=>(const Literal&, const Literal&) = default;
  friend bool operator==(const Literal&, const Literal&) = default;

 private:
  std::string lexical_;
  std::optional<std::string> lang_;
  std::optional<Iri> datatype_;
};

/// Lowercases and validates a BCP-47 style tag; returns nullopt if invalid.
std::optional<std::string> normalize_lang_tag(std::string_view tag);

using Node = std::variant<Iri, BlankNode, Literal>;

inline bool is_iri(const Node& n) noexcept { return std::holds_alternative<Iri>(n); }
inline bool is_blank(const Node& n) noexcept { return std::holds_alternative<BlankNode>(n); }
inline bool is_literal(const Node& n) noexcept { return std::holds_alternative<Literal>(n); }

/// N-Triples rendering of a single node.
std::string to_ntriples(const Node& n);

struct Triple {
  Node subject;
  Iri predicate;
  Node object;

  Triple() = default;
  /// Throws std::invalid_argument when the subject is a literal.
  Triple(Node s, Iri p, Node o);

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

class Graph {
 public:
  Graph() = default;
  explicit Graph(std::optional<Iri> source) : source_(std::move(source)) {}

  void insert(Triple t) { triples_.insert(std::move(t)); }
  bool contains(const Triple& t) const { return triples_.count(t) != 0; }
  std::size_t size() const noexcept { return triples_.size(); }
  bool empty() const noexcept { return triples_.empty(); }

  const std::set<Triple>& triples() const noexcept { return triples_; }
  auto begin() const noexcept { return triples_.begin(); }
  auto end() const noexcept { return triples_.end(); }

  const std::optional<Iri>& source() const noexcept { return source_; }
  void set_source(std::optional<Iri> source) { source_ = std::move(source); }

  /// Triple-set equality; the source is not compared.
  friend bool operator==(const Graph& a, const Graph& b) { return a.triples_ == b.triples_; }

 private:
  std::set<Triple> triples_;
  std::optional<Iri> source_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Raised for Turtle constructs outside the supported subset.
class UnsupportedConstructError : public ParseError {
 public:
  UnsupportedConstructError(std::size_t line, std::size_t column, std::string construct);
  const std::string& construct() const noexcept { return construct_; }

 private:
  std::string construct_;
};

enum class ParseMode { kStrict, kLenient };

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  Graph graph;
  std::vector<Diagnostic> diagnostics;
};

/// Parses N-Triples. In strict mode the first bad line throws ParseError; in
/// lenient mode bad lines are skipped and reported as diagnostics.
ParseResult parse_ntriples(std::string_view text, ParseMode mode = ParseMode::kStrict);

/// Parses the supported Turtle subset: @prefix/@base (and the SPARQL-style
/// PREFIX/BASE forms), prefixed names, `a`, `;` and `,` lists, labeled blank
/// nodes, string literals in all four quoting styles with language tags or
/// datatypes, and numeric/boolean shorthand. Collections and bracketed blank
/// nodes raise UnsupportedConstructError.
Graph parse_turtle(std::string_view text, const std::optional<Iri>& base = std::nullopt);

/// Set union with blank nodes of each distinct input renamed `g<k>_<label>`.
/// Inputs with identical triple sets share one scope index.
Graph graph_merge(const std::vector<Graph>& graphs);

std::string render_ntriples(const Graph& g);

/// Renders in the supported Turtle subset, grouping by subject with `;` and
/// `,`, using the given prefixes where the local part is a safe name.
std::string render_turtle(const Graph& g,
                          const std::vector<std::pair<std::string, std::string>>& prefixes = {});

/// Resolves `reference` against `base` (RFC 3986 section 5.2, without
/// normalization beyond dot-segment removal).
std::string resolve_iri(std::string_view base, std::string_view reference);

/// True if the reference begins with a URI scheme.
bool has_scheme(std::string_view reference) noexcept;

/// Strips a leading UTF-8 byte-order mark.
std::string_view strip_bom(std::string_view text) noexcept;

}  // namespace sparql_assist
