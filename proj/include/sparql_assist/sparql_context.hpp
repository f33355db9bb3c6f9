#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sparql_assist/rdf_model.hpp"

namespace sparql_assist {

enum class TokenKind {
  kKeyword,
  kVar,
  kIriRef,
  kPName,
  kBlankLabel,
  kString,
  kNumber,
  kLangTag,
  kPunct,
  kAKeyword,
  kComment,
  kWhitespace,
  kIncomplete,
};

std::string_view token_kind_name(TokenKind kind) noexcept;

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t start = 0;
  std::size_t end = 0;
};

/// Total tokenizer: every byte of the input lands in exactly one token, in
/// order. Bare words are KEYWORD tokens (`a` alone is A_KEYWORD); the
/// two-word forms FROM NAMED, ORDER BY and GROUP BY are single KEYWORD
/// tokens. Bytes that start no terminal become one-character PUNCT tokens,
/// and an unterminated IRI, string, variable sigil or prefixed name at end
/// of input becomes INCOMPLETE.
std::vector<Token> tokenize(std::string_view text);

enum class ClausePosition { kSubject, kPredicate, kObject, kKeyword, kPrologue, kUnknown };

std::string_view position_name(ClausePosition p) noexcept;

/// Which syntax keywords the grammar admits at the cursor.
enum class KeywordSlot {
  kNone,
  kPrologue,          // BASE PREFIX SELECT ASK
  kSelectStart,       // DISTINCT
  kDataset,           // FROM, FROM NAMED, WHERE
  kGroup,             // FILTER OPTIONAL GRAPH
  kGroupAfterBlock,   // FILTER OPTIONAL GRAPH UNION
  kPredicate,         // a
  kSolutionModifier,  // ORDER BY LIMIT OFFSET
  kOrderBy,           // ASC DESC
  kOrderByMore,       // ASC DESC LIMIT OFFSET
  kLimitOffset,       // LIMIT OFFSET
};

struct Variable {
  std::string name;  // without the sigil
  friend auto operator<=>(const Variable&, const Variable&) = default;
  friend bool operator==(const Variable&, const Variable&) = default;
};

using PatternNode = std::variant<Variable, Iri, Literal, BlankNode>;

/// `?x`, `<iri>`, `_:b` or the N-Triples form of a literal.
std::string to_string(const PatternNode& node);

struct TriplePattern {
  PatternNode subject;
  PatternNode predicate;
  PatternNode object;
  friend bool operator==(const TriplePattern&, const TriplePattern&) = default;
};

struct QueryContext {
  std::map<std::string, Iri> prefixes;
  std::optional<Iri> base;
  std::vector<Iri> from_graphs;
  std::vector<Iri> from_named;
  std::vector<std::string> variables;  // first-appearance order, no sigil
  std::vector<TriplePattern> patterns;
  ClausePosition position = ClausePosition::kPrologue;
  std::string partial_token;
  std::size_t partial_start = 0;  // byte offset where partial_token begins
  std::optional<PatternNode> focus_subject;
  std::optional<PatternNode> focus_predicate;
  bool in_string = false;
  bool in_comment = false;
  KeywordSlot keyword_slot = KeywordSlot::kPrologue;
  bool expecting_graph = false;  // after FROM, FROM NAMED or GRAPH

  bool has_variable(std::string_view name) const;
};

/// Derives the grammatical context at `cursor` from the text to its left.
/// Never throws; a cursor past the end is clamped.
QueryContext derive_context(std::string_view text, std::size_t cursor);

class UnknownPrefixError : public std::runtime_error {
 public:
  explicit UnknownPrefixError(std::string prefix)
      : std::runtime_error("unknown prefix '" + prefix + "'"), prefix_(std::move(prefix)) {}
  const std::string& prefix() const noexcept { return prefix_; }

 private:
  std::string prefix_;
};

/// Expands `prefix:local` against the context's declarations. Backslash
/// escapes in the local part are removed.
Iri expand_prefixed_name(const QueryContext& ctx, std::string_view pname);

enum class Direction { kSubjectToObject, kObjectToSubject };

struct PathStep {
  Iri predicate;
  Direction direction;
  friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct ConnectedIndividual {
  Iri individual;
  std::vector<PathStep> path;
};

/// IRIs reachable from `variable` through the context's triple patterns,
/// treated as an undirected multigraph, within `max_depth` edges. Only
/// patterns with an IRI predicate other than rdf:type form edges. Each
/// individual appears once with its lexicographically least shortest path;
/// results are ordered by (depth, IRI).
std::vector<ConnectedIndividual> connected_individuals(const QueryContext& ctx, std::string_view variable,
                                                       std::size_t max_depth = 2);

}  // namespace sparql_assist
