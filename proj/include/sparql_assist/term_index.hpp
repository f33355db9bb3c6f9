#pragma once

#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparql_assist/rdf_model.hpp"

namespace sparql_assist {

enum class TermKind { kOntClass, kProperty, kIndividual, kGraph, kKeyword };

std::string_view term_kind_name(TermKind kind) noexcept;
std::optional<TermKind> parse_term_kind(std::string_view name) noexcept;

/// Small bit set over TermKind. A term declared both as a class and a
/// property carries both kinds.
class KindSet {
 public:
  constexpr KindSet() = default;
  constexpr KindSet(std::initializer_list<TermKind> kinds) {
    for (TermKind k : kinds) add(k);
  }
  static constexpr KindSet all() { return KindSet(0x1F); }

  constexpr void add(TermKind k) { bits_ |= bit(k); }
  constexpr void merge(KindSet other) { bits_ |= other.bits_; }
  constexpr bool has(TermKind k) const { return (bits_ & bit(k)) != 0; }
  constexpr bool intersects(KindSet other) const { return (bits_ & other.bits_) != 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::uint8_t bits() const { return bits_; }

  /// The kind reported on the wire: class, then property, then individual.
  TermKind primary() const;

  friend constexpr bool operator==(KindSet, KindSet) = default;

 private:
  explicit constexpr KindSet(std::uint8_t bits) : bits_(bits) {}
  static constexpr std::uint8_t bit(TermKind k) { return static_cast<std::uint8_t>(1u << static_cast<int>(k)); }
  std::uint8_t bits_ = 0;
};

/// lang tag ("" for untagged) -> sorted strings without repeats.
using LangStrings = std::map<std::string, std::vector<std::string>>;

struct Term {
  Iri iri;
  KindSet kinds;
  LangStrings labels;
  LangStrings descriptions;
  std::optional<Iri> source;

  TermKind kind() const { return kinds.primary(); }
  void add_label(const std::string& lang, const std::string& text);
  void add_description(const std::string& lang, const std::string& text);
  /// Unions kinds, labels and descriptions; keeps the first source.
  void merge(const Term& other);

  friend bool operator==(const Term&, const Term&) = default;
};

/// Kinds a term is indexed under. Terms with no declared kind are
/// individuals, except IRIs in the rdf, rdfs, owl and xsd namespaces.
KindSet effective_kinds(const Iri& iri, KindSet declared);

/// Compatibility decomposition, full case fold, combining-mark removal,
/// whitespace collapsed to single spaces and trimmed.
std::string normalize_label(std::string_view s);

/// Ordered language preference. Tiers: the listed tags in order, then
/// untagged (unless listed explicitly), then every other language, then
/// IRI local names.
class LangPref {
 public:
  LangPref() = default;
  explicit LangPref(const std::vector<std::string>& langs);

  const std::vector<std::string>& langs() const noexcept { return langs_; }
  std::size_t tier(std::string_view lang) const;
  std::size_t other_tier() const noexcept { return other_tier_; }
  std::size_t localname_tier() const noexcept { return other_tier_ + 1; }

  friend bool operator==(const LangPref& a, const LangPref& b) { return a.langs_ == b.langs_; }

 private:
  std::vector<std::string> langs_;
  std::size_t untagged_tier_ = 0;
  std::size_t other_tier_ = 1;
};

enum class MatchField { kLabel, kDescription, kLocalName };

std::string_view match_field_name(MatchField f) noexcept;

struct IndexEntry {
  std::string normalized_key;
  std::shared_ptr<const Term> term;
  std::string matched_text;
  std::string lang;
  MatchField field = MatchField::kLabel;
};

struct SearchHit {
  const IndexEntry* entry = nullptr;
  std::size_t tier = 0;
};

/// Full ordering key of a hit: (tier, field, normalized key, IRI, lang,
/// matched text).
bool hit_less(const SearchHit& a, const SearchHit& b);

struct SearchFilter {
  KindSet kinds = KindSet::all();
  std::string iri_prefix;  // only terms whose IRI starts with this
};

/// Immutable snapshot. Copies share storage; hits point into the snapshot
/// and stay valid while any copy is alive.
class TermIndex {
 public:
  TermIndex();

  std::uint64_t generation() const noexcept;
  std::size_t term_count() const noexcept;
  const std::vector<IndexEntry>& entries() const noexcept;
  const std::map<Iri, std::shared_ptr<const Term>>& by_iri() const noexcept;
  const Term* find(const Iri& iri) const;

  /// Entries whose key starts with normalize_label(prefix), one per IRI (the
  /// best by hit_less), in hit_less order, at most `limit`.
  std::vector<SearchHit> prefix_search(std::string_view prefix, const LangPref& langs, const SearchFilter& filter,
                                       std::size_t limit) const;

  /// The best hit for one term against an already-normalized prefix.
  std::optional<SearchHit> match_term(const Iri& iri, std::string_view normalized_prefix,
                                      const LangPref& langs) const;

  /// Terms whose IRI string starts with `iri_prefix`, in IRI order.
  std::vector<const Term*> iri_prefix_search(std::string_view iri_prefix, KindSet kinds, std::size_t limit) const;

  /// One line per entry: key, field, lang, IRI, matched text (tab separated).
  void dump(std::ostream& out) const;

  struct Impl;

 private:
  explicit TermIndex(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;

  friend TermIndex build_index(std::vector<Term> terms);
  friend TermIndex swap_generation(const TermIndex& index, std::vector<Term> new_terms);
};

TermIndex build_index(std::vector<Term> terms);

/// New snapshot holding the union of the old terms and `new_terms`, with
/// generation + 1. The old snapshot is untouched.
TermIndex swap_generation(const TermIndex& index, std::vector<Term> new_terms);

/// Tier and text of the label a term would be displayed with.
struct LabelChoice {
  std::string text;
  std::string lang;
  std::size_t tier = 0;
};

std::optional<LabelChoice> preferred_label(const Term& term, const LangPref& langs);
std::optional<LabelChoice> preferred_description(const Term& term, const LangPref& langs);

}  // namespace sparql_assist
