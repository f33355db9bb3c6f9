#include "sparql_assist/term_index.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <algorithm>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace sparql_assist {

std::string_view term_kind_name(TermKind kind) noexcept {
  switch (kind) {
    case TermKind::kOntClass: return "ONT_CLASS";
    case TermKind::kProperty: return "PROPERTY";
    case TermKind::kIndividual: return "INDIVIDUAL";
    case TermKind::kGraph: return "GRAPH";
    case TermKind::kKeyword: return "KEYWORD";
  }
  return "INDIVIDUAL";
}

std::optional<TermKind> parse_term_kind(std::string_view name) noexcept {
  for (TermKind k : {TermKind::kOntClass, TermKind::kProperty, TermKind::kIndividual, TermKind::kGraph,
                     TermKind::kKeyword}) {
    if (term_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

TermKind KindSet::primary() const {
  for (TermKind k : {TermKind::kOntClass, TermKind::kProperty, TermKind::kIndividual, TermKind::kGraph,
                     TermKind::kKeyword}) {
    if (has(k)) return k;
  }
  return TermKind::kIndividual;
}

std::string_view match_field_name(MatchField f) noexcept {
  switch (f) {
    case MatchField::kLabel: return "LABEL";
    case MatchField::kDescription: return "DESCRIPTION";
    case MatchField::kLocalName: return "LOCALNAME";
  }
  return "LABEL";
}

namespace {

void add_unique(LangStrings& map, const std::string& lang, const std::string& text) {
  auto& list = map[lang];
  auto it = std::lower_bound(list.begin(), list.end(), text);
  if (it == list.end() || *it != text) list.insert(it, text);
}

}  // namespace

void Term::add_label(const std::string& lang, const std::string& text) { add_unique(labels, lang, text); }

void Term::add_description(const std::string& lang, const std::string& text) {
  add_unique(descriptions, lang, text);
}

void Term::merge(const Term& other) {
  kinds.merge(other.kinds);
  for (const auto& [lang, list] : other.labels) {
    for (const auto& s : list) add_label(lang, s);
  }
  for (const auto& [lang, list] : other.descriptions) {
    for (const auto& s : list) add_description(lang, s);
  }
  if (!source) source = other.source;
}

// ---------------------------------------------------------------------------
// Normalization

namespace {

std::string ascii_normalize(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (c == ' ' || (c >= '\t' && c <= '\r')) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : c);
  }
  return out;
}

std::string icu_normalize_once(const std::string& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfkd = icu::Normalizer2::getNFKDInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFKD normalizer unavailable");

  icu::UnicodeString text = icu::UnicodeString::fromUTF8(s);
  icu::UnicodeString decomposed = nfkd->normalize(text, status);
  decomposed.foldCase(U_FOLD_CASE_DEFAULT);
  decomposed = nfkd->normalize(decomposed, status);
  if (U_FAILURE(status)) return ascii_normalize(s);

  icu::UnicodeString kept;
  bool pending_space = false;
  for (int32_t i = 0; i < decomposed.length();) {
    UChar32 cp = decomposed.char32At(i);
    i += U16_LENGTH(cp);
    auto type = static_cast<UCharCategory>(u_charType(cp));
    if (type == U_NON_SPACING_MARK || type == U_ENCLOSING_MARK) continue;
    if (u_isUWhiteSpace(cp)) {
      pending_space = !kept.isEmpty();
      continue;
    }
    if (pending_space) kept.append(static_cast<UChar>(' '));
    pending_space = false;
    kept.append(cp);
  }
  std::string out;
  kept.toUTF8String(out);
  return out;
}

}  // namespace

std::string normalize_label(std::string_view s) {
  if (std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; })) {
    return ascii_normalize(s);
  }
  std::string current(s);
  // A second pass settles the rare inputs whose folded form is not itself
  // stable (for instance marks exposed by folding).
  for (int pass = 0; pass < 4; ++pass) {
    std::string next = icu_normalize_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

// ---------------------------------------------------------------------------
// Language preference

LangPref::LangPref(const std::vector<std::string>& langs) {
  for (const auto& raw : langs) {
    std::string lang;
    for (char c : raw) lang.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c + 32) : c);
    if (std::find(langs_.begin(), langs_.end(), lang) == langs_.end()) langs_.push_back(std::move(lang));
  }
  auto it = std::find(langs_.begin(), langs_.end(), "");
  if (it != langs_.end()) {
    untagged_tier_ = static_cast<std::size_t>(it - langs_.begin());
    other_tier_ = langs_.size();
  } else {
    untagged_tier_ = langs_.size();
    other_tier_ = langs_.size() + 1;
  }
}

std::size_t LangPref::tier(std::string_view lang) const {
  if (lang.empty()) return untagged_tier_;
  for (std::size_t i = 0; i < langs_.size(); ++i) {
    if (langs_[i] == lang) return i;
  }
  return other_tier_;
}

namespace {

std::optional<LabelChoice> preferred_of(const LangStrings& map, const LangPref& langs) {
  std::optional<LabelChoice> best;
  for (const auto& [lang, list] : map) {
    if (list.empty()) continue;
    std::size_t tier = langs.tier(lang);
    // Least string of the best tier; among other languages, the least tag.
    if (!best || tier < best->tier) best = LabelChoice{list.front(), lang, tier};
  }
  return best;
}

}  // namespace

std::optional<LabelChoice> preferred_label(const Term& term, const LangPref& langs) {
  return preferred_of(term.labels, langs);
}

std::optional<LabelChoice> preferred_description(const Term& term, const LangPref& langs) {
  return preferred_of(term.descriptions, langs);
}

// ---------------------------------------------------------------------------
// Index

bool hit_less(const SearchHit& a, const SearchHit& b) {
  const IndexEntry& x = *a.entry;
  const IndexEntry& y = *b.entry;
  return std::tie(a.tier, x.field, x.normalized_key, x.term->iri, x.lang, x.matched_text) <
         std::tie(b.tier, y.field, y.normalized_key, y.term->iri, y.lang, y.matched_text);
}

namespace {

struct Group {
  MatchField field;
  std::string lang;
  KindSet kinds;
  std::size_t begin;
  std::size_t end;
};

bool within_group_less(const IndexEntry& a, const IndexEntry& b) {
  return std::tie(a.normalized_key, a.term->iri, a.lang, a.matched_text) <
         std::tie(b.normalized_key, b.term->iri, b.lang, b.matched_text);
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && s.compare(0, prefix.size(), prefix) == 0;
}

void append_entries(const std::shared_ptr<const Term>& term, std::vector<IndexEntry>& out) {
  for (const auto& [lang, list] : term->labels) {
    for (const auto& s : list) out.push_back({normalize_label(s), term, s, lang, MatchField::kLabel});
  }
  for (const auto& [lang, list] : term->descriptions) {
    for (const auto& s : list) out.push_back({normalize_label(s), term, s, lang, MatchField::kDescription});
  }
  std::string_view local = term->iri.local_name();
  if (!local.empty()) {
    out.push_back({normalize_label(local), term, std::string(local), "", MatchField::kLocalName});
  }
}

}  // namespace

struct TermIndex::Impl {
  std::uint64_t generation = 0;
  std::map<Iri, std::shared_ptr<const Term>> by_iri;
  std::vector<IndexEntry> entries;
  std::vector<Group> groups;
  std::unordered_map<std::string, std::vector<std::size_t>> by_term;
  /// Kinds as declared by the sources, before the INDIVIDUAL fallback.
  std::map<Iri, KindSet> declared;

  /// Sorts entries into (field, lang, kinds) groups and builds lookups.
  void finish() {
    std::sort(entries.begin(), entries.end(), [](const IndexEntry& a, const IndexEntry& b) {
      auto ka = a.term->kinds.bits();
      auto kb = b.term->kinds.bits();
      return std::tie(a.field, a.lang, ka, a.normalized_key, a.term->iri, a.matched_text) <
             std::tie(b.field, b.lang, kb, b.normalized_key, b.term->iri, b.matched_text);
    });
    groups.clear();
    by_term.clear();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const IndexEntry& e = entries[i];
      if (groups.empty() || groups.back().field != e.field || groups.back().lang != e.lang ||
          groups.back().kinds != e.term->kinds) {
        groups.push_back({e.field, e.lang, e.term->kinds, i, i});
      }
      groups.back().end = i + 1;
      by_term[e.term->iri.str()].push_back(i);
    }
  }
};

namespace {

std::shared_ptr<const TermIndex::Impl> empty_impl() {
  static const auto impl = std::make_shared<const TermIndex::Impl>();
  return impl;
}

}  // namespace

TermIndex::TermIndex() : impl_(empty_impl()) {}

std::uint64_t TermIndex::generation() const noexcept { return impl_->generation; }
std::size_t TermIndex::term_count() const noexcept { return impl_->by_iri.size(); }
const std::vector<IndexEntry>& TermIndex::entries() const noexcept { return impl_->entries; }
const std::map<Iri, std::shared_ptr<const Term>>& TermIndex::by_iri() const noexcept { return impl_->by_iri; }

const Term* TermIndex::find(const Iri& iri) const {
  auto it = impl_->by_iri.find(iri);
  return it == impl_->by_iri.end() ? nullptr : it->second.get();
}

std::vector<SearchHit> TermIndex::prefix_search(std::string_view prefix, const LangPref& langs,
                                                const SearchFilter& filter, std::size_t limit) const {
  std::vector<SearchHit> out;
  if (limit == 0) return out;
  const std::string key = normalize_label(prefix);
  const auto& entries = impl_->entries;

  struct Range {
    std::size_t tier;
    MatchField field;
    std::size_t pos;
    std::size_t end;
  };
  std::vector<Range> ranges;
  for (const Group& g : impl_->groups) {
    if (!g.kinds.intersects(filter.kinds)) continue;
    auto first = std::lower_bound(entries.begin() + static_cast<std::ptrdiff_t>(g.begin),
                                  entries.begin() + static_cast<std::ptrdiff_t>(g.end), key,
                                  [](const IndexEntry& e, const std::string& k) { return e.normalized_key < k; });
    std::size_t pos = static_cast<std::size_t>(first - entries.begin());
    if (pos == g.end || !starts_with(entries[pos].normalized_key, key)) continue;
    std::size_t tier = g.field == MatchField::kLocalName ? langs.localname_tier() : langs.tier(g.lang);
    ranges.push_back({tier, g.field, pos, g.end});
  }
  std::sort(ranges.begin(), ranges.end(), [](const Range& a, const Range& b) {
    return std::tie(a.tier, a.field) < std::tie(b.tier, b.field);
  });

  std::unordered_set<const Term*> seen;
  for (std::size_t lo = 0; lo < ranges.size();) {
    std::size_t hi = lo;
    while (hi < ranges.size() && ranges[hi].tier == ranges[lo].tier && ranges[hi].field == ranges[lo].field) ++hi;

    // k-way merge over the ranges of one (tier, field) level.
    auto cmp = [&](std::size_t a, std::size_t b) {
      return within_group_less(entries[ranges[b].pos], entries[ranges[a].pos]);
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
    for (std::size_t r = lo; r < hi; ++r) heap.push(r);
    while (!heap.empty()) {
      std::size_t r = heap.top();
      heap.pop();
      const IndexEntry& e = entries[ranges[r].pos];
      if ((filter.iri_prefix.empty() || starts_with(e.term->iri.str(), filter.iri_prefix)) &&
          seen.insert(e.term.get()).second) {
        out.push_back({&e, ranges[r].tier});
        if (out.size() == limit) return out;
      }
      if (++ranges[r].pos < ranges[r].end && starts_with(entries[ranges[r].pos].normalized_key, key)) heap.push(r);
    }
    lo = hi;
  }
  return out;
}

std::optional<SearchHit> TermIndex::match_term(const Iri& iri, std::string_view normalized_prefix,
                                               const LangPref& langs) const {
  auto it = impl_->by_term.find(iri.str());
  if (it == impl_->by_term.end()) return std::nullopt;
  std::optional<SearchHit> best;
  for (std::size_t i : it->second) {
    const IndexEntry& e = impl_->entries[i];
    if (!starts_with(e.normalized_key, normalized_prefix)) continue;
    SearchHit hit{&e, e.field == MatchField::kLocalName ? langs.localname_tier() : langs.tier(e.lang)};
    if (!best || hit_less(hit, *best)) best = hit;
  }
  return best;
}

std::vector<const Term*> TermIndex::iri_prefix_search(std::string_view iri_prefix, KindSet kinds,
                                                      std::size_t limit) const {
  std::vector<const Term*> out;
  const auto& map = impl_->by_iri;
  auto it = map.begin();
  if (!iri_prefix.empty()) {
    if (!is_valid_iri(iri_prefix)) return out;
    it = map.lower_bound(Iri(std::string(iri_prefix)));
  }
  for (; it != map.end() && out.size() < limit; ++it) {
    if (!starts_with(it->first.str(), iri_prefix)) break;
    if (it->second->kinds.intersects(kinds)) out.push_back(it->second.get());
  }
  return out;
}

void TermIndex::dump(std::ostream& out) const {
  for (const auto& e : impl_->entries) {
    out << e.normalized_key << '\t' << match_field_name(e.field) << '\t' << e.lang << '\t' << e.term->iri.str()
        << '\t' << e.matched_text << '\n';
  }
}

namespace {

bool in_reserved_namespace(const std::string& iri) {
  for (std::string_view ns : {vocab::kRdf, vocab::kRdfs, vocab::kOwl, vocab::kXsd}) {
    if (starts_with(iri, ns)) return true;
  }
  return false;
}

}  // namespace

KindSet effective_kinds(const Iri& iri, KindSet declared) {
  if (!declared.empty() || in_reserved_namespace(iri.str())) return declared;
  return KindSet{TermKind::kIndividual};
}

TermIndex build_index(std::vector<Term> terms) {
  TermIndex out = swap_generation(TermIndex(), std::move(terms));
  std::const_pointer_cast<TermIndex::Impl>(out.impl_)->generation = 0;
  return out;
}

TermIndex swap_generation(const TermIndex& index, std::vector<Term> new_terms) {
  const TermIndex::Impl& old = *index.impl_;
  std::map<Iri, Term> changed;
  for (auto& t : new_terms) {
    auto it = changed.find(t.iri);
    if (it == changed.end()) {
      auto prior = old.by_iri.find(t.iri);
      Term base = prior == old.by_iri.end() ? Term{t.iri, {}, {}, {}, t.source} : *prior->second;
      base.kinds = prior == old.by_iri.end() ? KindSet{} : old.declared.at(t.iri);
      it = changed.emplace(t.iri, std::move(base)).first;
    }
    it->second.merge(t);
  }

  auto impl = std::make_shared<TermIndex::Impl>();
  impl->generation = old.generation + 1;
  impl->by_iri = old.by_iri;
  impl->declared = old.declared;
  impl->entries.reserve(old.entries.size());
  for (const auto& e : old.entries) {
    if (!changed.count(e.term->iri)) impl->entries.push_back(e);
  }
  for (auto& [iri, term] : changed) {
    impl->declared[iri] = term.kinds;
    term.kinds = effective_kinds(iri, term.kinds);
    auto ptr = std::make_shared<const Term>(std::move(term));
    append_entries(ptr, impl->entries);
    impl->by_iri.insert_or_assign(iri, std::move(ptr));
  }
  impl->finish();
  return TermIndex(std::move(impl));
}

}  // namespace sparql_assist
