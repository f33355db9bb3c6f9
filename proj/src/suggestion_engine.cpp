#include "sparql_assist/suggestion_engine.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "text_util.hpp"

namespace sparql_assist {

std::string_view provenance_name(ProvenanceKind k) noexcept {
  switch (k) {
    case ProvenanceKind::kOntology: return "ONTOLOGY";
    case ProvenanceKind::kRegistry: return "REGISTRY";
    case ProvenanceKind::kSyntax: return "SYNTAX";
    case ProvenanceKind::kQueryLocal: return "QUERY_LOCAL";
  }
  return "SYNTAX";
}

// ---------------------------------------------------------------------------
// Registry

void Registry::add(RegistryService service) {
  if (service.attached_properties.empty()) {
    throw std::invalid_argument("service " + service.iri.str() + " attaches no properties");
  }
  for (const auto& s : services_) {
    if (s.iri == service.iri) throw std::invalid_argument("duplicate service " + service.iri.str());
  }
  services_.push_back(std::move(service));
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

Iri registry_iri(const std::string& raw, std::size_t line) {
  std::string v = trim(raw);
  if (v.size() >= 2 && v.front() == '<' && v.back() == '>') v = v.substr(1, v.size() - 2);
  if (!is_valid_iri(v)) throw ParseError(line, 1, "bad IRI '" + v + "'");
  return Iri(v);
}

}  // namespace

Registry parse_registry(std::string_view text) {
  Registry reg;
  std::istringstream in{std::string(strip_bom(text))};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (fields.size() < 3 || fields.size() > 4) {
      throw ParseError(lineno, 1, "expected 3 or 4 tab-separated fields");
    }
    RegistryService svc;
    svc.iri = registry_iri(fields[0], lineno);
    svc.input_class = registry_iri(fields[1], lineno);
    std::stringstream props(fields[2]);
    std::string p;
    while (std::getline(props, p, ',')) {
      if (!trim(p).empty()) svc.attached_properties.insert(registry_iri(p, lineno));
    }
    if (fields.size() == 4 && !trim(fields[3]).empty()) svc.label = trim(fields[3]);
    try {
      reg.add(std::move(svc));
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, 1, e.what());
    }
  }
  return reg;
}

Registry load_registry(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read registry " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_registry(ss.str());
}

std::set<Iri> registry_filter(const Registry& registry, const std::set<Iri>& focus_types, const KnowledgeBase& kb) {
  std::set<Iri> accepted;
  for (const Iri& t : focus_types) {
    auto sup = kb.superclasses(t);
    accepted.insert(sup.begin(), sup.end());
  }
  std::set<Iri> out;
  for (const auto& s : registry.services()) {
    if (focus_types.empty() || accepted.count(s.input_class)) {
      out.insert(s.attached_properties.begin(), s.attached_properties.end());
    }
  }
  return out;
}

std::set<Iri> focus_types(const QueryContext& ctx, const KnowledgeBase& kb) {
  std::set<Iri> out;
  if (!ctx.focus_subject) return out;
  if (const auto* iri = std::get_if<Iri>(&*ctx.focus_subject)) {
    auto it = kb.types_of.find(*iri);
    if (it != kb.types_of.end()) out.insert(it->second.begin(), it->second.end());
  }
  for (const auto& p : ctx.patterns) {
    if (p.subject != *ctx.focus_subject) continue;
    const auto* pred = std::get_if<Iri>(&p.predicate);
    const auto* cls = std::get_if<Iri>(&p.object);
    if (pred && cls && pred->str() == vocab::kRdfType) out.insert(*cls);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering and splicing

namespace {

bool single_token(std::string_view text, TokenKind kind) {
  auto toks = tokenize(text);
  return toks.size() == 1 && toks[0].kind == kind;
}

/// Escapes characters a local name cannot carry bare.
std::string escape_local(std::string_view local) {
  std::string out;
  for (std::size_t i = 0; i < local.size(); ++i) {
    char c = local[i];
    bool percent_escape = c == '%' && i + 2 < local.size() && text_util::hex_value(local[i + 1]) >= 0 &&
                          text_util::hex_value(local[i + 2]) >= 0;
    bool inner = i > 0 && i + 1 < local.size();
    bool needs = text_util::is_local_escapable(c) && c != '_' && !percent_escape && !(c == '-' && i > 0) &&
                 !(c == '.' && inner);
    if (needs) out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string render_iri(const QueryContext& ctx, const Iri& iri) {
  const std::string& s = iri.str();
  const std::string* best_label = nullptr;
  std::size_t best_len = 0;
  for (const auto& [label, ns] : ctx.prefixes) {
    const std::string& n = ns.str();
    if (n.size() <= s.size() && s.compare(0, n.size(), n) == 0 && (!best_label || n.size() > best_len)) {
      best_label = &label;
      best_len = n.size();
    }
  }
  if (best_label) {
    std::string pname = *best_label + ":" + escape_local(std::string_view(s).substr(best_len));
    if (single_token(pname, TokenKind::kPName)) {
      try {
        if (expand_prefixed_name(ctx, pname) == iri) return pname;
      } catch (const std::exception&) {
      }
    }
  }
  return "<" + s + ">";
}

Splice apply_suggestion(std::string_view text, std::size_t cursor, const QueryContext& ctx, const Suggestion& s) {
  cursor = std::min(cursor, text.size());
  std::size_t start = ctx.partial_token.empty() ? cursor : std::min(ctx.partial_start, cursor);
  auto build = [&](bool lead_space) {
    Splice out;
    out.text.reserve(text.size() + s.insert_text.size() + 2);
    out.text.append(text.substr(0, start));
    if (lead_space) out.text.push_back(' ');
    out.text.append(s.insert_text);
    out.text.push_back(' ');
    out.cursor = out.text.size();
    out.text.append(text.substr(cursor));
    return out;
  };
  Splice plain = build(false);
  if (start == 0 || !ctx.partial_token.empty()) return plain;
  // Inserting right after a token can fuse the two (a language tag followed
  // by a keyword, say); separate them when that happens.
  std::size_t ins_begin = start;
  std::size_t ins_end = start + s.insert_text.size();
  for (const Token& t : tokenize(std::string_view(plain.text).substr(0, plain.cursor))) {
    if (t.start < ins_begin && t.end > ins_begin) return build(true);
    if (t.start == ins_begin) return t.end == ins_end ? plain : build(true);
  }
  return plain;
}

// ---------------------------------------------------------------------------
// Syntax

namespace {

std::vector<std::string_view> keywords_for(KeywordSlot slot) {
  switch (slot) {
    case KeywordSlot::kPrologue: return {"ASK", "BASE", "PREFIX", "SELECT"};
    case KeywordSlot::kSelectStart: return {"DISTINCT"};
    case KeywordSlot::kDataset: return {"FROM", "FROM NAMED", "WHERE"};
    case KeywordSlot::kGroup: return {"FILTER", "GRAPH", "OPTIONAL"};
    case KeywordSlot::kGroupAfterBlock: return {"FILTER", "GRAPH", "OPTIONAL", "UNION"};
    case KeywordSlot::kPredicate: return {"a"};
    case KeywordSlot::kSolutionModifier: return {"LIMIT", "OFFSET", "ORDER BY"};
    case KeywordSlot::kOrderBy: return {"ASC", "DESC"};
    case KeywordSlot::kOrderByMore: return {"ASC", "DESC", "LIMIT", "OFFSET"};
    case KeywordSlot::kLimitOffset: return {"LIMIT", "OFFSET"};
    case KeywordSlot::kNone: return {};
  }
  return {};
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && text_util::iequals(s.substr(0, prefix.size()), prefix);
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return out;
}

Suggestion keyword_suggestion(std::string_view kw, int boost) {
  Suggestion s;
  s.insert_text = std::string(kw);
  s.display_label = std::string(kw);
  s.kind = TermKind::kKeyword;
  s.score = ScoreTuple{boost, 0, 0, lowercase(kw), ""};
  s.provenance = Provenance{ProvenanceKind::kSyntax, std::nullopt};
  return s;
}

/// Keyword partials are bare words (or `a`); anything else filters every
/// keyword out.
bool keyword_partial(const QueryContext& ctx) {
  if (ctx.partial_token.empty()) return true;
  auto toks = tokenize(ctx.partial_token);
  return toks.size() == 1 && (toks[0].kind == TokenKind::kKeyword || toks[0].kind == TokenKind::kAKeyword);
}

}  // namespace

std::vector<Suggestion> suggest_syntax(const QueryContext& ctx) {
  std::vector<Suggestion> out;
  if (ctx.in_string || ctx.in_comment || !keyword_partial(ctx)) return out;
  for (std::string_view kw : keywords_for(ctx.keyword_slot)) {
    if (istarts_with(kw, ctx.partial_token)) out.push_back(keyword_suggestion(kw, 0));
  }
  std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) { return a.score < b.score; });
  return out;
}

// ---------------------------------------------------------------------------
// Suggest

namespace {

enum class PartialKind { kNone, kVar, kWord, kPName, kIriRef, kOther };

struct Partial {
  PartialKind kind = PartialKind::kNone;
  std::string word;        // text to match labels against
  std::string namespace_;  // PNAME: expanded namespace
  std::string iri_prefix;  // IRIREF: text after '<'
};

Partial classify_partial(const QueryContext& ctx) {
  Partial p;
  const std::string& t = ctx.partial_token;
  if (t.empty()) return p;
  char c = t.front();
  if (c == '?' || c == '$') {
    p.kind = PartialKind::kVar;
    p.word = t.substr(1);
    return p;
  }
  if (c == '<') {
    p.kind = PartialKind::kIriRef;
    p.iri_prefix = t.substr(1);
    if (!p.iri_prefix.empty() && p.iri_prefix.back() == '>') p.iri_prefix.pop_back();
    return p;
  }
  auto colon = t.find(':');
  if (colon != std::string::npos) {
    auto it = ctx.prefixes.find(t.substr(0, colon));
    if (it == ctx.prefixes.end()) {
      p.kind = PartialKind::kOther;
      return p;
    }
    p.kind = PartialKind::kPName;
    p.namespace_ = it->second.str();
    // Unescape the local part; a dangling escape at the end is dropped.
    std::string local = t.substr(colon + 1);
    for (std::size_t i = 0; i < local.size(); ++i) {
      if (local[i] == '\\') {
        if (i + 1 < local.size()) p.word.push_back(local[++i]);
      } else if (local[i] == '%' && i + 2 >= local.size()) {
        break;
      } else {
        p.word.push_back(local[i]);
      }
    }
    return p;
  }
  p.kind = PartialKind::kWord;
  p.word = t;
  return p;
}

int match_tier_of(MatchField f) {
  switch (f) {
    case MatchField::kLabel: return 1;
    case MatchField::kDescription: return 2;
    case MatchField::kLocalName: return 3;
  }
  return 3;
}

TermKind reported_kind(KindSet kinds, KindSet allowed) {
  for (TermKind k : {TermKind::kOntClass, TermKind::kProperty, TermKind::kIndividual, TermKind::kGraph}) {
    if (kinds.has(k) && allowed.has(k)) return k;
  }
  return kinds.primary();
}

class Builder {
 public:
  Builder(const QueryContext& ctx, const KnowledgeBase& kb, const SuggestOptions& opts)
      : ctx_(ctx), kb_(kb), opts_(opts) {}

  void add(Suggestion s) {
    std::string key = s.iri ? "<" + s.iri->str() + ">" : s.insert_text;
    auto it = by_key_.find(key);
    if (it == by_key_.end()) {
      by_key_.emplace(std::move(key), out_.size());
      out_.push_back(std::move(s));
      return;
    }
    Suggestion& prior = out_[it->second];
    bool registry = prior.provenance.kind == ProvenanceKind::kRegistry ||
                    s.provenance.kind == ProvenanceKind::kRegistry;
    std::optional<Iri> registry_iri =
        prior.provenance.kind == ProvenanceKind::kRegistry ? prior.provenance.iri : s.provenance.iri;
    if (s.score < prior.score) prior = std::move(s);
    if (registry) prior.provenance = Provenance{ProvenanceKind::kRegistry, registry_iri};
  }

  Suggestion from_term(const Term& term, const SearchHit* hit, int boost, KindSet allowed) const {
    Suggestion s;
    s.iri = term.iri;
    s.insert_text = render_iri(ctx_, term.iri);
    s.kind = reported_kind(term.kinds, allowed);
    auto label = preferred_label(term, opts_.langs);
    if (hit && hit->entry->field == MatchField::kLabel) {
      s.display_label = hit->entry->matched_text;
      s.lang = hit->entry->lang;
    } else if (label) {
      s.display_label = label->text;
      s.lang = hit && hit->entry->field == MatchField::kDescription ? hit->entry->lang : label->lang;
    } else {
      s.display_label = std::string(term.iri.local_name());
      s.lang = hit && hit->entry->field == MatchField::kDescription ? hit->entry->lang : "";
    }
    if (auto d = preferred_description(term, opts_.langs)) s.description = d->text;
    if (hit) {
      s.score = ScoreTuple{boost, hit->tier, match_tier_of(hit->entry->field), hit->entry->normalized_key,
                           term.iri.str()};
    } else {
      s.score = ScoreTuple{boost, opts_.langs.localname_tier(), 3, term.iri.str(), term.iri.str()};
    }
    s.provenance = Provenance{ProvenanceKind::kOntology, term.source};
    return s;
  }

  std::vector<Suggestion> finish() {
    std::sort(out_.begin(), out_.end(), [](const Suggestion& a, const Suggestion& b) { return a.score < b.score; });
    if (out_.size() > opts_.limit) out_.resize(opts_.limit);
    return std::move(out_);
  }

 private:
  const QueryContext& ctx_;
  const KnowledgeBase& kb_;
  const SuggestOptions& opts_;
  std::vector<Suggestion> out_;
  std::unordered_map<std::string, std::size_t> by_key_;
};

/// Best hit of `iri` for the partial, or nullopt when it does not match.
/// IRIREF partials match by IRI prefix and yield a hit-less match.
struct TermMatch {
  bool matched = false;
  std::optional<SearchHit> hit;
};

TermMatch match_one(const TermIndex& index, const Iri& iri, const Partial& p, const std::string& norm,
                    const LangPref& langs) {
  TermMatch m;
  switch (p.kind) {
    case PartialKind::kIriRef:
      m.matched = iri.str().compare(0, p.iri_prefix.size(), p.iri_prefix) == 0;
      return m;
    case PartialKind::kPName:
      if (iri.str().compare(0, p.namespace_.size(), p.namespace_) != 0) return m;
      [[fallthrough]];
    case PartialKind::kNone:
    case PartialKind::kWord:
      m.hit = index.match_term(iri, norm, langs);
      m.matched = m.hit.has_value();
      return m;
    default:
      return m;
  }
}

void add_terms(Builder& b, const QueryContext& ctx, const KnowledgeBase& kb, const SuggestOptions& opts,
               const Partial& p, KindSet kinds, const std::map<Iri, int>& boosted) {
  const TermIndex& index = kb.index;
  const std::string norm = normalize_label(p.word);
  const std::size_t want = opts.limit + boosted.size();
  auto boost_of = [&](const Iri& iri) {
    auto it = boosted.find(iri);
    return it == boosted.end() ? 2 : it->second;
  };

  for (const auto& [iri, boost] : boosted) {
    const Term* term = index.find(iri);
    if (!term || !term->kinds.intersects(kinds)) continue;
    TermMatch m = match_one(index, iri, p, norm, opts.langs);
    if (m.matched) b.add(b.from_term(*term, m.hit ? &*m.hit : nullptr, boost, kinds));
  }

  switch (p.kind) {
    case PartialKind::kIriRef:
      for (const Term* term : index.iri_prefix_search(p.iri_prefix, kinds, want)) {
        b.add(b.from_term(*term, nullptr, boost_of(term->iri), kinds));
      }
      return;
    case PartialKind::kNone:
    case PartialKind::kWord:
    case PartialKind::kPName: {
      SearchFilter filter{kinds, p.kind == PartialKind::kPName ? p.namespace_ : std::string()};
      for (const SearchHit& hit : index.prefix_search(p.word, opts.langs, filter, want)) {
        const Term& term = *hit.entry->term;
        b.add(b.from_term(term, &hit, boost_of(term.iri), kinds));
      }
      return;
    }
    default:
      (void)ctx;
      return;
  }
}

void add_variables(Builder& b, const QueryContext& ctx, const Partial& p) {
  if (p.kind != PartialKind::kNone && p.kind != PartialKind::kVar && p.kind != PartialKind::kWord) return;
  char sigil = !ctx.partial_token.empty() && ctx.partial_token.front() == '$' ? '$' : '?';
  for (const auto& name : ctx.variables) {
    if (name.compare(0, p.word.size(), p.word) != 0) continue;
    Suggestion s;
    s.insert_text = std::string(1, sigil) + name;
    s.display_label = "?" + name;
    s.kind = TermKind::kIndividual;
    s.score = ScoreTuple{0, 0, 0, name, ""};
    s.provenance = Provenance{ProvenanceKind::kQueryLocal, std::nullopt};
    b.add(std::move(s));
  }
}

void add_keywords(Builder& b, const QueryContext& ctx, int boost) {
  for (Suggestion s : suggest_syntax(ctx)) {
    s.score.context_boost = boost;
    b.add(std::move(s));
  }
}

void add_graphs(Builder& b, const QueryContext& ctx, const KnowledgeBase& kb, const Partial& p) {
  for (const auto& [key, status] : kb.loaded_graphs) {
    if (status.state != LoadState::kLoaded || !is_valid_iri(key) || !has_scheme(key)) continue;
    Iri iri(key);
    bool ok = false;
    switch (p.kind) {
      case PartialKind::kNone: ok = true; break;
      case PartialKind::kIriRef: ok = key.compare(0, p.iri_prefix.size(), p.iri_prefix) == 0; break;
      case PartialKind::kPName:
        ok = key.compare(0, p.namespace_.size() + p.word.size(), p.namespace_ + p.word) == 0;
        break;
      default: ok = false;
    }
    if (!ok) continue;
    Suggestion s;
    s.iri = iri;
    s.insert_text = render_iri(ctx, iri);
    s.display_label = key;
    s.kind = TermKind::kGraph;
    s.score = ScoreTuple{0, 0, 3, key, key};
    s.provenance = Provenance{ProvenanceKind::kOntology, iri};
    b.add(std::move(s));
  }
}

}  // namespace

std::vector<Suggestion> suggest(const QueryContext& ctx, const KnowledgeBase& kb, const Registry* registry,
                                const SuggestOptions& opts) {
  if (ctx.in_string || ctx.in_comment || opts.limit == 0) return {};
  Builder b(ctx, kb, opts);
  Partial p = classify_partial(ctx);

  switch (ctx.position) {
    case ClausePosition::kSubject:
    case ClausePosition::kObject: {
      add_variables(b, ctx, p);
      if (p.kind == PartialKind::kVar) break;
      KindSet kinds{TermKind::kIndividual, TermKind::kOntClass};
      if (ctx.position == ClausePosition::kObject) {
        const auto* pred = ctx.focus_predicate ? std::get_if<Iri>(&*ctx.focus_predicate) : nullptr;
        kinds = pred && pred->str() == vocab::kRdfType ? KindSet{TermKind::kOntClass}
                                                         : KindSet{TermKind::kIndividual};
      }
      add_terms(b, ctx, kb, opts, p, kinds, {});
      if (opts.include_syntax) add_keywords(b, ctx, 3);
      break;
    }
    case ClausePosition::kPredicate: {
      if (p.kind == PartialKind::kVar) break;
      std::map<Iri, int> boosted;
      std::set<Iri> types = focus_types(ctx, kb);
      for (const Iri& t : types) {
        auto it = kb.class_properties.find(t);
        if (it == kb.class_properties.end()) continue;
        for (const Iri& prop : it->second) boosted[prop] = 1;
      }
      std::vector<Iri> individuals;
      if (ctx.focus_subject) {
        if (const auto* iri = std::get_if<Iri>(&*ctx.focus_subject)) individuals.push_back(*iri);
        if (const auto* var = std::get_if<Variable>(&*ctx.focus_subject)) {
          for (const auto& c : connected_individuals(ctx, var->name, opts.connectivity_depth)) {
            individuals.push_back(c.individual);
          }
        }
      }
      for (const Iri& ind : individuals) {
        auto it = kb.individual_properties.find(ind);
        if (it == kb.individual_properties.end()) continue;
        for (const Iri& prop : it->second) boosted[prop] = 0;
      }
      const KindSet props{TermKind::kProperty};
      if (opts.registry_enabled && registry) {
        const std::string norm = normalize_label(p.word);
        // First accepting service per property, in registry order.
        std::set<Iri> accepted;
        for (const Iri& t : types) {
          auto sup = kb.superclasses(t);
          accepted.insert(sup.begin(), sup.end());
        }
        std::map<Iri, const RegistryService*> origin;
        for (const auto& svc : registry->services()) {
          if (!types.empty() && !accepted.count(svc.input_class)) continue;
          for (const Iri& prop : svc.attached_properties) origin.try_emplace(prop, &svc);
        }
        for (const auto& [prop, svc] : origin) {
          auto bit = boosted.find(prop);
          int boost = bit == boosted.end() ? 2 : bit->second;
          Suggestion s;
          const Term* term = kb.index.find(prop);
          TermMatch m = match_one(kb.index, prop, p, norm, opts.langs);
          if (term) {
            if (!m.matched) continue;
            s = b.from_term(*term, m.hit ? &*m.hit : nullptr, boost, props);
            s.kind = TermKind::kProperty;
          } else {
            // Unindexed property: match its local name.
            std::string local = normalize_label(prop.local_name());
            bool ok = false;
            switch (p.kind) {
              case PartialKind::kIriRef: ok = prop.str().compare(0, p.iri_prefix.size(), p.iri_prefix) == 0; break;
              case PartialKind::kPName:
                ok = prop.str().compare(0, p.namespace_.size(), p.namespace_) == 0 &&
                     local.compare(0, norm.size(), norm) == 0;
                break;
              case PartialKind::kNone:
              case PartialKind::kWord: ok = local.compare(0, norm.size(), norm) == 0; break;
              default: ok = false;
            }
            if (!ok) continue;
            s.iri = prop;
            s.insert_text = render_iri(ctx, prop);
            s.display_label = std::string(prop.local_name());
            s.kind = TermKind::kProperty;
            s.score = ScoreTuple{boost, opts.langs.localname_tier(), 3, local, prop.str()};
          }
          s.provenance = Provenance{ProvenanceKind::kRegistry, svc->iri};
          b.add(std::move(s));
        }
      }
      add_terms(b, ctx, kb, opts, p, props, boosted);
      if (opts.include_syntax && (p.kind == PartialKind::kNone || p.kind == PartialKind::kWord)) {
        for (Suggestion s : suggest_syntax(ctx)) {
          s.score.context_boost = 2;
          b.add(std::move(s));
        }
      }
      break;
    }
    case ClausePosition::kKeyword:
    case ClausePosition::kPrologue:
    case ClausePosition::kUnknown:
      if (ctx.expecting_graph) add_graphs(b, ctx, kb, p);
      if (opts.include_syntax) add_keywords(b, ctx, ctx.expecting_graph ? 1 : 0);
      break;
  }
  return b.finish();
}

}  // namespace sparql_assist
