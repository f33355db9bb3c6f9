#include "sparql_assist/sparql_context.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "text_util.hpp"

namespace sparql_assist {

using text_util::decode_utf8;
using text_util::hex_value;
using text_util::iequals;
using text_util::is_local_escapable;
using text_util::is_pn_chars;
using text_util::is_pn_chars_base;
using text_util::is_pn_chars_u;

std::string_view token_kind_name(TokenKind kind) noexcept {
  switch (kind) {
    case TokenKind::kKeyword: return "KEYWORD";
    case TokenKind::kVar: return "VAR";
    case TokenKind::kIriRef: return "IRIREF";
    case TokenKind::kPName: return "PNAME";
    case TokenKind::kBlankLabel: return "BLANK_LABEL";
    case TokenKind::kString: return "STRING";
    case TokenKind::kNumber: return "NUMBER";
    case TokenKind::kLangTag: return "LANGTAG";
    case TokenKind::kPunct: return "PUNCT";
    case TokenKind::kAKeyword: return "A_KEYWORD";
    case TokenKind::kComment: return "COMMENT";
    case TokenKind::kWhitespace: return "WHITESPACE";
    case TokenKind::kIncomplete: return "INCOMPLETE";
  }
  return "UNKNOWN";
}

std::string_view position_name(ClausePosition p) noexcept {
  switch (p) {
    case ClausePosition::kSubject: return "SUBJECT_POS";
    case ClausePosition::kPredicate: return "PREDICATE_POS";
    case ClausePosition::kObject: return "OBJECT_POS";
    case ClausePosition::kKeyword: return "KEYWORD_POS";
    case ClausePosition::kPrologue: return "PROLOGUE_POS";
    case ClausePosition::kUnknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

// ---------------------------------------------------------------------------
// Tokenizer

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_var_char(std::uint32_t cp) {
  return is_pn_chars_u(cp) || (cp >= '0' && cp <= '9') || cp == 0xB7 || (cp >= 0x300 && cp <= 0x36F) ||
         (cp >= 0x203F && cp <= 0x2040);
}

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    while (pos_ < s_.size()) step();
    return std::move(out_);
  }

 private:
  void emit(TokenKind kind, std::size_t end) {
    out_.push_back(Token{kind, std::string(s_.substr(pos_, end - pos_)), pos_, end});
    pos_ = end;
  }

  std::uint32_t cp_at(std::size_t at, std::size_t* len) const { return decode_utf8(s_, at, len); }

  void step() {
    char c = s_[pos_];
    std::size_t n = s_.size();
    if (is_ws(c)) {
      std::size_t j = pos_;
      while (j < n && is_ws(s_[j])) ++j;
      return emit(TokenKind::kWhitespace, j);
    }
    if (c == '#') {
      std::size_t j = s_.find('\n', pos_);
      return emit(TokenKind::kComment, j == std::string_view::npos ? n : j);
    }
    if (c == '<') return iri_or_punct();
    if (c == '"' || c == '\'') return string_literal();
    if (c == '?' || c == '$') return variable();
    if (c == '@') return langtag();
    if (c == '_' && pos_ + 1 < n && s_[pos_ + 1] == ':') return blank_label();
    if (is_digit(c)) return number();
    if (c == ':') return pname_local(pos_ + 1);
    std::size_t len = 0;
    std::uint32_t cp = cp_at(pos_, &len);
    if (is_pn_chars_base(cp)) return word();
    if (c == '^' && pos_ + 1 < n && s_[pos_ + 1] == '^') return emit(TokenKind::kPunct, pos_ + 2);
    if (pos_ + 1 < n) {
      std::string_view two = s_.substr(pos_, 2);
      if (two == "&&" || two == "||" || two == "!=" || two == ">=") return emit(TokenKind::kPunct, pos_ + 2);
    }
    emit(TokenKind::kPunct, pos_ + len);
  }

  void iri_or_punct() {
    std::size_t n = s_.size();
    for (std::size_t j = pos_ + 1; j < n; ++j) {
      char ch = s_[j];
      if (ch == '>') return emit(TokenKind::kIriRef, j + 1);
      auto uc = static_cast<unsigned char>(ch);
      if (uc <= 0x20 || std::string_view("<\"{}|^`\\").find(ch) != std::string_view::npos) {
        bool le = pos_ + 1 < n && s_[pos_ + 1] == '=';
        return emit(TokenKind::kPunct, pos_ + (le ? 2 : 1));
      }
    }
    emit(TokenKind::kIncomplete, n);
  }

  void string_literal() {
    std::size_t n = s_.size();
    char q = s_[pos_];
    bool is_long = pos_ + 2 < n && s_[pos_ + 1] == q && s_[pos_ + 2] == q;
    std::size_t j = pos_ + (is_long ? 3 : 1);
    while (j < n) {
      char ch = s_[j];
      if (ch == '\\') {
        if (j + 1 >= n) break;
        j += 2;
        continue;
      }
      if (is_long) {
        if (ch == q && j + 2 < n && s_[j + 1] == q && s_[j + 2] == q) {
          std::size_t end = j + 3;
          while (end < n && s_[end] == q && end - j < 5) ++end;
          return emit(TokenKind::kString, end);
        }
      } else {
        if (ch == q) return emit(TokenKind::kString, j + 1);
        if (ch == '\n' || ch == '\r') return emit(TokenKind::kPunct, pos_ + 1);
      }
      ++j;
    }
    emit(TokenKind::kIncomplete, n);
  }

  void variable() {
    std::size_t n = s_.size();
    std::size_t j = pos_ + 1;
    while (j < n) {
      std::size_t len = 0;
      std::uint32_t cp = cp_at(j, &len);
      if (!is_var_char(cp)) break;
      j += len;
    }
    if (j > pos_ + 1) return emit(TokenKind::kVar, j);
    if (pos_ + 1 == n) return emit(TokenKind::kIncomplete, n);
    emit(TokenKind::kPunct, pos_ + 1);
  }

  void langtag() {
    std::size_t n = s_.size();
    std::size_t j = pos_ + 1;
    while (j < n && is_ascii_alpha(s_[j])) ++j;
    if (j == pos_ + 1) return emit(TokenKind::kPunct, pos_ + 1);
    while (j + 1 < n && s_[j] == '-' && (is_ascii_alpha(s_[j + 1]) || is_digit(s_[j + 1]))) {
      ++j;
      while (j < n && (is_ascii_alpha(s_[j]) || is_digit(s_[j]))) ++j;
    }
    emit(TokenKind::kLangTag, j);
  }

  void blank_label() {
    std::size_t n = s_.size();
    std::size_t j = pos_ + 2;
    std::size_t len = 0;
    if (j >= n) return emit(TokenKind::kIncomplete, n);
    std::uint32_t cp = cp_at(j, &len);
    if (!(is_pn_chars_u(cp) || (cp >= '0' && cp <= '9'))) return emit(TokenKind::kBlankLabel, j);
    j += len;
    std::size_t last_good = j;
    while (j < n) {
      cp = cp_at(j, &len);
      if (is_pn_chars(cp)) {
        j += len;
        last_good = j;
      } else if (cp == '.') {
        j += 1;
      } else {
        break;
      }
    }
    emit(TokenKind::kBlankLabel, last_good);
  }

  void number() {
    std::size_t n = s_.size();
    std::size_t j = pos_;
    while (j < n && is_digit(s_[j])) ++j;
    if (j + 1 < n && s_[j] == '.' && is_digit(s_[j + 1])) {
      ++j;
      while (j < n && is_digit(s_[j])) ++j;
    }
    if (j < n && (s_[j] == 'e' || s_[j] == 'E')) {
      std::size_t k = j + 1;
      if (k < n && (s_[k] == '+' || s_[k] == '-')) ++k;
      if (k < n && is_digit(s_[k])) {
        while (k < n && is_digit(s_[k])) ++k;
        j = k;
      }
    }
    emit(TokenKind::kNumber, j);
  }

  /// Scans a local name starting at `j` (just past the colon).
  void pname_local(std::size_t j) {
    std::size_t n = s_.size();
    bool first = true;
    while (j < n) {
      char ch = s_[j];
      std::size_t len = 0;
      std::uint32_t cp = cp_at(j, &len);
      if (ch == '%') {
        if (j + 2 < n && hex_value(s_[j + 1]) >= 0 && hex_value(s_[j + 2]) >= 0) {
          j += 3;
        } else if ((j + 1 == n) || (j + 2 == n && hex_value(s_[j + 1]) >= 0)) {
          return emit(TokenKind::kIncomplete, n);
        } else {
          break;
        }
      } else if (ch == '\\') {
        if (j + 1 == n) return emit(TokenKind::kIncomplete, n);
        if (!is_local_escapable(s_[j + 1])) break;
        j += 2;
      } else if (ch == '.') {
        if (first) break;
        std::size_t k = j;
        while (k < n && s_[k] == '.') ++k;
        if (k >= n) break;
        std::size_t l2 = 0;
        std::uint32_t next = cp_at(k, &l2);
        if (!(is_pn_chars(next) || next == ':' || next == '%' || next == '\\')) break;
        j = k;
      } else if (is_pn_chars_u(cp) || cp == ':' || (cp >= '0' && cp <= '9') || (!first && is_pn_chars(cp))) {
        j += len;
      } else {
        break;
      }
      first = false;
    }
    emit(TokenKind::kPName, j);
  }

  void word() {
    std::size_t n = s_.size();
    // Longest prefix-name candidate: PN_CHARS and dots, no trailing dot.
    std::size_t j = pos_;
    std::size_t last_good = pos_;
    while (j < n) {
      std::size_t len = 0;
      std::uint32_t cp = cp_at(j, &len);
      if (is_pn_chars(cp)) {
        j += len;
        last_good = j;
      } else if (cp == '.') {
        j += 1;
      } else {
        break;
      }
    }
    if (last_good < n && s_[last_good] == ':') return pname_local(last_good + 1);

    // Bare word: letters, digits, underscore.
    j = pos_;
    while (j < n) {
      std::size_t len = 0;
      std::uint32_t cp = cp_at(j, &len);
      if (cp == '-' || cp == '.' || !is_pn_chars(cp)) break;
      j += len;
    }
    std::string_view w = s_.substr(pos_, j - pos_);
    if (w == "a") return emit(TokenKind::kAKeyword, j);
    static constexpr std::pair<std::string_view, std::string_view> kCompounds[] = {
        {"FROM", "NAMED"}, {"ORDER", "BY"}, {"GROUP", "BY"}};
    for (const auto& [head, tail] : kCompounds) {
      if (!iequals(w, head)) continue;
      std::size_t k = j;
      while (k < n && is_ws(s_[k])) ++k;
      if (k == j || k + tail.size() > n || !iequals(s_.substr(k, tail.size()), tail)) break;
      std::size_t e = k + tail.size();
      if (e < n) {
        std::size_t len = 0;
        std::uint32_t cp = cp_at(e, &len);
        if (is_pn_chars(cp) || cp == ':' || cp == '.') break;
      }
      return emit(TokenKind::kKeyword, e);
    }
    emit(TokenKind::kKeyword, j);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<Token> out_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

// ---------------------------------------------------------------------------
// Context derivation

bool QueryContext::has_variable(std::string_view name) const {
  return std::find(variables.begin(), variables.end(), name) != variables.end();
}

std::string to_string(const PatternNode& node) {
  if (const auto* v = std::get_if<Variable>(&node)) return "?" + v->name;
  if (const auto* iri = std::get_if<Iri>(&node)) return "<" + iri->str() + ">";
  if (const auto* b = std::get_if<BlankNode>(&node)) return "_:" + b->label;
  return to_ntriples(std::get<Literal>(node));
}

namespace {

std::optional<Iri> expand_pname(const std::map<std::string, Iri>& prefixes, std::string_view pname) {
  auto colon = pname.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto it = prefixes.find(std::string(pname.substr(0, colon)));
  if (it == prefixes.end()) return std::nullopt;
  std::string value = it->second.str();
  std::string_view local = pname.substr(colon + 1);
  for (std::size_t i = 0; i < local.size(); ++i) {
    if (local[i] == '\\' && i + 1 < local.size()) ++i;
    value.push_back(local[i]);
  }
  if (!is_valid_iri(value)) return std::nullopt;
  return Iri(std::move(value));
}

std::string unescape_string_token(std::string_view tok) {
  char q = tok.front();
  bool is_long = tok.size() >= 6 && tok[1] == q && tok[2] == q;
  std::size_t skip = is_long ? 3 : 1;
  std::string_view body = tok.substr(skip, tok.size() - 2 * skip);
  std::string out;
  for (std::size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c != '\\' || i + 1 >= body.size()) {
      out.push_back(c);
      continue;
    }
    char e = body[++i];
    switch (e) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case 'b': out.push_back('\b'); break;
      case 'f': out.push_back('\f'); break;
      default: out.push_back(e);
    }
  }
  return out;
}

enum class Top {
  kPrologue,
  kPrefixLabel,
  kPrefixIri,
  kBaseIri,
  kSelectStart,
  kSelectDistinct,
  kSelectVars,
  kSelectExpr,
  kFrom,
  kFromNamed,
  kBeforeWhere,
  kAfterWhere,
  kConstruct,
  kTemplate,
  kDescribe,
  kGroup,
  kAfterQuery,
  kOrderPending,
  kOrderBy,
  kOrderByMore,
  kOrderExpr,
  kLimit,
  kAfterLimit,
  kGroupBy,
  kHaving,
  kGarbage,
};

enum class GState {
  kSubject,
  kPredicate,
  kObject,
  kAfterObject,
  kDatatype,
  kRecover,
  kExpectBlock,
  kGraphName,
  kFilterStart,
  kExpr,
  kBindStart,
  kValues,
};

struct Frame {
  GState state = GState::kSubject;
  bool after_block = false;
  std::optional<PatternNode> subject;
  std::optional<PatternNode> predicate;
  int depth = 0;  // parentheses in kExpr, braces in kValues
  bool graph_named = false;
};

Frame in_state(GState state) {
  Frame f;
  f.state = state;
  return f;
}

class ContextBuilder {
 public:
  QueryContext& ctx() { return ctx_; }

  void feed(const Token& t) {
    if (t.kind == TokenKind::kVar) note_variable(t.text.substr(1));
    if (!frames_.empty()) {
      group_token(t);
    } else {
      top_token(t);
    }
  }

  void finish() {
    auto& c = ctx_;
    c.expecting_graph = false;
    c.keyword_slot = KeywordSlot::kNone;
    if (!frames_.empty()) {
      const Frame& f = frames_.back();
      switch (f.state) {
        case GState::kSubject:
          c.position = ClausePosition::kSubject;
          c.keyword_slot = f.after_block ? KeywordSlot::kGroupAfterBlock : KeywordSlot::kGroup;
          break;
        case GState::kPredicate:
          c.position = ClausePosition::kPredicate;
          c.keyword_slot = KeywordSlot::kPredicate;
          c.focus_subject = f.subject;
          break;
        case GState::kObject:
          c.position = ClausePosition::kObject;
          c.focus_subject = f.subject;
          c.focus_predicate = f.predicate;
          break;
        case GState::kAfterObject:
          c.position = ClausePosition::kKeyword;
          c.keyword_slot = KeywordSlot::kGroup;
          break;
        case GState::kExpectBlock:
          c.position = ClausePosition::kKeyword;
          break;
        case GState::kGraphName:
          c.position = ClausePosition::kKeyword;
          c.expecting_graph = !f.graph_named;
          break;
        default:
          c.position = ClausePosition::kUnknown;
      }
      return;
    }
    switch (top_) {
      case Top::kPrologue:
        c.position = ClausePosition::kPrologue;
        c.keyword_slot = KeywordSlot::kPrologue;
        break;
      case Top::kPrefixLabel:
      case Top::kPrefixIri:
      case Top::kBaseIri:
        c.position = ClausePosition::kPrologue;
        break;
      case Top::kSelectStart:
        c.position = ClausePosition::kKeyword;
        c.keyword_slot = KeywordSlot::kSelectStart;
        break;
      case Top::kSelectDistinct:
      case Top::kAfterWhere:
      case Top::kOrderPending:
      case Top::kGroupBy:
        c.position = ClausePosition::kKeyword;
        break;
      case Top::kSelectVars:
      case Top::kBeforeWhere:
        c.position = ClausePosition::kKeyword;
        c.keyword_slot = KeywordSlot::kDataset;
        break;
      case Top::kFrom:
      case Top::kFromNamed:
        c.position = ClausePosition::kKeyword;
        c.expecting_graph = true;
        break;
      case Top::kAfterQuery:
        c.position = ClausePosition::kKeyword;
        c.keyword_slot = KeywordSlot::kSolutionModifier;
        break;
      case Top::kOrderBy:
        c.position = ClausePosition::kKeyword;
        c.keyword_slot = KeywordSlot::kOrderBy;
        break;
      case Top::kOrderByMore:
        c.position = ClausePosition::kKeyword;
        c.keyword_slot = KeywordSlot::kOrderByMore;
        break;
      case Top::kAfterLimit:
        c.position = ClausePosition::kKeyword;
        c.keyword_slot = KeywordSlot::kLimitOffset;
        break;
      default:
        c.position = ClausePosition::kUnknown;
    }
  }

 private:
  void note_variable(const std::string& name) {
    if (!name.empty() && !ctx_.has_variable(name)) ctx_.variables.push_back(name);
  }

  static bool is_punct(const Token& t, std::string_view p) { return t.kind == TokenKind::kPunct && t.text == p; }

  static std::string keyword(const Token& t) {
    if (t.kind != TokenKind::kKeyword) return {};
    std::string out;
    bool space = false;
    for (char c : t.text) {
      if (is_ws(c)) {
        space = true;
        continue;
      }
      if (space && !out.empty()) out.push_back(' ');
      space = false;
      out.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 32) : c);
    }
    return out;
  }

  std::optional<Iri> iri_of(const Token& t) const {
    if (t.kind == TokenKind::kIriRef) {
      std::string value = t.text.substr(1, t.text.size() - 2);
      if (ctx_.base && !has_scheme(value)) value = resolve_iri(ctx_.base->str(), value);
      if (!is_valid_iri(value)) return std::nullopt;
      return Iri(std::move(value));
    }
    if (t.kind == TokenKind::kPName) return expand_pname(ctx_.prefixes, t.text);
    return std::nullopt;
  }

  /// Term usable as subject or object.
  std::optional<PatternNode> term_of(const Token& t) const {
    switch (t.kind) {
      case TokenKind::kVar: return Variable{t.text.substr(1)};
      case TokenKind::kIriRef:
      case TokenKind::kPName:
        if (auto iri = iri_of(t)) return *iri;
        return std::nullopt;
      case TokenKind::kBlankLabel: return BlankNode{t.text.substr(2)};
      case TokenKind::kString: return Literal(unescape_string_token(t.text));
      case TokenKind::kNumber: {
        bool dbl = t.text.find_first_of("eE") != std::string::npos;
        bool dec = t.text.find('.') != std::string::npos;
        return Literal(t.text, Iri(dbl ? vocab::kXsdDouble : dec ? vocab::kXsdDecimal : vocab::kXsdInteger));
      }
      case TokenKind::kKeyword: {
        if (t.text == "true" || t.text == "false") return Literal(t.text, Iri(vocab::kXsdBoolean));
        return std::nullopt;
      }
      default: return std::nullopt;
    }
  }

  std::optional<PatternNode> verb_of(const Token& t) const {
    if (t.kind == TokenKind::kAKeyword) return Iri(vocab::kRdfType);
    if (t.kind == TokenKind::kVar) return Variable{t.text.substr(1)};
    if (auto iri = iri_of(t)) return *iri;
    return std::nullopt;
  }

  void open_group(GState parent_state, bool after_block) {
    if (!frames_.empty()) {
      Frame& parent = frames_.back();
      if (parent.state != GState::kExpr) {
        parent.state = parent_state;
        parent.after_block = after_block;
        parent.subject.reset();
        parent.predicate.reset();
      }
    }
    frames_.push_back(Frame{});
  }

  void close_group() {
    frames_.pop_back();
    if (frames_.empty()) top_ = Top::kAfterQuery;
  }

  void recover(Frame& f) { f.state = GState::kRecover; }

  /// `.`, `;`, `,`, `{` and `}` resynchronize every clause state.
  bool resync(Frame& f, const Token& t) {
    if (t.kind != TokenKind::kPunct) return false;
    if (t.text == ".") {
      f = Frame{};
    } else if (t.text == ";") {
      if (f.subject) {
        f.state = GState::kPredicate;
        f.predicate.reset();
      } else {
        f.state = GState::kSubject;
      }
    } else if (t.text == ",") {
      if (f.subject && f.predicate) {
        f.state = GState::kObject;
      } else {
        recover(f);
      }
    } else if (t.text == "{") {
      open_group(GState::kSubject, true);
    } else if (t.text == "}") {
      close_group();
    } else {
      return false;
    }
    return true;
  }

  /// Group-level keywords (FILTER, OPTIONAL, ...). Returns false if `kw` is
  /// not one of them.
  bool group_keyword(Frame& f, const std::string& kw) {
    if (kw == "OPTIONAL" || kw == "MINUS" || kw == "UNION") {
      f = in_state(GState::kExpectBlock);
    } else if (kw == "GRAPH" || kw == "SERVICE") {
      f = in_state(GState::kGraphName);
    } else if (kw == "FILTER") {
      f = in_state(GState::kFilterStart);
    } else if (kw == "BIND") {
      f = in_state(GState::kBindStart);
    } else if (kw == "VALUES") {
      f = in_state(GState::kValues);
    } else {
      return false;
    }
    return true;
  }

  void group_token(const Token& t) {
    Frame& f = frames_.back();
    std::string kw = keyword(t);
    switch (f.state) {
      case GState::kSubject: {
        if (resync(f, t)) return;
        if (!kw.empty() && group_keyword(f, kw)) return;
        if (auto term = term_of(t)) {
          f.subject = std::move(term);
          f.after_block = false;
          f.state = GState::kPredicate;
          return;
        }
        recover(f);
        return;
      }
      case GState::kPredicate: {
        if (resync(f, t)) return;
        if (auto verb = verb_of(t)) {
          f.predicate = std::move(verb);
          f.state = GState::kObject;
          return;
        }
        recover(f);
        return;
      }
      case GState::kObject: {
        if (resync(f, t)) return;
        if (auto term = term_of(t)) {
          ctx_.patterns.push_back(TriplePattern{*f.subject, *f.predicate, *term});
          f.state = GState::kAfterObject;
          return;
        }
        recover(f);
        return;
      }
      case GState::kAfterObject: {
        if (t.kind == TokenKind::kLangTag) {
          auto& obj = ctx_.patterns.back().object;
          if (auto* lit = std::get_if<Literal>(&obj); lit && !lit->lang() && !lit->datatype()) {
            if (auto tag = normalize_lang_tag(t.text.substr(1))) obj = Literal(lit->lexical(), *tag);
          }
          return;
        }
        if (is_punct(t, "^^")) {
          f.state = GState::kDatatype;
          return;
        }
        if (resync(f, t)) return;
        if (!kw.empty() && group_keyword(f, kw)) return;
        recover(f);
        return;
      }
      case GState::kDatatype: {
        if (auto iri = iri_of(t)) {
          auto& obj = ctx_.patterns.back().object;
          if (auto* lit = std::get_if<Literal>(&obj); lit && !lit->lang() && !lit->datatype()) {
            obj = Literal(lit->lexical(), *iri);
          }
          f.state = GState::kAfterObject;
          return;
        }
        if (resync(f, t)) return;
        recover(f);
        return;
      }
      case GState::kRecover: {
        resync(f, t);
        return;
      }
      case GState::kExpectBlock: {
        if (is_punct(t, "{")) return open_group(GState::kSubject, true);
        if (resync(f, t)) return;
        recover(f);
        return;
      }
      case GState::kGraphName: {
        if (is_punct(t, "{")) return open_group(GState::kSubject, true);
        if (kw == "SILENT") return;
        if (!f.graph_named && (t.kind == TokenKind::kVar || iri_of(t))) {
          f.graph_named = true;
          return;
        }
        if (resync(f, t)) return;
        recover(f);
        return;
      }
      case GState::kFilterStart: {
        if (is_punct(t, "(")) {
          f.state = GState::kExpr;
          f.depth = 1;
          return;
        }
        if (is_punct(t, "{")) return open_group(GState::kSubject, false);
        if (t.kind == TokenKind::kKeyword || t.kind == TokenKind::kPName || t.kind == TokenKind::kIriRef) return;
        if (resync(f, t)) return;
        recover(f);
        return;
      }
      case GState::kBindStart: {
        if (is_punct(t, "(")) {
          f.state = GState::kExpr;
          f.depth = 1;
          return;
        }
        if (resync(f, t)) return;
        recover(f);
        return;
      }
      case GState::kExpr: {
        if (is_punct(t, "(")) {
          ++f.depth;
        } else if (is_punct(t, ")")) {
          if (--f.depth <= 0) f = Frame{};
        } else if (is_punct(t, "{")) {
          frames_.push_back(Frame{});
        } else if (is_punct(t, "}")) {
          close_group();
        }
        return;
      }
      case GState::kValues: {
        if (is_punct(t, "{")) {
          ++f.depth;
        } else if (is_punct(t, "}")) {
          if (f.depth == 0) return close_group();
          if (--f.depth == 0) f = Frame{};
        }
        return;
      }
    }
  }

  void top_token(const Token& t) {
    std::string kw = keyword(t);
    auto query_start = [&]() -> bool {
      if (kw == "PREFIX") {
        top_ = Top::kPrefixLabel;
      } else if (kw == "BASE") {
        top_ = Top::kBaseIri;
      } else if (kw == "SELECT") {
        top_ = Top::kSelectStart;
      } else if (kw == "ASK") {
        top_ = Top::kBeforeWhere;
      } else if (kw == "CONSTRUCT") {
        top_ = Top::kConstruct;
      } else if (kw == "DESCRIBE") {
        top_ = Top::kDescribe;
      } else {
        return false;
      }
      return true;
    };
    auto dataset = [&]() -> bool {
      if (kw == "FROM") {
        top_ = Top::kFrom;
      } else if (kw == "FROM NAMED") {
        top_ = Top::kFromNamed;
      } else if (kw == "WHERE") {
        top_ = Top::kAfterWhere;
      } else if (is_punct(t, "{")) {
        open_group(GState::kSubject, false);
        top_ = Top::kGroup;
      } else {
        return false;
      }
      return true;
    };
    auto modifiers = [&]() -> bool {
      if (kw == "ORDER BY") {
        top_ = Top::kOrderBy;
      } else if (kw == "ORDER") {
        top_ = Top::kOrderPending;
      } else if (kw == "GROUP BY" || kw == "GROUP") {
        top_ = Top::kGroupBy;
      } else if (kw == "HAVING") {
        top_ = Top::kHaving;
        depth_ = 0;
      } else if (kw == "LIMIT" || kw == "OFFSET") {
        top_ = Top::kLimit;
      } else {
        return false;
      }
      return true;
    };

    switch (top_) {
      case Top::kPrologue:
        if (query_start() || dataset()) return;
        top_ = Top::kGarbage;
        return;
      case Top::kPrefixLabel:
        if (t.kind == TokenKind::kPName && t.text.back() == ':' &&
            t.text.find(':') == t.text.size() - 1) {
          pending_prefix_ = t.text.substr(0, t.text.size() - 1);
          top_ = Top::kPrefixIri;
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kPrefixIri:
        if (auto iri = t.kind == TokenKind::kIriRef ? iri_of(t) : std::nullopt) {
          ctx_.prefixes.insert_or_assign(pending_prefix_, *iri);
          top_ = Top::kPrologue;
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kBaseIri:
        if (auto iri = t.kind == TokenKind::kIriRef ? iri_of(t) : std::nullopt) {
          ctx_.base = *iri;
          top_ = Top::kPrologue;
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kSelectStart:
        if (kw == "DISTINCT" || kw == "REDUCED") {
          top_ = Top::kSelectDistinct;
          return;
        }
        [[fallthrough]];
      case Top::kSelectDistinct:
      case Top::kSelectVars:
        if (t.kind == TokenKind::kVar || is_punct(t, "*")) {
          top_ = Top::kSelectVars;
          return;
        }
        if (is_punct(t, "(")) {
          top_ = Top::kSelectExpr;
          depth_ = 1;
          return;
        }
        if (top_ == Top::kSelectVars && dataset()) return;
        top_ = Top::kGarbage;
        return;
      case Top::kSelectExpr:
        if (is_punct(t, "(")) ++depth_;
        if (is_punct(t, ")") && --depth_ == 0) top_ = Top::kSelectVars;
        return;
      case Top::kFrom:
        if (kw == "NAMED") {
          top_ = Top::kFromNamed;
          return;
        }
        [[fallthrough]];
      case Top::kFromNamed:
        if (auto iri = iri_of(t)) {
          (top_ == Top::kFrom ? ctx_.from_graphs : ctx_.from_named).push_back(*iri);
          top_ = Top::kBeforeWhere;
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kBeforeWhere:
        if (dataset()) return;
        top_ = Top::kGarbage;
        return;
      case Top::kAfterWhere:
        if (is_punct(t, "{")) {
          dataset();
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kConstruct:
        if (is_punct(t, "{")) {
          top_ = Top::kTemplate;
          depth_ = 1;
          return;
        }
        if (kw == "WHERE") {
          top_ = Top::kAfterWhere;
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kTemplate:
        if (is_punct(t, "{")) ++depth_;
        if (is_punct(t, "}") && --depth_ == 0) top_ = Top::kBeforeWhere;
        return;
      case Top::kDescribe:
        if (t.kind == TokenKind::kVar || iri_of(t) || is_punct(t, "*")) return;
        if (dataset()) return;
        top_ = Top::kGarbage;
        return;
      case Top::kGroup:
        // Only reachable if a group closed without updating the state.
        top_ = Top::kAfterQuery;
        [[fallthrough]];
      case Top::kAfterQuery:
        if (modifiers()) return;
        top_ = Top::kGarbage;
        return;
      case Top::kOrderPending:
        if (kw == "BY") {
          top_ = Top::kOrderBy;
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kOrderBy:
      case Top::kOrderByMore:
        if (t.kind == TokenKind::kVar) {
          top_ = Top::kOrderByMore;
          return;
        }
        if (kw == "ASC" || kw == "DESC") {
          top_ = Top::kOrderExpr;
          depth_ = 0;
          return;
        }
        if (is_punct(t, "(")) {
          top_ = Top::kOrderExpr;
          depth_ = 1;
          return;
        }
        if (kw == "LIMIT" || kw == "OFFSET") {
          top_ = Top::kLimit;
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kOrderExpr:
        if (is_punct(t, "(")) ++depth_;
        if (is_punct(t, ")") && --depth_ <= 0) top_ = Top::kOrderByMore;
        return;
      case Top::kLimit:
        top_ = t.kind == TokenKind::kNumber ? Top::kAfterLimit : Top::kGarbage;
        return;
      case Top::kAfterLimit:
        if (kw == "LIMIT" || kw == "OFFSET") {
          top_ = Top::kLimit;
          return;
        }
        top_ = Top::kGarbage;
        return;
      case Top::kGroupBy:
        if (t.kind == TokenKind::kVar || is_punct(t, "(") || is_punct(t, ")")) return;
        if (modifiers()) return;
        top_ = Top::kGarbage;
        return;
      case Top::kHaving:
        if (is_punct(t, "(")) ++depth_;
        if (is_punct(t, ")") && --depth_ <= 0) top_ = Top::kAfterQuery;
        return;
      case Top::kGarbage:
        if (query_start()) return;
        if (kw == "WHERE") {
          top_ = Top::kAfterWhere;
          return;
        }
        if (is_punct(t, "{")) dataset();
        return;
    }
  }

  QueryContext ctx_;
  Top top_ = Top::kPrologue;
  std::vector<Frame> frames_;
  std::string pending_prefix_;
  int depth_ = 0;
};

bool is_partial_kind(const Token& t) {
  switch (t.kind) {
    case TokenKind::kVar:
    case TokenKind::kPName:
    case TokenKind::kKeyword:
    case TokenKind::kAKeyword:
    case TokenKind::kIriRef:
      return true;
    case TokenKind::kIncomplete: {
      char c = t.text.front();
      return c == '<' || c == '?' || c == '$' || c == ':' || is_pn_chars_base(static_cast<unsigned char>(c)) ||
             static_cast<unsigned char>(c) >= 0x80;
    }
    default:
      return false;
  }
}

}  // namespace

QueryContext derive_context(std::string_view text, std::size_t cursor) {
  cursor = std::min(cursor, text.size());
  std::vector<Token> tokens = tokenize(text.substr(0, cursor));

  ContextBuilder builder;
  QueryContext& ctx = builder.ctx();
  std::size_t consumed = tokens.size();
  if (!tokens.empty()) {
    const Token& last = tokens.back();
    if (is_partial_kind(last)) {
      ctx.partial_token = last.text;
      ctx.partial_start = last.start;
      consumed = tokens.size() - 1;
    } else if (last.kind == TokenKind::kIncomplete) {
      if (last.text.front() == '"' || last.text.front() == '\'') ctx.in_string = true;
      consumed = tokens.size() - 1;
    } else if (last.kind == TokenKind::kComment) {
      ctx.in_comment = true;
    }
  }
  if (ctx.partial_token.empty()) ctx.partial_start = cursor;

  for (std::size_t i = 0; i < consumed; ++i) {
    const Token& t = tokens[i];
    if (t.kind == TokenKind::kWhitespace || t.kind == TokenKind::kComment) continue;
    builder.feed(t);
  }
  builder.finish();

  if (ctx.in_string || ctx.in_comment) {
    ctx.position = ClausePosition::kUnknown;
    ctx.keyword_slot = KeywordSlot::kNone;
    ctx.focus_subject.reset();
    ctx.focus_predicate.reset();
    ctx.expecting_graph = false;
  }
  return std::move(ctx);
}

Iri expand_prefixed_name(const QueryContext& ctx, std::string_view pname) {
  auto colon = pname.find(':');
  if (colon == std::string_view::npos) throw UnknownPrefixError(std::string(pname));
  if (!ctx.prefixes.count(std::string(pname.substr(0, colon)))) {
    throw UnknownPrefixError(std::string(pname.substr(0, colon)));
  }
  auto iri = expand_pname(ctx.prefixes, pname);
  if (!iri) throw std::invalid_argument("'" + std::string(pname) + "' does not expand to a valid IRI");
  return *iri;
}

// ---------------------------------------------------------------------------
// Connectivity

std::vector<ConnectedIndividual> connected_individuals(const QueryContext& ctx, std::string_view variable,
                                                       std::size_t max_depth) {
  if (!variable.empty() && (variable.front() == '?' || variable.front() == '$')) variable.remove_prefix(1);
  struct Edge {
    std::size_t to;
    const Iri* predicate;
    Direction direction;
  };
  // Vertices keyed by their rendered form so equal nodes coincide.
  std::map<std::string, std::size_t> ids;
  std::vector<const PatternNode*> nodes;
  std::vector<std::vector<Edge>> adj;
  auto vertex = [&](const PatternNode& n) {
    auto [it, inserted] = ids.try_emplace(to_string(n), nodes.size());
    if (inserted) {
      nodes.push_back(&n);
      adj.emplace_back();
    }
    return it->second;
  };
  for (const auto& p : ctx.patterns) {
    const auto* pred = std::get_if<Iri>(&p.predicate);
    if (!pred || pred->str() == vocab::kRdfType) continue;
    std::size_t s = vertex(p.subject);
    std::size_t o = vertex(p.object);
    adj[s].push_back({o, pred, Direction::kSubjectToObject});
    adj[o].push_back({s, pred, Direction::kObjectToSubject});
  }

  auto start_it = ids.find("?" + std::string(variable));
  if (start_it == ids.end()) return {};

  using Path = std::vector<PathStep>;
  auto path_less = [](const Path& a, const Path& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [](const PathStep& x, const PathStep& y) {
      if (x.predicate != y.predicate) return x.predicate < y.predicate;
      return x.direction < y.direction;
    });
  };

  std::vector<std::optional<Path>> best(nodes.size());
  best[start_it->second] = Path{};
  std::vector<std::size_t> frontier{start_it->second};
  std::vector<std::pair<std::size_t, std::size_t>> found;  // (depth, vertex)
  for (std::size_t depth = 1; depth <= max_depth && !frontier.empty(); ++depth) {
    std::map<std::size_t, Path> layer;
    for (std::size_t v : frontier) {
      for (const Edge& e : adj[v]) {
        if (best[e.to]) continue;
        Path candidate = *best[v];
        candidate.push_back({*e.predicate, e.direction});
        auto it = layer.find(e.to);
        if (it == layer.end()) {
          layer.emplace(e.to, std::move(candidate));
        } else if (path_less(candidate, it->second)) {
          it->second = std::move(candidate);
        }
      }
    }
    frontier.clear();
    for (auto& [v, path] : layer) {
      best[v] = std::move(path);
      frontier.push_back(v);
      if (std::holds_alternative<Iri>(*nodes[v])) found.emplace_back(depth, v);
    }
  }

  std::vector<ConnectedIndividual> out;
  for (auto [depth, v] : found) out.push_back({std::get<Iri>(*nodes[v]), *best[v]});
  std::stable_sort(out.begin(), out.end(), [](const ConnectedIndividual& a, const ConnectedIndividual& b) {
    if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
    return a.individual < b.individual;
  });
  return out;
}

}  // namespace sparql_assist
