#include "sparql_assist/rdf_model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

#include "text_util.hpp"

namespace sparql_assist {

// ---------------------------------------------------------------------------
// Terms

bool is_valid_iri(std::string_view value) noexcept {
  if (value.empty()) return false;
  for (unsigned char c : value) {
    if (c <= 0x20 || c == '<' || c == '>') return false;
  }
  return true;
}

Iri::Iri(std::string value) : value_(std::move(value)) {
  if (!is_valid_iri(value_)) throw std::invalid_argument("invalid IRI: '" + value_ + "'");
}

std::string_view Iri::local_name() const noexcept {
  std::string_view v = value_;
  auto pos = v.find_last_of("#/");
  if (pos == std::string_view::npos) return v;
  return v.substr(pos + 1);
}

std::optional<std::string> normalize_lang_tag(std::string_view tag) {
  std::string out;
  out.reserve(tag.size());
  std::size_t run = 0;
  bool first = true;
  for (char ch : tag) {
    auto c = static_cast<unsigned char>(ch);
    if (c == '-') {
      if (run == 0) return std::nullopt;
      run = 0;
      first = false;
      out.push_back('-');
      continue;
    }
    bool ok = first ? std::isalpha(c) != 0 : std::isalnum(c) != 0;
    if (!ok || ++run > 8) return std::nullopt;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  if (run == 0) return std::nullopt;
  return out;
}

Literal::Literal(std::string lexical, std::string lang) : lexical_(std::move(lexical)) {
  auto norm = normalize_lang_tag(lang);
  if (!norm) throw std::invalid_argument("invalid language tag: '" + lang + "'");
  lang_ = std::move(*norm);
}

Literal::Literal(std::string lexical, Iri datatype)
    : lexical_(std::move(lexical)), datatype_(std::move(datatype)) {}

Triple::Triple(Node s, Iri p, Node o) : subject(std::move(s)), predicate(std::move(p)), object(std::move(o)) {
  if (is_literal(subject)) throw std::invalid_argument("literal in subject position");
}

namespace {

void append_escaped(std::string& out, std::string_view s) {
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      case '\b': out += "\\b"; break;
      case '\f': out += "\\f"; break;
      default: out.push_back(c);
    }
  }
}

}  // namespace

std::string to_ntriples(const Node& n) {
  std::string out;
  if (const auto* iri = std::get_if<Iri>(&n)) {
    out = "<" + iri->str() + ">";
  } else if (const auto* b = std::get_if<BlankNode>(&n)) {
    out = "_:" + b->label;
  } else {
    const auto& lit = std::get<Literal>(n);
    out.push_back('"');
    append_escaped(out, lit.lexical());
    out.push_back('"');
    if (lit.lang()) {
      out += "@" + *lit.lang();
    } else if (lit.datatype()) {
      out += "^^<" + lit.datatype()->str() + ">";
    }
  }
  return out;
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                         message),
      line_(line),
      column_(column) {}

UnsupportedConstructError::UnsupportedConstructError(std::size_t line, std::size_t column,
                                                     std::string construct)
    : ParseError(line, column, "unsupported construct: " + construct), construct_(std::move(construct)) {}

std::string_view strip_bom(std::string_view text) noexcept {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  return text;
}

// ---------------------------------------------------------------------------
// IRI resolution

bool has_scheme(std::string_view ref) noexcept {
  if (ref.empty() || !std::isalpha(static_cast<unsigned char>(ref[0]))) return false;
  for (std::size_t i = 1; i < ref.size(); ++i) {
    auto c = static_cast<unsigned char>(ref[i]);
    if (c == ':') return true;
    if (!std::isalnum(c) && c != '+' && c != '-' && c != '.') return false;
  }
  return false;
}

namespace {

struct UriParts {
  std::string scheme;
  std::optional<std::string> authority;
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;
};

UriParts split_uri(std::string_view s) {
  UriParts p;
  if (has_scheme(s)) {
    auto colon = s.find(':');
    p.scheme = std::string(s.substr(0, colon));
    s.remove_prefix(colon + 1);
  }
  if (auto hash = s.find('#'); hash != std::string_view::npos) {
    p.fragment = std::string(s.substr(hash + 1));
    s = s.substr(0, hash);
  }
  if (auto q = s.find('?'); q != std::string_view::npos) {
    p.query = std::string(s.substr(q + 1));
    s = s.substr(0, q);
  }
  if (s.substr(0, 2) == "//") {
    s.remove_prefix(2);
    auto slash = s.find('/');
    p.authority = std::string(s.substr(0, slash));
    s = slash == std::string_view::npos ? std::string_view{} : s.substr(slash);
  }
  p.path = std::string(s);
  return p;
}

std::string remove_dot_segments(std::string_view in) {
  std::string input(in);
  std::string output;
  while (!input.empty()) {
    if (input.rfind("../", 0) == 0) {
      input.erase(0, 3);
    } else if (input.rfind("./", 0) == 0) {
      input.erase(0, 2);
    } else if (input.rfind("/./", 0) == 0) {
      input.erase(0, 2);
    } else if (input == "/.") {
      input = "/";
    } else if (input.rfind("/../", 0) == 0 || input == "/..") {
      input = input == "/.." ? "/" : input.substr(3);
      auto last = output.rfind('/');
      output.erase(last == std::string::npos ? 0 : last);
    } else if (input == "." || input == "..") {
      input.clear();
    } else {
      std::size_t start = input[0] == '/' ? 1 : 0;
      auto next = input.find('/', start);
      if (next == std::string::npos) next = input.size();
      output += input.substr(0, next);
      input.erase(0, next);
    }
  }
  return output;
}

std::string compose(const UriParts& p) {
  std::string out;
  if (!p.scheme.empty()) out += p.scheme + ":";
  if (p.authority) out += "//" + *p.authority;
  out += p.path;
  if (p.query) out += "?" + *p.query;
  if (p.fragment) out += "#" + *p.fragment;
  return out;
}

}  // namespace

std::string resolve_iri(std::string_view base, std::string_view reference) {
  UriParts r = split_uri(reference);
  if (!r.scheme.empty()) {
    r.path = remove_dot_segments(r.path);
    return compose(r);
  }
  UriParts b = split_uri(base);
  UriParts t;
  t.scheme = b.scheme;
  t.fragment = r.fragment;
  if (r.authority) {
    t.authority = r.authority;
    t.path = remove_dot_segments(r.path);
    t.query = r.query;
  } else {
    t.authority = b.authority;
    if (r.path.empty()) {
      t.path = b.path;
      t.query = r.query ? r.query : b.query;
    } else {
      if (r.path[0] == '/') {
        t.path = remove_dot_segments(r.path);
      } else {
        std::string merged;
        if (b.authority && b.path.empty()) {
          merged = "/" + r.path;
        } else {
          auto last = b.path.rfind('/');
          merged = (last == std::string::npos ? std::string() : b.path.substr(0, last + 1)) + r.path;
        }
        t.path = remove_dot_segments(merged);
      }
      t.query = r.query;
    }
  }
  return compose(t);
}

// ---------------------------------------------------------------------------
// Shared lexical helpers

namespace {

using text_util::hex_value;
using text_util::is_local_escapable;
using text_util::is_pn_chars;
using text_util::is_pn_chars_base;
using text_util::is_pn_chars_u;

/// Character-level reader with line/column tracking, shared by both parsers.
class Reader {
 public:
  Reader(std::string_view text, std::size_t line_offset = 0) : text_(text), line_offset_(line_offset) {}

  bool eof() const { return pos_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
  }
  char get() { return text_[pos_++]; }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  std::string_view rest() const { return text_.substr(pos_); }
  std::string_view slice(std::size_t a, std::size_t b) const { return text_.substr(a, b - a); }
  bool starts_with(std::string_view s) const { return rest().substr(0, s.size()) == s; }

  std::uint32_t peek_cp(std::size_t* len) const {
    return text_util::decode_utf8(text_, pos_, len);
  }

  [[noreturn]] void fail(const std::string& message) const { fail_at(pos_, message); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& message) const {
    auto [line, col] = location(at);
    throw ParseError(line, col, message);
  }
  [[noreturn]] void unsupported(const std::string& construct) const {
    auto [line, col] = location(pos_);
    throw UnsupportedConstructError(line, col, construct);
  }

  std::pair<std::size_t, std::size_t> location(std::size_t at) const {
    std::size_t line = 1 + line_offset_, col = 1;
    for (std::size_t i = 0; i < at && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return {line, col};
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_offset_;
};

void read_uchar(Reader& r, std::string& out) {
  // Positioned after the backslash, at 'u' or 'U'.
  char kind = r.get();
  int digits = kind == 'u' ? 4 : 8;
  std::uint32_t cp = 0;
  for (int i = 0; i < digits; ++i) {
    int h = hex_value(r.peek());
    if (h < 0) r.fail("malformed unicode escape");
    r.get();
    cp = cp * 16 + static_cast<std::uint32_t>(h);
  }
  if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) r.fail("unicode escape out of range");
  text_util::append_utf8(out, cp);
}

std::string read_iriref(Reader& r) {
  std::size_t start = r.pos();
  r.get();  // '<'
  std::string out;
  for (;;) {
    if (r.eof()) r.fail_at(start, "unterminated IRI");
    char c = r.get();
    if (c == '>') break;
    if (c == '\\') {
      if (r.peek() != 'u' && r.peek() != 'U') r.fail("invalid escape in IRI");
      read_uchar(r, out);
      continue;
    }
    auto uc = static_cast<unsigned char>(c);
    if (uc <= 0x20 || std::string_view("<\"{}|^`").find(c) != std::string_view::npos) {
      r.fail("invalid character in IRI");
    }
    out.push_back(c);
  }
  return out;
}

void read_echar(Reader& r, std::string& out) {
  char e = r.peek();
  switch (e) {
    case 't': out.push_back('\t'); break;
    case 'b': out.push_back('\b'); break;
    case 'n': out.push_back('\n'); break;
    case 'r': out.push_back('\r'); break;
    case 'f': out.push_back('\f'); break;
    case '"': out.push_back('"'); break;
    case '\'': out.push_back('\''); break;
    case '\\': out.push_back('\\'); break;
    case 'u':
    case 'U': read_uchar(r, out); return;
    default: r.fail("invalid string escape");
  }
  r.get();
}

/// Reads any of the four quoting styles; long forms only when `allow_long`.
std::string read_string(Reader& r, bool allow_long) {
  std::size_t start = r.pos();
  char q = r.peek();
  bool is_long = allow_long && r.peek(1) == q && r.peek(2) == q;
  r.seek(r.pos() + (is_long ? 3 : 1));
  std::string out;
  for (;;) {
    if (r.eof()) r.fail_at(start, "unterminated string");
    char c = r.peek();
    if (is_long) {
      if (c == q && r.peek(1) == q && r.peek(2) == q) {
        // A run of more than three quotes ends with the last three.
        if (r.peek(3) == q) {
          out.push_back(q);
          r.get();
          continue;
        }
        r.seek(r.pos() + 3);
        return out;
      }
    } else if (c == q) {
      r.get();
      return out;
    } else if (c == '\n' || c == '\r') {
      r.fail("newline in short string");
    }
    r.get();
    if (c == '\\') {
      read_echar(r, out);
    } else {
      out.push_back(c);
    }
  }
}

std::string read_langtag(Reader& r) {
  r.get();  // '@'
  std::size_t start = r.pos();
  while (!r.eof() && (std::isalnum(static_cast<unsigned char>(r.peek())) || r.peek() == '-')) r.get();
  auto raw = std::string(r.slice(start, r.pos()));
  auto norm = normalize_lang_tag(raw);
  if (!norm) r.fail_at(start, "invalid language tag '" + raw + "'");
  return *norm;
}

std::string read_blank_label(Reader& r) {
  r.seek(r.pos() + 2);  // "_:"
  std::string label;
  std::size_t len = 0;
  std::uint32_t cp = r.peek_cp(&len);
  if (r.eof() || !(is_pn_chars_u(cp) || (cp >= '0' && cp <= '9'))) r.fail("malformed blank node label");
  while (!r.eof()) {
    cp = r.peek_cp(&len);
    if (is_pn_chars(cp)) {
      label.append(r.rest().substr(0, len));
      r.seek(r.pos() + len);
    } else if (cp == '.') {
      // A dot is only part of the label when followed by another label char.
      std::size_t save = r.pos();
      r.get();
      std::size_t l2 = 0;
      if (!r.eof() && (is_pn_chars(r.peek_cp(&l2)) || r.peek() == '.')) {
        label.push_back('.');
        continue;
      }
      r.seek(save);
      break;
    } else {
      break;
    }
  }
  while (!label.empty() && label.back() == '.') label.pop_back();
  return label;
}

}  // namespace

// ---------------------------------------------------------------------------
// N-Triples

namespace {

void skip_inline_ws(Reader& r) {
  while (!r.eof() && (r.peek() == ' ' || r.peek() == '\t')) r.get();
}

Iri make_absolute_iri(Reader& r, std::size_t at, std::string value) {
  if (!has_scheme(value)) r.fail_at(at, "relative IRI '" + value + "'");
  if (!is_valid_iri(value)) r.fail_at(at, "invalid IRI '" + value + "'");
  return Iri(std::move(value));
}

std::optional<Triple> parse_ntriples_line(std::string_view line, std::size_t line_no) {
  Reader r(line, line_no - 1);
  skip_inline_ws(r);
  if (r.eof() || r.peek() == '#') return std::nullopt;

  auto read_subject = [&]() -> Node {
    if (r.peek() == '<') {
      auto at = r.pos();
      return make_absolute_iri(r, at, read_iriref(r));
    }
    if (r.starts_with("_:")) return BlankNode{read_blank_label(r)};
    r.fail("expected IRI or blank node as subject");
  };

  Node subject = read_subject();
  skip_inline_ws(r);
  if (r.peek() != '<') r.fail("expected IRI as predicate");
  auto pat = r.pos();
  Iri predicate = make_absolute_iri(r, pat, read_iriref(r));
  skip_inline_ws(r);

  Node object;
  if (r.peek() == '<') {
    auto at = r.pos();
    object = make_absolute_iri(r, at, read_iriref(r));
  } else if (r.starts_with("_:")) {
    object = BlankNode{read_blank_label(r)};
  } else if (r.peek() == '"') {
    std::string lexical = read_string(r, false);
    if (r.peek() == '@') {
      object = Literal(std::move(lexical), read_langtag(r));
    } else if (r.starts_with("^^")) {
      r.seek(r.pos() + 2);
      if (r.peek() != '<') r.fail("expected datatype IRI");
      auto at = r.pos();
      object = Literal(std::move(lexical), make_absolute_iri(r, at, read_iriref(r)));
    } else {
      object = Literal(std::move(lexical));
    }
  } else {
    r.fail("expected object");
  }
  skip_inline_ws(r);
  if (r.peek() != '.') r.fail("expected '.'");
  r.get();
  skip_inline_ws(r);
  if (!r.eof() && r.peek() != '#') r.fail("trailing characters after '.'");
  return Triple(std::move(subject), std::move(predicate), std::move(object));
}

}  // namespace

ParseResult parse_ntriples(std::string_view text, ParseMode mode) {
  text = strip_bom(text);
  ParseResult result;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find_first_of("\r\n", pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    try {
      if (auto t = parse_ntriples_line(line, line_no)) result.graph.insert(std::move(*t));
    } catch (const ParseError& e) {
      if (mode == ParseMode::kStrict) throw;
      result.diagnostics.push_back({line_no, e.what()});
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
    if (text[nl] == '\r' && pos < text.size() && text[pos] == '\n') ++pos;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Turtle subset

namespace {

class TurtleParser {
 public:
  TurtleParser(std::string_view text, const std::optional<Iri>& base) : r_(text) {
    if (base) base_ = base->str();
  }

  Graph parse() {
    for (;;) {
      skip_ws();
      if (r_.eof()) break;
      statement();
    }
    return std::move(graph_);
  }

 private:
  void skip_ws() {
    while (!r_.eof()) {
      char c = r_.peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        r_.get();
      } else if (c == '#') {
        while (!r_.eof() && r_.peek() != '\n') r_.get();
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    skip_ws();
    if (r_.peek() != c) r_.fail(std::string("expected '") + c + "'");
    r_.get();
  }

  bool keyword_ci(std::string_view kw) {
    auto rest = r_.rest();
    if (rest.size() < kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(rest[i])) != kw[i]) return false;
    }
    if (rest.size() > kw.size()) {
      auto c = static_cast<unsigned char>(rest[kw.size()]);
      if (std::isalnum(c) || c == ':' || c == '_' || c == '-') return false;
    }
    return true;
  }

  void statement() {
    if (r_.starts_with("@prefix")) {
      r_.seek(r_.pos() + 7);
      prefix_decl();
      expect('.');
    } else if (r_.starts_with("@base")) {
      r_.seek(r_.pos() + 5);
      base_decl();
      expect('.');
    } else if (keyword_ci("PREFIX")) {
      r_.seek(r_.pos() + 6);
      prefix_decl();
    } else if (keyword_ci("BASE")) {
      r_.seek(r_.pos() + 4);
      base_decl();
    } else {
      triples();
      expect('.');
    }
  }

  void prefix_decl() {
    skip_ws();
    std::string label = read_pn_prefix();
    if (r_.peek() != ':') r_.fail("expected ':' after prefix label");
    r_.get();
    skip_ws();
    if (r_.peek() != '<') r_.fail("expected IRI in prefix declaration");
    prefixes_[label] = resolve(read_iriref(r_));
  }

  void base_decl() {
    skip_ws();
    if (r_.peek() != '<') r_.fail("expected IRI in base declaration");
    base_ = resolve(read_iriref(r_));
  }

  std::string resolve(const std::string& ref) {
    if (has_scheme(ref)) return ref;
    if (!base_) r_.fail("relative IRI '" + ref + "' without base");
    return resolve_iri(*base_, ref);
  }

  Iri to_iri(std::size_t at, std::string value) {
    if (!is_valid_iri(value)) r_.fail_at(at, "invalid IRI '" + value + "'");
    return Iri(std::move(value));
  }

  std::string read_pn_prefix() {
    std::string out;
    std::size_t len = 0;
    if (r_.eof() || r_.peek() == ':') return out;
    std::uint32_t cp = r_.peek_cp(&len);
    if (!is_pn_chars_base(cp)) r_.fail("malformed prefix name");
    while (!r_.eof()) {
      cp = r_.peek_cp(&len);
      if (is_pn_chars(cp) || cp == '.') {
        out.append(r_.rest().substr(0, len));
        r_.seek(r_.pos() + len);
      } else {
        break;
      }
    }
    if (!out.empty() && out.back() == '.') r_.fail("prefix name ends with '.'");
    return out;
  }

  std::string read_pn_local() {
    std::string out;
    std::size_t len = 0;
    bool first = true;
    while (!r_.eof()) {
      char c = r_.peek();
      std::uint32_t cp = r_.peek_cp(&len);
      if (c == '%') {
        if (hex_value(r_.peek(1)) < 0 || hex_value(r_.peek(2)) < 0) r_.fail("malformed percent escape");
        out.append(r_.rest().substr(0, 3));
        r_.seek(r_.pos() + 3);
      } else if (c == '\\') {
        if (!is_local_escapable(r_.peek(1))) r_.fail("invalid escape in local name");
        out.push_back(r_.peek(1));
        r_.seek(r_.pos() + 2);
      } else if (is_pn_chars_u(cp) || cp == ':' || (cp >= '0' && cp <= '9') ||
                 (!first && (is_pn_chars(cp) || cp == '.'))) {
        if (cp == '.') {
          // Dots cannot end a local name.
          std::size_t l2 = 0;
          r_.seek(r_.pos() + 1);
          bool more = !r_.eof() && (is_pn_chars(r_.peek_cp(&l2)) || r_.peek() == '.' || r_.peek() == ':' ||
                                    r_.peek() == '%' || r_.peek() == '\\');
          r_.seek(r_.pos() - 1);
          if (!more) break;
        }
        out.append(r_.rest().substr(0, len));
        r_.seek(r_.pos() + len);
      } else {
        break;
      }
      first = false;
    }
    return out;
  }

  /// Prefixed name, `a`, `true`/`false`; returns nullopt for a bare keyword
  /// and leaves its text in `word`.
  std::optional<Iri> read_pname(std::string& word) {
    std::size_t at = r_.pos();
    std::string prefix = read_pn_prefix();
    if (r_.peek() != ':') {
      word = prefix;
      return std::nullopt;
    }
    r_.get();
    std::string local = read_pn_local();
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) r_.fail_at(at, "undeclared prefix '" + prefix + "'");
    return to_iri(at, it->second + local);
  }

  Node subject() {
    skip_ws();
    char c = r_.peek();
    if (c == '<') {
      auto at = r_.pos();
      return to_iri(at, resolve(read_iriref(r_)));
    }
    if (r_.starts_with("_:")) return BlankNode{read_blank_label(r_)};
    if (c == '[') r_.unsupported("blank node property list '[...]'");
    if (c == '(') r_.unsupported("collection '(...)'");
    std::string word;
    auto at = r_.pos();
    if (auto iri = read_pname(word)) return *iri;
    r_.fail_at(at, "expected subject");
  }

  Iri verb() {
    skip_ws();
    auto at = r_.pos();
    if (r_.peek() == '<') return to_iri(at, resolve(read_iriref(r_)));
    if (r_.peek() == 'a') {
      std::size_t len = 0;
      r_.get();
      bool ends = r_.eof();
      if (!ends) {
        std::uint32_t next = r_.peek_cp(&len);
        ends = !(is_pn_chars(next) || next == ':' || next == '.');
      }
      if (ends) return Iri(vocab::kRdfType);
      r_.seek(at);
    }
    if (r_.peek() == '[') r_.unsupported("blank node property list '[...]'");
    std::string word;
    if (auto iri = read_pname(word)) return *iri;
    r_.fail_at(at, "expected predicate");
  }

  Node object() {
    skip_ws();
    char c = r_.peek();
    auto at = r_.pos();
    if (c == '<') return to_iri(at, resolve(read_iriref(r_)));
    if (r_.starts_with("_:")) return BlankNode{read_blank_label(r_)};
    if (c == '[') r_.unsupported("blank node property list '[...]'");
    if (c == '(') r_.unsupported("collection '(...)'");
    if (c == '"' || c == '\'') {
      std::string lexical = read_string(r_, true);
      if (r_.peek() == '@') return Literal(std::move(lexical), read_langtag(r_));
      if (r_.starts_with("^^")) {
        r_.seek(r_.pos() + 2);
        auto dat = r_.pos();
        if (r_.peek() == '<') return Literal(std::move(lexical), to_iri(dat, resolve(read_iriref(r_))));
        std::string word;
        if (auto iri = read_pname(word)) return Literal(std::move(lexical), *iri);
        r_.fail_at(dat, "expected datatype IRI");
      }
      return Literal(std::move(lexical));
    }
    if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c))) return numeric();
    std::string word;
    if (auto iri = read_pname(word)) return *iri;
    if (word == "true" || word == "false") return Literal(word, Iri(vocab::kXsdBoolean));
    r_.fail_at(at, "expected object");
  }

  Node numeric() {
    std::size_t start = r_.pos();
    std::string text;
    if (r_.peek() == '+' || r_.peek() == '-') text.push_back(r_.get());
    auto digits = [&] {
      std::size_t n = 0;
      while (std::isdigit(static_cast<unsigned char>(r_.peek()))) {
        text.push_back(r_.get());
        ++n;
      }
      return n;
    };
    std::size_t int_digits = digits();
    std::size_t frac_digits = 0;
    bool has_dot = false;
    if (r_.peek() == '.' && std::isdigit(static_cast<unsigned char>(r_.peek(1)))) {
      has_dot = true;
      text.push_back(r_.get());
      frac_digits = digits();
    }
    bool has_exp = false;
    if ((r_.peek() == 'e' || r_.peek() == 'E') && (int_digits + frac_digits) > 0) {
      std::size_t save = r_.pos();
      std::string save_text = text;
      text.push_back(r_.get());
      if (r_.peek() == '+' || r_.peek() == '-') text.push_back(r_.get());
      if (digits() > 0) {
        has_exp = true;
      } else {
        r_.seek(save);
        text = save_text;
      }
    }
    if (int_digits + frac_digits == 0) r_.fail_at(start, "malformed number");
    const std::string& dt = has_exp ? vocab::kXsdDouble : has_dot ? vocab::kXsdDecimal : vocab::kXsdInteger;
    return Literal(std::move(text), Iri(dt));
  }

  void triples() {
    Node s = subject();
    for (;;) {
      Iri p = verb();
      for (;;) {
        graph_.insert(Triple(s, p, object()));
        skip_ws();
        if (r_.peek() != ',') break;
        r_.get();
      }
      skip_ws();
      if (r_.peek() != ';') return;
      while (r_.peek() == ';') {
        r_.get();
        skip_ws();
      }
      if (r_.peek() == '.' || r_.peek() == ']' || r_.eof()) return;
    }
  }

  Reader r_;
  Graph graph_;
  std::map<std::string, std::string> prefixes_;
  std::optional<std::string> base_;
};

}  // namespace

Graph parse_turtle(std::string_view text, const std::optional<Iri>& base) {
  return TurtleParser(strip_bom(text), base).parse();
}

// ---------------------------------------------------------------------------
// Merge and rendering

Graph graph_merge(const std::vector<Graph>& graphs) {
  Graph out;
  std::vector<std::size_t> scope(graphs.size());
  std::size_t next_scope = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    scope[i] = next_scope;
    for (std::size_t j = 0; j < i; ++j) {
      if (graphs[j] == graphs[i]) {
        scope[i] = scope[j];
        break;
      }
    }
    if (scope[i] == next_scope) ++next_scope;
  }
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    std::string tag = "g" + std::to_string(scope[i]) + "_";
    auto rename = [&](const Node& n) -> Node {
      if (const auto* b = std::get_if<BlankNode>(&n)) return BlankNode{tag + b->label};
      return n;
    };
    for (const auto& t : graphs[i]) out.insert(Triple(rename(t.subject), t.predicate, rename(t.object)));
  }
  return out;
}

std::string render_ntriples(const Graph& g) {
  std::string out;
  for (const auto& t : g) {
    out += to_ntriples(t.subject);
    out += " <" + t.predicate.str() + "> ";
    out += to_ntriples(t.object);
    out += " .\n";
  }
  return out;
}

namespace {

bool safe_local(std::string_view local) {
  if (local.empty()) return true;
  auto ok_inner = [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; };
  auto first = static_cast<unsigned char>(local.front());
  if (!(std::isalnum(first) || first == '_')) return false;
  for (unsigned char c : local) {
    if (!ok_inner(c)) return false;
  }
  return true;
}

}  // namespace

std::string render_turtle(const Graph& g, const std::vector<std::pair<std::string, std::string>>& prefixes) {
  std::ostringstream out;
  for (const auto& [label, ns] : prefixes) out << "@prefix " << label << ": <" << ns << "> .\n";
  if (!prefixes.empty()) out << "\n";

  auto iri_text = [&](const Iri& iri) {
    for (const auto& [label, ns] : prefixes) {
      if (iri.str().size() > ns.size() && iri.str().compare(0, ns.size(), ns) == 0) {
        auto local = std::string_view(iri.str()).substr(ns.size());
        if (safe_local(local)) return label + ":" + std::string(local);
      }
    }
    return "<" + iri.str() + ">";
  };
  auto node_text = [&](const Node& n) {
    if (const auto* iri = std::get_if<Iri>(&n)) return iri_text(*iri);
    if (const auto* lit = std::get_if<Literal>(&n); lit && lit->datatype()) {
      std::string s = "\"";
      append_escaped(s, lit->lexical());
      return s + "\"^^" + iri_text(*lit->datatype());
    }
    return to_ntriples(n);
  };

  const Node* subject = nullptr;
  const Iri* predicate = nullptr;
  for (const auto& t : g) {
    if (subject && *subject == t.subject) {
      if (*predicate == t.predicate) {
        out << ",\n        " << node_text(t.object);
      } else {
        out << " ;\n    " << (t.predicate.str() == vocab::kRdfType ? "a" : iri_text(t.predicate)) << " "
            << node_text(t.object);
      }
    } else {
      if (subject) out << " .\n";
      out << node_text(t.subject) << " "
          << (t.predicate.str() == vocab::kRdfType ? "a" : iri_text(t.predicate)) << " " << node_text(t.object);
    }
    subject = &t.subject;
    predicate = &t.predicate;
  }
  if (subject) out << " .\n";
  return out.str();
}

}  // namespace sparql_assist
