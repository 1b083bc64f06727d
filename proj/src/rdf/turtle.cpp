#include <algorithm>
#include <cctype>
#include <map>

#include "ontoforge/rdf.hpp"
#include "ontoforge/vocab.hpp"

namespace ontoforge {

namespace {

bool is_name_start(unsigned char c) { return std::isalpha(c) != 0 || c == '_' || c >= 0x80; }
bool is_name_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c == '-' || c == '.' || c >= 0x80;
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

std::string resolve_iri(const std::string& iri, const std::optional<std::string>& base) {
  if (!base || base->empty()) return iri;
  auto colon = iri.find(':');
  auto slash = iri.find('/');
  if (colon != std::string::npos && (slash == std::string::npos || colon < slash)) {
    return iri;  // already absolute
  }
  const std::string& b = *base;
  if (iri.empty()) return b;
  if (iri[0] == '#') return b.substr(0, b.find('#')) + iri;
  if (iri[0] == '/') {
    auto scheme_end = b.find("://");
    if (scheme_end == std::string::npos) return b + iri;
    auto path_start = b.find('/', scheme_end + 3);
    return b.substr(0, path_start) + iri;
  }
  auto last_slash = b.rfind('/');
  return (last_slash == std::string::npos ? b : b.substr(0, last_slash + 1)) + iri;
}

class TurtleParser {
 public:
  TurtleParser(std::string_view input, std::optional<std::string> base)
      : in_(input), base_(std::move(base)) {}

  TurtleDocument parse() {
    for (;;) {
      skip_ws();
      if (eof()) break;
      if (try_directive()) continue;
      parse_statement();
    }
    return std::move(doc_);
  }

  Term parse_single_term(const PrefixMap& prefixes) {
    doc_.prefixes = prefixes;
    skip_ws();
    Term t = parse_object();
    skip_ws();
    if (!eof()) fail("unexpected trailing input");
    return t;
  }

 private:
  bool eof() const { return pos_ >= in_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < in_.size() ? in_[pos_ + ahead] : '\0';
  }
  SourcePos here() const { return SourcePos{line_, col_}; }

  void advance() {
    if (eof()) return;
    if (in_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else if ((static_cast<unsigned char>(in_[pos_]) & 0xC0) != 0x80) {
      ++col_;
    }
    ++pos_;
  }

  [[noreturn]] void fail(const std::string& reason) const { throw SyntaxError(here(), reason); }
  [[noreturn]] void fail_at(SourcePos pos, const std::string& reason) const {
    throw SyntaxError(pos, reason);
  }

  void skip_ws() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c)) != 0) {
        advance();
      } else {
        break;
      }
    }
  }

  void expect(char c, const std::string& what) {
    skip_ws();
    if (peek() != c || eof()) {
      if (eof()) fail("expected " + what + " but reached end of input");
      fail(std::string("expected ") + what + " but found '" + peek() + "'");
    }
    advance();
  }

  bool match_keyword(std::string_view kw, bool case_insensitive) {
    if (pos_ + kw.size() > in_.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
      char a = in_[pos_ + i];
      char b = kw[i];
      if (case_insensitive ? std::tolower(static_cast<unsigned char>(a)) !=
                                 std::tolower(static_cast<unsigned char>(b))
                           : a != b) {
        return false;
      }
    }
    unsigned char after = pos_ + kw.size() < in_.size()
                              ? static_cast<unsigned char>(in_[pos_ + kw.size()])
                              : ' ';
    if (is_name_char(after) || after == ':') return false;
    for (std::size_t i = 0; i < kw.size(); ++i) advance();
    return true;
  }

  bool try_directive() {
    if (match_keyword("@prefix", false)) {
      parse_prefix_body();
      expect('.', "'.' after @prefix directive");
      return true;
    }
    if (match_keyword("@base", false)) {
      skip_ws();
      base_ = read_iriref();
      expect('.', "'.' after @base directive");
      return true;
    }
    if (match_keyword("PREFIX", true)) {
      parse_prefix_body();
      return true;
    }
    if (match_keyword("BASE", true)) {
      skip_ws();
      base_ = read_iriref();
      return true;
    }
    if (peek() == '@') fail("unknown directive");
    return false;
  }

  void parse_prefix_body() {
    skip_ws();
    std::string label;
    if (peek() != ':') {
      if (!is_name_start(static_cast<unsigned char>(peek()))) fail("expected prefix label");
      while (!eof() && is_name_char(static_cast<unsigned char>(peek())) && peek() != ':') {
        label += peek();
        advance();
      }
    }
    if (peek() != ':') fail("expected ':' after prefix label");
    advance();
    skip_ws();
    std::string ns = read_iriref();
    doc_.prefixes.set(std::move(label), std::move(ns));
  }

  std::string read_iriref() {
    if (peek() != '<') fail("expected '<' to start an IRI");
    SourcePos start = here();
    advance();
    std::string out;
    for (;;) {
      if (eof()) fail_at(start, "unterminated IRI: missing '>'");
      char c = peek();
      if (c == '>') {
        advance();
        break;
      }
      if (c == '<' || c == '"' || std::isspace(static_cast<unsigned char>(c)) != 0) {
        fail_at(start, "unterminated IRI: missing '>'");
      }
      out += c;
      advance();
    }
    return resolve_iri(out, base_);
  }

  void parse_statement() {
    Term subject = parse_subject();
    parse_predicate_object_list(subject);
    expect('.', "'.' to end the statement");
  }

  Term parse_subject() {
    skip_ws();
    char c = peek();
    if (c == '<') return Term::iri(read_iriref());
    if (c == '_' && peek(1) == ':') return read_blank();
    if (c == '[' || c == '(') fail("anonymous nodes and collections are not supported");
    if (c == '"' || std::isdigit(static_cast<unsigned char>(c)) != 0) {
      fail("literal cannot be a subject");
    }
    return read_qname();
  }

  void parse_predicate_object_list(const Term& subject) {
    for (;;) {
      Term predicate = parse_verb();
      parse_object_list(subject, predicate);
      skip_ws();
      if (peek() != ';') return;
      while (peek() == ';') {
        advance();
        skip_ws();
      }
      // A trailing ';' before the terminating '.' is allowed.
      if (peek() == '.') return;
    }
  }

  Term parse_verb() {
    skip_ws();
    if (peek() == 'a') {
      unsigned char after = static_cast<unsigned char>(peek(1));
      if (!is_name_char(after) && after != ':') {
        advance();
        return Term::iri(vocab::kRdfType);
      }
    }
    if (peek() == '<') return Term::iri(read_iriref());
    if (eof()) fail("expected a predicate but reached end of input");
    if (!is_name_start(static_cast<unsigned char>(peek())) && peek() != ':') {
      fail(std::string("expected a predicate but found '") + peek() + "'");
    }
    return read_qname();
  }

  void parse_object_list(const Term& subject, const Term& predicate) {
    for (;;) {
      Term object = parse_object();
      doc_.graph.insert(Triple{subject, predicate, std::move(object)});
      skip_ws();
      if (peek() != ',') return;
      advance();
    }
  }

  Term parse_object() {
    skip_ws();
    if (eof()) fail("expected an object but reached end of input");
    char c = peek();
    if (c == '<') return Term::iri(read_iriref());
    if (c == '_' && peek(1) == ':') return read_blank();
    if (c == '"') return read_literal();
    if (c == '[' || c == '(') fail("anonymous nodes and collections are not supported");
    if (c == '+' || c == '-' || c == '.' || std::isdigit(static_cast<unsigned char>(c)) != 0) {
      return read_number();
    }
    if (match_keyword("true", false)) return Term::literal("true", vocab::kXsdBoolean);
    if (match_keyword("false", false)) return Term::literal("false", vocab::kXsdBoolean);
    if (is_name_start(static_cast<unsigned char>(c)) || c == ':') return read_qname();
    fail(std::string("unexpected character '") + c + "'");
  }

  Term read_blank() {
    advance();  // _
    advance();  // :
    std::string label;
    while (!eof() && is_name_char(static_cast<unsigned char>(peek()))) {
      label += peek();
      advance();
    }
    while (!label.empty() && label.back() == '.') {
      label.pop_back();
      rewind_one();
    }
    if (label.empty()) fail("empty blank node label");
    return Term::blank(std::move(label));
  }

  // Only used to give back trailing '.' characters, which never span lines.
  void rewind_one() {
    --pos_;
    --col_;
  }

  Term read_qname() {
    SourcePos start = here();
    std::string prefix;
    while (!eof() && peek() != ':' && is_name_char(static_cast<unsigned char>(peek()))) {
      prefix += peek();
      advance();
    }
    if (peek() != ':') {
      if (prefix.empty()) fail_at(start, std::string("unexpected character '") + peek() + "'");
      fail_at(start, "expected ':' in prefixed name '" + prefix + "'");
    }
    advance();
    std::string local;
    while (!eof()) {
      char c = peek();
      if (is_name_char(static_cast<unsigned char>(c)) || c == ':') {
        local += c;
        advance();
      } else if (c == '\\' && pos_ + 1 < in_.size()) {
        advance();
        local += peek();
        advance();
      } else {
        break;
      }
    }
    while (!local.empty() && local.back() == '.') {
      local.pop_back();
      rewind_one();
    }
    auto ns = doc_.prefixes.find(prefix);
    if (!ns) throw UnknownPrefix(start, prefix);
    return Term::iri(*ns + local);
  }

  Term read_literal() {
    SourcePos start = here();
    advance();  // opening quote
    std::string lexical;
    for (;;) {
      if (eof()) fail_at(start, "unterminated string literal");
      char c = peek();
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\n' || c == '\r') fail_at(start, "newline in string literal");
      if (c == '\\') {
        advance();
        char e = peek();
        switch (e) {
          case '"': lexical += '"'; break;
          case '\\': lexical += '\\'; break;
          case 'n': lexical += '\n'; break;
          case 't': lexical += '\t'; break;
          case 'r': lexical += '\r'; break;
          case 'u':
          case 'U': {
            std::size_t digits = e == 'u' ? 4 : 8;
            advance();
            std::string hex;
            for (std::size_t i = 0; i < digits; ++i) {
              if (std::isxdigit(static_cast<unsigned char>(peek())) == 0) {
                fail("bad unicode escape");
              }
              hex += peek();
              advance();
            }
            append_utf8(lexical, std::stoul(hex, nullptr, 16));
            continue;
          }
          default: fail(std::string("unsupported escape '\\") + e + "'");
        }
        advance();
        continue;
      }
      lexical += c;
      advance();
    }
    if (peek() == '@') {
      advance();
      std::string lang;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) != 0 || peek() == '-')) {
        lang += peek();
        advance();
      }
      if (lang.empty()) fail("empty language tag");
      return Term::literal(std::move(lexical), {}, std::move(lang));
    }
    if (peek() == '^' && peek(1) == '^') {
      advance();
      advance();
      Term dt = peek() == '<' ? Term::iri(read_iriref()) : read_qname();
      return Term::literal(std::move(lexical), dt.value());
    }
    return Term::literal(std::move(lexical));
  }

  Term read_number() {
    SourcePos start = here();
    std::string text;
    if (peek() == '+' || peek() == '-') {
      text += peek();
      advance();
    }
    auto digits = [&] {
      std::size_t n = 0;
      while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
        text += peek();
        advance();
        ++n;
      }
      return n;
    };
    std::size_t int_digits = digits();
    bool decimal = false;
    std::size_t frac_digits = 0;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1))) != 0) {
      decimal = true;
      text += '.';
      advance();
      frac_digits = digits();
    }
    bool exponent = false;
    if (peek() == 'e' || peek() == 'E') {
      exponent = true;
      text += peek();
      advance();
      if (peek() == '+' || peek() == '-') {
        text += peek();
        advance();
      }
      if (digits() == 0) fail_at(start, "malformed exponent");
    }
    if (int_digits == 0 && frac_digits == 0) fail_at(start, "malformed number");
    const char* dt = exponent ? vocab::kXsdDouble : decimal ? vocab::kXsdDecimal : vocab::kXsdInteger;
    return Term::literal(std::move(text), dt);
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::optional<std::string> base_;
  TurtleDocument doc_;
};

bool is_integer_lexical(const std::string& s) {
  std::size_t i = (!s.empty() && (s[0] == '+' || s[0] == '-')) ? 1 : 0;
  if (i == s.size()) return false;
  return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool is_decimal_lexical(const std::string& s) {
  auto dot = s.find('.');
  if (dot == std::string::npos || dot + 1 == s.size()) return false;
  std::string int_part = s.substr(0, dot);
  std::string frac = s.substr(dot + 1);
  bool int_ok = int_part.empty() || int_part == "+" || int_part == "-" ||
                is_integer_lexical(int_part);
  return int_ok && std::all_of(frac.begin(), frac.end(),
                               [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out += c;
    }
  }
  return out;
}

std::string format_iri(const std::string& iri, const PrefixMap& prefixes) {
  if (auto q = prefixes.compact(iri)) return *q;
  return "<" + iri + ">";
}

}  // namespace

TurtleDocument parse_turtle(std::string_view input, const std::optional<std::string>& base) {
  return TurtleParser(input, base).parse();
}

Term parse_turtle_term(std::string_view text, const PrefixMap& prefixes) {
  if (text == "a") return Term::iri(vocab::kRdfType);
  return TurtleParser(text, std::nullopt).parse_single_term(prefixes);
}

std::string format_turtle_term(const Term& t, const PrefixMap& prefixes) {
  switch (t.kind()) {
    case TermKind::Iri: return format_iri(t.value(), prefixes);
    case TermKind::BlankNode: return "_:" + t.value();
    case TermKind::Literal: break;
  }
  const auto& dt = t.datatype();
  const auto& v = t.value();
  if (dt == vocab::kXsdInteger && is_integer_lexical(v)) return v;
  if (dt == vocab::kXsdDecimal && is_decimal_lexical(v)) return v;
  if (dt == vocab::kXsdBoolean && (v == "true" || v == "false")) return v;
  std::string out = "\"" + escape(v) + "\"";
  if (!t.lang().empty()) return out + "@" + t.lang();
  if (!dt.empty()) out += "^^" + format_iri(dt, prefixes);
  return out;
}

std::string serialize_turtle(const Graph& graph, const PrefixMap& prefixes) {
  std::string out;
  for (const auto& [label, ns] : prefixes.entries()) {
    out += "@prefix " + label + ": <" + ns + "> .\n";
  }

  // subject -> predicate -> objects, each level keyed by canonical form.
  std::map<std::string, std::pair<Term, std::map<std::string, std::pair<Term, std::map<std::string, Term>>>>>
      blocks;
  for (const auto& t : graph.triples()) {
    auto& subject_block = blocks[t.subject.canonical()];
    subject_block.first = t.subject;
    auto& predicate_block = subject_block.second[t.predicate.canonical()];
    predicate_block.first = t.predicate;
    predicate_block.second.emplace(t.object.canonical(), t.object);
  }

  for (const auto& [_, subject_block] : blocks) {
    out += "\n" + format_turtle_term(subject_block.first, prefixes);
    bool first_predicate = true;
    for (const auto& [__, predicate_block] : subject_block.second) {
      out += first_predicate ? " " : " ;\n    ";
      first_predicate = false;
      const Term& p = predicate_block.first;
      out += p.value() == vocab::kRdfType ? std::string("a") : format_turtle_term(p, prefixes);
      bool first_object = true;
      for (const auto& [___, object] : predicate_block.second) {
        out += first_object ? " " : ", ";
        first_object = false;
        out += format_turtle_term(object, prefixes);
      }
    }
    out += " .\n";
  }
  return out;
}

}  // namespace ontoforge
