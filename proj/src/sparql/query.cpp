#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <set>

#include "ontoforge/sparql.hpp"
#include "ontoforge/vocab.hpp"

namespace ontoforge::sparql {

namespace {

enum class Tok { Iri, PName, Var, String, Number, Ident, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;        // IRI body, qname, var name, string body, ident, punct
  std::string lang;        // String only
  std::string datatype;    // String: raw datatype token; Number: xsd type
  bool datatype_is_pname = false;
  SourcePos pos;
};

bool name_char(unsigned char c) {
  return std::isalnum(c) != 0 || c == '_' || c == '-' || c == '.' || c >= 0x80;
}

class Lexer {
 public:
  explicit Lexer(std::string_view in) : in_(in) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws();
      Token t;
      t.pos = SourcePos{line_, col_};
      if (eof()) {
        out.push_back(t);
        return out;
      }
      lex_one(t);
      out.push_back(std::move(t));
    }
  }

 private:
  bool eof() const { return pos_ >= in_.size(); }
  char peek(std::size_t k = 0) const { return pos_ + k < in_.size() ? in_[pos_ + k] : '\0'; }
  void advance() {
    if (eof()) return;
    if (in_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  [[noreturn]] void fail(SourcePos p, const std::string& why) const { throw SyntaxError(p, why); }

  void skip_ws() {
    while (!eof()) {
      if (peek() == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(peek())) != 0) {
        advance();
      } else {
        break;
      }
    }
  }

  // '<' opens an IRI only when a '>' closes it before any whitespace.
  bool iri_ahead() const {
    for (std::size_t k = pos_ + 1; k < in_.size(); ++k) {
      char c = in_[k];
      if (c == '>') return k > pos_ + 1;
      if (std::isspace(static_cast<unsigned char>(c)) != 0 || c == '<' || c == '"' ||
          c == '{' || c == '}' || c == '(' || c == ')') {
        return false;
      }
    }
    return false;
  }

  void lex_one(Token& t) {
    char c = peek();
    if (c == '<' && iri_ahead()) {
      advance();
      while (peek() != '>') {
        t.text += peek();
        advance();
      }
      advance();
      t.kind = Tok::Iri;
      return;
    }
    if (c == '?' || c == '$') {
      advance();
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) != 0 || peek() == '_')) {
        t.text += peek();
        advance();
      }
      if (t.text.empty()) fail(t.pos, "empty variable name");
      t.kind = Tok::Var;
      return;
    }
    if (c == '"' || c == '\'') {
      lex_string(t, c);
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) != 0 ||
        ((c == '+' || c == '-') && std::isdigit(static_cast<unsigned char>(peek(1))) != 0)) {
      lex_number(t);
      return;
    }
    if (c == '>' || c == '<' || c == '!' || c == '=') {
      t.kind = Tok::Punct;
      t.text = c;
      advance();
      if (peek() == '=' && c != '=') {
        t.text += '=';
        advance();
      }
      if (t.text == "!") fail(t.pos, "expected '!='");
      return;
    }
    if (std::string_view("{}().;,*").find(c) != std::string_view::npos) {
      t.kind = Tok::Punct;
      t.text = c;
      advance();
      return;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) != 0 || c == '_' || c == ':') {
      std::string word;
      while (!eof() && name_char(static_cast<unsigned char>(peek())) && peek() != ':') {
        word += peek();
        advance();
      }
      if (peek() == ':') {
        advance();
        word += ':';
        std::string local;
        while (!eof() && (name_char(static_cast<unsigned char>(peek())) || peek() == ':')) {
          local += peek();
          advance();
        }
        // A trailing '.' ends the triple, not the name.
        while (!local.empty() && local.back() == '.') {
          local.pop_back();
          --pos_;
          --col_;
        }
        t.kind = Tok::PName;
        t.text = word + local;
        return;
      }
      while (!word.empty() && word.back() == '.') {
        word.pop_back();
        --pos_;
        --col_;
      }
      t.kind = Tok::Ident;
      t.text = word;
      return;
    }
    fail(t.pos, std::string("unexpected character '") + c + "'");
  }

  void lex_string(Token& t, char quote) {
    advance();
    for (;;) {
      if (eof() || peek() == '\n') fail(t.pos, "unterminated string literal");
      char c = peek();
      if (c == quote) {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        char e = peek();
        switch (e) {
          case 'n': t.text += '\n'; break;
          case 't': t.text += '\t'; break;
          case 'r': t.text += '\r'; break;
          case '"': t.text += '"'; break;
          case '\'': t.text += '\''; break;
          case '\\': t.text += '\\'; break;
          default: fail(t.pos, std::string("unsupported escape '\\") + e + "'");
        }
        advance();
        continue;
      }
      t.text += c;
      advance();
    }
    t.kind = Tok::String;
    if (peek() == '@') {
      advance();
      while (std::isalnum(static_cast<unsigned char>(peek())) != 0 || peek() == '-') {
        t.lang += peek();
        advance();
      }
    } else if (peek() == '^' && peek(1) == '^') {
      advance();
      advance();
      Token dt;
      dt.pos = SourcePos{line_, col_};
      lex_one(dt);
      if (dt.kind != Tok::Iri && dt.kind != Tok::PName) fail(dt.pos, "expected datatype IRI");
      t.datatype = dt.text;
      t.datatype_is_pname = dt.kind == Tok::PName;
    }
  }

  void lex_number(Token& t) {
    if (peek() == '+' || peek() == '-') {
      t.text += peek();
      advance();
    }
    while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
      t.text += peek();
      advance();
    }
    t.datatype = vocab::kXsdInteger;
    if (peek() == '.' && std::isdigit(static_cast<unsigned char>(peek(1))) != 0) {
      t.text += '.';
      advance();
      while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
        t.text += peek();
        advance();
      }
      t.datatype = vocab::kXsdDecimal;
    }
    if (peek() == 'e' || peek() == 'E') {
      t.text += peek();
      advance();
      if (peek() == '+' || peek() == '-') {
        t.text += peek();
        advance();
      }
      while (std::isdigit(static_cast<unsigned char>(peek())) != 0) {
        t.text += peek();
        advance();
      }
      t.datatype = vocab::kXsdDouble;
    }
    t.kind = Tok::Number;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, const PrefixMap* defaults)
      : toks_(std::move(tokens)), defaults_(defaults) {}

  Query parse() {
    parse_prolog();
    expect_keyword("SELECT");
    if (is_keyword("DISTINCT") || is_keyword("REDUCED")) {
      fail("DISTINCT/REDUCED are not supported");
    }
    bool star = false;
    std::vector<std::pair<std::string, SourcePos>> selected;
    if (is_punct("*")) {
      star = true;
      next();
    } else {
      while (cur().kind == Tok::Var) {
        selected.emplace_back(cur().text, cur().pos);
        next();
      }
      if (selected.empty()) fail("expected at least one variable after SELECT");
    }
    if (is_keyword("WHERE")) next();
    expect_punct("{");
    parse_group();
    expect_punct("}");
    parse_modifiers();
    if (cur().kind != Tok::End) fail("unexpected trailing input '" + cur().text + "'");

    if (star) {
      q_.select_vars = pattern_vars_in_order_;
    } else {
      for (auto& [name, pos] : selected) {
        if (pattern_vars_.count(name) == 0) throw UnboundVariable(name, "SELECT");
        q_.select_vars.push_back(name);
      }
    }
    for (const auto& f : q_.filters) {
      if (pattern_vars_.count(f.variable) == 0) throw UnboundVariable(f.variable, "FILTER");
    }
    if (q_.order_by && pattern_vars_.count(q_.order_by->variable) == 0) {
      throw UnboundVariable(q_.order_by->variable, "ORDER BY");
    }
    return std::move(q_);
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  void next() {
    if (i_ + 1 < toks_.size()) ++i_;
  }
  [[noreturn]] void fail(const std::string& why) const { throw SyntaxError(cur().pos, why); }

  bool is_keyword(std::string_view kw) const {
    return cur().kind == Tok::Ident && iequals(cur().text, kw);
  }
  bool is_punct(std::string_view p) const { return cur().kind == Tok::Punct && cur().text == p; }

  std::string describe() const {
    if (cur().kind == Tok::End) return "end of input";
    return "'" + cur().text + "'";
  }

  void expect_keyword(std::string_view kw) {
    if (!is_keyword(kw)) fail("expected " + std::string(kw) + " but found " + describe());
    next();
  }
  void expect_punct(std::string_view p) {
    if (!is_punct(p)) fail("expected '" + std::string(p) + "' but found " + describe());
    next();
  }

  void parse_prolog() {
    for (;;) {
      if (is_keyword("PREFIX")) {
        next();
        if (cur().kind != Tok::PName || cur().text.back() != ':') {
          fail("expected prefix label ending in ':'");
        }
        std::string label = cur().text.substr(0, cur().text.size() - 1);
        next();
        if (cur().kind != Tok::Iri) fail("expected namespace IRI");
        q_.prefixes.set(label, cur().text);
        next();
      } else if (is_keyword("BASE")) {
        fail("BASE is not supported");
      } else {
        return;
      }
    }
  }

  std::string expand(const std::string& qname, SourcePos pos) const {
    auto colon = qname.find(':');
    std::string prefix = qname.substr(0, colon);
    std::string local = qname.substr(colon + 1);
    if (auto ns = q_.prefixes.find(prefix)) return *ns + local;
    if (defaults_ != nullptr) {
      if (auto ns = defaults_->find(prefix)) return *ns + local;
    }
    throw UnknownPrefix(pos, prefix);
  }

  void note_var(const std::string& name) {
    if (pattern_vars_.insert(name).second) pattern_vars_in_order_.push_back(name);
  }

  PatternTerm parse_pattern_term(bool predicate_position) {
    const Token& t = cur();
    switch (t.kind) {
      case Tok::Var: {
        std::string name = t.text;
        note_var(name);
        next();
        return Variable{name};
      }
      case Tok::Iri: {
        Term term = Term::iri(t.text);
        next();
        return term;
      }
      case Tok::PName: {
        Term term = Term::iri(expand(t.text, t.pos));
        next();
        return term;
      }
      case Tok::Ident:
        if (predicate_position && t.text == "a") {
          next();
          return Term::iri(vocab::kRdfType);
        }
        if (!predicate_position && (t.text == "true" || t.text == "false")) {
          Term term = Term::literal(t.text, vocab::kXsdBoolean);
          next();
          return term;
        }
        fail("unexpected keyword '" + t.text + "' in triple pattern");
      case Tok::String:
      case Tok::Number:
        if (predicate_position) fail("a literal cannot be a predicate");
        return parse_literal();
      default: fail("expected a term but found " + describe());
    }
  }

  Term parse_literal() {
    const Token& t = cur();
    Term term;
    if (t.kind == Tok::Number) {
      term = Term::literal(t.text, t.datatype);
    } else {
      std::string dt = t.datatype;
      if (t.datatype_is_pname) dt = expand(dt, t.pos);
      term = Term::literal(t.text, dt, t.lang);
    }
    next();
    return term;
  }

  void parse_group() {
    for (;;) {
      if (is_punct("}")) return;
      if (is_punct(".")) {
        next();
        continue;
      }
      if (is_keyword("FILTER")) {
        parse_filter();
        continue;
      }
      if (is_keyword("OPTIONAL") || is_keyword("UNION") || is_keyword("GRAPH") ||
          is_keyword("BIND") || is_keyword("VALUES") || is_punct("{")) {
        fail("unsupported construct " + describe());
      }
      if (cur().kind == Tok::End) fail("expected '}' but found end of input");
      parse_triples_same_subject();
      if (!is_punct(".") && !is_punct("}") && !is_keyword("FILTER")) {
        fail("expected '.' or '}' after triple pattern but found " + describe());
      }
    }
  }

  void parse_triples_same_subject() {
    PatternTerm subject = parse_pattern_term(false);
    if (auto* term = std::get_if<Term>(&subject); term != nullptr && term->is_literal()) {
      fail("a literal cannot be a subject");
    }
    for (;;) {
      PatternTerm predicate = parse_pattern_term(true);
      for (;;) {
        PatternTerm object = parse_pattern_term(false);
        q_.patterns.push_back(TriplePattern{subject, predicate, std::move(object)});
        if (!is_punct(",")) break;
        next();
      }
      if (!is_punct(";")) return;
      while (is_punct(";")) next();
      if (is_punct(".") || is_punct("}")) return;
    }
  }

  void parse_filter() {
    next();  // FILTER
    expect_punct("(");
    if (cur().kind != Tok::Var) fail("FILTER must start with a variable");
    FilterExpr f;
    f.variable = cur().text;
    next();
    if (cur().kind != Tok::Punct) fail("expected comparison operator but found " + describe());
    static const std::map<std::string, CompareOp> ops = {
        {">", CompareOp::Gt}, {"<", CompareOp::Lt}, {">=", CompareOp::Ge},
        {"<=", CompareOp::Le}, {"=", CompareOp::Eq}, {"!=", CompareOp::Ne}};
    auto it = ops.find(cur().text);
    if (it == ops.end()) fail("expected comparison operator but found " + describe());
    f.op = it->second;
    next();
    if (cur().kind != Tok::String && cur().kind != Tok::Number) {
      fail("FILTER constant must be a number or a string");
    }
    f.constant = parse_literal();
    expect_punct(")");
    q_.filters.push_back(std::move(f));
  }

  void parse_modifiers() {
    if (is_keyword("ORDER")) {
      next();
      expect_keyword("BY");
      OrderBy ob;
      if (is_keyword("ASC") || is_keyword("DESC")) {
        ob.ascending = is_keyword("ASC");
        next();
        expect_punct("(");
        if (cur().kind != Tok::Var) fail("expected variable in ORDER BY");
        ob.variable = cur().text;
        next();
        expect_punct(")");
      } else {
        if (cur().kind != Tok::Var) fail("expected variable in ORDER BY");
        ob.variable = cur().text;
        next();
      }
      q_.order_by = ob;
    }
    if (is_keyword("LIMIT")) {
      next();
      if (cur().kind != Tok::Number || cur().datatype != vocab::kXsdInteger ||
          cur().text[0] == '-' || cur().text[0] == '+') {
        fail("LIMIT expects a positive integer");
      }
      std::size_t n = std::stoul(cur().text);
      if (n == 0) fail("LIMIT expects a positive integer");
      q_.limit = n;
      next();
    }
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  const PrefixMap* defaults_;
  Query q_;
  std::set<std::string> pattern_vars_;
  std::vector<std::string> pattern_vars_in_order_;
};

}  // namespace

const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::Gt: return ">";
    case CompareOp::Lt: return "<";
    case CompareOp::Ge: return ">=";
    case CompareOp::Le: return "<=";
    case CompareOp::Eq: return "=";
    case CompareOp::Ne: return "!=";
  }
  return "?";
}

Query parse_query(std::string_view text, const PrefixMap* defaults) {
  return Parser(Lexer(text).run(), defaults).parse();
}

std::vector<std::string> query_iris(const Query& query) {
  std::vector<std::string> out;
  auto add = [&](const PatternTerm& pt) {
    if (const auto* t = std::get_if<Term>(&pt); t != nullptr && t->is_iri()) {
      out.push_back(t->value());
    }
  };
  for (const auto& p : query.patterns) {
    add(p.subject);
    add(p.predicate);
    add(p.object);
  }
  return out;
}

}  // namespace ontoforge::sparql
