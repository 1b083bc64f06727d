#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>
#include <unordered_set>

#include "ontoforge/rdf.hpp"
#include "ontoforge/vocab.hpp"

namespace ontoforge {

namespace {

void hash_combine(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string escape_literal(std::string_view s) {
  std::string out;
  out.reserve(s.size());
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

}  // namespace

// ---- Term -------------------------------------------------------------------

Term Term::iri(std::string value) {
  if (value.empty() || has_whitespace(value)) {
    throw InvalidTerm("invalid IRI '" + value + "'");
  }
  Term t;
  t.kind_ = TermKind::Iri;
  t.value_ = std::move(value);
  return t;
}

Term Term::blank(std::string label) {
  if (label.empty() || has_whitespace(label)) {
    throw InvalidTerm("invalid blank node label '" + label + "'");
  }
  Term t;
  t.kind_ = TermKind::BlankNode;
  t.value_ = std::move(label);
  return t;
}

Term Term::literal(std::string lexical, std::string datatype, std::string lang) {
  if (!lang.empty() && !datatype.empty() && datatype != vocab::kRdfLangString) {
    throw InvalidTerm("literal cannot carry both a language tag and datatype <" +
                      datatype + ">");
  }
  Term t;
  t.kind_ = TermKind::Literal;
  t.value_ = std::move(lexical);
  t.lang_ = std::move(lang);
  // rdf:langString is implied by the tag.
  if (t.lang_.empty()) t.datatype_ = std::move(datatype);
  return t;
}

std::string Term::canonical() const {
  switch (kind_) {
    case TermKind::Iri: return "<" + value_ + ">";
    case TermKind::BlankNode: return "_:" + value_;
    case TermKind::Literal: {
      std::string out = "\"" + escape_literal(value_) + "\"";
      if (!lang_.empty()) out += "@" + lang_;
      else if (!datatype_.empty()) out += "^^<" + datatype_ + ">";
      return out;
    }
  }
  return {};
}

std::size_t TermHash::operator()(const Term& t) const noexcept {
  std::size_t seed = static_cast<std::size_t>(t.kind());
  hash_combine(seed, std::hash<std::string>{}(t.value()));
  hash_combine(seed, std::hash<std::string>{}(t.datatype()));
  hash_combine(seed, std::hash<std::string>{}(t.lang()));
  return seed;
}

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
  TermHash h;
  std::size_t seed = h(t.subject);
  hash_combine(seed, h(t.predicate));
  hash_combine(seed, h(t.object));
  return seed;
}

void validate_triple(const Triple& t) {
  if (t.subject.is_literal()) {
    throw InvalidTerm("literal in subject position: " + t.subject.canonical());
  }
  if (!t.predicate.is_iri()) {
    throw InvalidTerm("predicate must be an IRI: " + t.predicate.canonical());
  }
}

// ---- PrefixMap --------------------------------------------------------------

void PrefixMap::set(std::string prefix, std::string ns) {
  for (auto& [p, n] : entries_) {
    if (p == prefix) {
      n = std::move(ns);
      return;
    }
  }
  entries_.emplace_back(std::move(prefix), std::move(ns));
}

std::optional<std::string> PrefixMap::find(std::string_view prefix) const {
  for (const auto& [p, n] : entries_) {
    if (p == prefix) return n;
  }
  return std::nullopt;
}

std::optional<std::string> PrefixMap::expand(std::string_view qname) const {
  auto colon = qname.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto ns = find(qname.substr(0, colon));
  if (!ns) return std::nullopt;
  return *ns + std::string(qname.substr(colon + 1));
}

bool is_valid_local_name(std::string_view local) {
  if (local.empty()) return true;
  auto ok_char = [](unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c == '-' || c == '.' || c >= 0x80;
  };
  if (!std::all_of(local.begin(), local.end(), ok_char)) return false;
  unsigned char first = static_cast<unsigned char>(local.front());
  if (first == '-' || first == '.') return false;
  return local.back() != '.';
}

std::optional<std::string> PrefixMap::compact(std::string_view iri) const {
  const std::pair<std::string, std::string>* best = nullptr;
  for (const auto& entry : entries_) {
    const auto& ns = entry.second;
    if (ns.empty() || iri.size() < ns.size() || iri.substr(0, ns.size()) != ns) continue;
    if (!is_valid_local_name(iri.substr(ns.size()))) continue;
    if (best == nullptr || ns.size() > best->second.size()) best = &entry;
  }
  if (best == nullptr) return std::nullopt;
  return best->first + ":" + std::string(iri.substr(best->second.size()));
}

// ---- Graph ------------------------------------------------------------------

void Graph::check_mutable() const {
  if (frozen_) throw Error("graph is frozen");
}

bool Graph::insert(const Triple& t) {
  check_mutable();
  validate_triple(t);
  if (position_.count(t) != 0) return false;
  std::size_t idx = triples_.size();
  triples_.push_back(t);
  position_.emplace(t, idx);
  by_subject_[t.subject].push_back(idx);
  by_predicate_[t.predicate].push_back(idx);
  by_object_[t.object].push_back(idx);
  return true;
}

bool Graph::erase(const Triple& t) {
  check_mutable();
  auto it = position_.find(t);
  if (it == position_.end()) return false;
  triples_.erase(triples_.begin() + static_cast<std::ptrdiff_t>(it->second));
  rebuild_indexes();
  return true;
}

void Graph::rebuild_indexes() {
  position_.clear();
  by_subject_.clear();
  by_predicate_.clear();
  by_object_.clear();
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    const auto& t = triples_[i];
    position_.emplace(t, i);
    by_subject_[t.subject].push_back(i);
    by_predicate_[t.predicate].push_back(i);
    by_object_[t.object].push_back(i);
  }
}

std::vector<Triple> Graph::match(const std::optional<Term>& s,
                                 const std::optional<Term>& p,
                                 const std::optional<Term>& o) const {
  std::vector<Triple> out;
  if (s && p && o) {
    Triple t{*s, *p, *o};
    if (contains(t)) out.push_back(std::move(t));
    return out;
  }
  // Pick the shortest posting list among the bound positions.
  static const std::vector<std::size_t> kEmpty;
  const std::vector<std::size_t>* best = nullptr;
  auto consider = [&](const std::optional<Term>& key, const Index& index) {
    if (!key) return;
    auto it = index.find(*key);
    const auto* list = it == index.end() ? &kEmpty : &it->second;
    if (best == nullptr || list->size() < best->size()) best = list;
  };
  consider(s, by_subject_);
  consider(p, by_predicate_);
  consider(o, by_object_);

  auto accept = [&](const Triple& t) {
    return (!s || t.subject == *s) && (!p || t.predicate == *p) &&
           (!o || t.object == *o);
  };
  if (best == nullptr) return triples_;
  out.reserve(best->size());
  for (std::size_t idx : *best) {
    if (accept(triples_[idx])) out.push_back(triples_[idx]);
  }
  return out;
}

std::vector<Term> Graph::objects(const Term& s, const Term& p) const {
  std::vector<Term> out;
  for (auto& t : match(s, p, std::nullopt)) out.push_back(std::move(t.object));
  return out;
}

bool operator==(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) return false;
  return std::all_of(a.triples_.begin(), a.triples_.end(),
                     [&](const Triple& t) { return b.contains(t); });
}

std::vector<Triple> match(const Graph& g, const std::optional<Term>& s,
                          const std::optional<Term>& p,
                          const std::optional<Term>& o) {
  return g.match(s, p, o);
}

// ---- merge ------------------------------------------------------------------

namespace {

std::set<std::string> blank_labels(const Graph& g) {
  std::set<std::string> out;
  for (const auto& t : g.triples()) {
    if (t.subject.is_blank()) out.insert(t.subject.value());
    if (t.object.is_blank()) out.insert(t.object.value());
  }
  return out;
}

}  // namespace

Graph merge(const Graph& a, const Graph& b) {
  auto taken = blank_labels(a);
  const auto b_labels = blank_labels(b);
  std::map<std::string, std::string> rename;
  for (const auto& label : b_labels) {
    if (taken.count(label) == 0) continue;
    for (int k = 1;; ++k) {
      std::string candidate = label + "_" + std::to_string(k);
      if (taken.count(candidate) == 0 && b_labels.count(candidate) == 0) {
        rename[label] = candidate;
        taken.insert(candidate);
        break;
      }
    }
  }
  auto map_term = [&](const Term& t) {
    if (!t.is_blank()) return t;
    auto it = rename.find(t.value());
    return it == rename.end() ? t : Term::blank(it->second);
  };

  Graph out;
  for (const auto& t : a.triples()) out.insert(t);
  for (const auto& t : b.triples()) {
    out.insert(Triple{map_term(t.subject), t.predicate, map_term(t.object)});
  }
  return out;
}

// ---- isomorphism ------------------------------------------------------------

namespace {

bool has_blank(const Triple& t) { return t.subject.is_blank() || t.object.is_blank(); }

// Describes how a blank node participates in triples, ignoring other blank
// labels; nodes can only map onto nodes with the same signature.
std::map<std::string, std::vector<std::string>> blank_signatures(const Graph& g) {
  std::map<std::string, std::vector<std::string>> sig;
  auto render = [](const Term& t, const std::string& self) {
    if (!t.is_blank()) return t.canonical();
    return t.value() == self ? std::string("*") : std::string("_");
  };
  for (const auto& t : g.triples()) {
    if (t.subject.is_blank()) {
      const auto& self = t.subject.value();
      sig[self].push_back("S " + t.predicate.value() + " " + render(t.object, self));
    }
    if (t.object.is_blank() && !(t.subject.is_blank() && t.subject == t.object)) {
      const auto& self = t.object.value();
      sig[self].push_back("O " + render(t.subject, self) + " " + t.predicate.value());
    }
  }
  for (auto& [_, v] : sig) std::sort(v.begin(), v.end());
  return sig;
}

class BijectionSearch {
 public:
  BijectionSearch(const Graph& a, const Graph& b) : a_(a), b_(b) {
    auto sig_a = blank_signatures(a);
    auto sig_b = blank_signatures(b);
    for (const auto& [label, sig] : sig_a) {
      std::vector<std::string> candidates;
      for (const auto& [other, other_sig] : sig_b) {
        if (other_sig == sig) candidates.push_back(other);
      }
      order_.push_back(label);
      candidates_[label] = std::move(candidates);
    }
    std::sort(order_.begin(), order_.end(), [&](const auto& x, const auto& y) {
      return candidates_[x].size() < candidates_[y].size();
    });
    for (const auto& t : a.triples()) {
      if (t.subject.is_blank()) touching_[t.subject.value()].push_back(&t);
      if (t.object.is_blank() && t.object != t.subject) {
        touching_[t.object.value()].push_back(&t);
      }
    }
    sizes_ok_ = sig_a.size() == sig_b.size();
  }

  bool run() { return sizes_ok_ && search(0); }

 private:
  bool search(std::size_t depth) {
    if (depth == order_.size()) return true;
    const auto& x = order_[depth];
    for (const auto& y : candidates_[x]) {
      if (used_.count(y) != 0) continue;
      mapping_[x] = y;
      used_.insert(y);
      if (consistent(x) && search(depth + 1)) return true;
      used_.erase(y);
      mapping_.erase(x);
    }
    return false;
  }

  bool consistent(const std::string& x) const {
    for (const Triple* t : touching_.at(x)) {
      auto mapped_s = map(t->subject);
      auto mapped_o = map(t->object);
      if (!mapped_s || !mapped_o) continue;
      if (!b_.contains(Triple{*mapped_s, t->predicate, *mapped_o})) return false;
    }
    return true;
  }

  std::optional<Term> map(const Term& t) const {
    if (!t.is_blank()) return t;
    auto it = mapping_.find(t.value());
    if (it == mapping_.end()) return std::nullopt;
    return Term::blank(it->second);
  }

  const Graph& a_;
  const Graph& b_;
  std::vector<std::string> order_;
  std::map<std::string, std::vector<std::string>> candidates_;
  std::map<std::string, std::vector<const Triple*>> touching_;
  std::map<std::string, std::string> mapping_;
  std::set<std::string> used_;
  bool sizes_ok_ = true;
};

}  // namespace

bool graphs_equal(const Graph& a, const Graph& b) {
  if (a.size() != b.size()) return false;
  std::size_t ground_a = 0;
  std::size_t ground_b = 0;
  for (const auto& t : a.triples()) {
    if (has_blank(t)) continue;
    ++ground_a;
    if (!b.contains(t)) return false;
  }
  for (const auto& t : b.triples()) {
    if (!has_blank(t)) ++ground_b;
  }
  if (ground_a != ground_b) return false;
  if (ground_a == a.size()) return true;
  return BijectionSearch(a, b).run();
}

// ---- numerics ---------------------------------------------------------------

namespace {

enum class NumericFamily { None, Decimal, Double };

NumericFamily family_of(const std::string& datatype) {
  static const std::string xsd = vocab::kXsd;
  if (datatype.size() <= xsd.size() || datatype.compare(0, xsd.size(), xsd) != 0) {
    return NumericFamily::None;
  }
  const std::string local = datatype.substr(xsd.size());
  static const std::set<std::string> decimals = {
      "integer", "decimal", "int", "long", "short", "byte",
      "nonNegativeInteger", "positiveInteger", "negativeInteger",
      "nonPositiveInteger", "unsignedInt", "unsignedLong", "unsignedShort",
      "unsignedByte"};
  if (decimals.count(local) != 0) return NumericFamily::Decimal;
  if (local == "double" || local == "float") return NumericFamily::Double;
  return NumericFamily::None;
}

struct ExactDecimal {
  bool negative = false;
  std::string integer;   // no leading zeros
  std::string fraction;  // no trailing zeros
};

std::optional<ExactDecimal> parse_decimal(std::string_view s) {
  ExactDecimal d;
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
    d.negative = s[i] == '-';
    ++i;
  }
  std::size_t int_start = i;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  std::string integer(s.substr(int_start, i - int_start));
  std::string fraction;
  if (i < s.size() && s[i] == '.') {
    ++i;
    std::size_t frac_start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    fraction = std::string(s.substr(frac_start, i - frac_start));
  }
  if (i != s.size() || (integer.empty() && fraction.empty())) return std::nullopt;
  integer.erase(0, std::min(integer.find_first_not_of('0'), integer.size()));
  while (!fraction.empty() && fraction.back() == '0') fraction.pop_back();
  d.integer = std::move(integer);
  d.fraction = std::move(fraction);
  if (d.integer.empty() && d.fraction.empty()) d.negative = false;
  return d;
}

std::strong_ordering compare_magnitude(const ExactDecimal& a, const ExactDecimal& b) {
  if (a.integer.size() != b.integer.size()) {
    return a.integer.size() <=> b.integer.size();
  }
  if (auto c = a.integer.compare(b.integer); c != 0) return c <=> 0;
  return a.fraction.compare(b.fraction) <=> 0;
}

std::strong_ordering compare_exact(const ExactDecimal& a, const ExactDecimal& b) {
  if (a.negative != b.negative) {
    return a.negative ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  auto mag = compare_magnitude(a, b);
  if (!a.negative) return mag;
  return 0 <=> mag;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

bool is_numeric(const Term& t) {
  if (!t.is_literal()) return false;
  switch (family_of(t.datatype())) {
    case NumericFamily::Decimal: return parse_decimal(t.value()).has_value();
    case NumericFamily::Double: return parse_double(t.value()).has_value();
    case NumericFamily::None: return false;
  }
  return false;
}

std::optional<std::strong_ordering> compare_numeric(const Term& a, const Term& b) {
  if (!is_numeric(a) || !is_numeric(b)) return std::nullopt;
  auto fa = family_of(a.datatype());
  auto fb = family_of(b.datatype());
  if (fa == NumericFamily::Decimal && fb == NumericFamily::Decimal) {
    return compare_exact(*parse_decimal(a.value()), *parse_decimal(b.value()));
  }
  double x = *parse_double(a.value());
  double y = *parse_double(b.value());
  if (x < y) return std::strong_ordering::less;
  if (x > y) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace ontoforge
