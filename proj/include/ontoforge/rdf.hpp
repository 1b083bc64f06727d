#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ontoforge/error.hpp"

namespace ontoforge {

class InvalidTerm : public Error {
 public:
  using Error::Error;
};

enum class TermKind : std::uint8_t { BlankNode, Iri, Literal };

/// An RDF term. IRIs are compared as exact strings. A plain literal has an
/// empty datatype; language-tagged literals keep the tag and no datatype.
class Term {
 public:
  Term() = default;

  static Term iri(std::string value);
  static Term blank(std::string label);
  static Term literal(std::string lexical, std::string datatype = {},
                      std::string lang = {});

  TermKind kind() const { return kind_; }
  bool is_iri() const { return kind_ == TermKind::Iri; }
  bool is_blank() const { return kind_ == TermKind::BlankNode; }
  bool is_literal() const { return kind_ == TermKind::Literal; }

  /// IRI string, blank-node label, or literal lexical form.
  const std::string& value() const { return value_; }
  const std::string& datatype() const { return datatype_; }
  const std::string& lang() const { return lang_; }

  /// N-Triples style rendering; used for sorting and golden output.
  std::string canonical() const;

  friend auto operator<=>(const Term&, const Term&) = default;
  friend bool operator==(const Term&, const Term&) = default;

 private:
  TermKind kind_ = TermKind::Iri;
  std::string value_;
  std::string datatype_;
  std::string lang_;
};

struct Triple {
  Term subject;
  Term predicate;
  Term object;

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;
};

struct TermHash {
  std::size_t operator()(const Term& t) const noexcept;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept;
};

/// Throws InvalidTerm unless the subject is not a literal and the predicate is
/// an IRI.
void validate_triple(const Triple& t);

/// Ordered prefix-label to namespace mapping with unique labels.
class PrefixMap {
 public:
  /// Adds or replaces a binding; order of first insertion is kept.
  void set(std::string prefix, std::string ns);
  std::optional<std::string> find(std::string_view prefix) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  /// "ex:a" -> "http://e/a"; nullopt if the prefix is unbound.
  std::optional<std::string> expand(std::string_view qname) const;
  /// Longest matching namespace whose remainder is a valid local name.
  std::optional<std::string> compact(std::string_view iri) const;

  friend bool operator==(const PrefixMap&, const PrefixMap&) = default;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// True when `local` can be written after "prefix:" in the Turtle subset.
bool is_valid_local_name(std::string_view local);

/// Indexed triple set. Insertion order is remembered; equality is set
/// equality. After freeze() any mutation throws.
class Graph {
 public:
  Graph() = default;

  /// Returns false when the triple was already present.
  bool insert(const Triple& t);
  bool insert(Term s, Term p, Term o) {
    return insert(Triple{std::move(s), std::move(p), std::move(o)});
  }
  bool erase(const Triple& t);
  bool contains(const Triple& t) const { return position_.count(t) != 0; }

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const std::vector<Triple>& triples() const { return triples_; }

  /// Triples matching every bound position, in insertion order.
  std::vector<Triple> match(const std::optional<Term>& s,
                            const std::optional<Term>& p,
                            const std::optional<Term>& o) const;

  /// Objects of (s, p, *), in insertion order.
  std::vector<Term> objects(const Term& s, const Term& p) const;
  bool has(const Term& s, const Term& p, const Term& o) const {
    return contains(Triple{s, p, o});
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  friend bool operator==(const Graph& a, const Graph& b);

 private:
  using Index = std::unordered_map<Term, std::vector<std::size_t>, TermHash>;

  void check_mutable() const;
  void rebuild_indexes();

  std::vector<Triple> triples_;
  std::unordered_map<Triple, std::size_t, TripleHash> position_;
  Index by_subject_;
  Index by_predicate_;
  Index by_object_;
  bool frozen_ = false;
};

std::vector<Triple> match(const Graph& g, const std::optional<Term>& s,
                          const std::optional<Term>& p,
                          const std::optional<Term>& o);

/// Set union. Blank nodes of `b` whose labels occur in `a` are renamed.
Graph merge(const Graph& a, const Graph& b);

/// Isomorphism check; blank-node bijection found by backtracking.
bool graphs_equal(const Graph& a, const Graph& b);

// ---- numeric literals -------------------------------------------------------

/// True for xsd integer/decimal/double/float family literals whose lexical
/// form parses.
bool is_numeric(const Term& t);

/// Compares two numeric literals by value (exact for integer/decimal).
/// Returns nullopt if either side is not numeric.
std::optional<std::strong_ordering> compare_numeric(const Term& a, const Term& b);

// ---- Turtle -----------------------------------------------------------------

struct TurtleDocument {
  Graph graph;
  PrefixMap prefixes;
};

/// Parses the supported Turtle subset. Throws SyntaxError or UnknownPrefix.
TurtleDocument parse_turtle(std::string_view input,
                            const std::optional<std::string>& base = std::nullopt);

/// Deterministic Turtle: subjects, predicates and objects sorted by canonical
/// form; one block per subject.
std::string serialize_turtle(const Graph& graph, const PrefixMap& prefixes);

/// Parses a single Turtle term (IRI, qname, `a`, literal, number, blank node).
Term parse_turtle_term(std::string_view text, const PrefixMap& prefixes);

/// Renders a term using qnames where the prefix map allows it.
std::string format_turtle_term(const Term& t, const PrefixMap& prefixes);

}  // namespace ontoforge
