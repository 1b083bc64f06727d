#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ontoforge/error.hpp"
#include "ontoforge/rdf.hpp"

namespace ontoforge::sparql {

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name, const std::string& where)
      : Error("variable ?" + name + " used in " + where + " does not appear in any pattern"),
        name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

struct Variable {
  std::string name;
  friend bool operator==(const Variable&, const Variable&) = default;
};

using PatternTerm = std::variant<Term, Variable>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
};

enum class CompareOp { Gt, Lt, Ge, Le, Eq, Ne };

const char* to_string(CompareOp op);

struct FilterExpr {
  std::string variable;
  CompareOp op = CompareOp::Eq;
  /// Numeric constants are typed xsd literals; strings are plain literals.
  Term constant;
};

struct OrderBy {
  std::string variable;
  bool ascending = true;
};

struct Query {
  PrefixMap prefixes;
  std::vector<std::string> select_vars;
  std::vector<TriplePattern> patterns;
  std::vector<FilterExpr> filters;
  std::optional<OrderBy> order_by;
  std::optional<std::size_t> limit;
};

/// Parses the supported SELECT subset. `defaults` supplies prefixes the query
/// text uses without declaring; the query's own PREFIX lines win.
Query parse_query(std::string_view text, const PrefixMap* defaults = nullptr);

struct ResultSet {
  std::vector<std::string> variables;
  std::vector<std::vector<Term>> rows;
  /// Rows dropped because a filter compared a non-numeric value numerically.
  std::size_t type_mismatch_warnings = 0;

  /// Header row of ?names then one row per solution, tab separated.
  std::string to_tsv(const PrefixMap* prefixes = nullptr) const;
  std::optional<std::size_t> column(const std::string& var) const;
};

/// Left-to-right nested-loop join over index lookups; filters, stable ORDER
/// BY, LIMIT. Duplicates are kept.
ResultSet evaluate(const Graph& graph, const Query& query);

/// Outcome of applying a filter to a bound value. Mismatch means the value
/// could not be compared (the row is dropped and counted).
enum class FilterOutcome { Pass, Fail, Mismatch };
FilterOutcome apply_filter(const FilterExpr& filter, const Term& value);

/// ORDER BY comparison: numerics by value, otherwise blank < IRI < literal,
/// then lexical.
bool order_less(const Term& a, const Term& b);

/// Every IRI constant in the query's patterns and filters.
std::vector<std::string> query_iris(const Query& query);

}  // namespace ontoforge::sparql
