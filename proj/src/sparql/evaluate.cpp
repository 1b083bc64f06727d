#include <algorithm>
#include <map>

#include "ontoforge/sparql.hpp"

namespace ontoforge::sparql {

namespace {

int kind_rank(const Term& t) {
  switch (t.kind()) {
    case TermKind::BlankNode: return 0;
    case TermKind::Iri: return 1;
    case TermKind::Literal: return is_numeric(t) ? 2 : 3;
  }
  return 4;
}

bool holds(std::strong_ordering c, CompareOp op) {
  switch (op) {
    case CompareOp::Gt: return c > 0;
    case CompareOp::Lt: return c < 0;
    case CompareOp::Ge: return c >= 0;
    case CompareOp::Le: return c <= 0;
    case CompareOp::Eq: return c == 0;
    case CompareOp::Ne: return c != 0;
  }
  return false;
}

using Binding = std::vector<std::optional<Term>>;

class Evaluator {
 public:
  Evaluator(const Graph& graph, const Query& query) : graph_(graph), query_(query) {
    for (const auto& p : query.patterns) {
      for (const PatternTerm* pt : {&p.subject, &p.predicate, &p.object}) {
        if (const auto* v = std::get_if<Variable>(pt)) slot(v->name);
      }
    }
    for (const auto& f : query.filters) filter_slots_.push_back(slot(f.variable));
  }

  ResultSet run() {
    ResultSet rs;
    rs.variables = query_.select_vars;
    Binding binding(slots_.size());
    std::vector<Binding> solutions;
    join(0, binding, solutions, rs.type_mismatch_warnings);

    if (query_.order_by) {
      std::size_t key = slots_.at(query_.order_by->variable);
      auto less = [key](const Binding& a, const Binding& b) { return order_less(*a[key], *b[key]); };
      if (query_.order_by->ascending) {
        std::stable_sort(solutions.begin(), solutions.end(), less);
      } else {
        std::stable_sort(solutions.begin(), solutions.end(),
                         [&](const Binding& a, const Binding& b) { return less(b, a); });
      }
    }
    if (query_.limit && solutions.size() > *query_.limit) solutions.resize(*query_.limit);

    std::vector<std::size_t> projection;
    for (const auto& v : query_.select_vars) projection.push_back(slots_.at(v));
    rs.rows.reserve(solutions.size());
    for (const auto& s : solutions) {
      std::vector<Term> row;
      row.reserve(projection.size());
      for (std::size_t idx : projection) row.push_back(*s[idx]);
      rs.rows.push_back(std::move(row));
    }
    return rs;
  }

 private:
  std::size_t slot(const std::string& name) {
    auto [it, inserted] = slots_.emplace(name, slots_.size());
    return it->second;
  }

  std::optional<Term> resolve(const PatternTerm& pt, const Binding& b) const {
    if (const auto* t = std::get_if<Term>(&pt)) return *t;
    return b[slots_.at(std::get<Variable>(pt).name)];
  }

  // Binds a pattern position; false when a repeated variable disagrees.
  bool bind(const PatternTerm& pt, const Term& value, Binding& b) const {
    const auto* v = std::get_if<Variable>(&pt);
    if (v == nullptr) return true;
    auto& cell = b[slots_.at(v->name)];
    if (cell) return *cell == value;
    cell = value;
    return true;
  }

  void join(std::size_t depth, Binding& b, std::vector<Binding>& out, std::size_t& warnings) const {
    if (depth == query_.patterns.size()) {
      for (std::size_t i = 0; i < query_.filters.size(); ++i) {
        switch (apply_filter(query_.filters[i], *b[filter_slots_[i]])) {
          case FilterOutcome::Pass: break;
          case FilterOutcome::Fail: return;
          case FilterOutcome::Mismatch: ++warnings; return;
        }
      }
      out.push_back(b);
      return;
    }
    const auto& p = query_.patterns[depth];
    auto s = resolve(p.subject, b);
    auto pr = resolve(p.predicate, b);
    auto o = resolve(p.object, b);
    for (const auto& t : graph_.match(s, pr, o)) {
      Binding next = b;
      if (bind(p.subject, t.subject, next) && bind(p.predicate, t.predicate, next) &&
          bind(p.object, t.object, next)) {
        join(depth + 1, next, out, warnings);
      }
    }
  }

  const Graph& graph_;
  const Query& query_;
  std::map<std::string, std::size_t> slots_;
  std::vector<std::size_t> filter_slots_;
};

}  // namespace

FilterOutcome apply_filter(const FilterExpr& filter, const Term& value) {
  if (is_numeric(filter.constant)) {
    auto c = compare_numeric(value, filter.constant);
    if (!c) return FilterOutcome::Mismatch;
    return holds(*c, filter.op) ? FilterOutcome::Pass : FilterOutcome::Fail;
  }
  if (!value.is_literal() || is_numeric(value)) return FilterOutcome::Mismatch;
  auto c = value.value().compare(filter.constant.value()) <=> 0;
  return holds(c, filter.op) ? FilterOutcome::Pass : FilterOutcome::Fail;
}

bool order_less(const Term& a, const Term& b) {
  int ra = kind_rank(a);
  int rb = kind_rank(b);
  if (ra != rb) return ra < rb;
  if (ra == 2) return *compare_numeric(a, b) < 0;
  return a < b;
}

ResultSet evaluate(const Graph& graph, const Query& query) {
  return Evaluator(graph, query).run();
}

std::optional<std::size_t> ResultSet::column(const std::string& var) const {
  auto it = std::find(variables.begin(), variables.end(), var);
  if (it == variables.end()) return std::nullopt;
  return static_cast<std::size_t>(it - variables.begin());
}

std::string ResultSet::to_tsv(const PrefixMap* prefixes) const {
  std::string out;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    out += (i == 0 ? "?" : "\t?") + variables[i];
  }
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i != 0) out += "\t";
      out += prefixes != nullptr ? format_turtle_term(row[i], *prefixes) : row[i].canonical();
    }
    out += "\n";
  }
  return out;
}

}  // namespace ontoforge::sparql
