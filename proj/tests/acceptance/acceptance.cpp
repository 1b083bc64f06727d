// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "app.hpp"
#include "ontoforge/llm.hpp"
#include "ontoforge/metrics.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/pipeline.hpp"
#include "ontoforge/rdf.hpp"
#include "ontoforge/sparql.hpp"
#include "ontoforge/testkit.hpp"
#include "ontoforge/vocab.hpp"
#include "support/random_provider.hpp"
#include "support/support.hpp"

using namespace ontoforge;
namespace fs = std::filesystem;

namespace {

/// Collects failed expectations for one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++total_;
    if (!ok && failures_.size() < 8) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failed_ == 0; }
  std::size_t total() const { return total_; }
  std::size_t failed() const { return failed_; }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::size_t total_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(9);
  s << v;
  return s.str();
}

TurtleDocument load_fixture(const std::string& rel) { return parse_turtle(testsupport::fixture(rel)); }

// ---------------------------------------------------------------------------
// 1. Metrics reproduction

// Published counts and ratios for the UCPO ontology.
constexpr std::size_t kClasses = 42, kObjectProps = 31, kDataProps = 16, kIndividuals = 159;
constexpr std::size_t kSubClassOf = 11, kDomain = 30, kRange = 30, kProperties = 47;
constexpr double kAR = 0.380952, kIR = 0.261905, kRR = 0.738095, kClassRelation = 1.0;

struct OracleCounts {
  std::size_t classes = 0, object_props = 0, data_props = 0, individuals = 0;
  std::size_t subclass = 0, domain = 0, range = 0;
};

// Direct triple scan, independent of the snapshot extractor.
OracleCounts count_by_scan(const Graph& g) {
  std::set<std::string> classes, ops, dps, individuals;
  for (const auto& t : g.triples()) {
    if (t.predicate.value() != vocab::kRdfType) continue;
    if (t.object.value() == vocab::kOwlClass) classes.insert(t.subject.value());
    if (t.object.value() == vocab::kOwlObjectProperty) ops.insert(t.subject.value());
    if (t.object.value() == vocab::kOwlDatatypeProperty) dps.insert(t.subject.value());
  }
  OracleCounts c;
  for (const auto& t : g.triples()) {
    const auto& p = t.predicate.value();
    if (p == vocab::kRdfType && classes.count(t.object.value())) individuals.insert(t.subject.value());
    if (p == vocab::kRdfsSubClassOf && classes.count(t.subject.value()) && classes.count(t.object.value())) ++c.subclass;
    if (p == vocab::kRdfsDomain && ops.count(t.subject.value())) ++c.domain;
    if (p == vocab::kRdfsRange && ops.count(t.subject.value())) ++c.range;
  }
  c.classes = classes.size();
  c.object_props = ops.size();
  c.data_props = dps.size();
  c.individuals = individuals.size();
  return c;
}

void criterion_metrics(Checks& c) {
  const auto doc = load_fixture("table4-synth.ttl");
  const auto oracle = count_by_scan(doc.graph);
  c.expect(oracle.classes == kClasses, "fixture classes");
  c.expect(oracle.object_props == kObjectProps, "fixture object properties");
  c.expect(oracle.data_props == kDataProps, "fixture data properties");
  c.expect(oracle.individuals == kIndividuals, "fixture individuals");
  c.expect(oracle.subclass == kSubClassOf, "fixture subClassOf");
  c.expect(oracle.domain == kDomain && oracle.range == kRange, "fixture domain/range");

  const auto report = metrics_report(doc.graph, extract_snapshot(doc.graph));
  const auto& b = report.base;
  c.expect(b.class_count == oracle.classes, "class_count vs scan");
  c.expect(b.object_property_count == oracle.object_props, "object_property_count vs scan");
  c.expect(b.data_property_count == oracle.data_props, "data_property_count vs scan");
  c.expect(b.individual_count == oracle.individuals, "individual_count vs scan");
  c.expect(b.subclass_of_count == oracle.subclass, "subclass_of_count vs scan");
  c.expect(b.domain_axiom_count == oracle.domain && b.range_axiom_count == oracle.range, "domain/range vs scan");
  c.expect(b.properties_count == kProperties, "properties = 47");

  const auto& s = report.schema;
  const double h = static_cast<double>(oracle.subclass);
  const double p = static_cast<double>(oracle.object_props);
  const double n = static_cast<double>(oracle.classes);
  c.expect(near(s.attribute_richness, oracle.data_props / n, 1e-12), "AR vs scan");
  c.expect(near(s.inheritance_richness, h / n, 1e-12), "IR vs scan");
  c.expect(near(s.relationship_richness, p / (h + p), 1e-12), "RR vs scan");
  c.expect(near(s.attribute_richness, kAR, 1e-6), "AR " + fmt(s.attribute_richness));
  c.expect(near(s.inheritance_richness, kIR, 1e-6), "IR " + fmt(s.inheritance_richness));
  c.expect(near(s.relationship_richness, kRR, 1e-6), "RR " + fmt(s.relationship_richness));
  c.expect(near(s.class_relation_ratio, kClassRelation, 1e-6), "class/relation " + fmt(s.class_relation_ratio));
  const auto text = report.to_text();
  c.expect(text.find("Relationship richness (RR)  0.738095") != std::string::npos, "text report RR line");
  c.expect(text.find("Class/relation ratio  1.000000") != std::string::npos, "text report class/relation line");
  c.note("AR " + format_metric(s.attribute_richness) + " IR " + format_metric(s.inheritance_richness) + " RR " +
         format_metric(s.relationship_richness) + " C/R " + format_metric(s.class_relation_ratio));
}

// ---------------------------------------------------------------------------
// 2. DL expressivity

void criterion_dl(Checks& c) {
  auto doc = load_fixture("ucpo-mini.ttl");
  const auto sub = doc.graph.match(std::nullopt, Term::iri(vocab::kRdfsSubPropertyOf), std::nullopt);
  const auto snap = extract_snapshot(doc.graph);
  c.expect(!sub.empty(), "ucpo-mini has a subPropertyOf axiom");
  c.expect(!snap.data_properties.empty(), "ucpo-mini has data properties");
  const auto with = detect_dl_expressivity(doc.graph, snap).render();
  c.expect(with == "ALH(D)", "with subPropertyOf: " + with);
  for (const auto& t : sub) doc.graph.erase(t);
  const auto without = detect_dl_expressivity(doc.graph, extract_snapshot(doc.graph)).render();
  c.expect(without == "AL(D)", "without subPropertyOf: " + without);
  c.note(with + " -> " + without);
}

// ---------------------------------------------------------------------------
// 3. SPARQL oracle equivalence

using Row = std::vector<Term>;

struct OracleFilter {
  std::string var;
  std::string op;  // > < >= <= = !=
  Term constant;
};

struct OracleQuery {
  using Slot = std::variant<std::string, Term>;  // variable name or constant
  std::vector<std::array<Slot, 3>> patterns;
  std::vector<OracleFilter> filters;
  std::vector<std::string> select;
  std::optional<std::pair<std::string, bool>> order;  // variable, ascending
  std::optional<std::size_t> limit;
};

std::optional<long double> numeric_value(const Term& t) {
  if (!t.is_literal()) return std::nullopt;
  static const std::set<std::string> numeric = {vocab::kXsdInteger, "http://www.w3.org/2001/XMLSchema#decimal",
                                                "http://www.w3.org/2001/XMLSchema#double"};
  if (!numeric.count(t.datatype())) return std::nullopt;
  try {
    return std::stold(t.value());
  } catch (...) {
    return std::nullopt;
  }
}

template <typename T>
bool compare(const T& a, const T& b, const std::string& op) {
  if (op == ">") return a > b;
  if (op == "<") return a < b;
  if (op == ">=") return a >= b;
  if (op == "<=") return a <= b;
  if (op == "=") return a == b;
  return a != b;
}

// Numeric constants compare numerically against numeric values only; string
// constants compare lexically against non-numeric literals. Anything else
// drops the row.
bool oracle_filter(const OracleFilter& f, const Term& v) {
  if (auto k = numeric_value(f.constant)) {
    auto x = numeric_value(v);
    return x && compare(*x, *k, f.op);
  }
  if (!v.is_literal() || numeric_value(v)) return false;
  return compare(v.value(), f.constant.value(), f.op);
}

// Enumerates every tuple of graph triples, one per pattern, by a depth-first
// linear scan that abandons a prefix as soon as its bindings conflict.
void oracle_extend(const std::vector<Triple>& ts, const OracleQuery& q, std::size_t i,
                   std::map<std::string, Term>& b, std::vector<Row>& out) {
  if (i == q.patterns.size()) {
    for (const auto& f : q.filters) {
      if (!oracle_filter(f, b.at(f.var))) return;
    }
    Row r;
    for (const auto& v : q.select) r.push_back(b.at(v));
    out.push_back(std::move(r));
    return;
  }
  for (const auto& t : ts) {
    const std::array<const Term*, 3> parts = {&t.subject, &t.predicate, &t.object};
    std::vector<std::string> added;
    bool ok = true;
    for (std::size_t k = 0; k < 3 && ok; ++k) {
      const auto& slot = q.patterns[i][k];
      if (const auto* c = std::get_if<Term>(&slot)) {
        ok = *c == *parts[k];
      } else {
        const auto& name = std::get<std::string>(slot);
        auto [it, fresh] = b.emplace(name, *parts[k]);
        if (fresh) added.push_back(name);
        ok = fresh || it->second == *parts[k];
      }
    }
    if (ok) oracle_extend(ts, q, i + 1, b, out);
    for (const auto& name : added) b.erase(name);
  }
}

std::vector<Row> oracle_rows(const Graph& g, const OracleQuery& q) {
  std::vector<Row> out;
  if (q.patterns.empty()) return out;
  std::map<std::string, Term> b;
  oracle_extend(g.triples(), q, 0, b, out);
  return out;
}

// ORDER BY order: IRIs before literals, numbers by value, otherwise lexical.
bool oracle_before(const Term& a, const Term& b) {
  auto rank = [](const Term& t) { return t.is_blank() ? 0 : t.is_iri() ? 1 : 2; };
  if (rank(a) != rank(b)) return rank(a) < rank(b);
  auto x = numeric_value(a), y = numeric_value(b);
  if (x && y) return *x < *y;
  if (x || y) return !x.has_value();
  return a < b;
}

OracleQuery from_parsed(const sparql::Query& q) {
  OracleQuery o;
  for (const auto& p : q.patterns) {
    auto slot = [](const sparql::PatternTerm& t) -> OracleQuery::Slot {
      if (const auto* v = std::get_if<sparql::Variable>(&t)) return v->name;
      return std::get<Term>(t);
    };
    o.patterns.push_back({slot(p.subject), slot(p.predicate), slot(p.object)});
  }
  for (const auto& f : q.filters) o.filters.push_back({f.variable, sparql::to_string(f.op), f.constant});
  o.select = q.select_vars;
  if (q.order_by) o.order = std::make_pair(q.order_by->variable, q.order_by->ascending);
  o.limit = q.limit;
  return o;
}

// Compares evaluate() output with the oracle: multiset equality, ordering by
// the ORDER BY key, and LIMIT truncation of the ordered sequence.
bool agrees(const sparql::ResultSet& rs, const OracleQuery& q, std::vector<Row> expected, std::string& why) {
  std::vector<Row> got;
  std::vector<std::size_t> cols;
  for (const auto& v : q.select) {
    auto c = rs.column(v);
    if (!c) {
      why = "missing column ?" + v;
      return false;
    }
    cols.push_back(*c);
  }
  for (const auto& row : rs.rows) {
    Row r;
    for (auto c : cols) r.push_back(row.at(c));
    got.push_back(std::move(r));
  }
  std::optional<std::size_t> key;
  if (q.order) key = static_cast<std::size_t>(std::find(q.select.begin(), q.select.end(), q.order->first) - q.select.begin());
  if (key && *key < q.select.size()) {
    const bool asc = q.order->second;
    auto before = [&](const Row& a, const Row& b) {
      return asc ? oracle_before(a[*key], b[*key]) : oracle_before(b[*key], a[*key]);
    };
    std::stable_sort(expected.begin(), expected.end(), before);
    for (std::size_t i = 1; i < got.size(); ++i) {
      if (before(got[i], got[i - 1])) {
        why = "rows out of order at " + std::to_string(i);
        return false;
      }
    }
  }
  const std::size_t want = q.limit ? std::min(*q.limit, expected.size()) : expected.size();
  if (got.size() != want) {
    why = "row count " + std::to_string(got.size()) + " expected " + std::to_string(want);
    return false;
  }
  std::vector<Row> sorted_got = got, sorted_all = expected;
  std::sort(sorted_got.begin(), sorted_got.end());
  std::sort(sorted_all.begin(), sorted_all.end());
  if (!q.limit) {
    if (sorted_got != sorted_all) why = "row multiset differs";
    return sorted_got == sorted_all;
  }
  if (!std::includes(sorted_all.begin(), sorted_all.end(), sorted_got.begin(), sorted_got.end())) {
    why = "limited rows are not a sub-multiset of the solutions";
    return false;
  }
  if (key && *key < q.select.size()) {
    for (std::size_t i = 0; i < got.size(); ++i) {
      const auto& a = got[i][*key];
      const auto& b = expected[i][*key];
      if (oracle_before(a, b) || oracle_before(b, a)) {
        why = "ordered prefix differs at " + std::to_string(i);
        return false;
      }
    }
  }
  return true;
}

struct RandomCase {
  Graph graph;
  OracleQuery oracle;
  std::string text;
};

RandomCase random_case(std::mt19937& rng) {
  auto pick = [&](int n) { return static_cast<int>(rng() % static_cast<unsigned>(n)); };
  RandomCase rc;
  const std::size_t triples = 10 + static_cast<std::size_t>(pick(51));
  const int nodes = 3 + pick(6), preds = 1 + pick(3);
  rc.graph = testsupport::random_graph(rng, triples, static_cast<std::size_t>(nodes), static_cast<std::size_t>(preds));

  // Node variables join across patterns; predicate variables are separate
  // since no node is ever used as a predicate.
  const std::vector<std::string> pool = {"a", "b", "c", "d"};
  std::vector<std::string> node_vars;
  auto node_var = [&](const std::string& avoid) {
    std::vector<std::string> reuse, fresh;
    for (const auto& v : pool) {
      if (v == avoid) continue;
      (std::find(node_vars.begin(), node_vars.end(), v) != node_vars.end() ? reuse : fresh).push_back(v);
    }
    const auto& from = !reuse.empty() && (fresh.empty() || pick(100) < 60) ? reuse : fresh;
    const auto v = from[static_cast<std::size_t>(pick(static_cast<int>(from.size())))];
    if (std::find(node_vars.begin(), node_vars.end(), v) == node_vars.end()) node_vars.push_back(v);
    return v;
  };
  std::string body;
  std::set<std::string> bound;
  std::vector<std::string> objects;  // variables in object position
  const int n = 1 + pick(3);
  for (int i = 0; i < n; ++i) {
    std::array<OracleQuery::Slot, 3> slots;
    std::array<std::string, 3> words;
    auto variable = [&](int k, const std::string& v) {
      slots[k] = v;
      words[k] = "?" + v;
      bound.insert(v);
    };
    auto node = [&](int k) {
      const auto local = "n" + std::to_string(pick(nodes));
      slots[k] = Term::iri("http://r/" + local);
      words[k] = "r:" + local;
    };
    std::string subject;
    if (pick(100) < 80) {
      subject = node_var("");
      variable(0, subject);
    } else {
      node(0);
    }
    if (pick(100) < 15) {
      variable(1, "p" + std::to_string(i));
    } else {
      const auto p = std::to_string(pick(preds));
      slots[1] = Term::iri("http://r/p" + p);
      words[1] = "r:p" + p;
    }
    const int r = pick(100);
    if (r < 70) {
      const auto v = pick(10) == 0 ? subject : node_var(subject);
      variable(2, v.empty() ? node_var("") : v);
      objects.push_back(std::get<std::string>(slots[2]));
    } else if (r < 92) {
      node(2);
    } else {
      const auto lit = std::to_string(pick(61));
      slots[2] = Term::literal(lit, vocab::kXsdInteger);
      words[2] = lit;
    }
    rc.oracle.patterns.push_back(slots);
    body += "  " + words[0] + " " + words[1] + " " + words[2] + " .\n";
  }
  if (bound.empty()) {
    rc.oracle.patterns[0][0] = std::string("a");
    body = "  ?a" + body.substr(body.find(' ', 2));
    bound.insert("a");
  }
  std::vector<std::string> vars(bound.begin(), bound.end());
  std::shuffle(vars.begin(), vars.end(), rng);
  if (!objects.empty() && pick(2) == 0) {
    static const std::vector<std::string> ops = {">", "<", ">=", "<=", "=", "!="};
    // Constants present in the graph exercise the boundary of each operator.
    std::vector<std::string> present;
    for (const auto& t : rc.graph.triples()) {
      if (t.object.is_literal()) present.push_back(t.object.value());
    }
    const auto constant = !present.empty() && pick(2) == 0
                              ? present[static_cast<std::size_t>(pick(static_cast<int>(present.size())))]
                              : std::to_string(pick(61));
    OracleFilter f{objects[static_cast<std::size_t>(pick(static_cast<int>(objects.size())))],
                   ops[static_cast<std::size_t>(pick(6))], Term::literal(constant, vocab::kXsdInteger)};
    body += "  FILTER(?" + f.var + " " + f.op + " " + f.constant.value() + ")\n";
    rc.oracle.filters.push_back(f);
  }
  std::string head;
  if (pick(5) == 0) {
    head = "*";
    rc.oracle.select.assign(bound.begin(), bound.end());
  } else {
    std::shuffle(vars.begin(), vars.end(), rng);
    vars.resize(1 + static_cast<std::size_t>(pick(static_cast<int>(vars.size()))));
    rc.oracle.select = vars;
    for (const auto& v : vars) head += (head.empty() ? "?" : " ?") + v;
  }
  std::string tail;
  if (pick(3) == 0) {
    const auto& v = rc.oracle.select[static_cast<std::size_t>(pick(static_cast<int>(rc.oracle.select.size())))];
    const bool asc = pick(2) == 0;
    rc.oracle.order = std::make_pair(v, asc);
    tail += asc ? (pick(2) ? " ORDER BY ?" + v : " ORDER BY ASC(?" + v + ")") : " ORDER BY DESC(?" + v + ")";
  }
  if (pick(3) == 0) {
    rc.oracle.limit = 1 + static_cast<std::size_t>(pick(8));
    tail += " LIMIT " + std::to_string(*rc.oracle.limit);
  }
  rc.text = "PREFIX r: <http://r/>\nSELECT " + head + "\nWHERE {\n" + body + "}" + tail;
  return rc;
}

void criterion_sparql(Checks& c) {
  std::mt19937 rng(20241018);
  std::size_t rows = 0, nonempty = 0;
  for (int i = 0; i < 100; ++i) {
    auto rc = random_case(rng);
    std::string why;
    try {
      const auto q = sparql::parse_query(rc.text);
      const auto rs = sparql::evaluate(rc.graph, q);
      auto expected = oracle_rows(rc.graph, rc.oracle);
      rows += expected.size();
      if (!expected.empty()) ++nonempty;
      const bool ok = agrees(rs, rc.oracle, std::move(expected), why);
      c.expect(ok, "random case " + std::to_string(i) + ": " + why + "\n" + rc.text);
    } catch (const std::exception& e) {
      c.expect(false, "random case " + std::to_string(i) + ": " + e.what() + "\n" + rc.text);
    }
  }
  c.expect(nonempty >= 50, "at least half of the random cases have solutions");
  c.note("100 random cases, " + std::to_string(nonempty) + " with solutions, " + std::to_string(rows) + " oracle rows");

  struct Box {
    const char* query;
    const char* data;
    std::size_t rows;
  };
  const std::vector<Box> boxes = {{"queries/qb1.rq", "qb1-cars.ttl", 2},
                                  {"queries/qb2.rq", "qb2-users.ttl", 10},
                                  {"queries/qb3.rq", "henri.ttl", 5},
                                  {"queries/dual-context.rq", "henri.ttl", 1}};
  for (const auto& box : boxes) {
    const auto g = load_fixture(box.data).graph;
    const auto q = sparql::parse_query(testsupport::fixture(box.query));
    const auto rs = sparql::evaluate(g, q);
    const auto oq = from_parsed(q);
    std::string why;
    c.expect(agrees(rs, oq, oracle_rows(g, oq), why), std::string(box.query) + ": " + why);
    c.expect(rs.rows.size() == box.rows,
             std::string(box.query) + " rows " + std::to_string(rs.rows.size()) + " expected " + std::to_string(box.rows));
    if (box.query == std::string("queries/qb3.rq")) {
      std::set<Term> models;
      for (const auto& r : rs.rows) models.insert(r.at(*rs.column("vehicleModel")));
      c.expect(models.size() == 5, "qb3 distinct vehicle models " + std::to_string(models.size()));
    }
  }
  const auto qb1 = sparql::evaluate(load_fixture("qb1-cars.ttl").graph, sparql::parse_query(testsupport::fixture("queries/qb1.rq")));
  std::set<std::string> eff;
  for (const auto& r : qb1.rows) eff.insert(r.at(1).value());
  c.expect(eff == std::set<std::string>{"35", "42"}, "qb1 efficiencies 35 and 42");
  const auto qb2 = sparql::parse_query(testsupport::fixture("queries/qb2.rq"));
  c.expect(qb2.select_vars.size() == 2 && qb2.patterns.size() == 3 && qb2.order_by && qb2.order_by->ascending &&
               qb2.limit == std::optional<std::size_t>(10),
           "qb2 structure");
  c.expect(sparql::parse_query(testsupport::fixture("queries/qb3.rq")).patterns.size() == 4, "qb3 has 4 patterns");
}

// ---------------------------------------------------------------------------
// 4. Turtle round trip and positioned errors

std::vector<fs::path> turtle_fixtures() {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(testsupport::fixture_dir())) {
    if (e.is_regular_file() && e.path().extension() == ".ttl") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

bool is_content(const std::string& line) {
  const auto p = line.find_first_not_of(" \t");
  return p != std::string::npos && line[p] != '#';
}

struct Mutation {
  std::string label;
  std::string text;
  bool unknown_prefix = false;
  std::size_t line = 0;    // expected error line
  std::size_t column = 0;  // expected error column, 0 = any
};

// Deletes the '.' ending line `i`; the error surfaces at the next statement.
std::optional<Mutation> delete_dot(const std::string& name, std::vector<std::string> lines, std::size_t i) {
  auto& l = lines[i];
  const auto end = l.find_last_not_of(" \t");
  if (!is_content(l) || end == std::string::npos || l[end] != '.') return std::nullopt;
  std::size_t next = i + 1;
  while (next < lines.size() && !is_content(lines[next])) ++next;
  if (next == lines.size()) return std::nullopt;
  l.erase(end, 1);
  const auto col = lines[next].find_first_not_of(" \t") + 1;
  return Mutation{name + " without '.' on line " + std::to_string(i + 1), join_lines(lines), false, next + 1, col};
}

// Renames the first qname prefix on line `i` to one never declared.
std::optional<Mutation> undeclare_prefix(const std::string& name, std::vector<std::string> lines, std::size_t i) {
  auto& l = lines[i];
  if (!is_content(l) || l.find("@prefix") != std::string::npos || l.find("PREFIX") != std::string::npos) {
    return std::nullopt;
  }
  const auto stop = std::min(l.find('"'), l.find('<'));
  static const std::regex qname(R"((^|\s)([A-Za-z][A-Za-z0-9_-]*):[A-Za-z])");
  std::smatch m;
  const std::string head = l.substr(0, stop);
  if (!std::regex_search(head, m, qname)) return std::nullopt;
  const auto at = static_cast<std::size_t>(m.position(2));
  l.replace(at, static_cast<std::size_t>(m.length(2)), "undeclared");
  return Mutation{name + " with undeclared prefix on line " + std::to_string(i + 1), join_lines(lines), true, i + 1, at + 1};
}

void criterion_turtle(Checks& c) {
  std::size_t files = 0, triples = 0;
  for (const auto& path : turtle_fixtures()) {
    const auto rel = fs::relative(path, testsupport::fixture_dir()).string();
    try {
      const auto first = parse_turtle(testsupport::read_file(path));
      const auto text = serialize_turtle(first.graph, first.prefixes);
      const auto second = parse_turtle(text);
      c.expect(graphs_equal(first.graph, second.graph), rel + " round trip");
      c.expect(serialize_turtle(second.graph, second.prefixes) == text, rel + " serialization is stable");
      ++files;
      triples += first.graph.size();
    } catch (const std::exception& e) {
      c.expect(false, rel + ": " + e.what());
    }
  }
  c.expect(files >= 10, "at least ten Turtle fixtures");

  std::vector<Mutation> mutations;
  std::mt19937 rng(7);
  const std::vector<std::string> sources = {"ucpo-mini.ttl", "henri.ttl", "qb1-cars.ttl", "qb2-users.ttl",
                                            "table4-synth.ttl"};
  for (const auto& name : sources) {
    const auto lines = split_lines(testsupport::fixture(name));
    std::vector<Mutation> dots, prefixes;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (auto m = delete_dot(name, lines, i)) dots.push_back(*m);
      if (auto m = undeclare_prefix(name, lines, i)) prefixes.push_back(*m);
    }
    std::shuffle(dots.begin(), dots.end(), rng);
    std::shuffle(prefixes.begin(), prefixes.end(), rng);
    for (std::size_t k = 0; k < 2 && k < dots.size(); ++k) mutations.push_back(dots[k]);
    for (std::size_t k = 0; k < 2 && k < prefixes.size(); ++k) mutations.push_back(prefixes[k]);
  }
  c.expect(mutations.size() == 20, "20 mutation cases");
  for (const auto& m : mutations) {
    std::optional<SourcePos> pos;
    bool right_kind = false;
    try {
      parse_turtle(m.text);
    } catch (const UnknownPrefix& e) {
      pos = e.pos();
      right_kind = m.unknown_prefix && e.prefix() == "undeclared";
    } catch (const SyntaxError& e) {
      pos = e.pos();
      right_kind = !m.unknown_prefix;
    } catch (const std::exception& e) {
      c.expect(false, m.label + ": unexpected " + e.what());
      continue;
    }
    c.expect(right_kind, m.label + ": wrong error kind or no error");
    if (pos) {
      const bool at = pos->line == m.line && (m.column == 0 || pos->column == m.column);
      c.expect(at, m.label + ": reported " + std::to_string(pos->line) + ":" + std::to_string(pos->column) +
                       " expected " + std::to_string(m.line) + ":" + std::to_string(m.column));
    }
  }
  c.note(std::to_string(files) + " fixtures (" + std::to_string(triples) + " triples), " +
         std::to_string(mutations.size()) + " mutations");
}

// ---------------------------------------------------------------------------
// 5. Pipeline end to end

void criterion_pipeline(Checks& c) {
  testsupport::TempDir dir;
  const auto henri = testsupport::fixture_dir() / "henri";
  const auto project = (dir.path() / "henri.json").string();
  const auto mock = (henri / "mock").string();
  std::string replay_output;
  for (const auto& step : app::read_plan(henri / "plan.txt", {{"FIXTURE", henri.string()}})) {
    std::vector<std::string> args = {"-q", "-p", project, "--mock", mock};
    args.insert(args.end(), step.args.begin(), step.args.end());
    std::ostringstream out, err;
    const int code = app::run(args, out, err);
    c.expect(code == step.expected_exit, "plan line " + std::to_string(step.line) + " exit " + std::to_string(code) +
                                             ": " + err.str());
    if (!step.args.empty() && step.args[0] == "replay") replay_output = out.str();
  }
  const auto p = load_project(project);
  for (Stage s : kStages) c.expect(p.status(s) == StageStatus::Passed, std::string(to_string(s)) + " Passed");

  const auto model = run_project_tests(p, TestTier::Model);
  const auto data = run_project_tests(p, TestTier::Data);
  const auto query = run_project_tests(p, TestTier::Query);
  c.expect(count_errors(model.model_findings) == 0, "model tests: zero Errors");
  c.expect(count_errors(data.data_findings) == 0, "data tests: zero Errors");
  c.expect(!p.tests.empty() && query.cases.size() == p.tests.size(), "every registered CQ test ran");
  std::size_t passed = 0;
  for (const auto& r : query.cases) {
    c.expect(r.outcome == Outcome::Pass, "query test " + r.id + " " + to_string(r.outcome) + ": " + r.actual);
    if (r.outcome == Outcome::Pass) ++passed;
  }

  c.expect(replay_output == "identical\n", "replay command: " + replay_output);
  MockProvider provider(mock);
  Gateway gateway(provider);
  const auto rebuilt = replay_log(p.log, gateway, TemplateLibrary::builtin());
  c.expect(to_json(rebuilt).dump() == to_json(p).dump(), "replayed project JSON is byte-identical");
  c.expect(serialize_turtle(rebuilt.model, rebuilt.prefixes) == serialize_turtle(p.model, p.prefixes),
           "replayed main model Turtle is byte-identical");
  c.note(std::to_string(passed) + "/" + std::to_string(query.cases.size()) + " query tests, " +
         std::to_string(model.model_findings.size()) + " model and " + std::to_string(data.data_findings.size()) +
         " data findings (0 Errors), " + std::to_string(p.log.size()) + " log entries");
}

// ---------------------------------------------------------------------------
// 6. Pitfall defect injection

void criterion_defects(Checks& c) {
  const std::vector<std::pair<const char*, CheckId>> cases = {
      {"missing_domain", CheckId::MissingDomain},   {"missing_range", CheckId::MissingRange},
      {"subclass_cycle", CheckId::SubclassCycle},   {"untyped_individual", CheckId::UntypedIndividual},
      {"orphan_property", CheckId::OrphanProperty}, {"missing_label", CheckId::MissingLabel},
  };
  auto findings_of = [](const std::string& name) {
    const auto doc = load_fixture("defects/" + name + ".ttl");
    const auto snap = extract_snapshot(doc.graph);
    auto all = run_model_tests(doc.graph, snap);
    const auto data = run_data_tests(doc.graph, snap);
    all.insert(all.end(), data.begin(), data.end());
    return all;
  };
  c.expect(findings_of("clean").empty(), "clean baseline has no findings");
  for (const auto& [name, id] : cases) {
    const auto all = findings_of(name);
    std::size_t hits = 0, spurious = 0;
    for (const auto& f : all) {
      if (f.check == id) ++hits;
      else if (f.severity == Severity::Error) ++spurious;
    }
    c.expect(hits == 1, std::string(name) + ": " + std::to_string(hits) + " findings of " + to_string(id));
    c.expect(spurious == 0, std::string(name) + ": " + std::to_string(spurious) + " spurious Errors");
  }
  c.note("6 defects, 1 clean baseline");
}

// ---------------------------------------------------------------------------
// 7. Self-consistency voting

void criterion_voting(Checks& c) {
  const auto templates = TemplateLibrary::builtin();
  for (const char* file : {"voting/k3.json", "voting/k4.json"}) {
    const auto spec = nlohmann::json::parse(testsupport::fixture(file));
    const int k = spec.at("k");
    const auto samples = spec.at("samples").get<std::vector<std::string>>();
    const auto winners = spec.at("winners").get<std::map<std::string, int>>();
    const auto minority = spec.at("minority").get<std::map<std::string, int>>();

    // Fixture sanity: the authored partition is the strict-majority split of
    // the samples' distinct names.
    std::map<std::string, int> mentions;
    const std::regex name_re("\"name\": \"([^\"]+)\"");
    for (const auto& s : samples) {
      std::set<std::string> seen;
      for (auto it = std::sregex_iterator(s.begin(), s.end(), name_re); it != std::sregex_iterator(); ++it) {
        seen.insert((*it)[1]);
      }
      for (const auto& n : seen) ++mentions[n];
    }
    for (const auto& [n, v] : mentions) {
      const auto& side = 2 * v > k ? winners : minority;
      c.expect(side.count(n) && side.at(n) == v, std::string(file) + ": authored partition of " + n);
    }

    ScriptProvider script;
    script.add("ModelRefinement", samples);
    Gateway gateway(script);
    const auto r = self_consistency(gateway, templates.get("refinement"), {{"inventory", "-"}, {"issues", "-"}}, k,
                                    "ModelRefinement");
    std::map<std::string, int> got_w, got_m;
    for (const auto& p : r.winners) {
      got_w[p.payload.at("name")] = p.votes.value_or(0);
      c.expect(!p.minority && p.vote_samples == k, std::string(file) + ": winner flags");
    }
    for (const auto& p : r.minority) {
      got_m[p.payload.at("name")] = p.votes.value_or(0);
      c.expect(p.minority && p.vote_samples == k, std::string(file) + ": minority flags");
    }
    c.expect(r.unparseable_samples == 0, std::string(file) + ": all samples parse");
    c.expect(got_w == winners, std::string(file) + ": winners");
    c.expect(got_m == minority, std::string(file) + ": minority");
  }
  c.note("k=3 and k=4 partitions");
}

// ---------------------------------------------------------------------------
// 8. Persistence

void criterion_persistence(Checks& c) {
  auto templates = TemplateLibrary::builtin();
  testsupport::TempDir dir;
  const auto path = dir.path() / "project.json";
  std::mt19937 rng(8);
  testsupport::RandomProvider provider(8);
  Gateway gw(provider);
  auto p = init_project("shop",
                        {{"S1", "Ordering", "A customer places an order. Each order has a total amount in euros."},
                         {"S2", "Loyalty", "Frequent customers collect points and receive coupons."}},
                        [] {
                          ProjectSettings s;
                          s.domain = "online shop";
                          s.ns = "http://example.org/shop#";
                          s.prefix = "shop";
                          return s;
                        }());
  ingest_feedback(p, {{"", FeedbackRole::EndUser, "Where are my points?", ""},
                      {"", FeedbackRole::DomainExpert, "Loyalty is not modelled.", ""}});
  save_project(p, path);
  Project saved = p;
  std::map<std::string, int> ops;
  std::size_t crashes = 0, mismatches = 0;
  for (int step = 0; step < 500; ++step) {
    const int op = static_cast<int>(rng() % 10);
    try {
      if (op <= 3) {
        std::size_t next = 0;
        while (next + 1 < kStageCount && p.stages[next] == StageStatus::Passed) ++next;
        StageOptions o;
        o.populate = rng() % 2 == 0;
        run_stage(p, rng() % 4 == 0 ? kStages[rng() % kStageCount] : kStages[next], gw, templates, o);
        ++ops["stage"];
      } else if (op <= 6) {
        std::vector<Decision> ds;
        for (const auto& x : p.proposals) {
          if (x.status != ProposalStatus::Pending || rng() % 3 == 0) continue;
          ds.push_back({x.id, rng() % 4 == 0 ? Verdict::Reject : Verdict::Accept, std::nullopt, std::nullopt});
        }
        apply_decisions(p, ds);
        ++ops["decide"];
      } else if (op == 7) {
        for (const auto& m : p.modelets) {
          if (m.status == ModeletStatus::UnderTest) {
            merge_modelet(p, m.id);
            ++ops["merge"];
            break;
          }
        }
      } else if (op == 8) {
        revert_to_stage(p, kStages[rng() % kStageCount]);
        ++ops["revert"];
      } else {
        propose_from_themes(p, gw, templates);
        ++ops["themes"];
      }
    } catch (const Error&) {
      ++ops["rejected"];
    }

    if (step % 10 == 9) {
      // Crash between writing the temporary file and renaming it.
      SaveHooks hooks;
      hooks.before_rename = [&](const fs::path& temp) {
        const auto size = fs::file_size(temp);
        fs::resize_file(temp, size == 0 ? 0 : rng() % size);
        throw std::runtime_error("simulated crash");
      };
      bool threw = false;
      try {
        save_project(p, path, &hooks);
      } catch (const std::runtime_error&) {
        threw = true;
      }
      ++crashes;
      c.expect(threw, "crash hook aborts the save");
      try {
        c.expect(load_project(path) == saved, "canonical file unchanged after crash at step " + std::to_string(step));
      } catch (const std::exception& e) {
        c.expect(false, std::string("canonical file unreadable after crash: ") + e.what());
      }
    }
    save_project(p, path);
    saved = p;
    const auto loaded = load_project(path);
    if (!(loaded == p) || to_json(loaded).dump() != to_json(p).dump()) ++mismatches;
  }
  c.expect(mismatches == 0, std::to_string(mismatches) + " save/load mismatches");
  const auto final_state = load_project(path);
  c.expect(final_state == p, "final state field-identical");
  c.expect(ops["stage"] > 50 && ops["decide"] > 50, "operation mix covers stages and decisions");
  std::ostringstream note;
  note << "500 operations (";
  bool first = true;
  for (const auto& [k, v] : ops) {
    note << (first ? "" : ", ") << k << " " << v;
    first = false;
  }
  note << "), " << crashes << " simulated crashes";
  c.note(note.str());
}

struct Criterion {
  int id;
  const char* title;
  std::optional<double> budget_ms;
  std::function<void(Checks&)> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Metrics reproduction on table4-synth", 1000, criterion_metrics},
      {2, "DL expressivity ALH(D) / AL(D)", 1000, criterion_dl},
      {3, "SPARQL oracle equivalence", 10000, criterion_sparql},
      {4, "Turtle round trip and positioned errors", 5000, criterion_turtle},
      {5, "Henri pipeline end to end with mock provider", 30000, criterion_pipeline},
      {6, "Pitfall defect injection", 5000, criterion_defects},
      {7, "Self-consistency voting partitions", 1000, criterion_voting},
      {8, "Persistence under random operations and crashes", std::nullopt, criterion_persistence},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Checks checks;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.run(checks);
    } catch (const std::exception& e) {
      checks.expect(false, std::string("uncaught: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = !cr.budget_ms || ms < *cr.budget_ms;
    const bool ok = checks.ok() && in_time;
    if (!ok) ++failed;
    std::ostringstream line;
    line << (ok ? "PASS" : "FAIL") << "  criterion " << cr.id << ": " << cr.title << "  [" << checks.total() - checks.failed()
         << "/" << checks.total() << " checks, " << static_cast<long>(ms) << " ms";
    if (cr.budget_ms) line << " < " << static_cast<long>(*cr.budget_ms) << " ms";
    line << "]";
    std::cout << line.str() << std::endl;
    for (const auto& n : checks.notes()) std::cout << "      " << n << "\n";
    for (const auto& f : checks.failures()) std::cout << "      failed: " << f << "\n";
    if (!in_time) std::cout << "      failed: over the time budget\n";
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
