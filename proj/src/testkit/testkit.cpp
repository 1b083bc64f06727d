#include <algorithm>
#include <chrono>
#include <functional>
#include <map>

#include "ontoforge/sparql.hpp"
#include "ontoforge/testkit.hpp"
#include "ontoforge/vocab.hpp"

namespace ontoforge {

namespace {

bool starts_with(const std::string& s, const char* prefix) { return s.rfind(prefix, 0) == 0; }

bool is_vocabulary(const std::string& iri) {
  return starts_with(iri, vocab::kRdf) || starts_with(iri, vocab::kRdfs) ||
         starts_with(iri, vocab::kOwl) || starts_with(iri, vocab::kXsd);
}

PitfallFinding finding(CheckId check, Severity sev, std::string subject, std::string message) {
  PitfallFinding f;
  f.check = check;
  f.severity = sev;
  f.subject = std::move(subject);
  f.message = std::move(message);
  return f;
}

// Strongly connected components of the subclass graph (Tarjan).
std::vector<std::vector<std::string>> subclass_cycles(const OntologySnapshot& s) {
  std::map<std::string, std::vector<std::string>> adj;
  std::set<std::string> self_loops;
  for (const auto& [child, parent] : s.subclass_edges) {
    adj[child].push_back(parent);
    if (child == parent) self_loops.insert(child);
  }
  std::map<std::string, int> index;
  std::map<std::string, int> low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> out;
  int counter = 0;

  std::function<void(const std::string&)> strong = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack.insert(v);
    for (const auto& w : adj[v]) {
      if (index.count(w) == 0) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack.count(w) != 0) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::string> component;
      std::string w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack.erase(w);
        component.push_back(w);
      } while (w != v);
      if (component.size() > 1 || self_loops.count(v) != 0) {
        std::sort(component.begin(), component.end());
        out.push_back(std::move(component));
      }
    }
  };
  for (const auto& c : s.classes) {
    if (index.count(c) == 0) strong(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

IriSet types_closure(const OntologySnapshot& s, const std::string& individual) {
  IriSet out;
  auto it = s.type_assertions.lower_bound({individual, ""});
  for (; it != s.type_assertions.end() && it->first == individual; ++it) {
    auto up = subclass_closure(s, it->second);
    out.insert(up.begin(), up.end());
  }
  return out;
}

bool satisfies(const IriSet& types, const std::string& cls) {
  return cls == vocab::kOwlThing || types.count(cls) != 0;
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

const char* to_string(Severity s) { return s == Severity::Error ? "Error" : "Warning"; }

const char* to_string(CheckId c) {
  switch (c) {
    case CheckId::MissingDomain: return "MissingDomain";
    case CheckId::MissingRange: return "MissingRange";
    case CheckId::SubclassCycle: return "SubclassCycle";
    case CheckId::UntypedIndividual: return "UntypedIndividual";
    case CheckId::OrphanProperty: return "OrphanProperty";
    case CheckId::MissingLabel: return "MissingLabel";
    case CheckId::DomainViolation: return "DomainViolation";
    case CheckId::RangeViolation: return "RangeViolation";
    case CheckId::LiteralOnObjectProperty: return "LiteralOnObjectProperty";
    case CheckId::IriOnDataProperty: return "IriOnDataProperty";
  }
  return "?";
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "FAIL";
    case Outcome::Error: return "ERROR";
  }
  return "?";
}

std::vector<PitfallFinding> run_model_tests(const Graph& graph, const OntologySnapshot& s) {
  std::vector<PitfallFinding> out;
  IriSet properties = s.object_properties;
  properties.insert(s.data_properties.begin(), s.data_properties.end());

  for (const auto& p : properties) {
    if (s.domain_of.count(p) == 0) {
      out.push_back(finding(CheckId::MissingDomain, Severity::Warning, p, "property has no rdfs:domain"));
    }
    if (s.range_of.count(p) == 0) {
      out.push_back(finding(CheckId::MissingRange, Severity::Warning, p, "property has no rdfs:range"));
    }
  }

  for (auto& cycle : subclass_cycles(s)) {
    auto f = finding(CheckId::SubclassCycle, Severity::Error, cycle.front(),
                     "subclass cycle among " + join(cycle, ", "));
    f.members = std::move(cycle);
    out.push_back(std::move(f));
  }

  const Term rdf_type = Term::iri(vocab::kRdfType);
  IriSet seen;
  for (const auto& t : graph.triples()) {
    if (!t.subject.is_iri()) continue;
    const auto& iri = t.subject.value();
    if (!seen.insert(iri).second) continue;
    if (s.classes.count(iri) != 0 || s.is_property(iri) || s.individuals.count(iri) != 0) continue;
    bool declared = false;
    for (const auto& type : graph.objects(t.subject, rdf_type)) {
      if (type.is_iri() && is_vocabulary(type.value())) declared = true;
    }
    if (declared) continue;
    out.push_back(finding(CheckId::UntypedIndividual, Severity::Warning, iri,
                          "subject is neither a schema entity nor typed to a known class"));
  }

  for (const auto& p : properties) {
    if (s.domain_of.count(p) != 0 || s.range_of.count(p) != 0) continue;
    if (!graph.match(std::nullopt, Term::iri(p), std::nullopt).empty()) continue;
    out.push_back(finding(CheckId::OrphanProperty, Severity::Warning, p,
                          "property is used in no assertion, domain or range"));
  }

  IriSet labelled = s.classes;
  labelled.insert(properties.begin(), properties.end());
  for (const auto& e : labelled) {
    auto it = s.annotations.find(e);
    if (it == s.annotations.end() || !it->second.label) {
      out.push_back(finding(CheckId::MissingLabel, Severity::Warning, e, "entity has no rdfs:label"));
    }
  }
  return out;
}

std::vector<PitfallFinding> run_data_tests(const Graph& graph, const OntologySnapshot& s) {
  std::vector<PitfallFinding> out;
  for (const auto& t : graph.triples()) {
    const auto& p = t.predicate.value();
    if (!s.is_property(p) || !t.subject.is_iri()) continue;
    const auto& subject = t.subject.value();
    if (s.classes.count(subject) != 0 || s.is_property(subject)) continue;
    const bool object_property = s.object_properties.count(p) != 0;

    if (auto d = s.domain_of.find(p); d != s.domain_of.end()) {
      auto types = types_closure(s, subject);
      for (const auto& cls : d->second) {
        if (!satisfies(types, cls)) {
          out.push_back(finding(CheckId::DomainViolation, Severity::Error, subject,
                                "<" + subject + "> <" + p + "> expects subject of type <" + cls + ">"));
        }
      }
    }

    if (object_property) {
      if (t.object.is_literal()) {
        out.push_back(finding(CheckId::LiteralOnObjectProperty, Severity::Error, subject,
                              "object property <" + p + "> has literal value " + t.object.canonical()));
        continue;
      }
      if (!t.object.is_iri()) continue;
      if (auto r = s.range_of.find(p); r != s.range_of.end()) {
        auto types = types_closure(s, t.object.value());
        for (const auto& cls : r->second) {
          if (!satisfies(types, cls)) {
            out.push_back(finding(CheckId::RangeViolation, Severity::Error, subject,
                                  "<" + subject + "> <" + p + "> <" + t.object.value() +
                                      "> expects object of type <" + cls + ">"));
          }
        }
      }
    } else if (t.object.is_iri()) {
      out.push_back(finding(CheckId::IriOnDataProperty, Severity::Error, subject,
                            "data property <" + p + "> has IRI value <" + t.object.value() + ">"));
    }
  }
  return out;
}

std::size_t count_errors(const std::vector<PitfallFinding>& findings) {
  return static_cast<std::size_t>(std::count_if(findings.begin(), findings.end(), [](const PitfallFinding& f) {
    return f.severity == Severity::Error;
  }));
}

// --- expectations and cases ---------------------------------------------------

std::string Expectation::describe() const {
  switch (type) {
    case Type::MinRows: return "at least " + std::to_string(n) + " row(s)";
    case Type::ExactRows: return "exactly " + std::to_string(n) + " row(s)";
    case Type::ContainsBinding: return "?" + var + " bound to " + value;
    case Type::Empty: return "no rows";
  }
  return "?";
}

nlohmann::json to_json(const Expectation& e) {
  switch (e.type) {
    case Expectation::Type::MinRows: return {{"type", "MinRows"}, {"n", e.n}};
    case Expectation::Type::ExactRows: return {{"type", "ExactRows"}, {"n", e.n}};
    case Expectation::Type::ContainsBinding: return {{"type", "ContainsBinding"}, {"var", e.var}, {"value", e.value}};
    case Expectation::Type::Empty: return {{"type", "Empty"}};
  }
  return {};
}

Expectation expectation_from_json(const nlohmann::json& j) {
  validate_payload(ProposalKind::SparqlTest, {{"cqId", "x"}, {"query", "x"}, {"expectation", j}});
  const auto type = j.at("type").get<std::string>();
  if (type == "MinRows") return Expectation::min_rows(j.at("n").get<std::size_t>());
  if (type == "ExactRows") return Expectation::exact_rows(j.at("n").get<std::size_t>());
  if (type == "ContainsBinding") {
    auto var = j.at("var").get<std::string>();
    if (!var.empty() && (var[0] == '?' || var[0] == '$')) var.erase(0, 1);
    return Expectation::contains(var, j.at("value").get<std::string>());
  }
  return Expectation::empty();
}

nlohmann::json to_json(const TestCase& t) {
  return {{"id", t.id},
          {"cqId", t.cq_id},
          {"query", t.query},
          {"expectation", to_json(t.expectation)},
          {"description", t.description}};
}

TestCase test_case_from_json(const nlohmann::json& j) {
  TestCase t;
  t.id = j.at("id").get<std::string>();
  t.cq_id = j.at("cqId").get<std::string>();
  t.query = j.at("query").get<std::string>();
  t.expectation = j.contains("expectation") ? expectation_from_json(j["expectation"]) : Expectation::min_rows(1);
  t.description = j.value("description", "");
  return t;
}

TestReport run_query_tests(const Graph& graph, const std::vector<TestCase>& suite, const PrefixMap* defaults) {
  const auto start = std::chrono::steady_clock::now();
  TestReport report;
  for (const auto& tc : suite) {
    CaseResult r;
    r.id = tc.id;
    r.cq_id = tc.cq_id;
    r.expected = tc.expectation.describe();
    try {
      auto q = sparql::parse_query(tc.query, defaults);
      auto rs = sparql::evaluate(graph, q);
      r.rows = rs.rows.size();
      r.actual = std::to_string(r.rows) + " row(s)";
      bool pass = false;
      switch (tc.expectation.type) {
        case Expectation::Type::MinRows: pass = r.rows >= tc.expectation.n; break;
        case Expectation::Type::ExactRows: pass = r.rows == tc.expectation.n; break;
        case Expectation::Type::Empty: pass = r.rows == 0; break;
        case Expectation::Type::ContainsBinding: {
          auto col = rs.column(tc.expectation.var);
          if (!col) throw Error("variable ?" + tc.expectation.var + " is not selected");
          PrefixMap pm = q.prefixes;
          if (defaults != nullptr) {
            for (const auto& [label, ns] : defaults->entries()) {
              if (!pm.find(label)) pm.set(label, ns);
            }
          }
          const Term want = parse_turtle_term(tc.expectation.value, pm);
          std::vector<std::string> seen;
          for (const auto& row : rs.rows) {
            const auto& v = row[*col];
            auto numeric = compare_numeric(v, want);
            if (v == want || (numeric && *numeric == 0)) pass = true;
            if (seen.size() < 5) seen.push_back(format_turtle_term(v, pm));
          }
          if (!pass) r.actual += "; ?" + tc.expectation.var + " values: " + join(seen, ", ");
          break;
        }
      }
      r.outcome = pass ? Outcome::Pass : Outcome::Fail;
    } catch (const Error& e) {
      r.outcome = Outcome::Error;
      r.message = e.what();
      r.actual = "error";
    }
    switch (r.outcome) {
      case Outcome::Pass: ++report.passes; break;
      case Outcome::Fail: ++report.failures; break;
      case Outcome::Error: ++report.errors; break;
    }
    report.cases.push_back(std::move(r));
  }
  report.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

bool TestReport::ok() const {
  return failures == 0 && errors == 0 && count_errors(model_findings) == 0 && count_errors(data_findings) == 0;
}

std::string TestReport::to_text() const {
  std::string out;
  auto findings = [&](const char* title, const std::vector<PitfallFinding>& list) {
    out += std::string(title) + ": " + std::to_string(count_errors(list)) + " error(s), " +
           std::to_string(list.size() - count_errors(list)) + " warning(s)\n";
    for (const auto& f : list) {
      out += "  " + pad(to_string(f.severity), 8) + pad(to_string(f.check), 24) + f.subject + "  " + f.message + "\n";
    }
  };
  findings("Model tests", model_findings);
  findings("Data tests", data_findings);
  out += "Query tests: " + std::to_string(passes) + " passed, " + std::to_string(failures) + " failed, " +
         std::to_string(errors) + " error(s)\n";
  for (const auto& c : cases) {
    out += "  " + pad(to_string(c.outcome), 6) + pad(c.id, 14) + pad(c.cq_id, 8) + "expected " + c.expected +
           ", got " + c.actual;
    if (!c.message.empty()) out += " (" + c.message + ")";
    out += "\n";
  }
  return out;
}

nlohmann::json TestReport::to_json() const {
  auto findings = [](const std::vector<PitfallFinding>& list) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& f : list) {
      nlohmann::json j = {{"check", to_string(f.check)},
                          {"severity", to_string(f.severity)},
                          {"subject", f.subject},
                          {"message", f.message}};
      if (!f.members.empty()) j["members"] = f.members;
      arr.push_back(std::move(j));
    }
    return arr;
  };
  nlohmann::json cases_json = nlohmann::json::array();
  for (const auto& c : cases) {
    cases_json.push_back({{"id", c.id},
                          {"cqId", c.cq_id},
                          {"outcome", to_string(c.outcome)},
                          {"expected", c.expected},
                          {"actual", c.actual},
                          {"rows", c.rows},
                          {"message", c.message}});
  }
  return {{"model", findings(model_findings)},
          {"data", findings(data_findings)},
          {"query", cases_json},
          {"passes", passes},
          {"failures", failures},
          {"errors", errors},
          {"total", total()},
          {"ok", ok()},
          {"duration_ms", duration_ms}};
}

// --- generation ---------------------------------------------------------------

std::string describe_inventory(const OntologySnapshot& s, const PrefixMap& prefixes) {
  auto name = [&](const std::string& iri) { return format_turtle_term(Term::iri(iri), prefixes); };
  auto names = [&](const IriSet& set) {
    std::vector<std::string> v;
    for (const auto& i : set) v.push_back(name(i));
    return join(v, " | ");
  };
  std::string out = "Classes:\n";
  for (const auto& c : s.classes) {
    out += "- " + name(c);
    std::vector<std::string> parents;
    for (const auto& [child, parent] : s.subclass_edges) {
      if (child == c) parents.push_back(name(parent));
    }
    if (!parents.empty()) out += " (subClassOf " + join(parents, ", ") + ")";
    out += "\n";
  }
  auto props = [&](const char* title, const IriSet& set) {
    out += std::string(title) + ":\n";
    for (const auto& p : set) {
      out += "- " + name(p);
      auto d = s.domain_of.find(p);
      auto r = s.range_of.find(p);
      out += " domain " + (d == s.domain_of.end() ? std::string("?") : names(d->second));
      out += " range " + (r == s.range_of.end() ? std::string("?") : names(r->second)) + "\n";
    }
  };
  props("Object properties", s.object_properties);
  props("Data properties", s.data_properties);
  if (!s.individuals.empty()) {
    out += "Individuals:\n";
    for (const auto& i : s.individuals) out += "- " + name(i) + "\n";
  }
  return out;
}

std::set<std::string> inventory_iris(const OntologySnapshot& s) {
  std::set<std::string> out = s.classes;
  out.insert(s.object_properties.begin(), s.object_properties.end());
  out.insert(s.data_properties.begin(), s.data_properties.end());
  out.insert(s.individuals.begin(), s.individuals.end());
  return out;
}

std::vector<Proposal> generate_test_cases(Gateway& gateway, const TemplateLibrary& templates,
                                          const std::vector<CqRef>& cqs, const OntologySnapshot& snapshot,
                                          const PrefixMap& prefixes, const std::string& label) {
  if (cqs.empty()) throw PreconditionError("test generation needs at least one accepted competency question");
  const auto& t = templates.get("cq_to_sparql");
  const auto inventory = describe_inventory(snapshot, prefixes);
  const auto allowed = inventory_iris(snapshot);
  std::string prefix_lines;
  for (const auto& [p, ns] : prefixes.entries()) prefix_lines += "PREFIX " + p + ": <" + ns + ">\n";

  std::vector<Proposal> out;
  for (const auto& cq : cqs) {
    auto validator = [&](const Proposal& p) -> std::optional<std::string> {
      const auto& payload = p.payload;
      if (payload["cqId"] != cq.id) return "cqId must be " + cq.id;
      try {
        auto q = sparql::parse_query(payload["query"].get<std::string>(), &prefixes);
        for (const auto& iri : sparql::query_iris(q)) {
          if (allowed.count(iri) == 0 && !is_vocabulary(iri)) return "query uses unknown IRI <" + iri + ">";
        }
      } catch (const Error& e) {
        return std::string("query does not parse: ") + e.what();
      }
      return std::nullopt;
    };
    SlotMap slots = {{"cq_id", cq.id}, {"question", cq.question}, {"prefixes", prefix_lines}, {"inventory", inventory}};
    const auto step_label = label + "/" + cq.id;
    try {
      auto proposals = gateway.ask(t, slots, step_label, {}, validator);
      for (auto& p : proposals) out.push_back(std::move(p));
    } catch (const RepairFailed& e) {
      Proposal p;
      p.kind = ProposalKind::SparqlTest;
      p.payload = {{"cqId", cq.id}, {"query", e.raw()}};
      p.id = proposal_id(p.kind, p.payload);
      p.status = ProposalStatus::Rejected;
      p.reason = "unparseable";
      p.provenance.template_id = t.id;
      p.provenance.technique = to_string(t.technique);
      p.provenance.prompt_hash = prompt_hash(gateway.messages_for(t, slots));
      p.provenance.provider_id = gateway.provider().id();
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace ontoforge
