#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/llm.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/rdf.hpp"

namespace ontoforge {

enum class Severity { Error, Warning };

enum class CheckId {
  // model tests
  MissingDomain,
  MissingRange,
  SubclassCycle,
  UntypedIndividual,
  OrphanProperty,
  MissingLabel,
  // data tests
  DomainViolation,
  RangeViolation,
  LiteralOnObjectProperty,
  IriOnDataProperty,
};

const char* to_string(Severity s);
const char* to_string(CheckId c);

struct PitfallFinding {
  CheckId check = CheckId::MissingDomain;
  Severity severity = Severity::Warning;
  std::string subject;
  std::string message;
  /// Cycle members, sorted (SubclassCycle only).
  std::vector<std::string> members;

  friend bool operator==(const PitfallFinding&, const PitfallFinding&) = default;
};

std::vector<PitfallFinding> run_model_tests(const Graph& graph, const OntologySnapshot& snapshot);
std::vector<PitfallFinding> run_data_tests(const Graph& graph, const OntologySnapshot& snapshot);

std::size_t count_errors(const std::vector<PitfallFinding>& findings);

struct Expectation {
  enum class Type { MinRows, ExactRows, ContainsBinding, Empty };
  Type type = Type::MinRows;
  std::size_t n = 1;
  std::string var;    // ContainsBinding
  std::string value;  // ContainsBinding, Turtle term syntax

  static Expectation min_rows(std::size_t n) { return {Type::MinRows, n, {}, {}}; }
  static Expectation exact_rows(std::size_t n) { return {Type::ExactRows, n, {}, {}}; }
  static Expectation contains(std::string var, std::string value) {
    return {Type::ContainsBinding, 0, std::move(var), std::move(value)};
  }
  static Expectation empty() { return {Type::Empty, 0, {}, {}}; }

  std::string describe() const;
  friend bool operator==(const Expectation&, const Expectation&) = default;
};

nlohmann::json to_json(const Expectation& e);
Expectation expectation_from_json(const nlohmann::json& j);

struct TestCase {
  std::string id;
  std::string cq_id;
  std::string query;
  Expectation expectation;
  std::string description;

  friend bool operator==(const TestCase&, const TestCase&) = default;
};

nlohmann::json to_json(const TestCase& t);
TestCase test_case_from_json(const nlohmann::json& j);

enum class Outcome { Pass, Fail, Error };
const char* to_string(Outcome o);

struct CaseResult {
  std::string id;
  std::string cq_id;
  Outcome outcome = Outcome::Pass;
  std::string expected;
  std::string actual;
  std::size_t rows = 0;
  std::string message;
};

struct TestReport {
  std::vector<PitfallFinding> model_findings;
  std::vector<PitfallFinding> data_findings;
  std::vector<CaseResult> cases;
  std::size_t passes = 0;
  std::size_t failures = 0;
  std::size_t errors = 0;
  double duration_ms = 0;

  std::size_t total() const { return passes + failures + errors; }
  /// No failing or erroring query case and no Error-severity finding.
  bool ok() const;
  std::string to_text() const;
  nlohmann::json to_json() const;
};

/// Runs every case; parse and evaluation errors are recorded per case.
/// `defaults` supplies prefixes a query leaves undeclared.
TestReport run_query_tests(const Graph& graph, const std::vector<TestCase>& suite,
                           const PrefixMap* defaults = nullptr);

/// Compact listing of classes, properties and individuals for prompts.
std::string describe_inventory(const OntologySnapshot& snapshot, const PrefixMap& prefixes);

/// IRIs a generated query may use: the snapshot's entities plus rdf/rdfs/owl
/// vocabulary.
std::set<std::string> inventory_iris(const OntologySnapshot& snapshot);

struct CqRef {
  std::string id;
  std::string question;
};

/// One SparqlTest proposal per CQ. Replies that stay invalid after one
/// repair become Rejected proposals with reason "unparseable".
std::vector<Proposal> generate_test_cases(Gateway& gateway, const TemplateLibrary& templates,
                                          const std::vector<CqRef>& cqs,
                                          const OntologySnapshot& snapshot, const PrefixMap& prefixes,
                                          const std::string& label);

}  // namespace ontoforge
