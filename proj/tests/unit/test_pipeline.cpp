#include <doctest.h>

#include <fstream>
#include <random>
#include <regex>

#include "ontoforge/pipeline.hpp"
#include "ontoforge/vocab.hpp"
#include "support/random_provider.hpp"
#include "support/support.hpp"

using namespace ontoforge;
using namespace ontoforge::vocab;

namespace {

const std::string kNs = "http://example.org/shop#";

std::string block(const std::vector<Json>& proposals) {
  return "```json\n" + Json{{"proposals", Json(proposals)}}.dump(2) + "\n```";
}

Json item(const std::string& kind, Json payload) { return {{"kind", kind}, {"payload", std::move(payload)}}; }

ProjectSettings shop_settings() {
  ProjectSettings s;
  s.domain = "online shop";
  s.ns = kNs;
  s.prefix = "shop";
  return s;
}

Project new_shop() {
  return init_project("shop",
                      {{"S1", "Ordering", "A customer places an order. Each order has a total amount in euros."},
                       {"S2", "Loyalty", "Frequent customers collect points and receive coupons."}},
                      shop_settings());
}

const std::string kQ1 = "PREFIX shop: <http://example.org/shop#>\nSELECT ?c ?o WHERE { ?c shop:places ?o . }";
const std::string kQ2 = "PREFIX shop: <http://example.org/shop#>\nSELECT ?o ?t WHERE { ?o shop:total ?t . }";

void script_glossary(ScriptProvider& s) {
  s.add("ScenarioGlossary", {block({item("GlossaryTerm", {{"term", "Customer"}, {"interpretation", "A buyer."}}),
                                     item("GlossaryTerm", {{"term", "Order"}, {"interpretation", "A purchase."}})})});
}

void script_cqs(ScriptProvider& s) {
  s.add("CompetencyQuestions",
        {block({item("CompetencyQuestion", {{"id", "CQ01"}, {"question", "Which orders did a customer place?"}}),
                item("CompetencyQuestion", {{"id", "CQ02"}, {"question", "What is the total of an order?"}})})});
}

void script_modelet(ScriptProvider& s) {
  s.add("ModeletDevelopment/step1", {"Customer, Order"});
  s.add("ModeletDevelopment/step2", {"Customer places Order; Order has a total"});
  s.add("ModeletDevelopment/step3",
        {block({item("ClassDef", {{"name", "customer"}, {"definition", "A buyer."}}),
                item("ClassDef", {{"name", "order"}, {"definition", "A purchase."}}),
                item("ObjectPropertyDef", {{"name", "places"}, {"domain", "Customer"}, {"range", "Order"}}),
                item("DataPropertyDef", {{"name", "total"}, {"domain", "Order"}, {"range", "decimal"}})})});
}

void script_tests(ScriptProvider& s, std::size_t cq1_rows = 0) {
  Json t1 = {{"cqId", "CQ01"}, {"query", kQ1}};
  if (cq1_rows > 0) t1["expectation"] = {{"type", "ExactRows"}, {"n", cq1_rows}};
  s.add("TestCaseGeneration/CQ01", {block({item("SparqlTest", t1)})});
  s.add("TestCaseGeneration/CQ02", {block({item("SparqlTest", {{"cqId", "CQ02"}, {"query", kQ2}})})});
  s.add("TestCaseGeneration/instances",
        {block({item("Instance", {{"name", "alice"},
                                  {"type", "Customer"},
                                  {"properties", {{{"property", "places"}, {"object", "o1"}}}}}),
                item("Instance", {{"name", "o1"}, {"type", "Order"}, {"properties", {{{"property", "total"}, {"value", 12.5}}}}})})});
}

void script_refinement(ScriptProvider& s) {
  const auto vip = item("ClassDef", {{"name", "VipCustomer"}, {"definition", "A frequent buyer."}, {"parent", "Customer"}});
  const auto coupon = item("ClassDef", {{"name", "Coupon"}, {"definition", "A discount voucher."}});
  s.add("ModelRefinement", {block({vip}), block({vip, coupon}), "I am not sure."});
}

void script_docs(ScriptProvider& s) {
  for (const auto& [name, label] : std::vector<std::pair<std::string, std::string>>{
           {"Customer", "customer"}, {"Order", "order"}, {"VipCustomer", "VIP customer"}, {"places", "places"},
           {"total", "total"}}) {
    s.add("DocumentGeneration/shop:" + name,
          {block({item("Annotation", {{"entity", "shop:" + name}, {"label", label}, {"comment", "About " + label + "."}})})});
  }
}

Json theme_payload() {
  return {{"theme", "loyalty points are missing"},
          {"sentiment", "Negative"},
          {"supporting", {"FB001", "FB002"}},
          {"quote", "Where are my points?"},
          {"action", "Record loyalty points per customer."},
          {"rank", 1}};
}

void script_feedback(ScriptProvider& s) {
  s.add("Feedback/1", {block({item("Revision", theme_payload())})});
  s.add("Feedback/" + proposal_id(ProposalKind::Revision, theme_payload()),
        {block({item("DataPropertyDef", {{"name", "loyalty points"}, {"domain", "Customer"}, {"range", "integer"}})})});
}

void script_all(ScriptProvider& s) {
  script_glossary(s);
  script_cqs(s);
  script_modelet(s);
  script_tests(s);
  script_refinement(s);
  script_docs(s);
  script_feedback(s);
}

std::vector<Decision> accept_pending(const Project& p, Stage stage) {
  std::vector<Decision> out;
  for (const auto& x : p.proposals) {
    if (x.status == ProposalStatus::Pending && x.provenance.stage == to_string(stage)) {
      out.push_back({x.id, Verdict::Accept, std::nullopt, std::nullopt});
    }
  }
  return out;
}

void run_and_accept(Project& p, Stage stage, Gateway& gw, const TemplateLibrary& t) {
  run_stage(p, stage, gw, t);
  apply_decisions(p, accept_pending(p, stage));
}

const std::vector<FeedbackItem> kFeedback = {{"", FeedbackRole::EndUser, "Where are my points?", ""},
                                             {"", FeedbackRole::DomainExpert, "Loyalty is not modelled.", ""},
                                             {"", FeedbackRole::EndUser, "Checkout is fine.", ""}};

/// Drives the shop project through all seven stages.
Project walkthrough(Gateway& gw, const TemplateLibrary& t) {
  Project p = new_shop();
  run_and_accept(p, Stage::ScenarioGlossary, gw, t);
  run_and_accept(p, Stage::CompetencyQuestions, gw, t);
  run_and_accept(p, Stage::ModeletDevelopment, gw, t);
  run_and_accept(p, Stage::TestCaseGeneration, gw, t);
  merge_modelet(p, "M1");
  run_and_accept(p, Stage::ModelRefinement, gw, t);
  run_and_accept(p, Stage::DocumentGeneration, gw, t);
  ingest_feedback(p, kFeedback);
  run_and_accept(p, Stage::Feedback, gw, t);
  propose_from_themes(p, gw, t);
  apply_decisions(p, accept_pending(p, Stage::Feedback));
  return p;
}

bool has(const Graph& g, const std::string& s, const std::string& p, const Term& o) {
  return g.contains({Term::iri(s), Term::iri(p), o});
}

}  // namespace

TEST_CASE("stage names") {
  CHECK(parse_stage("3") == Stage::ModeletDevelopment);
  CHECK(parse_stage("modeletdevelopment") == Stage::ModeletDevelopment);
  CHECK_FALSE(parse_stage("8"));
  CHECK_FALSE(parse_stage("Review"));
  for (Stage s : kStages) CHECK(parse_stage(to_string(s)) == s);
}

TEST_CASE("init requires scenario text") {
  CHECK_THROWS_AS(init_project("x", {}, shop_settings()), PreconditionError);
  CHECK_THROWS_AS(init_project("x", {{"S1", "t", "  \n"}}, shop_settings()), PreconditionError);
  auto p = new_shop();
  CHECK(p.log.size() == 1);
  CHECK(p.log[0].action == "create");
  CHECK(p.log[0].timestamp == "2024-01-01T00:00:00Z");
  CHECK(*p.prefixes.find("shop") == kNs);
}

TEST_CASE("stages run in order behind their gates") {
  auto templates = TemplateLibrary::builtin();
  ScriptProvider script;
  script_glossary(script);
  script_glossary(script);
  script_cqs(script);
  Gateway gw(script);
  auto p = new_shop();

  CHECK_THROWS_AS(run_stage(p, Stage::CompetencyQuestions, gw, templates), StageOrderViolation);
  CHECK(p.status(Stage::CompetencyQuestions) == StageStatus::NotStarted);

  auto first = run_stage(p, Stage::ScenarioGlossary, gw, templates);
  REQUIRE(first.size() == 2);
  CHECK(p.status(Stage::ScenarioGlossary) == StageStatus::AwaitingReview);
  CHECK(first[0].provenance.stage == "ScenarioGlossary");
  CHECK(first[0].provenance.template_id == "glossary");
  CHECK(gw.transcript()[0].messages.back().content.find("[S1]") != std::string::npos);

  SUBCASE("rejecting every term keeps the gate closed") {
    apply_decisions(p, {{first[0].id, Verdict::Reject, std::nullopt, "too vague"},
                        {first[1].id, Verdict::Reject, std::nullopt, std::nullopt}});
    CHECK(p.status(Stage::ScenarioGlossary) == StageStatus::AwaitingReview);
    CHECK_FALSE(check_gate(p, Stage::ScenarioGlossary).ok);
    CHECK(p.find_proposal(first[0].id)->reason == "too vague");
    auto again = run_stage(p, Stage::ScenarioGlossary, gw, templates);
    CHECK(again.empty());
  }
  SUBCASE("accepting opens the next stage") {
    apply_decisions(p, accept_pending(p, Stage::ScenarioGlossary));
    CHECK(p.status(Stage::ScenarioGlossary) == StageStatus::Passed);
    CHECK(p.glossary == std::vector<GlossaryEntry>{{"Customer", "A buyer."}, {"Order", "A purchase."}});
    CHECK_THROWS_AS(run_stage(p, Stage::ScenarioGlossary, gw, templates), StageOrderViolation);
    run_stage(p, Stage::CompetencyQuestions, gw, templates);
    CHECK(gw.transcript().back().messages.back().content.find("- Customer: A buyer.") != std::string::npos);
    apply_decisions(p, accept_pending(p, Stage::CompetencyQuestions));
    REQUIRE(p.cqs.size() == 2);
    CHECK(p.cqs[1].id == "CQ02");
    CHECK(p.status(Stage::CompetencyQuestions) == StageStatus::Passed);

    revert_to_stage(p, Stage::ScenarioGlossary);
    CHECK(p.status(Stage::ScenarioGlossary) == StageStatus::NotStarted);
    CHECK(p.status(Stage::CompetencyQuestions) == StageStatus::NotStarted);
    CHECK(p.log.back().action == "stage_status");
    CHECK_THROWS_AS(revert_to_stage(p, Stage::Feedback), PreconditionError);
  }
}

TEST_CASE("gateway failure marks the stage Failed") {
  auto templates = TemplateLibrary::builtin();
  ScriptProvider script;
  Gateway gw(script);
  auto p = new_shop();
  CHECK_THROWS_AS(run_stage(p, Stage::ScenarioGlossary, gw, templates), ProviderError);
  CHECK(p.status(Stage::ScenarioGlossary) == StageStatus::Failed);
  bool logged = false;
  for (const auto& e : p.log) logged = logged || e.action == "stage_failed";
  CHECK(logged);
  script_glossary(script);
  CHECK(run_stage(p, Stage::ScenarioGlossary, gw, templates).size() == 2);
  CHECK(p.status(Stage::ScenarioGlossary) == StageStatus::AwaitingReview);
}

TEST_CASE("full walkthrough") {
  auto templates = TemplateLibrary::builtin();
  ScriptProvider script;
  script_all(script);
  Gateway gw(script);
  auto p = walkthrough(gw, templates);
  CHECK(script.unused_labels().empty());
  for (Stage s : kStages) CHECK_MESSAGE(p.status(s) == StageStatus::Passed, to_string(s));

  const auto& m = p.model;
  CHECK(has(m, kNs + "Customer", kRdfType, Term::iri(kOwlClass)));
  CHECK(has(m, kNs + "places", kRdfsDomain, Term::iri(kNs + "Customer")));
  CHECK(has(m, kNs + "total", kRdfsRange, Term::iri(kXsdDecimal)));
  CHECK(has(m, kNs + "alice", kNs + "places", Term::iri(kNs + "o1")));
  CHECK(has(m, kNs + "o1", kNs + "total", Term::literal("12.5", kXsdDecimal)));
  CHECK(has(m, kNs + "VipCustomer", kRdfsSubClassOf, Term::iri(kNs + "Customer")));
  CHECK(has(m, kNs + "Customer", kRdfsLabel, Term::literal("customer", "", "en")));
  CHECK(has(m, kNs + "loyaltyPoints", kRdfsRange, Term::iri(kXsdInteger)));
  CHECK_FALSE(has(m, kNs + "Coupon", kRdfType, Term::iri(kOwlClass)));

  REQUIRE(p.modelets.size() == 1);
  CHECK(p.modelets[0].status == ModeletStatus::Merged);
  REQUIRE(p.tests.size() == 2);
  CHECK(p.tests[0].id == "T001");
  CHECK(run_project_tests(p, TestTier::All).ok());

  std::size_t minority = 0;
  for (const auto& x : p.proposals) {
    if (x.reason == "minority") {
      ++minority;
      CHECK(x.status == ProposalStatus::Rejected);
      CHECK(x.payload["name"] == "Coupon");
    }
    if (x.payload.value("name", "") == "VipCustomer") {
      CHECK(x.votes == 2);
      CHECK(x.vote_samples == 3);
    }
  }
  CHECK(minority == 1);
  CHECK(p.converted_themes.size() == 1);

  const auto docs = project_docs(p);
  CHECK(docs.find("### VIP customer") != std::string::npos);
  CHECK(docs.find("| Customer | A buyer. |") != std::string::npos);

  for (std::size_t i = 1; i < p.log.size(); ++i) {
    CHECK(p.log[i].seq == p.log[i - 1].seq + 1);
    CHECK(p.log[i].timestamp > p.log[i - 1].timestamp);
  }
  const auto summary = project_summary(p);
  CHECK(summary["stages"][6]["status"] == "Passed");
  CHECK(summary["pending"] == 0);
}

TEST_CASE("decisions are all-or-nothing") {
  auto templates = TemplateLibrary::builtin();
  ScriptProvider script;
  script_glossary(script);
  script_cqs(script);
  script_modelet(script);
  Gateway gw(script);
  auto p = new_shop();
  run_and_accept(p, Stage::ScenarioGlossary, gw, templates);
  run_and_accept(p, Stage::CompetencyQuestions, gw, templates);
  auto props = run_stage(p, Stage::ModeletDevelopment, gw, templates);
  REQUIRE(props.size() == 4);
  const Project before = p;

  CHECK_THROWS_AS(apply_decisions(p, {{props[0].id, Verdict::Accept, std::nullopt, std::nullopt},
                                      {"0000000000000000", Verdict::Accept, std::nullopt, std::nullopt}}),
                  UnknownProposal);
  CHECK(p == before);
  CHECK_THROWS_AS(apply_decisions(p, {{props[0].id, Verdict::Accept, std::nullopt, std::nullopt},
                                      {props[0].id, Verdict::Reject, std::nullopt, std::nullopt}}),
                  AlreadyDecided);
  CHECK(p == before);
  CHECK_THROWS_AS(apply_decisions(p, {{props[2].id, Verdict::Accept, std::nullopt, std::nullopt}}), CompileError);
  CHECK(p == before);
  CHECK_THROWS_AS(apply_decisions(p, {{props[0].id, Verdict::Edit, Json{{"label", "x"}}, std::nullopt}}),
                  SchemaViolation);
  CHECK(p == before);

  apply_decisions(p, {{props[2].id, Verdict::Accept, std::nullopt, std::nullopt},
                      {props[0].id, Verdict::Edit, Json{{"name", "Customer"}, {"definition", "Someone who buys."}}, std::nullopt},
                      {props[1].id, Verdict::Accept, std::nullopt, std::nullopt}});
  CHECK(p.find_proposal(props[0].id)->status == ProposalStatus::Edited);
  CHECK(p.model.empty());
  CHECK(has(p.modelets[0].graph, kNs + "Customer", kRdfType, Term::iri(kOwlClass)));
  CHECK_THROWS_AS(apply_decisions(p, {{props[3].id, Verdict::Accept, std::nullopt, std::nullopt},
                                      {props[2].id, Verdict::Reject, std::nullopt, std::nullopt}}),
                  AlreadyDecided);
  CHECK_FALSE(has(p.modelets[0].graph, kNs + "total", kRdfType, Term::iri(kOwlDatatypeProperty)));
  CHECK(p.status(Stage::ModeletDevelopment) == StageStatus::AwaitingReview);
  apply_decisions(p, {{props[3].id, Verdict::Reject, std::nullopt, std::nullopt}});
  CHECK(p.status(Stage::ModeletDevelopment) == StageStatus::Passed);
  CHECK(p.modelets[0].status == ModeletStatus::UnderTest);
}

TEST_CASE("compiled names and collisions") {
  auto templates = TemplateLibrary::builtin();
  ScriptProvider script;
  script_glossary(script);
  script_cqs(script);
  script.add("ModeletDevelopment/step1", {"a"});
  script.add("ModeletDevelopment/step2", {"b"});
  script.add("ModeletDevelopment/step3",
             {block({item("ClassDef", {{"name", "tech savviness"}, {"definition", "x"}}),
                     item("ObjectPropertyDef", {{"name", "Has Level"}, {"domain", "TechSavviness"}, {"range", "owl:Thing"}}),
                     item("ClassDef", {{"name", "Person"}, {"definition", "y"}}),
                     item("DataPropertyDef", {{"name", "age"}, {"domain", "Person"}, {"range", "Person"}}),
                     item("RelationAxiom", {{"subject", "person"}, {"relation", "subClassOf"}, {"object", "tech savviness"}})})});
  Gateway gw(script);
  auto p = new_shop();
  seed_model(p, "@prefix shop: <http://example.org/shop#> .\n@prefix owl: <http://www.w3.org/2002/07/owl#> .\n"
                "shop:Person a owl:Class .\n");
  run_and_accept(p, Stage::ScenarioGlossary, gw, templates);
  run_and_accept(p, Stage::CompetencyQuestions, gw, templates);
  auto props = run_stage(p, Stage::ModeletDevelopment, gw, templates);
  REQUIRE(props.size() == 5);
  auto accept = [&](std::size_t i) {
    apply_decisions(p, {{props[i].id, Verdict::Accept, std::nullopt, std::nullopt}});
  };
  accept(0);
  accept(1);
  CHECK(has(p.modelets[0].graph, kNs + "TechSavviness", kRdfType, Term::iri(kOwlClass)));
  CHECK(has(p.modelets[0].graph, kNs + "hasLevel", kRdfsRange, Term::iri(kOwlThing)));
  CHECK_THROWS_AS(accept(2), CompileError);
  CHECK_THROWS_AS(accept(3), CompileError);
  accept(4);
  CHECK(has(p.modelets[0].graph, kNs + "Person", kRdfsSubClassOf, Term::iri(kNs + "TechSavviness")));
}

TEST_CASE("merge gate") {
  auto templates = TemplateLibrary::builtin();
  ScriptProvider script;
  script_glossary(script);
  script_cqs(script);
  script_modelet(script);
  script_tests(script, 5);
  Gateway gw(script);
  auto p = new_shop();
  run_and_accept(p, Stage::ScenarioGlossary, gw, templates);
  run_and_accept(p, Stage::CompetencyQuestions, gw, templates);
  CHECK_THROWS_AS(merge_modelet(p, "M1"), UnknownModelet);
  run_and_accept(p, Stage::ModeletDevelopment, gw, templates);
  CHECK_THROWS_AS(merge_modelet(p, "M9"), UnknownModelet);
  run_and_accept(p, Stage::TestCaseGeneration, gw, templates);
  CHECK(p.status(Stage::TestCaseGeneration) == StageStatus::Passed);

  const auto model_before = p.model;
  try {
    merge_modelet(p, "M1");
    FAIL("expected GateFailed");
  } catch (const GateFailed& e) {
    CHECK(e.failing_cqs() == std::vector<std::string>{"CQ01"});
    CHECK(e.report()["failures"] == 1);
  }
  CHECK(p.model == model_before);
  CHECK(p.modelets[0].status == ModeletStatus::UnderTest);
  REQUIRE(p.modelets[0].last_report);
  CHECK((*p.modelets[0].last_report)["failing_cqs"] == Json::array({"CQ01"}));
  CHECK(p.log.back().action == "gate_failed");

  CHECK_THROWS_AS(run_stage(p, Stage::ModelRefinement, gw, templates), ProviderError);
  CHECK_FALSE(check_gate(p, Stage::ModelRefinement).ok);
}

TEST_CASE("decision file parsing") {
  auto ds = parse_decision_file(R"([
  {"proposal": "a1", "verdict": "accept"},
  {"proposal": "b2", "verdict": "edit", "payload": {"term": "x", "interpretation": "y"}},
  {"proposal": "c3", "verdict": "reject", "reason": "off topic"}
])");
  REQUIRE(ds.size() == 3);
  CHECK(ds[1].verdict == Verdict::Edit);
  CHECK((*ds[1].payload)["term"] == "x");
  CHECK(ds[2].reason == "off topic");
  CHECK(decision_from_json(to_json(ds[1])) == ds[1]);
  auto pos = [](const std::string& text) {
    try {
      parse_decision_file(text);
    } catch (const ParseError& e) {
      return std::pair<std::size_t, std::size_t>{e.pos().line, e.pos().column};
    }
    return std::pair<std::size_t, std::size_t>{0, 0};
  };
  CHECK(pos("[\n {\"proposal\": \"a\", \"verdict\": \"accept\"},\n {\"proposal\": \"b\", \"verdict\": \"maybe\"}\n]") ==
        std::pair<std::size_t, std::size_t>{3, 2});
  CHECK(pos("[{\"proposal\": \"a\", \"verdict\": \"edit\"}]") == std::pair<std::size_t, std::size_t>{1, 2});
  CHECK(pos("{}") == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(pos("[{\"proposal\": \"a\"") .first == 1);
}

TEST_CASE("persistence and replay") {
  auto templates = TemplateLibrary::builtin();
  ScriptProvider script;
  script_all(script);
  Gateway gw(script);
  const auto p = walkthrough(gw, templates);
  testsupport::TempDir dir;
  const auto path = dir.path() / "project.json";

  SUBCASE("save and load round trip") {
    save_project(p, path);
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    const auto loaded = load_project(path);
    CHECK(loaded == p);
    CHECK(to_json(loaded) == to_json(p));
  }
  SUBCASE("replaying the log rebuilds the project") {
    ScriptProvider again;
    script_all(again);
    Gateway gw2(again);
    const auto rebuilt = replay_log(p.log, gw2, templates);
    CHECK(to_json(rebuilt) == to_json(p));
    CHECK(serialize_turtle(rebuilt.model, rebuilt.prefixes) == serialize_turtle(p.model, p.prefixes));
  }
  SUBCASE("a crash before the rename keeps the previous file") {
    const auto early = new_shop();
    save_project(early, path);
    SaveHooks hooks;
    hooks.before_rename = [](const std::filesystem::path& temp) {
      std::filesystem::resize_file(temp, 100);
      throw std::runtime_error("simulated crash");
    };
    CHECK_THROWS_AS(save_project(p, path, &hooks), std::runtime_error);
    CHECK(load_project(path) == early);
    save_project(p, path);
    CHECK(load_project(path) == p);
  }
  SUBCASE("corrupt, future and missing files") {
    save_project(p, path);
    auto text = testsupport::read_file(path);
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << text.substr(0, text.size() / 2);
    }
    try {
      load_project(path);
      FAIL("expected CorruptProject");
    } catch (const CorruptProject& e) {
      CHECK(e.pos().line > 1);
    }
    auto j = to_json(p);
    j["schema_version"] = 2;
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << j.dump();
    }
    CHECK_THROWS_AS(load_project(path), SchemaVersionMismatch);
    j["schema_version"] = 1;
    j["stages"]["Feedback"] = "Sleeping";
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << j.dump();
    }
    CHECK_THROWS_AS(load_project(path), CorruptProject);
    CHECK_THROWS_AS(load_project(dir.path() / "missing.json"), IoError);
  }
}

// ---------------------------------------------------------------------------
// Random operation sequences

namespace {

void check_invariants(const Project& p) {
  bool open = true;
  for (Stage s : kStages) {
    if (!open) CHECK_MESSAGE(p.status(s) == StageStatus::NotStarted, to_string(s));
    if (p.status(s) != StageStatus::Passed) open = false;
  }
  for (std::size_t i = 1; i < p.log.size(); ++i) {
    REQUIRE(p.log[i].seq == p.log[i - 1].seq + 1);
    REQUIRE(p.log[i].timestamp > p.log[i - 1].timestamp);
  }
  for (const auto& x : p.proposals) {
    if (x.kind != ProposalKind::ClassDef) continue;
    if (x.status != ProposalStatus::Accepted && x.status != ProposalStatus::Edited) continue;
    bool found = false;
    for (const auto& t : p.model.triples()) found = found || (t.predicate.value() == kRdfType && t.object.value() == kOwlClass &&
                                                               t.subject.value().find(x.effective_payload()["name"].get<std::string>()) != std::string::npos);
    for (const auto& m : p.modelets) {
      for (const auto& t : m.graph.triples()) found = found || (t.predicate.value() == kRdfType && t.object.value() == kOwlClass &&
                                                                 t.subject.value().find(x.effective_payload()["name"].get<std::string>()) != std::string::npos);
    }
    CHECK_MESSAGE(found, x.id);
  }
  std::set<std::string> ids;
  for (const auto& x : p.proposals) CHECK(ids.insert(x.id).second);
}

}  // namespace

TEST_CASE("random operation sequences keep the invariants") {
  auto templates = TemplateLibrary::builtin();
  testsupport::TempDir dir;
  std::mt19937 rng(2024);
  testsupport::RandomProvider provider(7);
  Gateway gw(provider);
  auto p = new_shop();
  ingest_feedback(p, kFeedback);
  std::map<std::string, int> outcomes;
  for (int step = 0; step < 500; ++step) {
    const int op = static_cast<int>(rng() % 10);
    const Project before = p;
    try {
      if (op <= 3) {
        std::size_t next = 0;
        while (next + 1 < kStageCount && p.stages[next] == StageStatus::Passed) ++next;
        const Stage s = rng() % 4 == 0 ? kStages[rng() % kStageCount] : kStages[next];
        StageOptions o;
        o.populate = false;
        auto got = run_stage(p, s, gw, templates, o);
        ++outcomes["run"];
      } else if (op <= 6) {
        std::vector<Decision> ds;
        for (const auto& x : p.proposals) {
          if (x.status != ProposalStatus::Pending || rng() % 3 == 0) continue;
          ds.push_back({x.id, rng() % 4 == 0 ? Verdict::Reject : Verdict::Accept, std::nullopt, std::nullopt});
        }
        if (rng() % 10 == 0 && !p.proposals.empty()) {
          ds.push_back({p.proposals[rng() % p.proposals.size()].id, Verdict::Accept, std::nullopt, std::nullopt});
        }
        try {
          apply_decisions(p, ds);
          ++outcomes["decide"];
        } catch (const Error&) {
          CHECK(p == before);
          throw;
        }
      } else if (op == 7) {
        std::vector<std::string> ready;
        for (const auto& m : p.modelets) {
          if (m.status == ModeletStatus::UnderTest || rng() % 4 == 0) ready.push_back(m.id);
        }
        if (ready.empty()) continue;
        merge_modelet(p, ready[rng() % ready.size()]);
        ++outcomes["merge"];
      } else if (op == 8) {
        if (rng() % 3 != 0) continue;
        revert_to_stage(p, kStages[rng() % kStageCount]);
        ++outcomes["revert"];
      } else {
        propose_from_themes(p, gw, templates);
        ++outcomes["themes"];
      }
    } catch (const Error& e) {
      ++outcomes["error"];
    }
    check_invariants(p);
    if (step % 50 == 0) {
      save_project(p, dir.path() / "p.json");
      CHECK(load_project(dir.path() / "p.json") == p);
    }
  }
  CHECK(outcomes["run"] > 20);
  CHECK(outcomes["decide"] > 20);
  CHECK(outcomes["merge"] > 0);
  std::size_t deepest = 0;
  for (const auto& e : p.log) {
    if (e.action == "stage_status" && e.data.value("to", "") == "Passed") {
      deepest = std::max(deepest, static_cast<std::size_t>(*parse_stage(e.subject)) + 1);
    }
  }
  CHECK(deepest >= 5);
}
