#include <algorithm>
#include <cstdio>
#include <regex>

#include "internal.hpp"
#include "ontoforge/naming.hpp"
#include "ontoforge/sparql.hpp"
#include "ontoforge/vocab.hpp"

namespace ontoforge {

using namespace vocab;

using detail::record;

namespace {

int compile_rank(ProposalKind k) {
  switch (k) {
    case ProposalKind::GlossaryTerm:
    case ProposalKind::CompetencyQuestion: return 0;
    case ProposalKind::ClassDef: return 1;
    case ProposalKind::ObjectPropertyDef:
    case ProposalKind::DataPropertyDef: return 2;
    case ProposalKind::RelationAxiom: return 3;
    case ProposalKind::Instance: return 4;
    case ProposalKind::Annotation: return 5;
    case ProposalKind::SparqlTest: return 6;
    case ProposalKind::Revision: return 7;
  }
  return 8;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::string next_id(const std::string& prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix.c_str(), width, n);
  return buf;
}

class Compiler {
 public:
  Compiler(Project& project, const Proposal& proposal)
      : project_(project), proposal_(proposal), payload_(proposal.effective_payload()) {
    target_ = &project.model;
    for (auto& m : project.modelets) {
      if (m.open() && std::find(m.proposal_ids.begin(), m.proposal_ids.end(), proposal.id) != m.proposal_ids.end()) {
        target_ = &m.graph;
        target_name_ = m.id;
      }
    }
    working_ = working_graph(project);
    snapshot_ = extract_snapshot(working_);
  }

  /// Returns the number of triples added.
  std::size_t run() {
    switch (proposal_.kind) {
      case ProposalKind::GlossaryTerm: glossary(); return 0;
      case ProposalKind::CompetencyQuestion: question(); return 0;
      case ProposalKind::SparqlTest: test(); return 0;
      case ProposalKind::Revision: return 0;
      case ProposalKind::ClassDef: class_def(); break;
      case ProposalKind::ObjectPropertyDef:
      case ProposalKind::DataPropertyDef: property_def(); break;
      case ProposalKind::RelationAxiom: relation(); break;
      case ProposalKind::Instance: instance(); break;
      case ProposalKind::Annotation: annotation(); break;
    }
    Graph next = *target_;
    for (const auto& t : erase_) next.erase(t);
    std::size_t added = 0;
    for (const auto& t : add_) added += next.insert(t) ? 1 : 0;
    extract_snapshot(merge(working_, next));
    *target_ = std::move(next);
    return added;
  }

  const std::string& target_name() const { return target_name_; }

 private:
  [[noreturn]] void fail(const std::string& why) const { throw CompileError(proposal_.id, payload_, why); }

  std::string str(const char* field) const { return payload_.at(field).get<std::string>(); }

  std::string name(const std::string& text, NameStyle style) const {
    return resolve_name(text, project_.prefixes, project_.settings.ns, style);
  }

  bool is_class(const std::string& iri) const { return iri == kOwlThing || snapshot_.classes.count(iri) != 0; }

  void require_class(const std::string& iri, const std::string& field) const {
    if (!is_class(iri)) fail(field + " <" + iri + "> is not a known class");
  }

  void require_fresh(const std::string& iri) const {
    for (const auto& t : working_.triples()) {
      if ((t.subject.is_iri() && t.subject.value() == iri) || (t.object.is_iri() && t.object.value() == iri)) {
        fail("<" + iri + "> already exists");
      }
    }
  }

  void emit(const std::string& s, const char* p, const Term& o) { add_.push_back({Term::iri(s), Term::iri(p), o}); }
  void emit(const std::string& s, const char* p, const std::string& o) { emit(s, p, Term::iri(o)); }
  void emit(const std::string& s, const std::string& p, const Term& o) {
    add_.push_back({Term::iri(s), Term::iri(p), o});
  }

  void glossary() {
    const auto term = trim(str("term"));
    const auto key = normalize_key(term);
    for (const auto& g : project_.glossary) {
      if (normalize_key(g.term) == key) return;
    }
    project_.glossary.push_back({term, trim(str("interpretation"))});
  }

  void question() {
    static const std::regex pattern("CQ[0-9]+");
    std::string id = payload_.contains("id") ? trim(payload_["id"].get<std::string>()) : "";
    const auto taken = [&](const std::string& x) {
      return std::any_of(project_.cqs.begin(), project_.cqs.end(),
                         [&](const CompetencyQuestionEntry& c) { return c.id == x; });
    };
    if (!std::regex_match(id, pattern) || taken(id)) {
      std::size_t n = project_.cqs.size() + 1;
      while (taken(next_id("CQ", n, 2))) ++n;
      id = next_id("CQ", n, 2);
    }
    project_.cqs.push_back({id, trim(str("question")), proposal_.status, proposal_.id});
  }

  void test() {
    const auto cq = str("cqId");
    if (std::none_of(project_.cqs.begin(), project_.cqs.end(),
                     [&](const CompetencyQuestionEntry& c) { return c.id == cq; })) {
      fail("unknown competency question " + cq);
    }
    try {
      sparql::parse_query(str("query"), &project_.prefixes);
    } catch (const Error& e) {
      fail(std::string("query does not parse: ") + e.what());
    }
    TestCase t;
    t.id = next_id("T", project_.tests.size() + 1, 3);
    t.cq_id = cq;
    t.query = str("query");
    t.expectation =
        payload_.contains("expectation") ? expectation_from_json(payload_["expectation"]) : Expectation::min_rows(1);
    t.description = payload_.value("description", "");
    project_.tests.push_back(std::move(t));
  }

  void class_def() {
    const auto iri = name(str("name"), NameStyle::UpperCamel);
    require_fresh(iri);
    emit(iri, kRdfType, kOwlClass);
    if (payload_.contains("parent")) {
      const auto parent = name(str("parent"), NameStyle::UpperCamel);
      require_class(parent, "parent");
      if (parent != kOwlThing) emit(iri, kRdfsSubClassOf, parent);
    }
  }

  std::string datatype_or_fail(const std::string& text) const {
    if (auto dt = xsd_datatype(text)) return *dt;
    const auto iri = name(text, NameStyle::Preserve);
    if (iri.rfind(kXsd, 0) == 0 || iri.rfind(kRdf, 0) == 0) return iri;
    fail("range " + text + " is not a datatype");
  }

  void property_def() {
    const bool object = proposal_.kind == ProposalKind::ObjectPropertyDef;
    const auto iri = name(str("name"), NameStyle::LowerCamel);
    require_fresh(iri);
    emit(iri, kRdfType, object ? kOwlObjectProperty : kOwlDatatypeProperty);
    const auto domain = name(str("domain"), NameStyle::UpperCamel);
    require_class(domain, "domain");
    emit(iri, kRdfsDomain, domain);
    if (object) {
      const auto range = name(str("range"), NameStyle::UpperCamel);
      require_class(range, "range");
      emit(iri, kRdfsRange, range);
    } else {
      emit(iri, kRdfsRange, datatype_or_fail(str("range")));
    }
    if (payload_.contains("parent")) {
      const auto parent = name(str("parent"), NameStyle::LowerCamel);
      const auto& pool = object ? snapshot_.object_properties : snapshot_.data_properties;
      if (pool.count(parent) == 0) fail("parent <" + parent + "> is not a known property of the same kind");
      emit(iri, kRdfsSubPropertyOf, parent);
    }
  }

  void relation() {
    const auto rel = str("relation");
    const auto& sv = str("subject");
    const auto& ov = str("object");
    auto prop_kind = [&](const std::string& iri) -> int {
      if (snapshot_.object_properties.count(iri)) return 1;
      if (snapshot_.data_properties.count(iri)) return 2;
      return 0;
    };
    if (rel == "subClassOf") {
      const auto s = name(sv, NameStyle::UpperCamel);
      const auto o = name(ov, NameStyle::UpperCamel);
      require_class(s, "subject");
      require_class(o, "object");
      emit(s, kRdfsSubClassOf, o);
      return;
    }
    const auto s = name(sv, NameStyle::LowerCamel);
    const int sk = prop_kind(s);
    if (sk == 0) fail("subject <" + s + "> is not a known property");
    if (rel == "subPropertyOf" || rel == "inverseOf") {
      const auto o = name(ov, NameStyle::LowerCamel);
      const int ok = prop_kind(o);
      if (ok == 0) fail("object <" + o + "> is not a known property");
      if (rel == "inverseOf") {
        if (sk != 1 || ok != 1) fail("inverseOf needs two object properties");
        emit(s, kOwlInverseOf, o);
      } else {
        if (sk != ok) fail("subPropertyOf needs properties of the same kind");
        emit(s, kRdfsSubPropertyOf, o);
      }
      return;
    }
    if (rel == "domain") {
      const auto o = name(ov, NameStyle::UpperCamel);
      require_class(o, "object");
      emit(s, kRdfsDomain, o);
      return;
    }
    if (sk == 1) {
      const auto o = name(ov, NameStyle::UpperCamel);
      require_class(o, "object");
      emit(s, kRdfsRange, o);
    } else {
      emit(s, kRdfsRange, datatype_or_fail(ov));
    }
  }

  Term literal_for(const nlohmann::json& item) const {
    const auto& v = item.at("value");
    if (item.contains("datatype")) {
      const auto dt = datatype_or_fail(item["datatype"].get<std::string>());
      return Term::literal(v.is_string() ? v.get<std::string>() : v.dump(), dt);
    }
    if (v.is_boolean()) return Term::literal(v.get<bool>() ? "true" : "false", kXsdBoolean);
    if (v.is_number_integer()) return Term::literal(v.dump(), kXsdInteger);
    if (v.is_number()) return Term::literal(v.dump(), kXsdDecimal);
    return Term::literal(v.get<std::string>());
  }

  void instance() {
    const auto iri = name(str("name"), NameStyle::Preserve);
    const auto kind = classify(snapshot_, iri);
    if (kind == EntityKind::Class || kind == EntityKind::ObjectProperty || kind == EntityKind::DataProperty) {
      fail("<" + iri + "> is already a " + to_string(kind));
    }
    const auto type = name(str("type"), NameStyle::UpperCamel);
    require_class(type, "type");
    emit(iri, kRdfType, type);
    if (!payload_.contains("properties")) return;
    for (const auto& item : payload_["properties"]) {
      const auto prop = name(item.at("property").get<std::string>(), NameStyle::LowerCamel);
      if (snapshot_.object_properties.count(prop) == 0 && snapshot_.data_properties.count(prop) == 0) {
        fail("property <" + prop + "> is not declared");
      }
      if (item.contains("object")) {
        emit(iri, prop, Term::iri(name(item["object"].get<std::string>(), NameStyle::Preserve)));
      } else {
        emit(iri, prop, literal_for(item));
      }
    }
  }

  void annotation() {
    const auto iri = name(str("entity"), NameStyle::Preserve);
    if (classify(snapshot_, iri) == EntityKind::Unknown) fail("<" + iri + "> is not a declared entity");
    const auto& lang = project_.settings.language;
    for (const auto& [field, pred] : {std::pair{"label", kRdfsLabel}, std::pair{"comment", kRdfsComment}}) {
      if (!payload_.contains(field)) continue;
      for (auto& t : match(*target_, Term::iri(iri), Term::iri(pred), std::nullopt)) erase_.push_back(t);
      emit(iri, pred, Term::literal(trim(str(field)), "", lang));
    }
  }

  Project& project_;
  const Proposal& proposal_;
  const nlohmann::json& payload_;
  Graph* target_ = nullptr;
  std::string target_name_ = "model";
  Graph working_;
  OntologySnapshot snapshot_;
  std::vector<Triple> add_;
  std::vector<Triple> erase_;
};

}  // namespace

nlohmann::json to_json(const Decision& d) {
  nlohmann::json j = {{"proposal", d.proposal}, {"verdict", to_string(d.verdict)}};
  if (d.payload) j["payload"] = *d.payload;
  if (d.reason) j["reason"] = *d.reason;
  return j;
}

Decision decision_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaViolation("decision", "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (key != "proposal" && key != "verdict" && key != "payload" && key != "reason") {
      throw SchemaViolation("decision." + key, "unknown field");
    }
  }
  if (!j.contains("proposal") || !j["proposal"].is_string()) {
    throw SchemaViolation("decision.proposal", "required string");
  }
  if (!j.contains("verdict") || !j["verdict"].is_string()) {
    throw SchemaViolation("decision.verdict", "required string");
  }
  Decision d;
  d.proposal = j["proposal"].get<std::string>();
  const auto v = j["verdict"].get<std::string>();
  if (v == "accept") {
    d.verdict = Verdict::Accept;
  } else if (v == "reject") {
    d.verdict = Verdict::Reject;
  } else if (v == "edit") {
    d.verdict = Verdict::Edit;
  } else {
    throw SchemaViolation("decision.verdict", "expected accept, reject or edit");
  }
  if (j.contains("payload")) {
    if (!j["payload"].is_object()) throw SchemaViolation("decision.payload", "expected an object");
    d.payload = j["payload"];
  }
  if (j.contains("reason")) {
    if (!j["reason"].is_string()) throw SchemaViolation("decision.reason", "expected a string");
    d.reason = j["reason"].get<std::string>();
  }
  if (d.verdict == Verdict::Edit && !d.payload) throw SchemaViolation("decision.payload", "edit needs a payload");
  if (d.verdict != Verdict::Edit && d.payload) throw SchemaViolation("decision.payload", "only allowed with edit");
  return d;
}

std::vector<Decision> parse_decision_file(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(position_at(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  if (!doc.is_array()) {
    throw ParseError(position_at(text, text.find_first_not_of(" \t\r\n")), "decision file must hold a list");
  }
  const auto offsets = top_level_element_offsets(text);
  std::vector<Decision> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const SourcePos pos = i < offsets.size() ? position_at(text, offsets[i]) : SourcePos{};
    try {
      out.push_back(decision_from_json(doc[i]));
    } catch (const SchemaViolation& e) {
      throw ParseError(pos, "decision " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

void apply_decisions(Project& project, const std::vector<Decision>& decisions) {
  Project next = project;
  std::vector<std::string> seen;
  std::vector<std::string> accepted;
  for (const auto& d : decisions) {
    Proposal* p = next.find_proposal(d.proposal);
    if (!p) throw UnknownProposal(d.proposal);
    if (p->decided() || std::find(seen.begin(), seen.end(), d.proposal) != seen.end()) {
      throw AlreadyDecided(d.proposal);
    }
    seen.push_back(d.proposal);
    switch (d.verdict) {
      case Verdict::Accept:
        p->status = ProposalStatus::Accepted;
        accepted.push_back(p->id);
        break;
      case Verdict::Reject:
        p->status = ProposalStatus::Rejected;
        p->reason = d.reason.value_or("");
        break;
      case Verdict::Edit:
        validate_payload(p->kind, *d.payload);
        p->edited_payload = *d.payload;
        p->status = ProposalStatus::Edited;
        accepted.push_back(p->id);
        break;
    }
    if (d.reason && d.verdict != Verdict::Reject) p->reason = *d.reason;
  }

  nlohmann::json list = nlohmann::json::array();
  for (const auto& d : decisions) list.push_back(to_json(d));
  std::string subject;
  for (const auto& id : seen) subject += (subject.empty() ? "" : ",") + id;
  record(next, Actor::Human, "decide", subject, {{"decisions", list}});

  std::stable_sort(accepted.begin(), accepted.end(), [&](const std::string& a, const std::string& b) {
    return compile_rank(next.find_proposal(a)->kind) < compile_rank(next.find_proposal(b)->kind);
  });
  for (const auto& d : decisions) {
    const Proposal* p = next.find_proposal(d.proposal);
    record(next, Actor::System, "proposal_status", p->id, {{"to", to_string(p->status)}});
  }
  for (const auto& id : accepted) {
    const Proposal proposal = *next.find_proposal(id);
    Compiler c(next, proposal);
    const auto added = c.run();
    record(next, Actor::System, "compile", id,
           {{"kind", to_string(proposal.kind)}, {"target", c.target_name()}, {"triples", added}});
  }
  detail::refresh_stages(next);
  project = std::move(next);
}

void merge_modelet(Project& project, const std::string& modelet_id) {
  Modelet* m = project.find_modelet(modelet_id);
  if (!m) throw UnknownModelet("unknown modelet " + modelet_id);
  if (m->status != ModeletStatus::UnderTest) {
    throw UnknownModelet("modelet " + modelet_id + " is " + to_string(m->status) + ", not UnderTest");
  }
  record(project, Actor::Human, "merge", modelet_id);
  m = project.find_modelet(modelet_id);

  const Graph merged = merge(project.model, m->graph);
  const auto snapshot = extract_snapshot(merged);
  TestReport report;
  report.model_findings = run_model_tests(merged, snapshot);
  std::vector<TestCase> suite;
  std::vector<std::string> failing;
  for (const auto& cq : m->covered_cqs) {
    bool any = false;
    for (const auto& t : project.tests) {
      if (t.cq_id == cq) {
        suite.push_back(t);
        any = true;
      }
    }
    if (!any) failing.push_back(cq);
  }
  auto q = run_query_tests(merged, suite, &project.prefixes);
  report.cases = q.cases;
  report.passes = q.passes;
  report.failures = q.failures;
  report.errors = q.errors;
  for (const auto& c : q.cases) {
    if (c.outcome != Outcome::Pass && std::find(failing.begin(), failing.end(), c.cq_id) == failing.end()) {
      failing.push_back(c.cq_id);
    }
  }
  std::sort(failing.begin(), failing.end());
  const auto model_errors = count_errors(report.model_findings);
  m->last_report = report.to_json();
  m->last_report->operator[]("failing_cqs") = failing;

  if (model_errors > 0 || !failing.empty()) {
    std::string why = "merge gate failed for " + modelet_id + ":";
    if (model_errors > 0) why += " " + std::to_string(model_errors) + " model test error(s);";
    if (!failing.empty()) {
      why += " failing CQs";
      for (const auto& f : failing) why += " " + f;
      why += ";";
    }
    why.pop_back();
    const auto json = *m->last_report;
    record(project, Actor::System, "gate_failed", modelet_id, {{"failing_cqs", failing}, {"model_errors", model_errors}});
    throw GateFailed(why, failing, json);
  }
  project.model = merged;
  m->status = ModeletStatus::Merged;
  record(project, Actor::System, "modelet_status", modelet_id,
         {{"to", to_string(m->status)}, {"passes", report.passes}});
  detail::refresh_stages(project);
}

// ---------------------------------------------------------------------------
// Replay

Project replay_log(const std::vector<LogEntry>& log, Gateway& gateway, const TemplateLibrary& templates) {
  if (log.empty() || log.front().action != "create") throw PreconditionError("log must start with a create entry");
  std::optional<Project> p;
  for (const auto& e : log) {
    if (e.actor != Actor::Human) continue;
    const auto& d = e.data;
    if (e.action == "create") {
      ProjectSettings s;
      const auto& js = d.at("settings");
      s.domain = js.at("domain").get<std::string>();
      s.ns = js.at("ns").get<std::string>();
      s.prefix = js.at("prefix").get<std::string>();
      s.language = js.at("language").get<std::string>();
      s.votes = js.at("votes").get<int>();
      s.retrieve_k = js.at("retrieve_k").get<std::size_t>();
      s.feedback_chunk = js.at("feedback_chunk").get<std::size_t>();
      std::vector<ScenarioDoc> docs;
      for (const auto& x : d.at("scenarios")) {
        docs.push_back({x.at("id").get<std::string>(), x.at("title").get<std::string>(),
                        x.at("text").get<std::string>()});
      }
      Clock clock;
      clock.mode = d.at("clock").at("mode").get<std::string>();
      clock.epoch = d.at("clock").at("epoch").get<std::int64_t>();
      p = init_project(e.subject, docs, s, clock);
      continue;
    }
    if (!p) throw PreconditionError("log entry before create");
    if (e.action == "seed") {
      seed_model(*p, d.at("turtle").get<std::string>());
    } else if (e.action == "stage_run") {
      const auto stage = parse_stage(e.subject);
      if (!stage) throw PreconditionError("unknown stage in log: " + e.subject);
      try {
        run_stage(*p, *stage, gateway, templates, stage_options_from_json(d.value("options", nlohmann::json::object())));
      } catch (const StageOrderViolation&) {
        throw;
      } catch (const PreconditionError&) {
        throw;
      } catch (const Error&) {
        // failed in the original run too
      }
    } else if (e.action == "decide") {
      std::vector<Decision> ds;
      for (const auto& x : d.at("decisions")) ds.push_back(decision_from_json(x));
      apply_decisions(*p, ds);
    } else if (e.action == "merge") {
      try {
        merge_modelet(*p, e.subject);
      } catch (const GateFailed&) {
      }
    } else if (e.action == "revert") {
      revert_to_stage(*p, *parse_stage(e.subject));
    } else if (e.action == "ingest") {
      std::vector<FeedbackItem> items;
      for (const auto& x : d.at("items")) items.push_back(feedback_item_from_json(x));
      ingest_feedback(*p, items);
    } else if (e.action == "propose_themes") {
      try {
        propose_from_themes(*p, gateway, templates);
      } catch (const PreconditionError&) {
        throw;
      } catch (const Error&) {
      }
    } else {
      throw PreconditionError("cannot replay action '" + e.action + "'");
    }
  }
  return std::move(*p);
}

}  // namespace ontoforge
