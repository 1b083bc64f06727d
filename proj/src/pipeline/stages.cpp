#include <algorithm>

#include "internal.hpp"
#include "ontoforge/naming.hpp"

namespace ontoforge {

using detail::record;
using detail::set_stage_status;

namespace {

std::size_t index_of(Stage s) { return static_cast<std::size_t>(s); }

bool is_theme(const Proposal& p) {
  return p.kind == ProposalKind::Revision && p.provenance.template_id == "feedback_summary";
}

bool accepted(const Proposal& p) {
  return p.status == ProposalStatus::Accepted || p.status == ProposalStatus::Edited;
}

void require_order(const Project& project, Stage stage) {
  for (Stage s : kStages) {
    if (s == stage) break;
    if (project.status(s) != StageStatus::Passed) {
      throw StageOrderViolation(std::string("stage ") + to_string(stage) + " requires " + to_string(s) +
                                " to pass first");
    }
  }
}

Modelet* open_modelet(Project& project, ModeletStatus status) {
  for (auto it = project.modelets.rbegin(); it != project.modelets.rend(); ++it) {
    if (it->status == status) return &*it;
  }
  return nullptr;
}

Modelet* latest_open_modelet(Project& project) {
  for (auto it = project.modelets.rbegin(); it != project.modelets.rend(); ++it) {
    if (it->open()) return &*it;
  }
  return nullptr;
}

std::string scenario_text(const Project& project) {
  std::string out;
  for (const auto& d : project.scenarios) {
    if (!out.empty()) out += "\n\n";
    out += d.title.empty() ? d.text : d.title + "\n" + d.text;
  }
  return out;
}

std::vector<Excerpt> scenario_excerpts(const Project& project) {
  CorpusIndex index;
  for (const auto& d : project.scenarios) index.add({d.id, d.title, d.text});
  const std::string query = project.settings.domain.empty() ? project.name : project.settings.domain;
  auto hits = retrieve(index, query, project.settings.retrieve_k);
  if (hits.empty()) {
    for (std::size_t i = 0; i < project.scenarios.size() && i < project.settings.retrieve_k; ++i) {
      hits.push_back({project.scenarios[i].id, 0.0});
    }
  }
  return excerpts_for(index, hits);
}

std::string cq_lines(const Project& project, const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& c : project.cqs) {
    if (ids.empty() || std::find(ids.begin(), ids.end(), c.id) != ids.end()) {
      out += c.id + ": " + c.question + "\n";
    }
  }
  return out;
}

std::string refinement_issues(const Project& project, const Graph& graph) {
  const auto report = run_project_tests(project, TestTier::All, &graph);
  std::string out;
  for (const auto* list : {&report.model_findings, &report.data_findings}) {
    for (const auto& f : *list) {
      out += "- [" + std::string(to_string(f.severity)) + " " + to_string(f.check) + "] " + f.message + "\n";
    }
  }
  for (const auto& c : report.cases) {
    if (c.outcome == Outcome::Pass) continue;
    out += "- test " + c.id + " for " + c.cq_id + " " + to_string(c.outcome) + ": expected " + c.expected +
           ", got " + c.actual + (c.message.empty() ? "" : " (" + c.message + ")") + "\n";
  }
  if (out.empty()) {
    out = "- No failing checks. Review the model against the competency questions:\n" + cq_lines(project, {});
  }
  return out;
}

/// Gateway work for one stage; returns proposals with provenance filled in.
std::vector<Proposal> stage_body(Project& project, Stage stage, Gateway& gateway, const TemplateLibrary& templates,
                                 const StageOptions& options) {
  const auto& settings = project.settings;
  const std::string label = to_string(stage);
  switch (stage) {
    case Stage::ScenarioGlossary:
      return gateway.ask(templates.get("glossary"), {{"domain", settings.domain}}, label,
                         scenario_excerpts(project));

    case Stage::CompetencyQuestions:
      return gateway.ask(templates.get("competency_questions"),
                         {{"domain", settings.domain}, {"glossary", detail::glossary_lines(project)}}, label);

    case Stage::ModeletDevelopment: {
      Modelet* draft = open_modelet(project, ModeletStatus::Draft);
      if (!draft) {
        std::vector<std::string> covered = options.cqs;
        if (covered.empty()) {
          for (const auto& c : project.cqs) {
            const bool taken = std::any_of(project.modelets.begin(), project.modelets.end(), [&](const Modelet& m) {
              return m.status != ModeletStatus::Reverted &&
                     std::find(m.covered_cqs.begin(), m.covered_cqs.end(), c.id) != m.covered_cqs.end();
            });
            if (!taken) covered.push_back(c.id);
          }
          if (covered.empty()) {
            for (const auto& c : project.cqs) covered.push_back(c.id);
          }
        }
        Modelet m;
        m.id = "M" + std::to_string(project.modelets.size() + 1);
        m.title = options.title.empty() ? "Modelet " + std::to_string(project.modelets.size() + 1) : options.title;
        m.covered_cqs = covered;
        project.modelets.push_back(std::move(m));
        draft = &project.modelets.back();
        record(project, Actor::System, "modelet_created", draft->id, {{"covered", draft->covered_cqs}});
        draft = &project.modelets.back();
      }
      const auto steps = chain_steps(templates.get("modelet"));
      SlotMap slots = {{"domain", settings.domain},
                       {"glossary", detail::glossary_lines(project)},
                       {"questions", cq_lines(project, draft->covered_cqs)}};
      auto chain = prompt_chain(gateway, steps, slots, label);
      if (!chain.ok()) {
        throw Error("modelet chain failed at step " + std::to_string(*chain.failed_step) + ": " + chain.error);
      }
      SlotMap last = slots;
      last[kPreviousResponseSlot] = chain.responses[chain.responses.size() - 2].completions.front();
      auto messages = gateway.messages_for(steps.back(), last);
      auto out = gateway.parse_with_repair(messages, chain.responses.back().completions.front(), steps.back(),
                                           label + "/step" + std::to_string(steps.size()));
      for (auto& p : out) draft->proposal_ids.push_back(p.id);
      return out;
    }

    case Stage::TestCaseGeneration: {
      const Graph working = working_graph(project);
      const auto snapshot = extract_snapshot(working);
      std::vector<CqRef> refs;
      for (const auto& c : project.cqs) {
        const bool has_test = std::any_of(project.tests.begin(), project.tests.end(),
                                          [&](const TestCase& t) { return t.cq_id == c.id; });
        if (!has_test) refs.push_back({c.id, c.question});
      }
      std::vector<Proposal> out;
      if (!refs.empty()) out = generate_test_cases(gateway, templates, refs, snapshot, project.prefixes, label);
      if (options.populate) {
        const auto& ns = settings.ns;
        const auto& prefixes = project.prefixes;
        ProposalValidator check_type = [&](const Proposal& p) -> std::optional<std::string> {
          const auto iri = resolve_name(p.payload.at("type").get<std::string>(), prefixes, ns, NameStyle::UpperCamel);
          if (snapshot.classes.count(iri) == 0) return "type " + p.payload["type"].get<std::string>() + " is not a class";
          return std::nullopt;
        };
        SlotMap slots = {{kFactsSlot, detail::glossary_lines(project)},
                         {"scenario", scenario_text(project)},
                         {"inventory", describe_inventory(snapshot, prefixes)}};
        try {
          auto instances = gateway.ask(templates.get("instance_population"), slots, label + "/instances", {}, check_type);
          if (Modelet* m = latest_open_modelet(project)) {
            for (const auto& p : instances) m->proposal_ids.push_back(p.id);
          }
          out.insert(out.end(), instances.begin(), instances.end());
        } catch (const RepairFailed& e) {
          record(project, Actor::System, "population_unparseable", label, {{"error", e.what()}});
        }
      }
      return out;
    }

    case Stage::ModelRefinement: {
      const Graph working = working_graph(project);
      const auto snapshot = extract_snapshot(working);
      SlotMap slots = {{"inventory", describe_inventory(snapshot, project.prefixes)},
                       {"issues", refinement_issues(project, working)}};
      auto vote = self_consistency(gateway, templates.get("refinement"), slots, settings.votes, label);
      auto out = std::move(vote.winners);
      for (auto p : vote.minority) {
        p.status = ProposalStatus::Rejected;
        p.reason = "minority";
        p.minority = true;
        out.push_back(std::move(p));
      }
      return out;
    }

    case Stage::DocumentGeneration:
      return annotate_entities(gateway, templates, extract_snapshot(project.model), project.prefixes, settings.ns,
                               settings.language, label);

    case Stage::Feedback:
      return summarize_feedback(gateway, templates, project.feedback, label, settings.feedback_chunk);
  }
  return {};
}

void check_stage_inputs(const Project& project, Stage stage) {
  switch (stage) {
    case Stage::ModeletDevelopment:
    case Stage::TestCaseGeneration:
      if (project.cqs.empty()) throw PreconditionError("no accepted competency questions");
      break;
    case Stage::DocumentGeneration: {
      const auto s = extract_snapshot(project.model);
      if (s.classes.empty() && s.object_properties.empty() && s.data_properties.empty()) {
        throw PreconditionError("the model has no classes or properties to document");
      }
      break;
    }
    case Stage::Feedback:
      if (project.feedback.empty()) throw PreconditionError("no feedback items ingested");
      break;
    default: break;
  }
}

/// Stores new proposals; ids already present are skipped.
std::vector<Proposal> store_proposals(Project& project, Stage stage, std::vector<Proposal> proposals) {
  std::vector<Proposal> added;
  for (auto& p : proposals) {
    if (project.find_proposal(p.id)) continue;
    if (std::any_of(added.begin(), added.end(), [&](const Proposal& a) { return a.id == p.id; })) continue;
    p.provenance.stage = to_string(stage);
    p.provenance.timestamp = project.clock.next();
    added.push_back(p);
  }
  for (const auto& p : added) {
    project.proposals.push_back(p);
    nlohmann::json data = {{"kind", to_string(p.kind)}, {"status", to_string(p.status)}};
    if (!p.reason.empty()) data["reason"] = p.reason;
    record(project, Actor::Llm, "proposal", p.id, std::move(data));
  }
  return added;
}

}  // namespace

nlohmann::json to_json(const StageOptions& o) {
  return {{"cqs", o.cqs}, {"title", o.title}, {"populate", o.populate}};
}

StageOptions stage_options_from_json(const nlohmann::json& j) {
  StageOptions o;
  o.cqs = j.value("cqs", std::vector<std::string>{});
  o.title = j.value("title", "");
  o.populate = j.value("populate", true);
  return o;
}

GateCheck check_gate(const Project& project, Stage stage) {
  auto fail = [](std::string why) { return GateCheck{false, std::move(why)}; };
  switch (stage) {
    case Stage::ScenarioGlossary:
      if (project.glossary.empty()) return fail("no accepted glossary term");
      break;
    case Stage::CompetencyQuestions:
      if (project.cqs.empty()) return fail("no accepted competency question");
      break;
    case Stage::ModeletDevelopment: {
      const bool ready = std::any_of(project.modelets.begin(), project.modelets.end(), [](const Modelet& m) {
        return m.status != ModeletStatus::Reverted && !m.graph.empty();
      });
      if (!ready) return fail("no modelet holds accepted triples");
      break;
    }
    case Stage::TestCaseGeneration:
      for (const auto& c : project.cqs) {
        const bool has = std::any_of(project.tests.begin(), project.tests.end(),
                                     [&](const TestCase& t) { return t.cq_id == c.id; });
        if (!has) return fail(c.id + " has no registered test case");
      }
      break;
    case Stage::ModelRefinement:
    case Stage::Feedback: {
      for (const auto& m : project.modelets) {
        if (m.open()) return fail("modelet " + m.id + " is not merged");
      }
      if (stage == Stage::Feedback) {
        for (const auto& p : project.proposals) {
          if (is_theme(p) && accepted(p) && project.converted_themes.count(p.id) == 0) {
            return fail("accepted theme " + p.id + " has no structural proposals yet");
          }
        }
      }
      const auto report = run_project_tests(project, stage == Stage::Feedback ? TestTier::Model : TestTier::All);
      const auto queries = run_project_tests(project, TestTier::Query);
      const auto errors = count_errors(report.model_findings) + count_errors(report.data_findings);
      if (errors > 0) return fail(std::to_string(errors) + " model or data test error(s)");
      if (queries.failures + queries.errors > 0) {
        return fail(std::to_string(queries.failures + queries.errors) + " query test(s) not passing");
      }
      break;
    }
    case Stage::DocumentGeneration: {
      const auto missing = entities_needing_annotation(extract_snapshot(project.model));
      if (!missing.empty()) return fail(std::to_string(missing.size()) + " entities lack a label or comment");
      break;
    }
  }
  return {true, ""};
}

namespace detail {

void refresh_stages(Project& project) {
  for (Stage s : kStages) {
    const auto status = project.status(s);
    if (status == StageStatus::Passed) continue;
    if (status != StageStatus::AwaitingReview) return;
    if (project.pending(s) > 0) return;
    if (!check_gate(project, s).ok) return;
    if (s == Stage::ModeletDevelopment) {
      for (auto& m : project.modelets) {
        if (m.status == ModeletStatus::Draft && !m.graph.empty()) {
          m.status = ModeletStatus::UnderTest;
          record(project, Actor::System, "modelet_status", m.id, {{"to", to_string(m.status)}});
        }
      }
    }
    set_stage_status(project, s, StageStatus::Passed);
  }
}

}  // namespace detail

std::vector<Proposal> run_stage(Project& project, Stage stage, Gateway& gateway, const TemplateLibrary& templates,
                                const StageOptions& options) {
  require_order(project, stage);
  if (project.status(stage) == StageStatus::Passed) {
    throw StageOrderViolation(std::string("stage ") + to_string(stage) + " has passed; revert it before re-running");
  }
  check_stage_inputs(project, stage);

  record(project, Actor::Human, "stage_run", to_string(stage), {{"options", to_json(options)}});
  std::vector<Proposal> produced;
  try {
    produced = stage_body(project, stage, gateway, templates, options);
  } catch (const Error& e) {
    record(project, Actor::System, "stage_failed", to_string(stage), {{"error", e.what()}});
    set_stage_status(project, stage, StageStatus::Failed, e.what());
    throw;
  }
  auto added = store_proposals(project, stage, std::move(produced));
  set_stage_status(project, stage, StageStatus::AwaitingReview);
  detail::refresh_stages(project);
  return added;
}

void revert_to_stage(Project& project, Stage stage) {
  if (project.status(stage) == StageStatus::NotStarted) {
    throw PreconditionError(std::string("stage ") + to_string(stage) + " has not started");
  }
  record(project, Actor::Human, "revert", to_string(stage));
  for (auto& p : project.proposals) {
    if (p.status != ProposalStatus::Pending) continue;
    const auto s = parse_stage(p.provenance.stage);
    if (s && index_of(*s) >= index_of(stage)) {
      p.status = ProposalStatus::Rejected;
      p.reason = "reverted";
      record(project, Actor::System, "proposal_status", p.id, {{"to", "Rejected"}, {"reason", "reverted"}});
    }
  }
  if (index_of(stage) <= index_of(Stage::ModeletDevelopment)) {
    for (auto& m : project.modelets) {
      if (m.open()) {
        m.status = ModeletStatus::Reverted;
        record(project, Actor::System, "modelet_status", m.id, {{"to", to_string(m.status)}});
      }
    }
  }
  for (Stage s : kStages) {
    if (index_of(s) >= index_of(stage)) set_stage_status(project, s, StageStatus::NotStarted, "revert");
  }
}

IngestResult ingest_feedback(Project& project, const std::vector<FeedbackItem>& items) {
  auto copy = project.feedback;
  auto result = ingest_feedback(copy, items);
  project.feedback = std::move(copy);
  nlohmann::json list = nlohmann::json::array();
  for (const auto& i : items) list.push_back(to_json(i));
  record(project, Actor::Human, "ingest", "",
         {{"items", list}, {"added", result.added}, {"duplicates", result.duplicates}});
  return result;
}

std::vector<Proposal> propose_from_themes(Project& project, Gateway& gateway, const TemplateLibrary& templates) {
  if (project.status(Stage::Feedback) != StageStatus::AwaitingReview &&
      project.status(Stage::Feedback) != StageStatus::Passed) {
    throw StageOrderViolation("feedback themes must be summarised before proposing changes");
  }
  std::vector<Proposal> themes;
  for (const auto& p : project.proposals) {
    if (is_theme(p) && accepted(p) && project.converted_themes.count(p.id) == 0) themes.push_back(p);
  }
  if (themes.empty()) throw PreconditionError("no accepted theme is waiting for conversion");

  record(project, Actor::Human, "propose_themes", "");
  const auto inventory = describe_inventory(extract_snapshot(project.model), project.prefixes);
  std::vector<Proposal> produced;
  try {
    produced = themes_to_proposals(gateway, templates, themes, inventory, to_string(Stage::Feedback));
  } catch (const Error& e) {
    record(project, Actor::System, "propose_themes_failed", "", {{"error", e.what()}});
    throw;
  }
  for (const auto& t : themes) project.converted_themes.insert(t.id);
  if (project.status(Stage::Feedback) == StageStatus::Passed) {
    set_stage_status(project, Stage::Feedback, StageStatus::AwaitingReview, "new theme proposals");
  }
  auto added = store_proposals(project, Stage::Feedback, std::move(produced));
  detail::refresh_stages(project);
  return added;
}

}  // namespace ontoforge
