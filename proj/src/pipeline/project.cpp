#include <algorithm>
#include <cctype>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <unistd.h>

#include "internal.hpp"
#include "ontoforge/vocab.hpp"

namespace ontoforge {

using namespace vocab;

namespace {

std::string format_utc(std::int64_t seconds) {
  const std::time_t t = static_cast<std::time_t>(seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view text, const std::array<E, N>& values) {
  for (E v : values) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(Stage s) {
  switch (s) {
    case Stage::ScenarioGlossary: return "ScenarioGlossary";
    case Stage::CompetencyQuestions: return "CompetencyQuestions";
    case Stage::ModeletDevelopment: return "ModeletDevelopment";
    case Stage::TestCaseGeneration: return "TestCaseGeneration";
    case Stage::ModelRefinement: return "ModelRefinement";
    case Stage::DocumentGeneration: return "DocumentGeneration";
    case Stage::Feedback: return "Feedback";
  }
  return "?";
}

std::optional<Stage> parse_stage(std::string_view text) {
  if (text.size() == 1 && text[0] >= '1' && text[0] <= '7') return kStages[text[0] - '1'];
  const auto key = lower(text);
  for (Stage s : kStages) {
    if (lower(to_string(s)) == key) return s;
  }
  return std::nullopt;
}

const char* to_string(StageStatus s) {
  switch (s) {
    case StageStatus::NotStarted: return "NotStarted";
    case StageStatus::AwaitingReview: return "AwaitingReview";
    case StageStatus::Passed: return "Passed";
    case StageStatus::Failed: return "Failed";
  }
  return "?";
}

std::optional<StageStatus> parse_stage_status(std::string_view text) {
  return parse_enum(text, std::array{StageStatus::NotStarted, StageStatus::AwaitingReview, StageStatus::Passed,
                                     StageStatus::Failed});
}

const char* to_string(Actor a) {
  switch (a) {
    case Actor::Human: return "human";
    case Actor::Llm: return "llm";
    case Actor::System: return "system";
  }
  return "?";
}

const char* to_string(ModeletStatus s) {
  switch (s) {
    case ModeletStatus::Draft: return "Draft";
    case ModeletStatus::UnderTest: return "UnderTest";
    case ModeletStatus::Merged: return "Merged";
    case ModeletStatus::Reverted: return "Reverted";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Accept: return "accept";
    case Verdict::Reject: return "reject";
    case Verdict::Edit: return "edit";
  }
  return "?";
}

std::optional<TestTier> parse_test_tier(std::string_view text) {
  const auto key = lower(text);
  if (key == "model") return TestTier::Model;
  if (key == "data") return TestTier::Data;
  if (key == "query") return TestTier::Query;
  if (key == "all") return TestTier::All;
  return std::nullopt;
}

std::string Clock::next() {
  std::int64_t t = 0;
  if (mode == "system") {
    const auto now = std::chrono::duration_cast<std::chrono::seconds>(
                         std::chrono::system_clock::now().time_since_epoch())
                         .count();
    t = std::max<std::int64_t>(now, ticks + 1);
    ticks = t;
  } else {
    t = epoch + ticks;
    ++ticks;
  }
  last = format_utc(t);
  return last;
}

const Proposal* Project::find_proposal(const std::string& id) const {
  for (const auto& p : proposals) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

Proposal* Project::find_proposal(const std::string& id) {
  for (auto& p : proposals) {
    if (p.id == id) return &p;
  }
  return nullptr;
}

Modelet* Project::find_modelet(const std::string& id) {
  for (auto& m : modelets) {
    if (m.id == id) return &m;
  }
  return nullptr;
}

std::size_t Project::pending(Stage s) const {
  const std::string name = to_string(s);
  return static_cast<std::size_t>(std::count_if(proposals.begin(), proposals.end(), [&](const Proposal& p) {
    return p.status == ProposalStatus::Pending && p.provenance.stage == name;
  }));
}

Graph working_graph(const Project& project) {
  Graph g = project.model;
  for (const auto& m : project.modelets) {
    if (m.open()) g = merge(g, m.graph);
  }
  return g;
}

namespace detail {

void record(Project& project, Actor actor, const std::string& action, const std::string& subject,
            nlohmann::json data) {
  LogEntry e;
  e.seq = project.log.size() + 1;
  e.timestamp = project.clock.next();
  e.actor = actor;
  e.action = action;
  e.subject = subject;
  e.data = std::move(data);
  project.log.push_back(std::move(e));
}

void set_stage_status(Project& project, Stage stage, StageStatus status, const std::string& reason) {
  auto& slot = project.stages[static_cast<std::size_t>(stage)];
  if (slot == status) return;
  nlohmann::json data = {{"from", to_string(slot)}, {"to", to_string(status)}};
  if (!reason.empty()) data["reason"] = reason;
  slot = status;
  record(project, Actor::System, "stage_status", to_string(stage), std::move(data));
}

std::string glossary_lines(const Project& project) {
  std::string out;
  for (const auto& g : project.glossary) out += "- " + g.term + ": " + g.interpretation + "\n";
  return out.empty() ? "(empty)\n" : out;
}

std::vector<const CompetencyQuestionEntry*> accepted_cqs(const Project& project) {
  std::vector<const CompetencyQuestionEntry*> out;
  for (const auto& c : project.cqs) out.push_back(&c);
  return out;
}

}  // namespace detail

Project init_project(const std::string& name, const std::vector<ScenarioDoc>& scenarios,
                     const ProjectSettings& settings, const Clock& clock) {
  if (name.empty()) throw PreconditionError("project name must not be empty");
  const bool has_text = std::any_of(scenarios.begin(), scenarios.end(), [](const ScenarioDoc& d) {
    return d.text.find_first_not_of(" \t\r\n") != std::string::npos;
  });
  if (!has_text) throw PreconditionError("at least one non-empty scenario document is required");
  if (settings.votes < 1) throw PreconditionError("votes must be at least 1");
  if (settings.feedback_chunk < 1) throw PreconditionError("feedback chunk size must be at least 1");

  Project p;
  p.name = name;
  p.settings = settings;
  p.clock = clock;
  p.clock.ticks = 0;
  p.clock.last.clear();
  p.scenarios = scenarios;
  for (std::size_t i = 0; i < p.scenarios.size(); ++i) {
    if (p.scenarios[i].id.empty()) p.scenarios[i].id = "S" + std::to_string(i + 1);
  }
  p.prefixes.set("rdf", kRdf);
  p.prefixes.set("rdfs", kRdfs);
  p.prefixes.set("owl", kOwl);
  p.prefixes.set("xsd", kXsd);
  if (!settings.prefix.empty()) p.prefixes.set(settings.prefix, settings.ns);

  nlohmann::json docs = nlohmann::json::array();
  for (const auto& d : p.scenarios) docs.push_back({{"id", d.id}, {"title", d.title}, {"text", d.text}});
  nlohmann::json s = {{"domain", settings.domain},     {"ns", settings.ns},
                      {"prefix", settings.prefix},     {"language", settings.language},
                      {"votes", settings.votes},       {"retrieve_k", settings.retrieve_k},
                      {"feedback_chunk", settings.feedback_chunk}};
  detail::record(p, Actor::Human, "create", name,
                 {{"settings", s}, {"scenarios", docs}, {"clock", {{"mode", clock.mode}, {"epoch", clock.epoch}}}});
  return p;
}

void seed_model(Project& project, const std::string& turtle) {
  auto doc = parse_turtle(turtle);
  extract_snapshot(merge(project.model, doc.graph));
  for (const auto& t : doc.graph.triples()) project.model.insert(t);
  for (const auto& [prefix, ns] : doc.prefixes.entries()) {
    if (!project.prefixes.find(prefix)) project.prefixes.set(prefix, ns);
  }
  detail::record(project, Actor::Human, "seed", "", {{"turtle", turtle}, {"triples", doc.graph.size()}});
}

TestReport run_project_tests(const Project& project, TestTier tier, const Graph* graph) {
  const Graph& g = graph ? *graph : project.model;
  TestReport report;
  const auto start = std::chrono::steady_clock::now();
  const auto snapshot = extract_snapshot(g);
  if (tier == TestTier::Model || tier == TestTier::All) report.model_findings = run_model_tests(g, snapshot);
  if (tier == TestTier::Data || tier == TestTier::All) report.data_findings = run_data_tests(g, snapshot);
  if (tier == TestTier::Query || tier == TestTier::All) {
    auto q = run_query_tests(g, project.tests, &project.prefixes);
    report.cases = std::move(q.cases);
    report.passes = q.passes;
    report.failures = q.failures;
    report.errors = q.errors;
  }
  report.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::string project_docs(const Project& project) {
  return emit_markdown_docs(extract_snapshot(project.model), project.glossary, project.prefixes, project.name);
}

nlohmann::json project_summary(const Project& project) {
  nlohmann::json stages = nlohmann::json::array();
  for (Stage s : kStages) {
    auto gate = check_gate(project, s);
    stages.push_back({{"stage", to_string(s)},
                      {"number", static_cast<int>(s) + 1},
                      {"status", to_string(project.status(s))},
                      {"pending", project.pending(s)},
                      {"gate", gate.ok},
                      {"gate_reason", gate.reason}});
  }
  nlohmann::json modelets = nlohmann::json::array();
  for (const auto& m : project.modelets) {
    modelets.push_back({{"id", m.id},
                        {"title", m.title},
                        {"status", to_string(m.status)},
                        {"covered", m.covered_cqs},
                        {"triples", m.graph.size()}});
  }
  std::size_t pending = 0;
  for (const auto& p : project.proposals) pending += p.status == ProposalStatus::Pending ? 1 : 0;
  return {{"name", project.name},
          {"domain", project.settings.domain},
          {"stages", stages},
          {"modelets", modelets},
          {"glossary", project.glossary.size()},
          {"cqs", project.cqs.size()},
          {"tests", project.tests.size()},
          {"feedback", project.feedback.size()},
          {"proposals", project.proposals.size()},
          {"pending", pending},
          {"triples", project.model.size()},
          {"log", project.log.size()}};
}

// ---------------------------------------------------------------------------
// JSON

namespace {

nlohmann::json log_to_json(const LogEntry& e) {
  return {{"seq", e.seq},       {"timestamp", e.timestamp}, {"actor", to_string(e.actor)},
          {"action", e.action}, {"subject", e.subject},     {"data", e.data}};
}

LogEntry log_from_json(const nlohmann::json& j) {
  LogEntry e;
  e.seq = j.at("seq").get<std::size_t>();
  e.timestamp = j.at("timestamp").get<std::string>();
  const auto actor = j.at("actor").get<std::string>();
  if (actor == "human") {
    e.actor = Actor::Human;
  } else if (actor == "llm") {
    e.actor = Actor::Llm;
  } else if (actor == "system") {
    e.actor = Actor::System;
  } else {
    throw Error("unknown actor '" + actor + "'");
  }
  e.action = j.at("action").get<std::string>();
  e.subject = j.at("subject").get<std::string>();
  e.data = j.at("data");
  return e;
}

Graph graph_from_turtle(const std::string& text) { return parse_turtle(text).graph; }

}  // namespace

nlohmann::json to_json(const Project& p) {
  nlohmann::json prefixes = nlohmann::json::array();
  for (const auto& [k, v] : p.prefixes.entries()) prefixes.push_back({k, v});
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& d : p.scenarios) scenarios.push_back({{"id", d.id}, {"title", d.title}, {"text", d.text}});
  nlohmann::json glossary = nlohmann::json::array();
  for (const auto& g : p.glossary) glossary.push_back({{"term", g.term}, {"interpretation", g.interpretation}});
  nlohmann::json cqs = nlohmann::json::array();
  for (const auto& c : p.cqs) {
    cqs.push_back(
        {{"id", c.id}, {"question", c.question}, {"status", to_string(c.status)}, {"proposal", c.proposal_id}});
  }
  nlohmann::json modelets = nlohmann::json::array();
  for (const auto& m : p.modelets) {
    nlohmann::json j = {{"id", m.id},
                        {"title", m.title},
                        {"status", to_string(m.status)},
                        {"covered", m.covered_cqs},
                        {"proposals", m.proposal_ids},
                        {"graph", serialize_turtle(m.graph, p.prefixes)}};
    if (m.last_report) j["last_report"] = *m.last_report;
    modelets.push_back(std::move(j));
  }
  nlohmann::json proposals = nlohmann::json::array();
  for (const auto& x : p.proposals) proposals.push_back(to_json(x));
  nlohmann::json tests = nlohmann::json::array();
  for (const auto& t : p.tests) tests.push_back(to_json(t));
  nlohmann::json feedback = nlohmann::json::array();
  for (const auto& f : p.feedback) feedback.push_back(to_json(f));
  nlohmann::json stages = nlohmann::json::object();
  for (Stage s : kStages) stages[to_string(s)] = to_string(p.status(s));
  nlohmann::json log = nlohmann::json::array();
  for (const auto& e : p.log) log.push_back(log_to_json(e));

  return {{"schema_version", p.schema_version},
          {"name", p.name},
          {"settings",
           {{"domain", p.settings.domain},
            {"ns", p.settings.ns},
            {"prefix", p.settings.prefix},
            {"language", p.settings.language},
            {"votes", p.settings.votes},
            {"retrieve_k", p.settings.retrieve_k},
            {"feedback_chunk", p.settings.feedback_chunk}}},
          {"clock", {{"mode", p.clock.mode}, {"epoch", p.clock.epoch}, {"ticks", p.clock.ticks}, {"last", p.clock.last}}},
          {"prefixes", prefixes},
          {"scenarios", scenarios},
          {"glossary", glossary},
          {"cqs", cqs},
          {"model", serialize_turtle(p.model, p.prefixes)},
          {"modelets", modelets},
          {"proposals", proposals},
          {"tests", tests},
          {"feedback", feedback},
          {"converted_themes", p.converted_themes},
          {"stages", stages},
          {"log", log}};
}

Project project_from_json(const nlohmann::json& j) {
  Project p;
  p.schema_version = j.at("schema_version").get<int>();
  if (p.schema_version != kSchemaVersion) throw SchemaVersionMismatch(p.schema_version);
  p.name = j.at("name").get<std::string>();
  const auto& s = j.at("settings");
  p.settings.domain = s.at("domain").get<std::string>();
  p.settings.ns = s.at("ns").get<std::string>();
  p.settings.prefix = s.at("prefix").get<std::string>();
  p.settings.language = s.at("language").get<std::string>();
  p.settings.votes = s.at("votes").get<int>();
  p.settings.retrieve_k = s.at("retrieve_k").get<std::size_t>();
  p.settings.feedback_chunk = s.at("feedback_chunk").get<std::size_t>();
  const auto& c = j.at("clock");
  p.clock.mode = c.at("mode").get<std::string>();
  p.clock.epoch = c.at("epoch").get<std::int64_t>();
  p.clock.ticks = c.at("ticks").get<std::int64_t>();
  p.clock.last = c.at("last").get<std::string>();
  for (const auto& e : j.at("prefixes")) p.prefixes.set(e.at(0).get<std::string>(), e.at(1).get<std::string>());
  for (const auto& d : j.at("scenarios")) {
    p.scenarios.push_back({d.at("id").get<std::string>(), d.at("title").get<std::string>(),
                           d.at("text").get<std::string>()});
  }
  for (const auto& g : j.at("glossary")) {
    p.glossary.push_back({g.at("term").get<std::string>(), g.at("interpretation").get<std::string>()});
  }
  for (const auto& q : j.at("cqs")) {
    CompetencyQuestionEntry e;
    e.id = q.at("id").get<std::string>();
    e.question = q.at("question").get<std::string>();
    const auto st = parse_proposal_status(q.at("status").get<std::string>());
    if (!st) throw Error("unknown CQ status");
    e.status = *st;
    e.proposal_id = q.at("proposal").get<std::string>();
    p.cqs.push_back(std::move(e));
  }
  p.model = graph_from_turtle(j.at("model").get<std::string>());
  for (const auto& m : j.at("modelets")) {
    Modelet x;
    x.id = m.at("id").get<std::string>();
    x.title = m.at("title").get<std::string>();
    const auto st = parse_enum(m.at("status").get<std::string>(),
                               std::array{ModeletStatus::Draft, ModeletStatus::UnderTest, ModeletStatus::Merged,
                                          ModeletStatus::Reverted});
    if (!st) throw Error("unknown modelet status");
    x.status = *st;
    x.covered_cqs = m.at("covered").get<std::vector<std::string>>();
    x.proposal_ids = m.at("proposals").get<std::vector<std::string>>();
    x.graph = graph_from_turtle(m.at("graph").get<std::string>());
    if (m.contains("last_report")) x.last_report = m["last_report"];
    p.modelets.push_back(std::move(x));
  }
  for (const auto& x : j.at("proposals")) p.proposals.push_back(proposal_from_json(x));
  for (const auto& t : j.at("tests")) p.tests.push_back(test_case_from_json(t));
  for (const auto& f : j.at("feedback")) p.feedback.push_back(feedback_item_from_json(f));
  p.converted_themes = j.at("converted_themes").get<std::set<std::string>>();
  const auto& st = j.at("stages");
  for (Stage s : kStages) {
    const auto v = parse_stage_status(st.at(to_string(s)).get<std::string>());
    if (!v) throw Error("unknown stage status for " + std::string(to_string(s)));
    p.stages[static_cast<std::size_t>(s)] = *v;
  }
  for (const auto& e : j.at("log")) p.log.push_back(log_from_json(e));
  return p;
}

// ---------------------------------------------------------------------------
// Files

void save_project(const Project& project, const std::filesystem::path& path, const SaveHooks* hooks) {
  const std::string text = to_json(project).dump(2) + "\n";
  auto temp = path;
  temp += ".tmp";
  const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw IoError("cannot write " + temp.string() + ": " + std::strerror(errno));
  std::size_t done = 0;
  while (done < text.size()) {
    const auto n = ::write(fd, text.data() + done, text.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string why = std::strerror(errno);
      ::close(fd);
      throw IoError("cannot write " + temp.string() + ": " + why);
    }
    done += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) throw IoError("cannot flush " + temp.string());
  if (hooks && hooks->before_rename) hooks->before_rename(temp);
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

Project load_project(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptProject(position_at(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
  }
  if (!doc.is_object()) throw CorruptProject({1, 1}, "expected a JSON object");
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    throw CorruptProject({1, 1}, "missing schema_version");
  }
  const int version = doc["schema_version"].get<int>();
  if (version != kSchemaVersion) throw SchemaVersionMismatch(version);
  try {
    return project_from_json(doc);
  } catch (const SchemaVersionMismatch&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptProject({1, 1}, e.what());
  } catch (const Error& e) {
    throw CorruptProject({1, 1}, e.what());
  }
}

}  // namespace ontoforge
