#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/docgen.hpp"
#include "ontoforge/feedback.hpp"
#include "ontoforge/llm.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/rdf.hpp"
#include "ontoforge/testkit.hpp"

namespace ontoforge {

inline constexpr int kSchemaVersion = 1;

enum class Stage {
  ScenarioGlossary,
  CompetencyQuestions,
  ModeletDevelopment,
  TestCaseGeneration,
  ModelRefinement,
  DocumentGeneration,
  Feedback,
};
inline constexpr std::size_t kStageCount = 7;
inline constexpr std::array<Stage, kStageCount> kStages = {
    Stage::ScenarioGlossary, Stage::CompetencyQuestions, Stage::ModeletDevelopment, Stage::TestCaseGeneration,
    Stage::ModelRefinement,  Stage::DocumentGeneration,  Stage::Feedback};

const char* to_string(Stage s);
/// Accepts the stage name (case-insensitive) or its 1-based number.
std::optional<Stage> parse_stage(std::string_view text);

enum class StageStatus { NotStarted, AwaitingReview, Passed, Failed };
const char* to_string(StageStatus s);
std::optional<StageStatus> parse_stage_status(std::string_view text);

enum class Actor { Human, Llm, System };
const char* to_string(Actor a);

enum class ModeletStatus { Draft, UnderTest, Merged, Reverted };
const char* to_string(ModeletStatus s);

// ---------------------------------------------------------------------------
// Errors

class StageOrderViolation : public Error {
 public:
  using Error::Error;
};

class UnknownProposal : public Error {
 public:
  explicit UnknownProposal(const std::string& id) : Error("unknown proposal " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class AlreadyDecided : public Error {
 public:
  explicit AlreadyDecided(const std::string& id) : Error("proposal " + id + " is already decided"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class CompileError : public Error {
 public:
  CompileError(const std::string& proposal_id, const nlohmann::json& payload, const std::string& reason)
      : Error("cannot compile proposal " + proposal_id + ": " + reason + " (payload " + payload.dump() + ")"),
        reason_(reason) {}
  const std::string& reason() const { return reason_; }

 private:
  std::string reason_;
};

class UnknownModelet : public Error {
 public:
  using Error::Error;
};

class GateFailed : public Error {
 public:
  GateFailed(std::string message, std::vector<std::string> failing_cqs, nlohmann::json report)
      : Error(std::move(message)), failing_cqs_(std::move(failing_cqs)), report_(std::move(report)) {}
  const std::vector<std::string>& failing_cqs() const { return failing_cqs_; }
  const nlohmann::json& report() const { return report_; }

 private:
  std::vector<std::string> failing_cqs_;
  nlohmann::json report_;
};

class DuplicateProjectName : public Error {
 public:
  using Error::Error;
};

class SchemaVersionMismatch : public Error {
 public:
  explicit SchemaVersionMismatch(int found)
      : Error("project schema version " + std::to_string(found) + " is not supported (expected " +
              std::to_string(kSchemaVersion) + ")"),
        found_(found) {}
  int found() const { return found_; }

 private:
  int found_;
};

class CorruptProject : public Error {
 public:
  CorruptProject(SourcePos pos, const std::string& reason)
      : Error("corrupt project file at " + std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " +
              reason),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

// ---------------------------------------------------------------------------
// Project state

/// Timestamp source. "stepping" advances one second per tick from `epoch`,
/// "system" reads the wall clock but never goes backwards.
struct Clock {
  std::string mode = "stepping";
  std::int64_t epoch = 1704067200;  // 2024-01-01T00:00:00Z
  std::int64_t ticks = 0;
  std::string last;

  std::string next();
  friend bool operator==(const Clock&, const Clock&) = default;
};

struct ProjectSettings {
  std::string domain;
  std::string ns = "http://example.org/onto#";
  std::string prefix = "onto";
  std::string language = "en";
  int votes = 3;
  std::size_t retrieve_k = 3;
  std::size_t feedback_chunk = kFeedbackChunkSize;

  friend bool operator==(const ProjectSettings&, const ProjectSettings&) = default;
};

struct ScenarioDoc {
  std::string id;
  std::string title;
  std::string text;

  friend bool operator==(const ScenarioDoc&, const ScenarioDoc&) = default;
};

struct CompetencyQuestionEntry {
  std::string id;
  std::string question;
  ProposalStatus status = ProposalStatus::Accepted;
  std::string proposal_id;

  friend bool operator==(const CompetencyQuestionEntry&, const CompetencyQuestionEntry&) = default;
};

struct Modelet {
  std::string id;
  std::string title;
  Graph graph;
  std::vector<std::string> covered_cqs;
  ModeletStatus status = ModeletStatus::Draft;
  std::vector<std::string> proposal_ids;
  std::optional<nlohmann::json> last_report;

  bool open() const { return status == ModeletStatus::Draft || status == ModeletStatus::UnderTest; }
  friend bool operator==(const Modelet&, const Modelet&) = default;
};

struct LogEntry {
  std::size_t seq = 0;
  std::string timestamp;
  Actor actor = Actor::System;
  std::string action;
  std::string subject;
  nlohmann::json data = nlohmann::json::object();

  friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct Project {
  int schema_version = kSchemaVersion;
  std::string name;
  ProjectSettings settings;
  Clock clock;
  std::vector<ScenarioDoc> scenarios;
  std::vector<GlossaryEntry> glossary;
  std::vector<CompetencyQuestionEntry> cqs;
  std::vector<Modelet> modelets;
  Graph model;
  PrefixMap prefixes;
  std::vector<Proposal> proposals;
  std::vector<TestCase> tests;
  std::vector<FeedbackItem> feedback;
  std::set<std::string> converted_themes;
  std::array<StageStatus, kStageCount> stages{};
  std::vector<LogEntry> log;

  StageStatus status(Stage s) const { return stages[static_cast<std::size_t>(s)]; }
  const Proposal* find_proposal(const std::string& id) const;
  Proposal* find_proposal(const std::string& id);
  Modelet* find_modelet(const std::string& id);
  std::size_t pending(Stage s) const;

  friend bool operator==(const Project&, const Project&) = default;
};

// ---------------------------------------------------------------------------
// Operations

/// Throws PreconditionError without a non-empty scenario text.
Project init_project(const std::string& name, const std::vector<ScenarioDoc>& scenarios,
                     const ProjectSettings& settings, const Clock& clock = {});

/// Adds a seed Turtle document to the main model.
void seed_model(Project& project, const std::string& turtle);

struct StageOptions {
  /// ModeletDevelopment: CQ ids the new modelet covers (default: accepted
  /// CQs no modelet covers yet, else all accepted CQs).
  std::vector<std::string> cqs;
  std::string title;
  /// TestCaseGeneration: also request example individuals.
  bool populate = true;

  friend bool operator==(const StageOptions&, const StageOptions&) = default;
};

nlohmann::json to_json(const StageOptions& o);
StageOptions stage_options_from_json(const nlohmann::json& j);

/// Runs one stage through the gateway and stores the parsed proposals as
/// Pending. Gateway failures mark the stage Failed, are logged, and rethrown.
std::vector<Proposal> run_stage(Project& project, Stage stage, Gateway& gateway, const TemplateLibrary& templates,
                                const StageOptions& options = {});

enum class Verdict { Accept, Reject, Edit };
const char* to_string(Verdict v);

struct Decision {
  std::string proposal;
  Verdict verdict = Verdict::Accept;
  std::optional<nlohmann::json> payload;
  std::optional<std::string> reason;

  friend bool operator==(const Decision&, const Decision&) = default;
};

nlohmann::json to_json(const Decision& d);
Decision decision_from_json(const nlohmann::json& j);

/// Parses a decision file (JSON list). Throws ParseError with a position.
std::vector<Decision> parse_decision_file(std::string_view text);

/// All-or-nothing: on any error the project is left unchanged.
void apply_decisions(Project& project, const std::vector<Decision>& decisions);

/// Merges an UnderTest modelet when the union graph has no model-test Error
/// and every covered CQ has registered query tests that all pass. On failure
/// the report is attached to the modelet and GateFailed is thrown.
void merge_modelet(Project& project, const std::string& modelet_id);

/// Re-opens `stage`: it and every later stage return to NotStarted, their
/// Pending proposals are rejected with reason "reverted", and open modelets
/// are marked Reverted when ModeletDevelopment or an earlier stage reopens.
void revert_to_stage(Project& project, Stage stage);

IngestResult ingest_feedback(Project& project, const std::vector<FeedbackItem>& items);

/// Structural proposals for accepted themes not converted yet.
std::vector<Proposal> propose_from_themes(Project& project, Gateway& gateway, const TemplateLibrary& templates);

struct GateCheck {
  bool ok = false;
  std::string reason;
};

/// The stage's gate predicate, ignoring Pending proposals.
GateCheck check_gate(const Project& project, Stage stage);

/// Main model plus every open modelet.
Graph working_graph(const Project& project);

enum class TestTier { Model, Data, Query, All };
std::optional<TestTier> parse_test_tier(std::string_view text);

TestReport run_project_tests(const Project& project, TestTier tier, const Graph* graph = nullptr);

std::string project_docs(const Project& project);

nlohmann::json project_summary(const Project& project);

// ---------------------------------------------------------------------------
// Persistence and replay

nlohmann::json to_json(const Project& project);
Project project_from_json(const nlohmann::json& j);

struct SaveHooks {
  /// Called after the temporary file is written and before it replaces the
  /// project file. Throwing aborts the save.
  std::function<void(const std::filesystem::path& temp)> before_rename;
};

void save_project(const Project& project, const std::filesystem::path& path, const SaveHooks* hooks = nullptr);
Project load_project(const std::filesystem::path& path);

/// Re-executes the human actions of `log` from an empty project.
Project replay_log(const std::vector<LogEntry>& log, Gateway& gateway, const TemplateLibrary& templates);

}  // namespace ontoforge
