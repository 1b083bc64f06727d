#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/error.hpp"

namespace ontoforge {

using Json = nlohmann::json;

enum class ProposalKind {
  GlossaryTerm,
  CompetencyQuestion,
  ClassDef,
  ObjectPropertyDef,
  DataPropertyDef,
  RelationAxiom,
  Instance,
  Annotation,
  SparqlTest,
  Revision,
};

enum class ProposalStatus { Pending, Accepted, Rejected, Edited };

const char* to_string(ProposalKind kind);
const char* to_string(ProposalStatus status);
std::optional<ProposalKind> parse_proposal_kind(std::string_view text);
std::optional<ProposalStatus> parse_proposal_status(std::string_view text);

class NoStructuredBlock : public Error {
 public:
  NoStructuredBlock() : Error("no fenced structured block in completion") {}
};

class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string path, const std::string& why);
  /// Full path, e.g. "proposals[0].payload.name".
  const std::string& path() const { return path_; }
  /// Last path component, e.g. "name".
  std::string field() const;

 private:
  std::string path_;
};

class UnexpectedKind : public Error {
 public:
  explicit UnexpectedKind(const std::string& kind)
      : Error("unexpected proposal kind '" + kind + "'"), kind_(kind) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct Provenance {
  std::string template_id;
  std::string technique;
  std::string prompt_hash;
  std::string provider_id;
  std::string timestamp;
  std::string stage;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Proposal {
  std::string id;
  ProposalKind kind = ProposalKind::GlossaryTerm;
  Json payload = Json::object();
  std::optional<Json> edited_payload;
  ProposalStatus status = ProposalStatus::Pending;
  std::string reason;
  Provenance provenance;
  /// Self-consistency bookkeeping: samples agreeing / samples drawn.
  std::optional<int> votes;
  std::optional<int> vote_samples;
  bool minority = false;

  /// The payload decisions act on: the edited one when present.
  const Json& effective_payload() const { return edited_payload ? *edited_payload : payload; }
  bool decided() const { return status != ProposalStatus::Pending; }

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct PayloadFields {
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

/// Wire-schema field names for a proposal kind.
PayloadFields payload_fields(ProposalKind kind);

/// First 16 hex characters of SHA-256 over the kind name and the canonical
/// (key-sorted) payload dump.
std::string proposal_id(ProposalKind kind, const Json& payload);

/// Checks `payload` against the per-kind wire schema. `path` prefixes
/// reported field paths.
void validate_payload(ProposalKind kind, const Json& payload, const std::string& path = "payload");

/// Extracts the first fenced code block and parses its proposal document.
/// An empty `expected` accepts every kind.
std::vector<Proposal> parse_proposals(std::string_view completion,
                                      const std::set<ProposalKind>& expected = {});

/// Text of the first ``` fenced block, without the info string.
std::optional<std::string> first_fenced_block(std::string_view text);

/// Vote key: kind plus the case-folded, whitespace-collapsed primary field.
std::string vote_key(const Proposal& p);

/// Case-folds ASCII and collapses whitespace runs to one space, trimmed.
std::string normalize_key(std::string_view text);

Json to_json(const Proposal& p);
Proposal proposal_from_json(const Json& j);

}  // namespace ontoforge
