#include <algorithm>
#include <cctype>

#include "ontoforge/hash.hpp"
#include "ontoforge/proposal.hpp"

namespace ontoforge {

namespace {

struct KindName {
  ProposalKind kind;
  const char* name;
};

constexpr KindName kKinds[] = {
    {ProposalKind::GlossaryTerm, "GlossaryTerm"},
    {ProposalKind::CompetencyQuestion, "CompetencyQuestion"},
    {ProposalKind::ClassDef, "ClassDef"},
    {ProposalKind::ObjectPropertyDef, "ObjectPropertyDef"},
    {ProposalKind::DataPropertyDef, "DataPropertyDef"},
    {ProposalKind::RelationAxiom, "RelationAxiom"},
    {ProposalKind::Instance, "Instance"},
    {ProposalKind::Annotation, "Annotation"},
    {ProposalKind::SparqlTest, "SparqlTest"},
    {ProposalKind::Revision, "Revision"},
};

}  // namespace

PayloadFields payload_fields(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::GlossaryTerm: return {{"term", "interpretation"}, {}};
    case ProposalKind::CompetencyQuestion: return {{"question"}, {"id"}};
    case ProposalKind::ClassDef: return {{"name", "definition"}, {"parent"}};
    case ProposalKind::ObjectPropertyDef:
    case ProposalKind::DataPropertyDef: return {{"name", "domain", "range"}, {"definition", "parent"}};
    case ProposalKind::RelationAxiom: return {{"subject", "relation", "object"}, {}};
    case ProposalKind::Instance: return {{"name", "type"}, {"properties"}};
    case ProposalKind::Annotation: return {{"entity"}, {"label", "comment"}};
    case ProposalKind::SparqlTest: return {{"cqId", "query"}, {"expectation", "description"}};
    case ProposalKind::Revision:
      return {{"theme", "sentiment", "supporting", "quote", "action", "rank"}, {}};
  }
  return {};
}

namespace {

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaViolation(path, "expected an object");
}

void require_string(const Json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaViolation(path, "expected a string");
  if (j.get<std::string>().empty()) throw SchemaViolation(path, "must not be empty");
}

void reject_unknown(const Json& j, const std::vector<std::string>& allowed, const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    if (!contains(allowed, key)) throw SchemaViolation(path + "." + key, "unknown field");
  }
}

void validate_expectation(const Json& e, const std::string& path) {
  require_object(e, path);
  if (!e.contains("type")) throw SchemaViolation(path + ".type", "required field missing");
  require_string(e["type"], path + ".type");
  const auto type = e["type"].get<std::string>();
  if (type == "MinRows" || type == "ExactRows") {
    reject_unknown(e, {"type", "n"}, path);
    if (!e.contains("n")) throw SchemaViolation(path + ".n", "required field missing");
    if (!e["n"].is_number_integer() || e["n"].get<long>() < 0) {
      throw SchemaViolation(path + ".n", "expected a non-negative integer");
    }
  } else if (type == "ContainsBinding") {
    reject_unknown(e, {"type", "var", "value"}, path);
    for (const char* f : {"var", "value"}) {
      if (!e.contains(f)) throw SchemaViolation(path + "." + f, "required field missing");
      require_string(e[f], path + "." + f);
    }
  } else if (type == "Empty") {
    reject_unknown(e, {"type"}, path);
  } else {
    throw SchemaViolation(path + ".type", "unknown expectation '" + type + "'");
  }
}

void validate_instance_properties(const Json& props, const std::string& path) {
  if (!props.is_array()) throw SchemaViolation(path, "expected an array");
  for (std::size_t i = 0; i < props.size(); ++i) {
    const auto p = path + "[" + std::to_string(i) + "]";
    const auto& item = props[i];
    require_object(item, p);
    reject_unknown(item, {"property", "value", "object", "datatype"}, p);
    if (!item.contains("property")) throw SchemaViolation(p + ".property", "required field missing");
    require_string(item["property"], p + ".property");
    const bool has_value = item.contains("value");
    const bool has_object = item.contains("object");
    if (has_value == has_object) throw SchemaViolation(p + ".value", "exactly one of value or object");
    if (has_object) {
      require_string(item["object"], p + ".object");
      if (item.contains("datatype")) throw SchemaViolation(p + ".datatype", "only allowed with value");
    } else {
      const auto& v = item["value"];
      if (!v.is_string() && !v.is_number() && !v.is_boolean()) {
        throw SchemaViolation(p + ".value", "expected a string, number or boolean");
      }
    }
    if (item.contains("datatype")) require_string(item["datatype"], p + ".datatype");
  }
}

const char* primary_field(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::GlossaryTerm: return "term";
    case ProposalKind::CompetencyQuestion: return "question";
    case ProposalKind::ClassDef:
    case ProposalKind::ObjectPropertyDef:
    case ProposalKind::DataPropertyDef:
    case ProposalKind::Instance: return "name";
    case ProposalKind::RelationAxiom: return "subject";
    case ProposalKind::Annotation: return "entity";
    case ProposalKind::SparqlTest: return "query";
    case ProposalKind::Revision: return "theme";
  }
  return "name";
}

}  // namespace

SchemaViolation::SchemaViolation(std::string path, const std::string& why)
    : Error("schema violation at " + path + ": " + why), path_(std::move(path)) {}

std::string SchemaViolation::field() const {
  auto dot = path_.find_last_of('.');
  std::string last = dot == std::string::npos ? path_ : path_.substr(dot + 1);
  auto bracket = last.find('[');
  return bracket == std::string::npos ? last : last.substr(0, bracket);
}

const char* to_string(ProposalKind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

const char* to_string(ProposalStatus status) {
  switch (status) {
    case ProposalStatus::Pending: return "Pending";
    case ProposalStatus::Accepted: return "Accepted";
    case ProposalStatus::Rejected: return "Rejected";
    case ProposalStatus::Edited: return "Edited";
  }
  return "?";
}

std::optional<ProposalKind> parse_proposal_kind(std::string_view text) {
  for (const auto& k : kKinds) {
    if (text == k.name) return k.kind;
  }
  return std::nullopt;
}

std::optional<ProposalStatus> parse_proposal_status(std::string_view text) {
  for (auto s : {ProposalStatus::Pending, ProposalStatus::Accepted, ProposalStatus::Rejected,
                 ProposalStatus::Edited}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

std::string proposal_id(ProposalKind kind, const Json& payload) {
  return sha256_hex(std::string(to_string(kind)) + "\n" + payload.dump()).substr(0, 16);
}

void validate_payload(ProposalKind kind, const Json& payload, const std::string& path) {
  require_object(payload, path);
  const auto spec = payload_fields(kind);
  auto allowed = spec.required;
  allowed.insert(allowed.end(), spec.optional.begin(), spec.optional.end());
  reject_unknown(payload, allowed, path);
  for (const auto& f : spec.required) {
    if (!payload.contains(f)) throw SchemaViolation(path + "." + f, "required field missing");
  }

  auto str = [&](const char* f) { require_string(payload[f], path + "." + f); };
  switch (kind) {
    case ProposalKind::Instance:
      str("name");
      str("type");
      if (payload.contains("properties")) {
        validate_instance_properties(payload["properties"], path + ".properties");
      }
      return;
    case ProposalKind::Annotation:
      str("entity");
      if (!payload.contains("label") && !payload.contains("comment")) {
        throw SchemaViolation(path + ".label", "label or comment required");
      }
      if (payload.contains("label")) str("label");
      if (payload.contains("comment")) str("comment");
      return;
    case ProposalKind::RelationAxiom: {
      str("subject");
      str("relation");
      str("object");
      static const std::vector<std::string> relations = {"subClassOf", "subPropertyOf", "domain",
                                                         "range", "inverseOf"};
      if (!contains(relations, payload["relation"].get<std::string>())) {
        throw SchemaViolation(path + ".relation", "unknown relation");
      }
      return;
    }
    case ProposalKind::SparqlTest:
      str("cqId");
      str("query");
      if (payload.contains("expectation")) validate_expectation(payload["expectation"], path + ".expectation");
      if (payload.contains("description")) str("description");
      return;
    case ProposalKind::Revision: {
      for (const char* f : {"theme", "sentiment", "quote", "action"}) str(f);
      static const std::vector<std::string> sentiments = {"Positive", "Negative", "Mixed", "Neutral"};
      if (!contains(sentiments, payload["sentiment"].get<std::string>())) {
        throw SchemaViolation(path + ".sentiment", "unknown sentiment");
      }
      const auto& sup = payload["supporting"];
      if (!sup.is_array() || sup.empty()) throw SchemaViolation(path + ".supporting", "expected a non-empty array");
      for (std::size_t i = 0; i < sup.size(); ++i) {
        require_string(sup[i], path + ".supporting[" + std::to_string(i) + "]");
      }
      if (!payload["rank"].is_number_integer() || payload["rank"].get<long>() < 1) {
        throw SchemaViolation(path + ".rank", "expected a positive integer");
      }
      return;
    }
    default:
      for (const auto& f : spec.required) require_string(payload[f], path + "." + f);
      for (const auto& f : spec.optional) {
        if (payload.contains(f)) require_string(payload[f], path + "." + f);
      }
      return;
  }
}

std::optional<std::string> first_fenced_block(std::string_view text) {
  auto open = text.find("```");
  if (open == std::string_view::npos) return std::nullopt;
  auto line_end = text.find('\n', open);
  if (line_end == std::string_view::npos) return std::nullopt;
  auto close = text.find("```", line_end + 1);
  if (close == std::string_view::npos) return std::nullopt;
  return std::string(text.substr(line_end + 1, close - line_end - 1));
}

std::vector<Proposal> parse_proposals(std::string_view completion,
                                      const std::set<ProposalKind>& expected) {
  auto block = first_fenced_block(completion);
  if (!block) throw NoStructuredBlock();
  Json doc;
  try {
    doc = Json::parse(*block);
  } catch (const Json::parse_error& e) {
    throw SchemaViolation("document", std::string("not a JSON document: ") + e.what());
  }
  require_object(doc, "document");
  reject_unknown(doc, {"proposals"}, "document");
  if (!doc.contains("proposals")) throw SchemaViolation("proposals", "required field missing");
  const auto& list = doc["proposals"];
  if (!list.is_array()) throw SchemaViolation("proposals", "expected an array");

  std::vector<Proposal> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto path = "proposals[" + std::to_string(i) + "]";
    const auto& item = list[i];
    require_object(item, path);
    reject_unknown(item, {"kind", "payload"}, path);
    if (!item.contains("kind")) throw SchemaViolation(path + ".kind", "required field missing");
    require_string(item["kind"], path + ".kind");
    const auto name = item["kind"].get<std::string>();
    auto kind = parse_proposal_kind(name);
    if (!kind || (!expected.empty() && expected.count(*kind) == 0)) throw UnexpectedKind(name);
    if (!item.contains("payload")) throw SchemaViolation(path + ".payload", "required field missing");
    validate_payload(*kind, item["payload"], path + ".payload");

    Proposal p;
    p.kind = *kind;
    p.payload = item["payload"];
    p.id = proposal_id(p.kind, p.payload);
    out.push_back(std::move(p));
  }
  return out;
}

std::string normalize_key(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string vote_key(const Proposal& p) {
  const auto& payload = p.effective_payload();
  std::string key = std::string(to_string(p.kind)) + ":";
  const char* field = primary_field(p.kind);
  if (payload.contains(field) && payload[field].is_string()) {
    key += normalize_key(payload[field].get<std::string>());
  }
  if (p.kind == ProposalKind::RelationAxiom) {
    key += "|" + payload.value("relation", "") + "|" + normalize_key(payload.value("object", ""));
  }
  return key;
}

Json to_json(const Proposal& p) {
  Json j = {{"id", p.id},
            {"kind", to_string(p.kind)},
            {"status", to_string(p.status)},
            {"payload", p.payload},
            {"provenance",
             {{"template_id", p.provenance.template_id},
              {"technique", p.provenance.technique},
              {"prompt_hash", p.provenance.prompt_hash},
              {"provider_id", p.provenance.provider_id},
              {"timestamp", p.provenance.timestamp},
              {"stage", p.provenance.stage}}}};
  if (p.edited_payload) j["edited_payload"] = *p.edited_payload;
  if (!p.reason.empty()) j["reason"] = p.reason;
  if (p.votes) j["votes"] = *p.votes;
  if (p.vote_samples) j["vote_samples"] = *p.vote_samples;
  if (p.minority) j["minority"] = true;
  return j;
}

Proposal proposal_from_json(const Json& j) {
  Proposal p;
  p.id = j.at("id").get<std::string>();
  auto kind = parse_proposal_kind(j.at("kind").get<std::string>());
  if (!kind) throw UnexpectedKind(j.at("kind").get<std::string>());
  p.kind = *kind;
  auto status = parse_proposal_status(j.at("status").get<std::string>());
  if (!status) throw SchemaViolation("status", "unknown status");
  p.status = *status;
  p.payload = j.at("payload");
  if (j.contains("edited_payload")) p.edited_payload = j["edited_payload"];
  p.reason = j.value("reason", "");
  if (j.contains("votes")) p.votes = j["votes"].get<int>();
  if (j.contains("vote_samples")) p.vote_samples = j["vote_samples"].get<int>();
  p.minority = j.value("minority", false);
  const auto& prov = j.at("provenance");
  p.provenance.template_id = prov.value("template_id", "");
  p.provenance.technique = prov.value("technique", "");
  p.provenance.prompt_hash = prov.value("prompt_hash", "");
  p.provenance.provider_id = prov.value("provider_id", "");
  p.provenance.timestamp = prov.value("timestamp", "");
  p.provenance.stage = prov.value("stage", "");
  return p;
}

}  // namespace ontoforge
