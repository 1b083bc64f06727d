#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ontoforge/llm.hpp"

namespace ontoforge {

namespace {

struct TechniqueName {
  Technique technique;
  const char* name;
};

constexpr TechniqueName kTechniques[] = {
    {Technique::ZeroShot, "ZeroShot"},
    {Technique::FewShot, "FewShot"},
    {Technique::ChainOfThought, "ChainOfThought"},
    {Technique::SelfConsistency, "SelfConsistency"},
    {Technique::GeneralKnowledge, "GeneralKnowledge"},
    {Technique::PromptChaining, "PromptChaining"},
    {Technique::RetrievalAugmented, "RetrievalAugmented"},
};

bool slot_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool slot_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of a {name} slot at body[i], or 0 when body[i] starts no slot.
std::size_t slot_at(const std::string& body, std::size_t i, std::string* name) {
  if (body[i] != '{' || i + 1 >= body.size() || !slot_start(body[i + 1])) return 0;
  std::size_t j = i + 1;
  while (j < body.size() && slot_char(body[j])) ++j;
  if (j >= body.size() || body[j] != '}') return 0;
  if (name != nullptr) *name = body.substr(i + 1, j - i - 1);
  return j - i + 1;
}

std::string substitute(const std::string& body, const SlotMap& slots) {
  std::string out;
  for (std::size_t i = 0; i < body.size();) {
    if (body.compare(i, 2, "{{") == 0) {
      out += '{';
      i += 2;
      continue;
    }
    if (body.compare(i, 2, "}}") == 0) {
      out += '}';
      i += 2;
      continue;
    }
    std::string name;
    if (std::size_t len = slot_at(body, i, &name)) {
      out += slots.at(name);
      i += len;
      continue;
    }
    out += body[i++];
  }
  return out;
}

PromptTemplate make(std::string id, Technique technique, std::string body, std::set<std::string> slots,
                    std::set<ProposalKind> kinds, std::vector<std::string> exemplars = {},
                    std::vector<std::string> steps = {}) {
  PromptTemplate t;
  t.id = std::move(id);
  t.technique = technique;
  t.body = std::move(body);
  t.slots = std::move(slots);
  t.expected_kinds = std::move(kinds);
  t.exemplars = std::move(exemplars);
  t.steps = std::move(steps);
  return t;
}

}  // namespace

const char* to_string(Technique t) {
  for (const auto& k : kTechniques) {
    if (k.technique == t) return k.name;
  }
  return "?";
}

std::optional<Technique> parse_technique(std::string_view text) {
  for (const auto& k : kTechniques) {
    if (text == k.name) return k.technique;
  }
  return std::nullopt;
}

MissingSlot::MissingSlot(std::vector<std::string> names)
    : Error([&] {
        std::string msg = "missing slot value(s):";
        for (const auto& n : names) msg += " " + n;
        return msg;
      }()),
      names_(std::move(names)) {}

std::vector<std::string> referenced_slots(const std::string& body) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < body.size();) {
    if (body.compare(i, 2, "{{") == 0 || body.compare(i, 2, "}}") == 0) {
      i += 2;
      continue;
    }
    std::string name;
    if (std::size_t len = slot_at(body, i, &name)) {
      if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
      i += len;
      continue;
    }
    ++i;
  }
  return out;
}

void validate_template(const PromptTemplate& t) {
  if (t.id.empty()) throw InvalidTemplate("template id must not be empty");
  auto check_body = [&](const std::string& body, const std::set<std::string>& extra) {
    for (const auto& name : referenced_slots(body)) {
      if (t.slots.count(name) == 0 && extra.count(name) == 0) {
        throw InvalidTemplate("template " + t.id + " references undeclared slot {" + name + "}");
      }
    }
  };
  check_body(t.body, {});
  if (t.technique == Technique::FewShot && t.exemplars.empty()) {
    throw InvalidTemplate("FewShot template " + t.id + " needs at least one exemplar");
  }
  if (t.technique == Technique::PromptChaining) {
    if (t.steps.size() < 2) throw InvalidTemplate("PromptChaining template " + t.id + " needs at least two steps");
    for (const auto& step : t.steps) check_body(step, {kPreviousResponseSlot});
  }
  if (t.technique == Technique::GeneralKnowledge && t.slots.count(kFactsSlot) == 0) {
    throw InvalidTemplate("GeneralKnowledge template " + t.id + " must declare the facts slot");
  }
}

std::string render_prompt(const PromptTemplate& t, const SlotMap& slots,
                          const std::vector<Excerpt>& retrieved) {
  std::vector<std::string> missing;
  for (const auto& name : t.slots) {
    if (slots.count(name) == 0) missing.push_back(name);
  }
  for (const auto& name : referenced_slots(t.body)) {
    if (t.slots.count(name) == 0 && slots.count(name) == 0) missing.push_back(name);
  }
  if (!missing.empty()) throw MissingSlot(std::move(missing));

  std::string text = substitute(t.body, slots);
  switch (t.technique) {
    case Technique::FewShot: {
      std::string prefix = "Examples:\n";
      for (const auto& ex : t.exemplars) prefix += "- " + ex + "\n";
      text = prefix + "\n" + text;
      break;
    }
    case Technique::GeneralKnowledge:
      text = "Background knowledge:\n" + slots.at(kFactsSlot) + "\n\n" + text;
      break;
    case Technique::ChainOfThought: {
      text += "\n\nWork through these steps before answering:\n";
      if (t.steps.empty()) {
        text += "1. Think step by step.\n";
      } else {
        for (std::size_t i = 0; i < t.steps.size(); ++i) {
          text += std::to_string(i + 1) + ". " + t.steps[i] + "\n";
        }
      }
      break;
    }
    case Technique::RetrievalAugmented: {
      text += "\n\nRetrieved excerpts:\n";
      if (retrieved.empty()) text += "(none)\n";
      for (const auto& e : retrieved) text += "[" + e.doc_id + "] " + e.text + "\n";
      break;
    }
    case Technique::ZeroShot:
    case Technique::SelfConsistency:
    case Technique::PromptChaining: break;
  }
  return text;
}

std::vector<PromptTemplate> chain_steps(const PromptTemplate& chain) {
  if (chain.technique != Technique::PromptChaining || chain.steps.size() < 2) {
    throw PreconditionError("prompt chain needs a PromptChaining template with at least two steps");
  }
  std::vector<PromptTemplate> out;
  const std::size_t n = chain.steps.size();
  for (std::size_t i = 0; i < n; ++i) {
    PromptTemplate step;
    step.id = chain.id + "#" + std::to_string(i + 1);
    step.technique = Technique::ZeroShot;
    step.slots = chain.slots;
    step.body = chain.body + "\n\nStep " + std::to_string(i + 1) + " of " + std::to_string(n) + ": " +
                chain.steps[i];
    if (i > 0) {
      step.body += "\n\nOutput of the previous step:\n{" + std::string(kPreviousResponseSlot) + "}";
      step.slots.insert(kPreviousResponseSlot);
    }
    if (i + 1 == n) step.expected_kinds = chain.expected_kinds;
    out.push_back(std::move(step));
  }
  return out;
}

Json to_json(const PromptTemplate& t) {
  Json kinds = Json::array();
  for (auto k : t.expected_kinds) kinds.push_back(to_string(k));
  return {{"id", t.id},
          {"technique", to_string(t.technique)},
          {"body", t.body},
          {"slots", t.slots},
          {"expected_kinds", kinds},
          {"exemplars", t.exemplars},
          {"steps", t.steps}};
}

PromptTemplate template_from_json(const Json& j) {
  PromptTemplate t;
  t.id = j.at("id").get<std::string>();
  auto technique = parse_technique(j.at("technique").get<std::string>());
  if (!technique) throw InvalidTemplate("unknown technique in template " + t.id);
  t.technique = *technique;
  t.body = j.at("body").get<std::string>();
  t.slots = j.value("slots", std::set<std::string>{});
  for (const auto& k : j.value("expected_kinds", std::vector<std::string>{})) {
    auto kind = parse_proposal_kind(k);
    if (!kind) throw InvalidTemplate("unknown proposal kind " + k + " in template " + t.id);
    t.expected_kinds.insert(*kind);
  }
  t.exemplars = j.value("exemplars", std::vector<std::string>{});
  t.steps = j.value("steps", std::vector<std::string>{});
  validate_template(t);
  return t;
}

// Authored prompt texts; one per pipeline task, covering all seven techniques.
TemplateLibrary TemplateLibrary::builtin() {
  using K = ProposalKind;
  TemplateLibrary lib;
  lib.put(make("glossary", Technique::RetrievalAugmented,
               "Identify the key terms of the {domain} domain that the scenario excerpts use. "
               "Give each term a one-sentence interpretation.",
               {"domain"}, {K::GlossaryTerm}));
  lib.put(make("competency_questions", Technique::FewShot,
               "Glossary:\n{glossary}\n\nWrite informal competency questions that an ontology for "
               "{domain} must be able to answer. Number them CQ01, CQ02 and so on.",
               {"domain", "glossary"}, {K::CompetencyQuestion},
               {"CQ01: Which vehicle types does the user prefer?",
                "CQ02: How many children does the user have?"}));
  lib.put(make("modelet", Technique::PromptChaining,
               "Domain: {domain}\nGlossary:\n{glossary}\nCompetency questions:\n{questions}",
               {"domain", "glossary", "questions"},
               {K::ClassDef, K::ObjectPropertyDef, K::DataPropertyDef, K::RelationAxiom}, {},
               {"List the core concepts needed to answer the competency questions.",
                "Describe the relationships and attributes that connect those concepts.",
                "Express the concepts, relationships and attributes as ontology proposals."}));
  lib.put(make("instance_population", Technique::GeneralKnowledge,
               "Create example individuals that populate the ontology below and are consistent "
               "with the scenario.\nScenario:\n{scenario}\nOntology inventory:\n{inventory}",
               {"facts", "scenario", "inventory"}, {K::Instance}));
  lib.put(make("cq_to_sparql", Technique::ChainOfThought,
               "Translate competency question {cq_id} into a SPARQL SELECT query.\nQuestion: "
               "{question}\nPrefixes:\n{prefixes}\nUse only these ontology terms:\n{inventory}",
               {"cq_id", "question", "prefixes", "inventory"}, {K::SparqlTest}, {},
               {"Identify the classes and properties the question refers to.",
                "Connect them into triple patterns.",
                "Add the filters, ordering or limits the question implies."}));
  lib.put(make("refinement", Technique::SelfConsistency,
               "Review the ontology inventory and propose changes that resolve the issues.\n"
               "Inventory:\n{inventory}\nIssues:\n{issues}",
               {"inventory", "issues"},
               {K::ClassDef, K::ObjectPropertyDef, K::DataPropertyDef, K::RelationAxiom,
                K::Annotation}));
  lib.put(make("annotation", Technique::ZeroShot,
               "Write an rdfs:label and a one-sentence rdfs:comment in language \"{language}\" "
               "for each entity:\n{entities}",
               {"language", "entities"}, {K::Annotation}));
  lib.put(make("feedback_summary", Technique::ZeroShot,
               "Group the stakeholder feedback items into recurring themes. For each theme give "
               "a sentiment, the supporting item ids, a representative quote, a suggested action "
               "and a priority rank starting at 1.\nItems:\n{items}",
               {"items"}, {K::Revision}));
  return lib;
}

void TemplateLibrary::put(PromptTemplate t) {
  validate_template(t);
  auto id = t.id;
  templates_[id] = std::move(t);
}

const PromptTemplate& TemplateLibrary::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw Error("unknown template '" + id + "'");
  return it->second;
}

std::vector<std::string> TemplateLibrary::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, t] : templates_) out.push_back(id);
  return out;
}

void TemplateLibrary::load_overrides(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("template directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream buf;
    buf << in.rdbuf();
    Json j;
    try {
      j = Json::parse(buf.str());
    } catch (const Json::parse_error& e) {
      throw InvalidTemplate(file.string() + ": " + e.what());
    }
    auto t = template_from_json(j);
    if (t.id != file.stem().string()) {
      throw InvalidTemplate(file.string() + ": id '" + t.id + "' does not match file name");
    }
    put(std::move(t));
  }
}

}  // namespace ontoforge
