#include <algorithm>

#include "ontoforge/llm.hpp"

namespace ontoforge {

namespace {

std::string system_message(const PromptTemplate& t) {
  std::string text = "You assist an ontology engineer.";
  if (t.expected_kinds.empty()) return text + " Answer concisely in plain text.";
  text +=
      " Reply with exactly one fenced ```json block holding "
      "{\"proposals\": [{\"kind\": \"<kind>\", \"payload\": {...}}]}. Unknown fields are "
      "rejected.\nAllowed kinds and payload fields (? marks optional):\n";
  for (auto kind : t.expected_kinds) {
    auto fields = payload_fields(kind);
    text += std::string("- ") + to_string(kind) + ":";
    for (const auto& f : fields.required) text += " " + f;
    for (const auto& f : fields.optional) text += " " + f + "?";
    text += "\n";
  }
  return text;
}

std::optional<std::string> run_validator(const std::vector<Proposal>& proposals,
                                         const ProposalValidator& validator) {
  if (!validator) return std::nullopt;
  for (std::size_t i = 0; i < proposals.size(); ++i) {
    if (auto problem = validator(proposals[i])) {
      return "proposal " + std::to_string(i) + ": " + *problem;
    }
  }
  return std::nullopt;
}

}  // namespace

std::string repair_instruction(const std::string& problem) {
  return "Your previous reply could not be used: " + problem +
         "\nReply again with only the fenced json block, following the schema exactly.";
}

Gateway::Gateway(Provider& provider, GatewaySettings settings)
    : provider_(provider), settings_(std::move(settings)) {}

std::vector<Message> Gateway::messages_for(const PromptTemplate& t, const SlotMap& slots,
                                           const std::vector<Excerpt>& retrieved) const {
  return {{"system", system_message(t)}, {"user", render_prompt(t, slots, retrieved)}};
}

ChatResponse Gateway::complete(ChatRequest request) {
  if (request.model.empty()) request.model = settings_.model;
  validate_request(request);
  auto response = provider_.complete(request);
  if (response.completions.empty()) throw ProviderError(0, "empty completion list");
  transcript_.push_back({request.label, prompt_hash(request.messages), request.messages,
                         response.completions});
  return response;
}

ChatResponse Gateway::complete(const std::vector<Message>& messages, const std::string& label, int n,
                               std::optional<double> temperature) {
  ChatRequest request;
  request.model = settings_.model;
  request.messages = messages;
  request.n = n;
  request.temperature = temperature.value_or(settings_.temperature);
  request.label = label;
  return complete(std::move(request));
}

void Gateway::stamp(std::vector<Proposal>& proposals, const PromptTemplate& t,
                    const std::vector<Message>& messages) const {
  const auto hash = prompt_hash(messages);
  for (auto& p : proposals) {
    p.provenance.template_id = t.id;
    p.provenance.technique = to_string(t.technique);
    p.provenance.prompt_hash = hash;
    p.provenance.provider_id = provider_.id();
  }
}

std::vector<Proposal> Gateway::parse_with_repair(const std::vector<Message>& messages,
                                                 const std::string& completion,
                                                 const PromptTemplate& t, const std::string& label,
                                                 const ProposalValidator& validator) {
  auto attempt = [&](const std::string& text, std::vector<Proposal>& out) -> std::optional<std::string> {
    try {
      out = parse_proposals(text, t.expected_kinds);
    } catch (const NoStructuredBlock& e) {
      return std::string(e.what());
    } catch (const SchemaViolation& e) {
      return std::string(e.what());
    } catch (const UnexpectedKind& e) {
      return std::string(e.what());
    }
    return run_validator(out, validator);
  };

  std::vector<Proposal> proposals;
  auto first = attempt(completion, proposals);
  if (!first) {
    stamp(proposals, t, messages);
    return proposals;
  }
  auto repair = messages;
  repair.push_back({"assistant", completion});
  repair.push_back({"user", repair_instruction(*first)});
  auto response = complete(repair, label + "/repair");
  const auto& second_text = response.completions.front();
  auto second = attempt(second_text, proposals);
  if (second) throw RepairFailed(*first, *second, second_text);
  stamp(proposals, t, messages);
  return proposals;
}

std::vector<Proposal> Gateway::ask(const PromptTemplate& t, const SlotMap& slots, const std::string& label,
                                   const std::vector<Excerpt>& retrieved,
                                   const ProposalValidator& validator) {
  auto messages = messages_for(t, slots, retrieved);
  auto response = complete(messages, label);
  return parse_with_repair(messages, response.completions.front(), t, label, validator);
}

VoteResult majority_vote(const std::vector<std::vector<Proposal>>& samples, int k) {
  if (k < 1) throw PreconditionError("self-consistency needs k >= 1");
  VoteResult result;
  result.samples = k;
  std::vector<std::string> order;
  std::map<std::string, Proposal> representative;
  for (const auto& sample : samples) {
    std::set<std::string> seen;
    for (const auto& p : sample) {
      auto key = vote_key(p);
      if (!seen.insert(key).second) continue;
      if (representative.emplace(key, p).second) order.push_back(key);
      ++result.tally[key];
    }
  }
  for (const auto& key : order) {
    Proposal p = representative.at(key);
    const int votes = result.tally.at(key);
    p.votes = votes;
    p.vote_samples = k;
    p.minority = 2 * votes <= k;
    (p.minority ? result.minority : result.winners).push_back(std::move(p));
  }
  return result;
}

VoteResult self_consistency(Gateway& gateway, const PromptTemplate& t, const SlotMap& slots, int k,
                            const std::string& label) {
  if (k < 1) throw PreconditionError("self-consistency needs k >= 1");
  auto messages = gateway.messages_for(t, slots);
  auto response = gateway.complete(messages, label, k, gateway.settings().sampling_temperature);
  std::vector<std::vector<Proposal>> parsed;
  int unparseable = 0;
  for (const auto& text : response.completions) {
    try {
      parsed.push_back(parse_proposals(text, t.expected_kinds));
    } catch (const Error&) {
      parsed.emplace_back();
      ++unparseable;
    }
  }
  auto result = majority_vote(parsed, k);
  result.unparseable_samples = unparseable + (k - static_cast<int>(response.completions.size()));
  const auto hash = prompt_hash(messages);
  for (auto* list : {&result.winners, &result.minority}) {
    for (auto& p : *list) {
      p.provenance.template_id = t.id;
      p.provenance.technique = to_string(t.technique);
      p.provenance.prompt_hash = hash;
      p.provenance.provider_id = gateway.provider().id();
    }
  }
  return result;
}

ChainResult prompt_chain(Gateway& gateway, const std::vector<PromptTemplate>& steps, const SlotMap& slots,
                         const std::string& label) {
  if (steps.size() < 2) throw PreconditionError("prompt chain needs at least two steps");
  ChainResult result;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    try {
      SlotMap step_slots = slots;
      if (i > 0) step_slots[kPreviousResponseSlot] = result.responses.back().completions.front();
      auto messages = gateway.messages_for(steps[i], step_slots);
      result.responses.push_back(gateway.complete(messages, label + "/step" + std::to_string(i + 1)));
    } catch (const Error& e) {
      result.failed_step = i + 1;
      result.error = e.what();
      return result;
    }
  }
  return result;
}

}  // namespace ontoforge
