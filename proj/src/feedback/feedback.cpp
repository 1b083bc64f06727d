#include "ontoforge/feedback.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace ontoforge {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string fold(const std::string& s) {
  std::string out = trim(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string format_id(std::size_t n) {
  auto digits = std::to_string(n);
  if (digits.size() < 3) digits.insert(0, 3 - digits.size(), '0');
  return "FB" + digits;
}

std::size_t id_number(const std::string& id) {
  if (id.size() < 3 || id.rfind("FB", 0) != 0) return 0;
  std::size_t n = 0;
  for (std::size_t i = 2; i < id.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(id[i]))) return 0;
    n = n * 10 + static_cast<std::size_t>(id[i] - '0');
  }
  return n;
}

std::string render_items(const std::vector<FeedbackItem>& items, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    out += "- " + items[i].id + " [" + to_string(items[i].role) + "] " + items[i].text + "\n";
  }
  return out;
}

// Byte offsets of the elements of a top-level JSON array.
void check_ranks(const std::vector<Proposal>& themes) {
  std::vector<int> ranks;
  for (const auto& t : themes) ranks.push_back(t.effective_payload().at("rank").get<int>());
  std::sort(ranks.begin(), ranks.end());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    if (ranks[i] != static_cast<int>(i + 1)) {
      throw SchemaViolation("payload.rank", "ranks must form a permutation of 1.." + std::to_string(ranks.size()));
    }
  }
}

}  // namespace

const char* to_string(FeedbackRole r) {
  switch (r) {
    case FeedbackRole::DomainExpert: return "DomainExpert";
    case FeedbackRole::OntologyEngineer: return "OntologyEngineer";
    case FeedbackRole::EndUser: return "EndUser";
  }
  return "?";
}

std::optional<FeedbackRole> parse_feedback_role(std::string_view text) {
  for (auto r : {FeedbackRole::DomainExpert, FeedbackRole::OntologyEngineer, FeedbackRole::EndUser}) {
    if (text == to_string(r)) return r;
  }
  return std::nullopt;
}

nlohmann::json to_json(const FeedbackItem& item) {
  nlohmann::json j = {{"id", item.id}, {"role", to_string(item.role)}, {"text", item.text}};
  if (!item.timestamp.empty()) j["timestamp"] = item.timestamp;
  return j;
}

FeedbackItem feedback_item_from_json(const nlohmann::json& j) {
  FeedbackItem item;
  item.id = j.value("id", "");
  auto role = parse_feedback_role(j.at("role").get<std::string>());
  if (!role) throw SchemaViolation("role", "unknown role '" + j.at("role").get<std::string>() + "'");
  item.role = *role;
  item.text = j.at("text").get<std::string>();
  item.timestamp = j.value("timestamp", "");
  return item;
}

std::vector<FeedbackItem> parse_feedback_file(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto offset = e.byte == 0 ? 0 : e.byte - 1;
    throw ParseError(position_at(text, offset), e.what());
  }
  if (!doc.is_array()) {
    throw ParseError(position_at(text, text.find_first_not_of(" \t\r\n")), "feedback file must hold a list of items");
  }
  const auto offsets = top_level_element_offsets(text);
  std::vector<FeedbackItem> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& j = doc[i];
    const auto where = "item " + std::to_string(i + 1) + ": ";
    const SourcePos pos = i < offsets.size() ? position_at(text, offsets[i]) : SourcePos{};
    if (!j.is_object()) throw ParseError(pos, where + "not an object");
    for (const auto& [key, value] : j.items()) {
      if (key != "role" && key != "text" && key != "timestamp") {
        throw ParseError(pos, where + "unknown field '" + key + "'");
      }
      if (!value.is_string()) throw ParseError(pos, where + "field '" + key + "' must be a string");
    }
    if (!j.contains("role") || !j.contains("text")) throw ParseError(pos, where + "needs role and text");
    FeedbackItem item;
    auto role = parse_feedback_role(j["role"].get<std::string>());
    if (!role) throw ParseError(pos, where + "unknown role '" + j["role"].get<std::string>() + "'");
    item.role = *role;
    item.text = trim(j["text"].get<std::string>());
    if (item.text.empty()) throw ParseError(pos, where + "empty text");
    item.timestamp = j.value("timestamp", "");
    out.push_back(std::move(item));
  }
  return out;
}

IngestResult ingest_feedback(std::vector<FeedbackItem>& store, const std::vector<FeedbackItem>& incoming) {
  IngestResult r;
  std::size_t next = 0;
  std::set<std::pair<FeedbackRole, std::string>> seen;
  for (const auto& item : store) {
    next = std::max(next, id_number(item.id));
    seen.insert({item.role, trim(item.text)});
  }
  for (auto item : incoming) {
    item.text = trim(item.text);
    if (item.text.empty()) throw PreconditionError("feedback text must not be empty");
    if (!seen.insert({item.role, item.text}).second) {
      ++r.duplicates;
      continue;
    }
    item.id = format_id(++next);
    store.push_back(std::move(item));
    ++r.added;
  }
  return r;
}

void validate_themes(const std::vector<Proposal>& themes, const std::vector<FeedbackItem>& items) {
  std::set<std::string> ids;
  for (const auto& i : items) ids.insert(i.id);
  for (const auto& t : themes) {
    std::set<std::string> local;
    for (const auto& s : t.effective_payload().at("supporting")) {
      const auto id = s.get<std::string>();
      if (ids.count(id) == 0) throw SchemaViolation("payload.supporting", "unknown feedback id " + id);
      if (!local.insert(id).second) throw SchemaViolation("payload.supporting", "duplicate feedback id " + id);
    }
  }
  check_ranks(themes);
}

std::vector<Proposal> summarize_feedback(Gateway& gateway, const TemplateLibrary& templates,
                                         const std::vector<FeedbackItem>& items, const std::string& label,
                                         std::size_t chunk_size) {
  if (items.empty()) throw PreconditionError("summarizing feedback needs at least one item");
  if (chunk_size < 1) throw PreconditionError("chunk size must be positive");
  const auto& t = templates.get("feedback_summary");
  const std::size_t chunks = (items.size() + chunk_size - 1) / chunk_size;

  std::vector<std::vector<Proposal>> per_chunk;
  for (std::size_t c = 0; c < chunks; ++c) {
    const auto begin = c * chunk_size;
    const auto end = std::min(items.size(), begin + chunk_size);
    std::set<std::string> chunk_ids;
    for (auto i = begin; i < end; ++i) chunk_ids.insert(items[i].id);
    auto validator = [&](const Proposal& p) -> std::optional<std::string> {
      std::set<std::string> local;
      for (const auto& s : p.payload["supporting"]) {
        const auto id = s.get<std::string>();
        if (chunk_ids.count(id) == 0) return "supporting id " + id + " is not one of the listed items";
        if (!local.insert(id).second) return "supporting id " + id + " is repeated";
      }
      return std::nullopt;
    };
    auto themes = gateway.ask(t, {{"items", render_items(items, begin, end)}}, label + "/" + std::to_string(c + 1),
                              {}, validator);
    for (auto& p : themes) p.provenance.stage = "Feedback";
    check_ranks(themes);
    per_chunk.push_back(std::move(themes));
  }
  if (per_chunk.size() == 1) return std::move(per_chunk.front());

  struct Group {
    std::vector<const Proposal*> members;
    int best_rank = 0;
    std::vector<std::string> supporting;
  };
  std::map<std::string, Group> groups;
  std::vector<std::string> order;
  for (const auto& chunk : per_chunk) {
    for (const auto& p : chunk) {
      const auto key = fold(p.payload["theme"].get<std::string>());
      auto [it, inserted] = groups.try_emplace(key);
      if (inserted) order.push_back(key);
      auto& g = it->second;
      const int rank = p.payload["rank"].get<int>();
      if (g.members.empty() || rank < g.best_rank) {
        g.members.insert(g.members.begin(), &p);
        g.best_rank = rank;
      } else {
        g.members.push_back(&p);
      }
      for (const auto& s : p.payload["supporting"]) {
        const auto id = s.get<std::string>();
        if (std::find(g.supporting.begin(), g.supporting.end(), id) == g.supporting.end()) g.supporting.push_back(id);
      }
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    const auto& ga = groups[a];
    const auto& gb = groups[b];
    if (ga.supporting.size() != gb.supporting.size()) return ga.supporting.size() > gb.supporting.size();
    if (ga.best_rank != gb.best_rank) return ga.best_rank < gb.best_rank;
    return a < b;
  });

  std::vector<Proposal> out;
  int rank = 0;
  for (const auto& key : order) {
    auto& g = groups[key];
    std::sort(g.supporting.begin(), g.supporting.end());
    Proposal p = *g.members.front();
    std::string sentiment = p.payload["sentiment"].get<std::string>();
    for (const auto* m : g.members) {
      if (m->payload["sentiment"] != sentiment) sentiment = "Mixed";
    }
    p.payload["sentiment"] = sentiment;
    p.payload["supporting"] = g.supporting;
    p.payload["rank"] = ++rank;
    p.id = proposal_id(p.kind, p.payload);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Proposal> themes_to_proposals(Gateway& gateway, const TemplateLibrary& templates,
                                          const std::vector<Proposal>& themes, const std::string& inventory,
                                          const std::string& label) {
  const auto& t = templates.get("refinement");
  std::vector<Proposal> out;
  for (const auto& theme : themes) {
    if (theme.kind != ProposalKind::Revision) continue;
    if (theme.status != ProposalStatus::Accepted && theme.status != ProposalStatus::Edited) continue;
    const auto& payload = theme.effective_payload();
    SlotMap slots = {{"inventory", inventory},
                     {"issues", "Theme: " + payload["theme"].get<std::string>() +
                                    "\nSuggested action: " + payload["action"].get<std::string>() +
                                    "\nRepresentative quote: \"" + payload["quote"].get<std::string>() + "\""}};
    try {
      auto ps = gateway.ask(t, slots, label + "/" + theme.id);
      for (auto& p : ps) {
        p.provenance.stage = "Feedback";
        out.push_back(std::move(p));
      }
    } catch (const RepairFailed& e) {
      Proposal p;
      p.kind = ProposalKind::Revision;
      p.payload = payload;
      const auto raw = trim(e.raw());
      p.payload["action"] = raw.empty() ? std::string("(empty reply)") : raw.substr(0, 500);
      p.id = proposal_id(p.kind, p.payload);
      p.status = ProposalStatus::Rejected;
      p.reason = "unparseable";
      p.provenance.template_id = t.id;
      p.provenance.technique = to_string(t.technique);
      p.provenance.prompt_hash = prompt_hash(gateway.messages_for(t, slots));
      p.provenance.provider_id = gateway.provider().id();
      p.provenance.stage = "Feedback";
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace ontoforge
