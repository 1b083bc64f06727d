#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ontoforge/llm.hpp"
#include "ontoforge/ontology.hpp"

namespace ontoforge {

enum class FeedbackRole { DomainExpert, OntologyEngineer, EndUser };

const char* to_string(FeedbackRole r);
std::optional<FeedbackRole> parse_feedback_role(std::string_view text);

struct FeedbackItem {
  std::string id;
  FeedbackRole role = FeedbackRole::EndUser;
  std::string text;
  std::string timestamp;  // ISO-8601, may be empty

  friend bool operator==(const FeedbackItem&, const FeedbackItem&) = default;
};

nlohmann::json to_json(const FeedbackItem& item);
FeedbackItem feedback_item_from_json(const nlohmann::json& j);

/// Parses a feedback file: a JSON array of {"role", "text", "timestamp"?}.
/// Throws ParseError with the line and column of the offending input.
std::vector<FeedbackItem> parse_feedback_file(std::string_view text);

struct IngestResult {
  std::size_t added = 0;
  std::size_t duplicates = 0;
};

/// Appends new items with ids FB001, FB002, ... continuing after the highest
/// existing id. Items whose text and role match a stored item are skipped.
IngestResult ingest_feedback(std::vector<FeedbackItem>& store, const std::vector<FeedbackItem>& incoming);

inline constexpr std::size_t kFeedbackChunkSize = 50;

/// Revision proposals, one per theme. Chunks of `chunk_size` items are sent as
/// separate requests labelled `label + "/" + <chunk number>`; themes are then
/// merged by case-folded label and re-ranked.
std::vector<Proposal> summarize_feedback(Gateway& gateway, const TemplateLibrary& templates,
                                         const std::vector<FeedbackItem>& items, const std::string& label,
                                         std::size_t chunk_size = kFeedbackChunkSize);

/// Checks supporting ids against `items` and ranks against 1..n.
void validate_themes(const std::vector<Proposal>& themes, const std::vector<FeedbackItem>& items);

/// Structural proposals for each Accepted Revision, via the refinement
/// template with label `label + "/" + <theme id>`. A theme whose reply stays
/// invalid after one repair yields a Rejected Revision carrying the raw reply
/// as its action, with reason "unparseable".
std::vector<Proposal> themes_to_proposals(Gateway& gateway, const TemplateLibrary& templates,
                                          const std::vector<Proposal>& themes, const std::string& inventory,
                                          const std::string& label);

}  // namespace ontoforge
