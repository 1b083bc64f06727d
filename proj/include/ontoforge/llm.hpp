#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ontoforge/error.hpp"
#include "ontoforge/proposal.hpp"

namespace ontoforge {

// ---------------------------------------------------------------------------
// Templates

enum class Technique {
  ZeroShot,
  FewShot,
  ChainOfThought,
  SelfConsistency,
  GeneralKnowledge,
  PromptChaining,
  RetrievalAugmented,
};

const char* to_string(Technique t);
std::optional<Technique> parse_technique(std::string_view text);

class MissingSlot : public Error {
 public:
  explicit MissingSlot(std::vector<std::string> names);
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
};

class InvalidTemplate : public Error {
 public:
  using Error::Error;
};

/// Reserved slot carrying the previous completion in a prompt chain.
inline constexpr const char* kPreviousResponseSlot = "previous_response";
/// Reserved slot holding the background block of GeneralKnowledge templates.
inline constexpr const char* kFactsSlot = "facts";

struct PromptTemplate {
  std::string id;
  Technique technique = Technique::ZeroShot;
  /// Slots are written {name}; {{ and }} are literal braces.
  std::string body;
  std::set<std::string> slots;
  std::set<ProposalKind> expected_kinds;
  std::vector<std::string> exemplars;  // FewShot
  /// Chain steps (PromptChaining) or reasoning scaffold (ChainOfThought).
  std::vector<std::string> steps;
};

using SlotMap = std::map<std::string, std::string>;

/// Slot names referenced by a template body, in first-use order.
std::vector<std::string> referenced_slots(const std::string& body);

/// Throws InvalidTemplate when the template breaks its invariants.
void validate_template(const PromptTemplate& t);

struct Excerpt {
  std::string doc_id;
  std::string text;
};

/// Pure function of (template, slots, retrieved excerpts).
std::string render_prompt(const PromptTemplate& t, const SlotMap& slots,
                          const std::vector<Excerpt>& retrieved = {});

/// One ZeroShot template per chain step; step i > 0 references the
/// previous_response slot.
std::vector<PromptTemplate> chain_steps(const PromptTemplate& chain);

Json to_json(const PromptTemplate& t);
PromptTemplate template_from_json(const Json& j);

class TemplateLibrary {
 public:
  static TemplateLibrary builtin();
  /// Replaces templates by `<id>.json` files found in `dir`.
  void load_overrides(const std::filesystem::path& dir);
  const PromptTemplate& get(const std::string& id) const;
  void put(PromptTemplate t);
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

// ---------------------------------------------------------------------------
// Requests and providers

struct Message {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  int n = 1;
  /// Human-readable stage label; not part of the prompt hash.
  std::string label;
};

struct ChatResponse {
  std::vector<std::string> completions;
  std::string provider_id;
  double latency_ms = 0;
  std::optional<long> prompt_tokens;
  std::optional<long> completion_tokens;
};

/// SHA-256 over the JSON dump of [{role, content}, ...].
std::string prompt_hash(const std::vector<Message>& messages);

void validate_request(const ChatRequest& request);

class Timeout : public Error {
 public:
  using Error::Error;
};
class TransportError : public Error {
 public:
  using Error::Error;
};
class CredentialMissing : public Error {
 public:
  explicit CredentialMissing(const std::string& variable)
      : Error("credential missing: set " + variable) {}
};
class ProviderError : public Error {
 public:
  ProviderError(int status, std::string excerpt);
  int status() const { return status_; }
  const std::string& excerpt() const { return excerpt_; }

 private:
  int status_;
  std::string excerpt_;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Line separating samples inside one fixture file.
inline constexpr const char* kSampleSeparator = "--- sample ---";

/// Plays back `<prompt-hash>.txt` fixtures. index.json maps hash to label.
class MockProvider : public Provider {
 public:
  MockProvider(std::filesystem::path dir, bool strict = true);
  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return strict_ ? "mock" : "mock-lenient"; }

  /// Stage label recorded for a hash in index.json, if any.
  std::optional<std::string> label_for(const std::string& hash) const;
  static std::vector<std::string> split_samples(const std::string& text);

 private:
  std::filesystem::path dir_;
  bool strict_;
  std::map<std::string, std::string> index_;
};

struct HttpProviderConfig {
  std::string base_url;
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{500};

  /// Reads ONTOFORGE_LLM_BASE_URL, ONTOFORGE_LLM_API_KEY, ONTOFORGE_LLM_MODEL.
  static HttpProviderConfig from_env();
};

/// POSTs to {base_url}/chat/completions with retries on transport errors,
/// 429 and 5xx.
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig config);
  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return "http:" + config_.model; }

 private:
  HttpProviderConfig config_;
};

/// Passes requests through and writes every exchange as a fixture.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(Provider& inner, std::filesystem::path dir);
  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return inner_.id(); }

 private:
  Provider& inner_;
  std::filesystem::path dir_;
};

/// Answers by request label from an in-memory script; used to author mock
/// fixtures. Each label holds a queue of responses consumed in order.
class ScriptProvider : public Provider {
 public:
  void add(const std::string& label, std::vector<std::string> samples);
  ChatResponse complete(const ChatRequest& request) override;
  std::string id() const override { return "mock"; }
  std::vector<std::string> unused_labels() const;

 private:
  std::map<std::string, std::vector<std::vector<std::string>>> script_;
};

// ---------------------------------------------------------------------------
// Gateway

struct GatewaySettings {
  std::string model = "mock";
  double temperature = 0.0;
  double sampling_temperature = 0.8;
};

struct TranscriptEntry {
  std::string label;
  std::string hash;
  std::vector<Message> messages;
  std::vector<std::string> completions;
};

/// Extra check applied to parsed proposals; returns an error message or
/// nothing when the proposal is acceptable.
using ProposalValidator = std::function<std::optional<std::string>(const Proposal&)>;

class RepairFailed : public Error {
 public:
  RepairFailed(const std::string& first, const std::string& second, std::string raw)
      : Error("response invalid after repair: " + second + " (first attempt: " + first + ")"),
        raw_(std::move(raw)) {}
  /// Last completion text received.
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

class Gateway {
 public:
  explicit Gateway(Provider& provider, GatewaySettings settings = {});

  /// System instructions plus the rendered user message.
  std::vector<Message> messages_for(const PromptTemplate& t, const SlotMap& slots,
                                    const std::vector<Excerpt>& retrieved = {}) const;

  ChatResponse complete(ChatRequest request);
  ChatResponse complete(const std::vector<Message>& messages, const std::string& label,
                        int n = 1, std::optional<double> temperature = std::nullopt);

  /// Renders, completes and parses, with at most one repair re-prompt.
  std::vector<Proposal> ask(const PromptTemplate& t, const SlotMap& slots,
                            const std::string& label,
                            const std::vector<Excerpt>& retrieved = {},
                            const ProposalValidator& validator = {});

  /// Parses `completion`; on failure issues one repair request. Throws
  /// RepairFailed when the repaired reply is still invalid.
  std::vector<Proposal> parse_with_repair(const std::vector<Message>& messages,
                                          const std::string& completion,
                                          const PromptTemplate& t, const std::string& label,
                                          const ProposalValidator& validator = {});

  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  const GatewaySettings& settings() const { return settings_; }
  Provider& provider() { return provider_; }

 private:
  void stamp(std::vector<Proposal>& proposals, const PromptTemplate& t,
             const std::vector<Message>& messages) const;

  Provider& provider_;
  GatewaySettings settings_;
  std::vector<TranscriptEntry> transcript_;
};

/// Message sent when a reply fails validation.
std::string repair_instruction(const std::string& problem);

struct VoteResult {
  std::vector<Proposal> winners;
  std::vector<Proposal> minority;
  std::map<std::string, int> tally;  // vote key -> samples containing it
  int samples = 0;
  int unparseable_samples = 0;
};

/// Draws k samples in one request and keeps proposals present in strictly
/// more than k/2 of them.
VoteResult self_consistency(Gateway& gateway, const PromptTemplate& t, const SlotMap& slots,
                            int k, const std::string& label);

/// Majority vote over already-parsed samples.
VoteResult majority_vote(const std::vector<std::vector<Proposal>>& samples, int k);

struct ChainResult {
  std::vector<ChatResponse> responses;
  /// 1-based step that failed, with its error message.
  std::optional<std::size_t> failed_step;
  std::string error;

  bool ok() const { return !failed_step.has_value(); }
};

ChainResult prompt_chain(Gateway& gateway, const std::vector<PromptTemplate>& steps,
                         const SlotMap& slots, const std::string& label);

// ---------------------------------------------------------------------------
// Retrieval

struct CorpusDocument {
  std::string id;
  std::string title;
  std::string text;
};

class CorpusIndex {
 public:
  void add(CorpusDocument doc);
  const std::vector<CorpusDocument>& documents() const { return docs_; }
  std::size_t document_frequency(const std::string& term) const;
  std::size_t term_frequency(const std::string& doc_id, const std::string& term) const;
  const CorpusDocument* find(const std::string& doc_id) const;

  const std::map<std::string, std::size_t>& df() const { return df_; }
  const std::map<std::string, std::map<std::string, std::size_t>>& tf() const { return tf_; }

 private:
  std::vector<CorpusDocument> docs_;
  std::map<std::string, std::size_t> df_;
  std::map<std::string, std::map<std::string, std::size_t>> tf_;  // doc -> term -> count
};

/// Lowercase ASCII alphanumeric runs.
std::vector<std::string> tokenize(std::string_view text);

struct RetrievalHit {
  std::string doc_id;
  double score = 0;
};

/// Sum over distinct query terms of tf * ln(1 + N/df); positive scores
/// only, descending, ties by document id.
std::vector<RetrievalHit> retrieve(const CorpusIndex& index, std::string_view query, std::size_t k);

/// Document text for each hit, cut to `max_chars`.
std::vector<Excerpt> excerpts_for(const CorpusIndex& index, const std::vector<RetrievalHit>& hits,
                                  std::size_t max_chars = 600);

}  // namespace ontoforge
