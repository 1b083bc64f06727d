#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "ontoforge/hash.hpp"
#include "ontoforge/llm.hpp"

namespace ontoforge {

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

std::string excerpt(const std::string& body, std::size_t max = 200) {
  return body.size() <= max ? body : body.substr(0, max) + "...";
}

const char* env_or_null(const char* name) {
  const char* v = std::getenv(name);
  return (v != nullptr && *v != '\0') ? v : nullptr;
}

std::map<std::string, std::string> read_index(const std::filesystem::path& dir) {
  std::map<std::string, std::string> index;
  auto path = dir / "index.json";
  if (!std::filesystem::exists(path)) return index;
  try {
    index = Json::parse(read_text(path)).get<std::map<std::string, std::string>>();
  } catch (const Json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return index;
}

}  // namespace

std::string prompt_hash(const std::vector<Message>& messages) {
  Json list = Json::array();
  for (const auto& m : messages) list.push_back({{"role", m.role}, {"content", m.content}});
  return sha256_hex(list.dump());
}

void validate_request(const ChatRequest& request) {
  bool has_user = false;
  for (const auto& m : request.messages) {
    if (m.role != "system" && m.role != "user" && m.role != "assistant") {
      throw PreconditionError("unknown message role '" + m.role + "'");
    }
    has_user = has_user || m.role == "user";
  }
  if (!has_user) throw PreconditionError("chat request needs at least one user message");
  if (request.temperature < 0 || request.temperature > 2) {
    throw PreconditionError("temperature must lie in [0, 2]");
  }
  if (request.n < 1) throw PreconditionError("sample count must be positive");
}

ProviderError::ProviderError(int status, std::string body_excerpt)
    : Error("provider error (status " + std::to_string(status) + "): " + body_excerpt),
      status_(status),
      excerpt_(std::move(body_excerpt)) {}

// --- MockProvider ------------------------------------------------------------

MockProvider::MockProvider(std::filesystem::path dir, bool strict)
    : dir_(std::move(dir)), strict_(strict) {
  if (!std::filesystem::is_directory(dir_)) throw IoError("mock fixture directory not found: " + dir_.string());
  index_ = read_index(dir_);
}

std::vector<std::string> MockProvider::split_samples(const std::string& text) {
  std::vector<std::string> samples;
  std::string current;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line == kSampleSeparator) {
      samples.push_back(current);
      current.clear();
      first = true;
      continue;
    }
    if (!first) current += "\n";
    current += line;
    first = false;
  }
  samples.push_back(current);
  return samples;
}

std::optional<std::string> MockProvider::label_for(const std::string& hash) const {
  auto it = index_.find(hash);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

ChatResponse MockProvider::complete(const ChatRequest& request) {
  validate_request(request);
  const auto hash = prompt_hash(request.messages);
  const auto path = dir_ / (hash + ".txt");
  ChatResponse response;
  response.provider_id = id();
  if (!std::filesystem::exists(path)) {
    if (strict_) {
      std::string what = "no fixture for prompt hash " + hash;
      if (!request.label.empty()) what += " (" + request.label + ")";
      throw ProviderError(404, what);
    }
    const std::string stub = "Mock reply for " + (request.label.empty() ? hash : request.label) +
                             ".\n```json\n{\"proposals\": []}\n```";
    response.completions.assign(static_cast<std::size_t>(request.n), stub);
    return response;
  }
  auto samples = split_samples(read_text(path));
  if (samples.size() > static_cast<std::size_t>(request.n)) samples.resize(static_cast<std::size_t>(request.n));
  response.completions = std::move(samples);
  return response;
}

// --- HttpProvider ------------------------------------------------------------

HttpProviderConfig HttpProviderConfig::from_env() {
  HttpProviderConfig c;
  const char* base = env_or_null("ONTOFORGE_LLM_BASE_URL");
  if (base == nullptr) throw CredentialMissing("ONTOFORGE_LLM_BASE_URL");
  const char* key = env_or_null("ONTOFORGE_LLM_API_KEY");
  if (key == nullptr) throw CredentialMissing("ONTOFORGE_LLM_API_KEY");
  const char* model = env_or_null("ONTOFORGE_LLM_MODEL");
  if (model == nullptr) throw CredentialMissing("ONTOFORGE_LLM_MODEL");
  c.base_url = base;
  c.api_key = key;
  c.model = model;
  return c;
}

HttpProvider::HttpProvider(HttpProviderConfig config) : config_(std::move(config)) {
  if (config_.base_url.empty()) throw CredentialMissing("ONTOFORGE_LLM_BASE_URL");
  if (config_.api_key.empty()) throw CredentialMissing("ONTOFORGE_LLM_API_KEY");
}

ChatResponse HttpProvider::complete(const ChatRequest& request) {
  validate_request(request);
  std::string base = config_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) throw PreconditionError("base URL needs a scheme: " + base);
  auto path_start = base.find('/', scheme_end + 3);
  const std::string origin = base.substr(0, path_start);
  const std::string path =
      (path_start == std::string::npos ? std::string() : base.substr(path_start)) + "/chat/completions";

  Json body = {{"model", request.model.empty() ? config_.model : request.model},
               {"temperature", request.temperature},
               {"n", request.n},
               {"messages", Json::array()}};
  for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const auto payload = body.dump();

  httplib::Client client(origin);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};

  std::exception_ptr last;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(path, headers, payload, "application/json");
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (!res) {
      if (res.error() == httplib::Error::ConnectionTimeout || elapsed >= config_.timeout) {
        last = std::make_exception_ptr(Timeout("request timed out after " +
                                               std::to_string(config_.timeout.count()) + " ms"));
      } else {
        last = std::make_exception_ptr(TransportError("transport error: " + httplib::to_string(res.error())));
      }
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last = std::make_exception_ptr(ProviderError(res->status, excerpt(res->body)));
      continue;
    }
    if (res->status != 200) throw ProviderError(res->status, excerpt(res->body));

    ChatResponse response;
    response.provider_id = id();
    response.latency_ms = std::chrono::duration<double, std::milli>(elapsed).count();
    try {
      auto j = Json::parse(res->body);
      for (const auto& choice : j.at("choices")) {
        response.completions.push_back(choice.at("message").at("content").get<std::string>());
      }
      if (j.contains("usage")) {
        const auto& u = j["usage"];
        if (u.contains("prompt_tokens")) response.prompt_tokens = u["prompt_tokens"].get<long>();
        if (u.contains("completion_tokens")) response.completion_tokens = u["completion_tokens"].get<long>();
      }
    } catch (const Json::exception& e) {
      throw ProviderError(res->status, std::string("malformed response: ") + e.what());
    }
    if (response.completions.empty()) throw ProviderError(res->status, "response has no choices");
    return response;
  }
  std::rethrow_exception(last);
}

// --- RecordingProvider -------------------------------------------------------

RecordingProvider::RecordingProvider(Provider& inner, std::filesystem::path dir)
    : inner_(inner), dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

ChatResponse RecordingProvider::complete(const ChatRequest& request) {
  auto response = inner_.complete(request);
  const auto hash = prompt_hash(request.messages);
  std::string text;
  for (std::size_t i = 0; i < response.completions.size(); ++i) {
    if (i != 0) text += std::string("\n") + kSampleSeparator + "\n";
    text += response.completions[i];
  }
  write_text(dir_ / (hash + ".txt"), text + "\n");
  auto index = read_index(dir_);
  index[hash] = request.label;
  write_text(dir_ / "index.json", Json(index).dump(2) + "\n");
  return response;
}

// --- ScriptProvider ----------------------------------------------------------

void ScriptProvider::add(const std::string& label, std::vector<std::string> samples) {
  script_[label].push_back(std::move(samples));
}

ChatResponse ScriptProvider::complete(const ChatRequest& request) {
  validate_request(request);
  auto it = script_.find(request.label);
  if (it == script_.end() || it->second.empty()) {
    throw ProviderError(404, "no scripted reply for label " + request.label);
  }
  ChatResponse response;
  response.provider_id = id();
  response.completions = std::move(it->second.front());
  it->second.erase(it->second.begin());
  if (response.completions.size() > static_cast<std::size_t>(request.n)) {
    response.completions.resize(static_cast<std::size_t>(request.n));
  }
  return response;
}

std::vector<std::string> ScriptProvider::unused_labels() const {
  std::vector<std::string> out;
  for (const auto& [label, queue] : script_) {
    if (!queue.empty()) out.push_back(label);
  }
  return out;
}

}  // namespace ontoforge
