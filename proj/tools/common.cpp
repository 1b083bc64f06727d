#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cctype>
#include <cstdlib>
#include <fstream>

#include "app.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/proposal.hpp"
#include "ontoforge/sparql.hpp"

namespace ontoforge::app {

ProviderStack::ProviderStack(const Config& config) {
  if (config.provider != nullptr) {
    top_ = config.provider;
    return;
  }
  if (config.mock_dir) {
    if (config.record_dir) throw PreconditionError("--mock and --record cannot be combined");
    owned_ = std::make_unique<MockProvider>(*config.mock_dir, !config.lenient);
  } else {
    if (const char* model = std::getenv("ONTOFORGE_LLM_MODEL")) settings_.model = model;
    owned_ = std::make_unique<Deferred>(config.record_dir);
  }
  top_ = owned_.get();
}

ChatResponse ProviderStack::Deferred::complete(const ChatRequest& request) {
  if (!http_) {
    http_ = std::make_unique<HttpProvider>(HttpProviderConfig::from_env());
    if (record_dir_) recorder_ = std::make_unique<RecordingProvider>(*http_, *record_dir_);
  }
  return recorder_ ? recorder_->complete(request) : http_->complete(request);
}

std::string ProviderStack::Deferred::id() const {
  if (http_) return http_->id();
  const char* model = std::getenv("ONTOFORGE_LLM_MODEL");
  return std::string("http:") + (model ? model : "");
}

TemplateLibrary load_templates(const Config& config) {
  auto lib = TemplateLibrary::builtin();
  if (config.template_dir) lib.load_overrides(*config.template_dir);
  return lib;
}

std::string error_kind(const std::exception& e) {
#define ONTOFORGE_KIND(T) \
  if (dynamic_cast<const T*>(&e)) return #T;
  ONTOFORGE_KIND(SyntaxError)
  ONTOFORGE_KIND(UnknownPrefix)
  ONTOFORGE_KIND(ParseError)
  ONTOFORGE_KIND(IoError)
  ONTOFORGE_KIND(PreconditionError)
  ONTOFORGE_KIND(InvalidTerm)
  ONTOFORGE_KIND(ConflictingDeclaration)
  ONTOFORGE_KIND(UnknownClass)
  ONTOFORGE_KIND(sparql::UnboundVariable)
  ONTOFORGE_KIND(NoStructuredBlock)
  ONTOFORGE_KIND(SchemaViolation)
  ONTOFORGE_KIND(UnexpectedKind)
  ONTOFORGE_KIND(MissingSlot)
  ONTOFORGE_KIND(InvalidTemplate)
  ONTOFORGE_KIND(Timeout)
  ONTOFORGE_KIND(TransportError)
  ONTOFORGE_KIND(CredentialMissing)
  ONTOFORGE_KIND(ProviderError)
  ONTOFORGE_KIND(RepairFailed)
  ONTOFORGE_KIND(StageOrderViolation)
  ONTOFORGE_KIND(UnknownProposal)
  ONTOFORGE_KIND(AlreadyDecided)
  ONTOFORGE_KIND(CompileError)
  ONTOFORGE_KIND(UnknownModelet)
  ONTOFORGE_KIND(GateFailed)
  ONTOFORGE_KIND(DuplicateProjectName)
  ONTOFORGE_KIND(SchemaVersionMismatch)
  ONTOFORGE_KIND(CorruptProject)
  ONTOFORGE_KIND(Error)
#undef ONTOFORGE_KIND
  return "InternalError";
}

int http_status(const std::exception& e) {
  const auto kind = error_kind(e);
  if (kind == "UnknownProposal" || kind == "UnknownModelet") return 404;
  if (kind == "StageOrderViolation" || kind == "AlreadyDecided" || kind == "GateFailed" ||
      kind == "PreconditionError") {
    return 409;
  }
  if (kind == "ParseError" || kind == "SchemaViolation" || kind == "CompileError" || kind == "SyntaxError" ||
      kind == "UnknownPrefix" || kind == "InvalidTerm" || kind == "ConflictingDeclaration" ||
      kind == "UnknownClass" || kind == "sparql::UnboundVariable" || kind == "UnexpectedKind") {
    return 400;
  }
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 400;
  return 500;
}

std::string sanitize(const std::string& message) {
  constexpr std::size_t kLimit = 400;
  std::string out = message;
  if (const char* key = std::getenv("ONTOFORGE_LLM_API_KEY"); key != nullptr && *key != '\0') {
    const std::string secret = key;
    for (auto pos = out.find(secret); pos != std::string::npos; pos = out.find(secret, pos)) {
      out.replace(pos, secret.size(), "***");
    }
  }
  if (out.size() > kLimit) out = out.substr(0, kLimit) + "...";
  return out;
}

WriterLock::WriterLock(const std::filesystem::path& project) {
  const auto path = project.string() + ".lock";
  fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd_ < 0) throw IoError("cannot open lock file " + path);
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw PreconditionError("project " + project.string() + " is locked by another writer");
  }
}

WriterLock::~WriterLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

std::vector<std::string> split_command_line(const std::string& line) {
  std::vector<std::string> words;
  std::string current;
  bool quoted = false, pending = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      pending = true;
    } else if (!quoted && std::isspace(static_cast<unsigned char>(c))) {
      if (pending) words.push_back(current);
      current.clear();
      pending = false;
    } else {
      current += c;
      pending = true;
    }
  }
  if (quoted) throw ParseError({1, line.size() + 1}, "unterminated quote");
  if (pending) words.push_back(current);
  return words;
}

std::vector<PlanStep> read_plan(const std::filesystem::path& path, const std::map<std::string, std::string>& vars) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<PlanStep> steps;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    for (const auto& [name, value] : vars) {
      const std::string key = "$" + name;
      for (auto pos = line.find(key); pos != std::string::npos; pos = line.find(key, pos + value.size())) {
        line.replace(pos, key.size(), value);
      }
    }
    PlanStep step;
    step.line = n;
    try {
      step.args = split_command_line(line);
    } catch (const ParseError&) {
      throw ParseError({n, line.size() + 1}, "unterminated quote");
    }
    if (!step.args.empty() && step.args[0].size() > 1 && step.args[0][0] == '!') {
      step.expected_exit = std::stoi(step.args[0].substr(1));
      step.args.erase(step.args.begin());
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

}  // namespace ontoforge::app
