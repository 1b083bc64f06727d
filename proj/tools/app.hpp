#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "ontoforge/llm.hpp"
#include "ontoforge/pipeline.hpp"

namespace ontoforge::app {

struct Config {
  std::filesystem::path project = "ontoforge.json";
  std::optional<std::filesystem::path> mock_dir;
  bool lenient = false;
  std::optional<std::filesystem::path> record_dir;
  std::optional<std::filesystem::path> template_dir;
  int verbosity = 0;
  /// Used instead of the mock or HTTP provider when set.
  Provider* provider = nullptr;
};

/// Owns the provider chosen by a Config: mock playback, or the HTTP provider
/// optionally wrapped by a recorder. The HTTP provider is built on first use,
/// so commands that fail before reaching the gateway need no credentials.
class ProviderStack {
 public:
  explicit ProviderStack(const Config& config);
  Provider& provider() { return *top_; }
  GatewaySettings settings() const { return settings_; }

 private:
  class Deferred : public Provider {
   public:
    explicit Deferred(std::optional<std::filesystem::path> record_dir) : record_dir_(std::move(record_dir)) {}
    ChatResponse complete(const ChatRequest& request) override;
    std::string id() const override;

   private:
    std::optional<std::filesystem::path> record_dir_;
    std::unique_ptr<Provider> http_;
    std::unique_ptr<Provider> recorder_;
  };

  std::unique_ptr<Provider> owned_;
  Provider* top_ = nullptr;
  GatewaySettings settings_;
};

TemplateLibrary load_templates(const Config& config);

/// Most specific class name of a library error, e.g. "StageOrderViolation".
std::string error_kind(const std::exception& e);

/// HTTP status for a failed API request.
int http_status(const std::exception& e);

/// what() with the configured credential masked and length capped.
std::string sanitize(const std::string& message);

/// Exclusive advisory lock on `<project>.lock`, held for the object's life.
class WriterLock {
 public:
  explicit WriterLock(const std::filesystem::path& project);
  ~WriterLock();
  WriterLock(const WriterLock&) = delete;
  WriterLock& operator=(const WriterLock&) = delete;

 private:
  int fd_ = -1;
};

/// Local HTTP API over one project. Reads share a lock; mutations take it
/// exclusively and persist the project before responding.
class ApiServer {
 public:
  ApiServer(Config config, std::filesystem::path project_path, Project project);

  /// Serves files from `dir` at "/".
  bool mount_ui(const std::filesystem::path& dir);
  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

  Project snapshot() const;

 private:
  void routes();
  nlohmann::json mutate(const std::function<nlohmann::json(Project&)>& op);

  Config config_;
  std::filesystem::path path_;
  TemplateLibrary templates_;
  mutable std::shared_mutex mutex_;
  Project project_;
  httplib::Server server_;
};

/// Runs one command line. Returns the process exit code: 0 success, 1 domain
/// error, 2 usage error. `provider` overrides the provider chosen by flags.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, Provider* provider = nullptr);

/// Splits a command line on whitespace; double quotes group words.
std::vector<std::string> split_command_line(const std::string& line);

struct PlanStep {
  std::size_t line = 0;
  std::vector<std::string> args;
  int expected_exit = 0;
};

/// Reads a scripted session: one command per line, '#' comments, `$NAME`
/// replaced from `vars`, and an optional leading `!<code>` giving the
/// expected exit code.
std::vector<PlanStep> read_plan(const std::filesystem::path& path, const std::map<std::string, std::string>& vars);

}  // namespace ontoforge::app
