#include "app.hpp"
#include "ontoforge/metrics.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/proposal.hpp"

namespace ontoforge::app {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", "application/json");
}

json error_body(const std::exception& e) {
  json body = {{"error", error_kind(e)}, {"message", sanitize(e.what())}};
  if (const auto* gate = dynamic_cast<const GateFailed*>(&e)) {
    body["failing_cqs"] = gate->failing_cqs();
    body["report"] = gate->report();
  }
  return body;
}

void send_error(httplib::Response& res, const std::exception& e) { send_json(res, http_status(e), error_body(e)); }

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ParseError(position_at(req.body, e.byte == 0 ? 0 : e.byte - 1), "malformed JSON body");
  }
}

}  // namespace

ApiServer::ApiServer(Config config, std::filesystem::path project_path, Project project)
    : config_(std::move(config)),
      path_(std::move(project_path)),
      templates_(load_templates(config_)),
      project_(std::move(project)) {
  routes();
}

bool ApiServer::mount_ui(const std::filesystem::path& dir) { return server_.set_mount_point("/", dir.string()); }

int ApiServer::bind(const std::string& host, int port) {
  if (port == 0) return server_.bind_to_any_port(host);
  return server_.bind_to_port(host, port) ? port : -1;
}

bool ApiServer::listen() { return server_.listen_after_bind(); }

void ApiServer::stop() { server_.stop(); }

void ApiServer::wait_until_ready() const { server_.wait_until_ready(); }

Project ApiServer::snapshot() const {
  std::shared_lock lock(mutex_);
  return project_;
}

json ApiServer::mutate(const std::function<json(Project&)>& op) {
  std::unique_lock lock(mutex_);
  Project before = project_;
  try {
    json result = op(project_);
    save_project(project_, path_);
    return result;
  } catch (...) {
    // failed runs and gate failures still record their outcome
    if (!(project_ == before)) {
      try {
        save_project(project_, path_);
      } catch (...) {
        project_ = std::move(before);
      }
    }
    throw;
  }
}

void ApiServer::routes() {
  server_.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      send_error(res, e);
    } catch (...) {
      send_json(res, 500, {{"error", "InternalError"}, {"message", "unknown failure"}});
    }
  });

  server_.Get("/api/project", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    send_json(res, 200, project_summary(project_));
  });

  server_.Get("/api/proposals", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<ProposalStatus> status;
    std::optional<ProposalKind> kind;
    if (req.has_param("status")) {
      status = parse_proposal_status(req.get_param_value("status"));
      if (!status) {
        send_json(res, 400, {{"error", "ParseError"}, {"message", "unknown status " + req.get_param_value("status")}});
        return;
      }
    }
    if (req.has_param("kind")) {
      kind = parse_proposal_kind(req.get_param_value("kind"));
      if (!kind) {
        send_json(res, 400, {{"error", "ParseError"}, {"message", "unknown kind " + req.get_param_value("kind")}});
        return;
      }
    }
    std::shared_lock lock(mutex_);
    json list = json::array();
    for (const auto& p : project_.proposals) {
      if (status && p.status != *status) continue;
      if (kind && p.kind != *kind) continue;
      list.push_back(to_json(p));
    }
    send_json(res, 200, list);
  });

  server_.Get(R"(/api/proposals/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    const auto* p = project_.find_proposal(req.matches[1]);
    if (p == nullptr) throw UnknownProposal(req.matches[1]);
    send_json(res, 200, to_json(*p));
  });

  server_.Post("/api/decisions", [this](const httplib::Request& req, httplib::Response& res) {
    const auto decisions = parse_decision_file(req.body);
    const json result = mutate([&](Project& p) {
      apply_decisions(p, decisions);
      json decided = json::array();
      for (const auto& d : decisions) decided.push_back(to_json(*p.find_proposal(d.proposal)));
      return json{{"applied", decisions.size()}, {"proposals", decided}};
    });
    send_json(res, 200, result);
  });

  server_.Post(R"(/api/stages/([^/]+)/run)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto stage = parse_stage(req.matches[1].str());
    if (!stage) {
      send_json(res, 404, {{"error", "UnknownStage"}, {"message", "unknown stage " + req.matches[1].str()}});
      return;
    }
    StageOptions options;
    if (!req.body.empty()) options = stage_options_from_json(parse_body(req));
    const json result = mutate([&](Project& p) {
      ProviderStack providers(config_);
      Gateway gateway(providers.provider(), providers.settings());
      json list = json::array();
      for (const auto& x : run_stage(p, *stage, gateway, templates_, options)) list.push_back(to_json(x));
      return json{{"proposals", list}, {"project", project_summary(p)}};
    });
    send_json(res, 200, result);
  });

  server_.Post(R"(/api/stages/([^/]+)/revert)", [this](const httplib::Request& req, httplib::Response& res) {
    const auto stage = parse_stage(req.matches[1].str());
    if (!stage) {
      send_json(res, 404, {{"error", "UnknownStage"}, {"message", "unknown stage " + req.matches[1].str()}});
      return;
    }
    const json result = mutate([&](Project& p) {
      revert_to_stage(p, *stage);
      return project_summary(p);
    });
    send_json(res, 200, result);
  });

  server_.Post(R"(/api/modelets/([^/]+)/merge)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    const json result = mutate([&](Project& p) {
      merge_modelet(p, id);
      return project_summary(p);
    });
    send_json(res, 200, result);
  });

  server_.Post("/api/feedback", [this](const httplib::Request& req, httplib::Response& res) {
    const auto items = parse_feedback_file(req.body);
    const json result = mutate([&](Project& p) {
      const auto r = ingest_feedback(p, items);
      return json{{"added", r.added}, {"duplicates", r.duplicates}};
    });
    send_json(res, 200, result);
  });

  server_.Post("/api/feedback/propose", [this](const httplib::Request&, httplib::Response& res) {
    const json result = mutate([&](Project& p) {
      ProviderStack providers(config_);
      Gateway gateway(providers.provider(), providers.settings());
      json list = json::array();
      for (const auto& x : propose_from_themes(p, gateway, templates_)) list.push_back(to_json(x));
      return json{{"proposals", list}};
    });
    send_json(res, 200, result);
  });

  server_.Get("/api/metrics", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    send_json(res, 200, metrics_report(project_.model, extract_snapshot(project_.model)).to_json());
  });

  server_.Get("/api/tests/report", [this](const httplib::Request& req, httplib::Response& res) {
    TestTier tier = TestTier::All;
    if (req.has_param("tier")) {
      const auto parsed = parse_test_tier(req.get_param_value("tier"));
      if (!parsed) {
        send_json(res, 400, {{"error", "ParseError"}, {"message", "unknown tier " + req.get_param_value("tier")}});
        return;
      }
      tier = *parsed;
    }
    std::shared_lock lock(mutex_);
    send_json(res, 200, run_project_tests(project_, tier).to_json());
  });

  server_.Get("/api/ontology.ttl", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    res.set_content(serialize_turtle(project_.model, project_.prefixes), "text/turtle");
  });

  server_.Get("/api/docs", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    res.set_content(project_docs(project_), "text/markdown");
  });

  server_.Get("/api/log", [this](const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(mutex_);
    send_json(res, 200, to_json(project_)["log"]);
  });
}

}  // namespace ontoforge::app
