#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "app.hpp"
#include "ontoforge/metrics.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/proposal.hpp"
#include "ontoforge/sparql.hpp"

namespace ontoforge::app {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

/// First "# " line names the scenario; otherwise the file stem does.
ScenarioDoc read_scenario(const std::filesystem::path& path, std::size_t index) {
  ScenarioDoc doc;
  doc.id = "S" + std::to_string(index);
  doc.text = read_file(path);
  doc.title = path.stem().string();
  if (doc.text.rfind("# ", 0) == 0) {
    const auto end = doc.text.find('\n');
    doc.title = doc.text.substr(2, end == std::string::npos ? std::string::npos : end - 2);
  }
  return doc;
}

std::string check_stage(const std::string& text) { return parse_stage(text) ? "" : "unknown stage '" + text + "'"; }

std::string check_format(const std::string& text) {
  return text == "text" || text == "json" ? "" : "format must be text or json";
}

/// Loads, mutates and saves a project. Outcomes recorded before a failure
/// (a Failed stage, a gate report) are saved too.
template <typename F>
void with_project(const Config& config, F&& op) {
  WriterLock lock(config.project);
  Project project = load_project(config.project);
  const Project before = project;
  try {
    op(project);
  } catch (...) {
    if (!(project == before)) save_project(project, config.project);
    throw;
  }
  if (!(project == before)) save_project(project, config.project);
}

void print_proposal(std::ostream& out, const Proposal& p) {
  out << p.id << "  " << to_string(p.kind) << "  " << to_string(p.status);
  if (p.votes && p.vote_samples) out << "  votes " << *p.votes << "/" << *p.vote_samples;
  if (p.minority) out << "  minority";
  if (!p.reason.empty()) out << "  (" << p.reason << ")";
  out << "\n    " << p.effective_payload().dump() << "\n";
}

void print_stages(std::ostream& out, const json& summary) {
  for (const auto& s : summary["stages"]) {
    out << s["number"].get<int>() << " " << std::left << std::setw(20) << s["stage"].get<std::string>()
        << std::setw(16) << s["status"].get<std::string>() << "pending " << s["pending"].get<std::size_t>();
    if (!s["gate"].get<bool>()) out << "  gate: " << s["gate_reason"].get<std::string>();
    out << "\n";
  }
}

void print_transcript(std::ostream& err, const Gateway& gateway) {
  for (const auto& t : gateway.transcript()) {
    err << "llm " << t.label << " " << t.hash << " (" << t.completions.size() << " completion"
        << (t.completions.size() == 1 ? "" : "s") << ")\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, Provider* provider) {
  CLI::App app{"Ontology engineering workbench", "ontoforge"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  Config config;
  std::string project_path = config.project.string();
  std::string mock_dir, record_dir, template_dir;
  bool quiet = false;
  app.add_option("-p,--project", project_path, "Project file")->capture_default_str();
  auto* mock_opt = app.add_option("--mock", mock_dir, "Play back LLM replies from a fixture directory");
  app.add_flag("--lenient", config.lenient, "With --mock, answer unknown prompts with an empty reply");
  app.add_option("--record", record_dir, "Record live LLM exchanges as fixtures")->excludes(mock_opt);
  app.add_option("--templates", template_dir, "Directory of prompt template overrides");
  auto* verbose = app.add_flag("-v,--verbose", "Report LLM requests on stderr");
  app.add_flag("-q,--quiet", quiet, "Suppress informational messages");

  std::function<void()> action;
  auto info = [&](const std::string& line) {
    if (!quiet) err << line << "\n";
  };
  auto gateway_run = [&](auto&& body) {
    ProviderStack providers(config);
    Gateway gateway(providers.provider(), providers.settings());
    const auto templates = load_templates(config);
    try {
      body(gateway, templates);
    } catch (...) {
      if (config.verbosity > 0) print_transcript(err, gateway);
      throw;
    }
    if (config.verbosity > 0) print_transcript(err, gateway);
  };

  // init
  auto* init = app.add_subcommand("init", "Create a project from scenario documents");
  std::string init_name;
  std::vector<std::string> scenario_files;
  std::string seed_file, clock_mode = "stepping";
  ProjectSettings settings;
  bool force = false;
  init->add_option("name", init_name, "Project name")->required();
  init->add_option("-s,--scenario", scenario_files, "Scenario text file (repeatable)")->required();
  init->add_option("--domain", settings.domain, "Domain description used in prompts");
  init->add_option("--ns", settings.ns, "Namespace for new entities")->capture_default_str();
  init->add_option("--prefix", settings.prefix, "Prefix bound to the namespace")->capture_default_str();
  init->add_option("--language", settings.language, "Annotation language tag")->capture_default_str();
  init->add_option("--votes", settings.votes, "Self-consistency samples")->check(CLI::PositiveNumber);
  init->add_option("--retrieve-k", settings.retrieve_k, "Scenario excerpts per prompt")->check(CLI::PositiveNumber);
  init->add_option("--feedback-chunk", settings.feedback_chunk, "Feedback items per request")
      ->check(CLI::PositiveNumber);
  init->add_option("--seed", seed_file, "Turtle file merged into the main model");
  init->add_option("--clock", clock_mode, "Timestamp source")->check(CLI::IsMember({"stepping", "system"}));
  init->add_flag("--force", force, "Overwrite an existing project file");
  init->callback([&] {
    action = [&] {
      if (std::filesystem::exists(config.project) && !force) {
        throw DuplicateProjectName("project file " + config.project.string() + " already exists");
      }
      std::vector<ScenarioDoc> docs;
      for (const auto& f : scenario_files) docs.push_back(read_scenario(f, docs.size() + 1));
      Clock clock;
      clock.mode = clock_mode;
      WriterLock lock(config.project);
      Project p = init_project(init_name, docs, settings, clock);
      if (!seed_file.empty()) seed_model(p, read_file(seed_file));
      save_project(p, config.project);
      info("created " + config.project.string() + " with " + std::to_string(docs.size()) + " scenario(s)");
    };
  });

  // stage
  auto* stage = app.add_subcommand("stage", "Run, inspect or revert pipeline stages");
  stage->require_subcommand(1);
  std::string stage_name, format = "text";
  StageOptions stage_options;
  bool no_populate = false;
  auto* stage_run = stage->add_subcommand("run", "Run one stage through the LLM gateway");
  stage_run->add_option("stage", stage_name, "Stage name or number")->required()->check(check_stage);
  stage_run->add_option("--cq", stage_options.cqs, "ModeletDevelopment: CQ ids to cover");
  stage_run->add_option("--title", stage_options.title, "ModeletDevelopment: modelet title");
  stage_run->add_flag("--no-populate", no_populate, "TestCaseGeneration: skip example individuals");
  stage_run->callback([&] {
    action = [&] {
      stage_options.populate = !no_populate;
      with_project(config, [&](Project& p) {
        gateway_run([&](Gateway& gw, const TemplateLibrary& templates) {
          const auto made = run_stage(p, *parse_stage(stage_name), gw, templates, stage_options);
          for (const auto& x : made) print_proposal(out, x);
          info(std::to_string(made.size()) + " proposal(s) from " + to_string(*parse_stage(stage_name)));
        });
      });
    };
  });
  auto* stage_status = stage->add_subcommand("status", "Show stage statuses and gates");
  stage_status->add_option("--format", format, "text or json")->check(check_format);
  stage_status->callback([&] {
    action = [&] {
      const auto summary = project_summary(load_project(config.project));
      if (format == "json") {
        out << summary.dump(2) << "\n";
      } else {
        print_stages(out, summary);
      }
    };
  });
  auto* stage_revert = stage->add_subcommand("revert", "Reopen a stage and every later one");
  stage_revert->add_option("stage", stage_name, "Stage name or number")->required()->check(check_stage);
  stage_revert->callback([&] {
    action = [&] {
      with_project(config, [&](Project& p) { revert_to_stage(p, *parse_stage(stage_name)); });
      info(std::string("reverted to ") + to_string(*parse_stage(stage_name)));
    };
  });

  // review
  auto* review = app.add_subcommand("review", "Apply human decisions");
  review->require_subcommand(1);
  std::string decision_file;
  auto* review_apply = review->add_subcommand("apply", "Apply a decision file");
  review_apply->add_option("decision-file", decision_file, "JSON list of decisions")->required();
  review_apply->callback([&] {
    action = [&] {
      const auto decisions = parse_decision_file(read_file(decision_file));
      with_project(config, [&](Project& p) { apply_decisions(p, decisions); });
      info("applied " + std::to_string(decisions.size()) + " decision(s)");
    };
  });

  // proposals
  auto* proposals = app.add_subcommand("proposals", "Inspect proposals");
  proposals->require_subcommand(1);
  std::string status_filter, kind_filter;
  auto* proposals_list = proposals->add_subcommand("list", "List proposals");
  proposals_list->add_option("--status", status_filter, "Pending, Accepted, Rejected or Edited")
      ->check([](const std::string& s) { return parse_proposal_status(s) ? "" : "unknown status '" + s + "'"; });
  proposals_list->add_option("--kind", kind_filter, "Proposal kind")
      ->check([](const std::string& s) { return parse_proposal_kind(s) ? "" : "unknown kind '" + s + "'"; });
  proposals_list->add_option("--format", format, "text or json")->check(check_format);
  proposals_list->callback([&] {
    action = [&] {
      const auto p = load_project(config.project);
      json list = json::array();
      for (const auto& x : p.proposals) {
        if (!status_filter.empty() && x.status != *parse_proposal_status(status_filter)) continue;
        if (!kind_filter.empty() && x.kind != *parse_proposal_kind(kind_filter)) continue;
        if (format == "json") {
          list.push_back(to_json(x));
        } else {
          print_proposal(out, x);
        }
      }
      if (format == "json") out << list.dump(2) << "\n";
    };
  });

  // metrics
  auto* metrics = app.add_subcommand("metrics", "Ontology quality metrics of the main model");
  std::string ttl_file;
  metrics->add_option("--format", format, "text or json")->check(check_format);
  metrics->add_option("--ttl", ttl_file, "Measure a Turtle file instead of the project");
  metrics->callback([&] {
    action = [&] {
      Graph graph;
      if (!ttl_file.empty()) {
        graph = parse_turtle(read_file(ttl_file)).graph;
      } else {
        graph = load_project(config.project).model;
      }
      const auto report = metrics_report(graph, extract_snapshot(graph));
      if (format == "json") {
        out << report.to_json().dump(2) << "\n";
      } else {
        out << report.to_text();
      }
    };
  });

  // test
  auto* test = app.add_subcommand("test", "Run model, data and query tests on the main model");
  std::string tier_name = "all";
  test->add_option("tier", tier_name, "model, data, query or all")
      ->check([](const std::string& s) { return parse_test_tier(s) ? "" : "unknown tier '" + s + "'"; });
  test->add_option("--format", format, "text or json")->check(check_format);
  bool test_failed = false;
  test->callback([&] {
    action = [&] {
      const auto report = run_project_tests(load_project(config.project), *parse_test_tier(tier_name));
      if (format == "json") {
        out << report.to_json().dump(2) << "\n";
      } else {
        out << report.to_text();
      }
      test_failed = !report.ok();
    };
  });

  // docs
  auto* docs = app.add_subcommand("docs", "Print Markdown documentation of the main model");
  docs->callback([&] {
    action = [&] { out << project_docs(load_project(config.project)); };
  });

  // feedback
  auto* feedback = app.add_subcommand("feedback", "Stakeholder feedback");
  feedback->require_subcommand(1);
  std::string feedback_file;
  auto* feedback_ingest = feedback->add_subcommand("ingest", "Add items from a feedback file");
  feedback_ingest->add_option("file", feedback_file, "JSON list of {role, text, timestamp}")->required();
  feedback_ingest->callback([&] {
    action = [&] {
      const auto items = parse_feedback_file(read_file(feedback_file));
      with_project(config, [&](Project& p) {
        const auto r = ingest_feedback(p, items);
        out << "added " << r.added << "\n";
        if (r.duplicates > 0) err << "warning: skipped " << r.duplicates << " duplicate item(s)\n";
      });
    };
  });
  auto* feedback_summarize = feedback->add_subcommand("summarize", "Run the Feedback stage");
  feedback_summarize->callback([&] {
    action = [&] {
      with_project(config, [&](Project& p) {
        gateway_run([&](Gateway& gw, const TemplateLibrary& templates) {
          for (const auto& x : run_stage(p, Stage::Feedback, gw, templates)) print_proposal(out, x);
        });
      });
    };
  });
  auto* feedback_propose = feedback->add_subcommand("propose", "Turn accepted themes into proposals");
  feedback_propose->callback([&] {
    action = [&] {
      with_project(config, [&](Project& p) {
        gateway_run([&](Gateway& gw, const TemplateLibrary& templates) {
          for (const auto& x : propose_from_themes(p, gw, templates)) print_proposal(out, x);
        });
      });
    };
  });

  // modelet
  auto* modelet = app.add_subcommand("modelet", "Modelet management");
  modelet->require_subcommand(1);
  std::string modelet_id;
  auto* modelet_merge = modelet->add_subcommand("merge", "Merge a tested modelet into the main model");
  modelet_merge->add_option("id", modelet_id, "Modelet id")->required();
  modelet_merge->callback([&] {
    action = [&] {
      with_project(config, [&](Project& p) { merge_modelet(p, modelet_id); });
      info("merged " + modelet_id);
    };
  });
  auto* modelet_list = modelet->add_subcommand("list", "List modelets");
  modelet_list->callback([&] {
    action = [&] {
      for (const auto& m : load_project(config.project).modelets) {
        out << m.id << "  " << to_string(m.status) << "  " << m.graph.size() << " triples  covers";
        for (const auto& cq : m.covered_cqs) out << " " << cq;
        out << "\n";
      }
    };
  });

  // export
  auto* exporter = app.add_subcommand("export", "Write the main model as Turtle or Markdown");
  std::string export_kind, output_file;
  exporter->add_option("what", export_kind, "ttl or docs")->required()->check(CLI::IsMember({"ttl", "docs"}));
  exporter->add_option("-o,--output", output_file, "Output file (default: stdout)");
  exporter->callback([&] {
    action = [&] {
      const auto p = load_project(config.project);
      const std::string text = export_kind == "ttl" ? serialize_turtle(p.model, p.prefixes) : project_docs(p);
      if (output_file.empty()) {
        out << text;
      } else {
        write_file(output_file, text);
        info("wrote " + output_file);
      }
    };
  });

  // query
  auto* query = app.add_subcommand("query", "Evaluate a SELECT query against the main model");
  std::string query_text;
  bool working = false;
  query->add_option("query", query_text, "Query text, or @file")->required();
  query->add_flag("--working", working, "Include open modelets");
  query->callback([&] {
    action = [&] {
      const auto p = load_project(config.project);
      const std::string text = query_text.rfind('@', 0) == 0 ? read_file(query_text.substr(1)) : query_text;
      const auto q = sparql::parse_query(text, &p.prefixes);
      const auto result = sparql::evaluate(working ? working_graph(p) : p.model, q);
      out << result.to_tsv(&p.prefixes);
      if (result.type_mismatch_warnings > 0) {
        err << "warning: " << result.type_mismatch_warnings << " row(s) dropped by non-numeric comparisons\n";
      }
    };
  });

  // log
  auto* log = app.add_subcommand("log", "Show the revision log");
  std::size_t tail = 0;
  log->add_option("--tail", tail, "Only the last N entries");
  log->add_option("--format", format, "text or json")->check(check_format);
  log->callback([&] {
    action = [&] {
      auto entries = to_json(load_project(config.project))["log"];
      if (tail > 0 && entries.size() > tail) entries.erase(entries.begin(), entries.end() - static_cast<long>(tail));
      if (format == "json") {
        out << entries.dump(2) << "\n";
        return;
      }
      for (const auto& e : entries) {
        out << e["seq"].get<std::size_t>() << "  " << e["timestamp"].get<std::string>() << "  "
            << e["actor"].get<std::string>() << "  " << e["action"].get<std::string>() << "  "
            << e["subject"].get<std::string>() << "\n";
      }
    };
  });

  // replay
  auto* replay = app.add_subcommand("replay", "Rebuild the project from its log and compare");
  std::string replay_out;
  replay->add_option("-o,--output", replay_out, "Write the replayed project here");
  bool replay_differs = false;
  replay->callback([&] {
    action = [&] {
      const auto p = load_project(config.project);
      gateway_run([&](Gateway& gw, const TemplateLibrary& templates) {
        const auto again = replay_log(p.log, gw, templates);
        if (!replay_out.empty()) save_project(again, replay_out);
        const bool same = to_json(again).dump() == to_json(p).dump() &&
                          serialize_turtle(again.model, again.prefixes) == serialize_turtle(p.model, p.prefixes);
        out << (same ? "identical" : "differs") << "\n";
        replay_differs = !same;
      });
    };
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API for the review UI");
  int port = 8765;
  std::string host = "127.0.0.1", ui_dir;
  serve->add_option("--port", port, "Port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--ui", ui_dir, "Static files served at /");
  serve->callback([&] {
    action = [&] {
      WriterLock lock(config.project);
      ApiServer server(config, config.project, load_project(config.project));
      if (!ui_dir.empty() && !server.mount_ui(ui_dir)) throw IoError("cannot serve " + ui_dir);
      const int bound = server.bind(host, port);
      if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
      err << "listening on http://" << host << ":" << bound << "\n" << std::flush;
      server.listen();
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return 2;
  }

  config.project = project_path;
  if (!mock_dir.empty()) config.mock_dir = mock_dir;
  if (!record_dir.empty()) config.record_dir = record_dir;
  if (!template_dir.empty()) config.template_dir = template_dir;
  config.verbosity = static_cast<int>(verbose->count());
  config.provider = provider;

  try {
    if (action) action();
  } catch (const Error& e) {
    err << "error: " << error_kind(e) << ": " << sanitize(e.what()) << "\n";
    if (const auto* gate = dynamic_cast<const GateFailed*>(&e)) {
      for (const auto& cq : gate->failing_cqs()) err << "  failing " << cq << "\n";
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << sanitize(e.what()) << "\n";
    return 1;
  }
  return test_failed || replay_differs ? 1 : 0;
}

}  // namespace ontoforge::app
