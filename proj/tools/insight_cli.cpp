// insight: cohort synthesis, benchmark generation and evaluation, one-off
// agent questions and the HTTP service, behind one subcommand-style binary.

#include <insight/agent/backend.hpp>
#include <insight/agent/session.hpp>
#include <insight/agent/step_parser.hpp>
#include <insight/benchgen.hpp>
#include <insight/evalharness.hpp>
#include <insight/resources.hpp>
#include <insight/retrieval.hpp>
#include <insight/service.hpp>
#include <insight/synthgen.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace insight;

namespace {

/// Bad input from the command line: unknown user, missing files, bad names.
struct UsageError : Error {
  using Error::Error;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

std::string read_input(const fs::path& path) {
  if (!fs::exists(path)) throw UsageError("'" + path.string() + "' does not exist");
  return resources::read_file(path.string());
}

std::map<std::string, UserDataset> load_users(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw UsageError("cohort directory '" + dir.string() + "' does not exist");
  std::map<std::string, UserDataset> users;
  for (auto& ds : synth::load_cohort(dir)) users.emplace(ds.user_id, std::move(ds));
  if (users.empty()) throw UsageError("no users found under '" + dir.string() + "'");
  return users;
}

std::shared_ptr<agent::ModelBackend> backend_for(const std::string& name) {
  try {
    return agent::make_backend(name);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

void print_step(const agent::TraceStep& s) {
  switch (s.kind) {
    case agent::StepKind::observe: std::cout << "Observe: " << s.content << "\n"; break;
    case agent::StepKind::protocol_error: std::cout << "[protocol error] " << s.content << "\n"; break;
    default: std::cout << agent::serialize_step(s) << "\n";
  }
}

volatile std::sig_atomic_t g_stop = 0;
service::Service* g_service = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Personal health insights: synthetic cohorts, objective benchmarks and a tool-using agent"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  std::string config_path;
  std::string out_path;
  app.add_option("--seed", seed, "Random seed")->capture_default_str();
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--out", out_path, "Output path");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort");
  int n_users = 56, n_days = 31;
  synth_cmd->add_option("--users", n_users, "Number of users")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--days", n_days, "Days per user")->check(CLI::PositiveNumber)->capture_default_str();
  synth_cmd->add_option("--seed", seed, "Random seed");
  synth_cmd->add_option("--config", config_path, "Generator config JSON, merged over the defaults");
  synth_cmd->add_option("--out", out_path, "Cohort directory")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Generate or run objective benchmarks");
  bench_cmd->require_subcommand(1);

  auto* gen_cmd = bench_cmd->add_subcommand("gen", "Generate objective queries from templates");
  std::string cohort_dir;
  int n_queries = 4000, eval_users = 0;
  std::string templates_path;
  gen_cmd->add_option("--cohort", cohort_dir, "Cohort directory")->required();
  gen_cmd->add_option("--queries", n_queries, "Number of queries")->check(CLI::PositiveNumber)->capture_default_str();
  gen_cmd->add_option("--eval-users", eval_users, "Sample this many users (0 = all)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen_cmd->add_option("--templates", templates_path, "Template library JSON (default: shipped)");
  gen_cmd->add_option("--seed", seed, "Random seed");
  gen_cmd->add_option("--out", out_path, "Benchmark JSONL")->required();

  auto* run_cmd = bench_cmd->add_subcommand("run", "Evaluate methods on a benchmark");
  std::vector<std::string> methods;
  std::string bench_path, backend_name = "oracle";
  eval::RunConfig run_cfg;
  bool no_search = false, no_analyze = false, abs_tol = false;
  std::size_t limit = 0;
  run_cmd->add_option("--method", methods, "agent, codegen or numeric (repeatable)")
      ->required()
      ->check(CLI::IsMember({"agent", "codegen", "numeric"}));
  run_cmd->add_option("--bench", bench_path, "Benchmark JSONL")->required();
  run_cmd->add_option("--cohort", cohort_dir, "Cohort directory")->required();
  run_cmd->add_option("--backend", backend_name, "oracle, oracle-recover, remote, demo or scripted:<file>")
      ->capture_default_str();
  run_cmd->add_option("--out", out_path, "Output directory")->required();
  run_cmd->add_option("--jobs", run_cfg.jobs, "Queries evaluated in parallel")->check(CLI::PositiveNumber);
  run_cmd->add_option("--max-steps", run_cfg.agent.max_steps, "Agent turn limit")->check(CLI::PositiveNumber);
  run_cmd->add_option("--few-shot-k", run_cfg.agent.few_shot_k, "Agent few-shot examples")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--limit", limit, "Evaluate only the first N queries");
  run_cmd->add_flag("--no-search", no_search, "Disable the search tool");
  run_cmd->add_flag("--no-analyze", no_analyze, "Disable the analysis tool");
  run_cmd->add_flag("--abs-tol", abs_tol, "Score with |answer - gold| <= 0.005 instead of 2-decimal rounding");
  run_cmd->add_option("--seed", seed, "Seed for few-shot selection and bootstrap");

  auto* collect_cmd = bench_cmd->add_subcommand("collect", "Collect traces for open-ended queries (unscored)");
  std::string open_path;
  std::string collect_method = "agent";
  collect_cmd->add_option("--queries", open_path, "Open-ended query JSONL")->required();
  collect_cmd->add_option("--cohort", cohort_dir, "Cohort directory")->required();
  collect_cmd->add_option("--method", collect_method, "agent, codegen or numeric")
      ->check(CLI::IsMember({"agent", "codegen", "numeric"}));
  collect_cmd->add_option("--backend", backend_name, "Model backend")->required();
  collect_cmd->add_option("--out", out_path, "Results JSONL")->required();
  collect_cmd->add_option("--jobs", run_cfg.jobs, "Queries in parallel")->check(CLI::PositiveNumber);

  // ask
  auto* ask_cmd = app.add_subcommand("ask", "Ask the agent one question about one user");
  std::string user_id, question, ask_backend = "demo";
  bool ask_json = false;
  ask_cmd->add_option("--cohort", cohort_dir, "Cohort directory")->required();
  ask_cmd->add_option("--user", user_id, "User id")->required();
  ask_cmd->add_option("--question", question, "Question text")->required();
  ask_cmd->add_option("--backend", ask_backend, "Model backend")->capture_default_str();
  ask_cmd->add_option("--max-steps", run_cfg.agent.max_steps, "Agent turn limit")->check(CLI::PositiveNumber);
  ask_cmd->add_flag("--json", ask_json, "Print the trace as JSONL");

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "Serve personas and agent sessions over HTTP");
  std::string host = "127.0.0.1", data_dir, cors = "*", serve_backend = "demo";
  int port = 8080;
  serve_cmd->add_option("--cohort", cohort_dir, "Cohort directory")->required();
  serve_cmd->add_option("--host", host, "Bind address")->capture_default_str();
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535))->capture_default_str();
  serve_cmd->add_option("--data-dir", data_dir, "Where session logs are kept (default: none)");
  serve_cmd->add_option("--backend", serve_backend, "Default backend: demo or remote")->capture_default_str();
  serve_cmd->add_option("--cors-origin", cors, "Allowed browser origin")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*synth_cmd) {
      nlohmann::json cfg_json = nlohmann::json::parse(resources::get("synth_default.json"));
      if (!config_path.empty()) {
        try {
          cfg_json.merge_patch(nlohmann::json::parse(read_input(config_path)));
        } catch (const nlohmann::json::exception& e) {
          throw ConfigError(std::string("config file: ") + e.what());
        }
      }
      cfg_json["days"] = n_days;
      if (synth_cmd->count("--seed") || app.count("--seed") || !cfg_json.contains("seed")) cfg_json["seed"] = seed;
      synth::CohortSpec spec;
      spec.n_users = n_users;
      spec.config = synth::GeneratorConfig::from_json(cfg_json.dump());
      spec.config.validate();
      const auto cohort = synth::generate_cohort(spec);
      std::cout << synth::save_cohort(cohort, out_path);
      return 0;
    }

    if (*gen_cmd) {
      auto users = load_users(cohort_dir);
      std::vector<UserDataset> pool;
      std::vector<std::string> ids;
      for (auto& [id, _] : users) ids.push_back(id);
      if (eval_users > 0) {
        if (eval_users > static_cast<int>(ids.size())) throw UsageError("--eval-users exceeds the cohort size");
        ids = synth::select_users(ids, eval_users, seed);
      }
      for (const auto& id : ids) pool.push_back(users.at(id));
      const bench::TemplateLibrary lib = templates_path.empty()
                                             ? bench::TemplateLibrary::defaults()
                                             : bench::TemplateLibrary::from_json(read_input(templates_path));
      const auto queries = bench::generate_benchmark(pool, n_queries, seed, lib);
      write_file(out_path, bench::to_jsonl(queries));
      std::cerr << "wrote " << queries.size() << " queries over " << pool.size() << " users to " << out_path << "\n";
      return 0;
    }

    if (*run_cmd) {
      auto queries = bench::parse_jsonl(read_input(bench_path));
      if (limit > 0 && queries.size() > limit) queries.resize(limit);
      auto users = load_users(cohort_dir);
      auto backend = backend_for(backend_name);
      run_cfg.seed = seed;
      run_cfg.agent.seed = seed;
      run_cfg.match.absolute_tolerance = abs_tol;
      if (no_search) run_cfg.agent.tools_enabled.erase(agent::Tool::search);
      if (no_analyze) run_cfg.agent.tools_enabled.erase(agent::Tool::analyze);
      const auto search = retrieval::default_search_tool();
      std::vector<eval::EvalReport> reports;
      for (const auto& m : methods) {
        const eval::Method method = *eval::parse_method(m);
        const auto results = eval::run_method(method, queries, users, *backend, search.get(), run_cfg);
        write_file(fs::path(out_path) / ("results_" + m + ".jsonl"), eval::to_jsonl(results));
        reports.push_back(eval::make_report(method, results, seed));
      }
      const std::string md = eval::render_markdown(reports);
      write_file(fs::path(out_path) / "report.md", md);
      write_file(fs::path(out_path) / "report.json", eval::report_json(reports));
      std::cout << md;
      return 0;
    }

    if (*collect_cmd) {
      const auto queries = eval::parse_open_ended_jsonl(read_input(open_path));
      auto users = load_users(cohort_dir);
      auto backend = backend_for(backend_name);
      const auto search = retrieval::default_search_tool();
      const auto results = eval::collect_open_ended(*eval::parse_method(collect_method), queries, users, *backend,
                                                    search.get(), run_cfg);
      write_file(out_path, eval::to_jsonl(results));
      return 0;
    }

    if (*ask_cmd) {
      auto users = load_users(cohort_dir);
      auto it = users.find(user_id);
      if (it == users.end()) throw UsageError("unknown user '" + user_id + "'");
      if (question.find_first_not_of(" \t\r\n") == std::string::npos) throw UsageError("question is empty");
      auto backend = backend_for(ask_backend);
      const auto search = retrieval::default_search_tool();
      const auto result = agent::run_session(question, it->second, *backend, search.get(), run_cfg.agent, "ask",
                                             [&](const agent::TraceStep& s) {
                                               if (ask_json) std::cout << agent::to_json(s) << "\n";
                                               else print_step(s);
                                             });
      if (!ask_json) {
        std::cout << "\nAnswer: " << (result.final_answer ? *result.final_answer : "(no answer)") << "\n";
      }
      return result.final_answer ? 0 : 2;
    }

    if (*serve_cmd) {
      auto users = load_users(cohort_dir);
      service::ServiceConfig cfg;
      cfg.data_dir = data_dir;
      cfg.default_backend = serve_backend;
      cfg.cors_origin = cors;
      service::Service svc(std::move(users), cfg);
      g_service = &svc;
      std::signal(SIGINT, [](int) {
        g_stop = 1;
        if (g_service) g_service->stop();
      });
      std::signal(SIGTERM, [](int) {
        g_stop = 1;
        if (g_service) g_service->stop();
      });
      std::cerr << "serving " << svc.users().size() << " users on http://" << host << ":" << port << "\n";
      if (!svc.listen(host, port) && !g_stop) {
        std::cerr << "error: could not bind " << host << ":" << port << "\n";
        return 2;
      }
      g_service = nullptr;
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
