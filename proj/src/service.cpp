#include <insight/service.hpp>

#include <insight/errors.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <random>

namespace insight::service {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::running: return "running";
    case SessionStatus::finished: return "finished";
    case SessionStatus::failed: return "failed";
  }
  return "?";
}

namespace {

std::optional<SessionStatus> parse_status(std::string_view s) {
  for (auto st : {SessionStatus::running, SessionStatus::finished, SessionStatus::failed}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

ordered_json metric_json(const Metric& m) { return m ? ordered_json(*m) : ordered_json(nullptr); }

void json_response(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error_response(httplib::Response& res, int status, const std::string& message) {
  json_response(res, status, ordered_json{{"error", message}});
}

}  // namespace

BackendFactory default_backend_factory() {
  return [](const std::string& name) -> std::shared_ptr<agent::ModelBackend> {
    if (name == "demo" || name == "remote") return agent::make_backend(name);
    return nullptr;
  };
}

std::string daily_rows_json(const UserDataset& ds, std::optional<Date> from, std::optional<Date> to) {
  ordered_json rows = ordered_json::array();
  for (const auto& r : ds.daily) {
    if (from && r.date < *from) continue;
    if (to && r.date > *to) continue;
    ordered_json row;
    for (const auto& col : daily_columns()) {
      if (col.name == "datetime") {
        row["datetime"] = format_date(r.date);
      } else if (col.name == "bed_time") {
        row["bed_time"] = r.bed_time ? ordered_json(format_timestamp(*r.bed_time)) : ordered_json(nullptr);
      } else if (col.name == "wake_up_time") {
        row["wake_up_time"] =
            r.wake_up_time ? ordered_json(format_timestamp(*r.wake_up_time)) : ordered_json(nullptr);
      } else if (col.metric) {
        row[std::string(col.name)] = metric_json(r.*(col.metric));
      }
    }
    rows.push_back(std::move(row));
  }
  return rows.dump();
}

// ---------------------------------------------------------------------------

struct Service::Session {
  std::string id;
  std::string user_id;
  std::string question;
  std::string backend;
  std::string created_at;

  mutable std::mutex m;
  std::condition_variable cv;
  SessionStatus status = SessionStatus::running;
  std::vector<std::string> events;
};

Service::Service(std::map<std::string, UserDataset> users, ServiceConfig config, BackendFactory factory,
                 std::shared_ptr<retrieval::SearchTool> search)
    : users_(std::move(users)), config_(std::move(config)), factory_(std::move(factory)), search_(std::move(search)) {
  config_.agent.validate();
  if (!config_.data_dir.empty()) {
    fs::create_directories(config_.data_dir);
    load_persisted();
  }
}

Service::~Service() {
  stop();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& t : workers) {
    if (t.joinable()) t.join();
  }
}

std::string Service::new_session_id() {
  static thread_local std::mt19937_64 gen{std::random_device{}()};
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(gen()));
  return buf;
}

std::shared_ptr<Service::Session> Service::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

CreateResult Service::create_session(const std::string& user_id, const std::string& question,
                                     const std::optional<std::string>& backend_name) {
  if (question.find_first_not_of(" \t\r\n") == std::string::npos) return {400, "", "question is empty"};
  if (question.size() > config_.max_question_chars) {
    return {400, "", "question is longer than " + std::to_string(config_.max_question_chars) + " characters"};
  }
  if (!users_.count(user_id)) return {404, "", "unknown user '" + user_id + "'"};

  const std::string name = backend_name.value_or(config_.default_backend);
  std::shared_ptr<agent::ModelBackend> backend;
  {
    std::lock_guard lock(mu_);
    auto it = backends_.find(name);
    if (it != backends_.end()) backend = it->second;
  }
  if (!backend) {
    try {
      backend = factory_(name);
    } catch (const Error& e) {
      return {503, "", "backend '" + name + "' is unavailable: " + e.what()};
    }
    if (!backend) return {400, "", "unknown backend '" + name + "'"};
    std::lock_guard lock(mu_);
    backends_.emplace(name, backend);
  }

  auto s = std::make_shared<Session>();
  s->id = new_session_id();
  s->user_id = user_id;
  s->question = question;
  s->backend = name;
  s->created_at = format_timestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now())) + "Z";
  {
    std::lock_guard lock(mu_);
    while (sessions_.count(s->id)) s->id = new_session_id();
    sessions_[s->id] = s;
    ++running_;
    workers_.emplace_back([this, s, backend] { run(s, backend); });
  }
  return {201, s->id, ""};
}

void Service::append_event(Session& s, std::string event) {
  {
    std::lock_guard lock(s.m);
    s.events.push_back(event);
  }
  s.cv.notify_all();
  if (!config_.data_dir.empty()) {
    std::ofstream out(config_.data_dir / (s.id + ".jsonl"), std::ios::app);
    out << event << "\n";
  }
}

namespace {

void write_meta(const fs::path& dir, const std::string& id, const ordered_json& meta) {
  const fs::path tmp = dir / (id + ".meta.json.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << meta.dump() << "\n";
  }
  fs::rename(tmp, dir / (id + ".meta.json"));
}

ordered_json meta_json(const std::string& id, const std::string& user, const std::string& question,
                       const std::string& backend, const std::string& created, SessionStatus status) {
  return ordered_json{{"session_id", id}, {"user_id", user},    {"question", question},
                      {"backend", backend}, {"created_at", created}, {"status", to_string(status)}};
}

}  // namespace

void Service::finish(Session& s, SessionStatus status) {
  {
    std::lock_guard lock(s.m);
    s.status = status;
  }
  s.cv.notify_all();
  if (!config_.data_dir.empty()) {
    write_meta(config_.data_dir, s.id, meta_json(s.id, s.user_id, s.question, s.backend, s.created_at, status));
  }
  {
    std::lock_guard lock(mu_);
    --running_;
  }
  idle_cv_.notify_all();
}

void Service::run(std::shared_ptr<Session> s, std::shared_ptr<agent::ModelBackend> backend) {
  if (!config_.data_dir.empty()) {
    write_meta(config_.data_dir, s->id,
               meta_json(s->id, s->user_id, s->question, s->backend, s->created_at, SessionStatus::running));
  }
  std::size_t steps = 0;
  std::string failure = "the agent stopped without an answer";
  bool answered = false;
  try {
    const UserDataset& ds = users_.at(s->user_id);
    const retrieval::SearchTool* search = config_.agent.tools_enabled.count(agent::Tool::search) ? search_.get()
                                                                                                  : nullptr;
    auto result = agent::run_session(s->question, ds, *backend, search, config_.agent, s->id,
                                     [&](const agent::TraceStep& step) {
                                       ++steps;
                                       append_event(*s, agent::to_json(step));
                                       if (step.kind == agent::StepKind::protocol_error) failure = step.content;
                                     });
    answered = result.final_answer.has_value();
    if (!answered && !result.trace.empty() && result.trace.back().kind != agent::StepKind::protocol_error) {
      failure = "step limit reached without an answer";
    }
  } catch (const std::exception& e) {
    failure = e.what();
  }
  if (!answered) {
    ordered_json ev{{"seq", steps}, {"kind", "failed"}, {"content", failure}, {"ok", false}};
    append_event(*s, ev.dump());
  }
  finish(*s, answered ? SessionStatus::finished : SessionStatus::failed);
}

std::optional<SessionSnapshot> Service::snapshot(const std::string& id) const {
  auto s = find(id);
  if (!s) return std::nullopt;
  SessionSnapshot snap;
  snap.session_id = s->id;
  snap.user_id = s->user_id;
  snap.question = s->question;
  snap.backend = s->backend;
  snap.created_at = s->created_at;
  std::lock_guard lock(s->m);
  snap.status = s->status;
  snap.events = s->events;
  return snap;
}

bool Service::read_events(const std::string& id, std::size_t cursor, std::vector<std::string>& out, bool& done,
                          std::chrono::milliseconds timeout) const {
  auto s = find(id);
  if (!s) return false;
  std::unique_lock lock(s->m);
  s->cv.wait_for(lock, timeout, [&] { return s->events.size() > cursor || s->status != SessionStatus::running; });
  for (std::size_t i = cursor; i < s->events.size(); ++i) out.push_back(s->events[i]);
  done = s->status != SessionStatus::running;
  return true;
}

void Service::wait_idle() {
  std::unique_lock lock(mu_);
  idle_cv_.wait(lock, [&] { return running_ == 0; });
}

void Service::load_persisted() {
  for (const auto& entry : fs::directory_iterator(config_.data_dir)) {
    const std::string fname = entry.path().filename().string();
    if (!fname.ends_with(".meta.json")) continue;
    try {
      std::ifstream in(entry.path());
      const auto meta = ordered_json::parse(in);
      auto status = parse_status(meta.at("status").get<std::string>());
      // Sessions that were running when the server went down are lost.
      if (!status || *status == SessionStatus::running) continue;
      auto s = std::make_shared<Session>();
      s->id = meta.at("session_id").get<std::string>();
      s->user_id = meta.at("user_id").get<std::string>();
      s->question = meta.at("question").get<std::string>();
      s->backend = meta.value("backend", "");
      s->created_at = meta.value("created_at", "");
      s->status = *status;
      std::ifstream ev(config_.data_dir / (s->id + ".jsonl"));
      for (std::string line; std::getline(ev, line);) {
        if (!line.empty()) s->events.push_back(line);
      }
      sessions_[s->id] = s;
    } catch (const std::exception&) {
      // A damaged record is skipped rather than blocking startup.
    }
  }
}

// ---------------------------------------------------------------------------
// HTTP

void Service::mount(httplib::Server& server) {
  const std::string origin = config_.cors_origin;
  server.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
  });
  server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("ok", "text/plain");
  });

  server.Get("/v1/users", [this](const httplib::Request&, httplib::Response& res) {
    ordered_json arr = ordered_json::array();
    for (const auto& [id, ds] : users_) {
      ordered_json u{{"user_id", id},
                     {"age", ds.context.age},
                     {"gender", to_string(ds.context.gender)},
                     {"weight_kg", ds.context.weight_kg},
                     {"height_cm", ds.context.height_cm ? ordered_json(*ds.context.height_cm) : ordered_json(nullptr)},
                     {"days", ds.daily.size()},
                     {"activities", ds.activities.size()},
                     {"today", format_date(ds.today)}};
      arr.push_back(std::move(u));
    }
    json_response(res, 200, arr);
  });

  server.Get(R"(/v1/users/([^/]+)/daily)", [this](const httplib::Request& req, httplib::Response& res) {
    auto it = users_.find(req.matches[1]);
    if (it == users_.end()) return error_response(res, 404, "unknown user");
    std::optional<Date> from, to;
    if (req.has_param("from")) {
      from = parse_date(req.get_param_value("from"));
      if (!from) return error_response(res, 400, "malformed 'from' date");
    }
    if (req.has_param("to")) {
      to = parse_date(req.get_param_value("to"));
      if (!to) return error_response(res, 400, "malformed 'to' date");
    }
    if (from && to && *from > *to) return error_response(res, 400, "'from' is after 'to'");
    res.set_content(daily_rows_json(it->second, from, to), "application/json");
  });

  server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    ordered_json body;
    try {
      body = ordered_json::parse(req.body);
    } catch (const nlohmann::json::exception&) {
      return error_response(res, 400, "request body is not JSON");
    }
    if (!body.is_object() || !body.contains("user_id") || !body["user_id"].is_string()) {
      return error_response(res, 400, "user_id is required");
    }
    if (!body.contains("question") || !body["question"].is_string()) {
      return error_response(res, 400, "question is required");
    }
    std::optional<std::string> backend;
    if (body.contains("backend") && !body["backend"].is_null()) {
      if (!body["backend"].is_string()) return error_response(res, 400, "backend must be a string");
      backend = body["backend"].get<std::string>();
    }
    const auto r = create_session(body["user_id"].get<std::string>(), body["question"].get<std::string>(), backend);
    if (r.status != 201) return error_response(res, r.status, r.error);
    json_response(res, 201, ordered_json{{"session_id", r.session_id}});
  });

  server.Get(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto snap = snapshot(req.matches[1]);
    if (!snap) return error_response(res, 404, "unknown session");
    json_response(res, 200,
                  ordered_json{{"session_id", snap->session_id},
                               {"user_id", snap->user_id},
                               {"question", snap->question},
                               {"backend", snap->backend},
                               {"created_at", snap->created_at},
                               {"status", to_string(snap->status)},
                               {"events", snap->events.size()}});
  });

  server.Get(R"(/v1/sessions/([^/]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    if (!find(id)) return error_response(res, 404, "unknown session");
    std::size_t cursor = 0;
    if (req.has_param("from")) {
      try {
        cursor = std::stoul(req.get_param_value("from"));
      } catch (const std::exception&) {
        return error_response(res, 400, "malformed 'from' cursor");
      }
    }
    auto pos = std::make_shared<std::size_t>(cursor);
    res.set_chunked_content_provider("application/x-ndjson", [this, id, pos](std::size_t, httplib::DataSink& sink) {
      std::vector<std::string> batch;
      bool done = false;
      if (!read_events(id, *pos, batch, done, std::chrono::milliseconds(250))) return false;
      for (const auto& ev : batch) {
        const std::string line = ev + "\n";
        if (!sink.write(line.data(), line.size())) return false;
        ++*pos;
      }
      if (done) sink.done();
      return true;
    });
  });
}

bool Service::listen(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  return server_->listen(host, port);
}

int Service::start_background(const std::string& host) {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  const int port = server_->bind_to_any_port(host);
  if (port < 0) throw ConfigError("could not bind " + host);
  server_thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port;
}

void Service::stop() {
  if (server_) server_->stop();
  if (server_thread_.joinable()) server_thread_.join();
}

}  // namespace insight::service
