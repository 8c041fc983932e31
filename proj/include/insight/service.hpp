#pragma once

#include <insight/agent/backend.hpp>
#include <insight/agent/session.hpp>
#include <insight/datamodel.hpp>
#include <insight/retrieval.hpp>

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace insight::service {

enum class SessionStatus { running, finished, failed };
std::string_view to_string(SessionStatus s);

struct ServiceConfig {
  std::filesystem::path data_dir;  // empty = no persistence
  std::string default_backend = "demo";
  std::string cors_origin = "*";
  agent::AgentConfig agent;
  std::size_t max_question_chars = 2000;
};

/// Builds a backend by name; may throw ConfigError when it is unavailable.
using BackendFactory = std::function<std::shared_ptr<agent::ModelBackend>(const std::string&)>;

/// Names the service accepts: "demo" and "remote".
BackendFactory default_backend_factory();

struct CreateResult {
  int status = 0;  // 201, 400, 404 or 503
  std::string session_id;
  std::string error;
};

struct SessionSnapshot {
  std::string session_id;
  std::string user_id;
  std::string question;
  std::string backend;
  std::string created_at;
  SessionStatus status = SessionStatus::running;
  std::vector<std::string> events;  // JSON, one per seq
};

/// Sessions, their event logs and the HTTP routes over them. Every
/// session's agent loop runs on its own thread; event logs only grow, so
/// readers holding a cursor never see a partial or reordered log.
class Service {
 public:
  Service(std::map<std::string, UserDataset> users, ServiceConfig config,
          BackendFactory factory = default_backend_factory(),
          std::shared_ptr<retrieval::SearchTool> search = retrieval::default_search_tool());
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  CreateResult create_session(const std::string& user_id, const std::string& question,
                              const std::optional<std::string>& backend = std::nullopt);

  std::optional<SessionSnapshot> snapshot(const std::string& session_id) const;

  /// Events with seq >= cursor, waiting up to `timeout` for some to
  /// appear. `done` is set once the log is complete and fully returned.
  /// Returns false for an unknown session.
  bool read_events(const std::string& session_id, std::size_t cursor, std::vector<std::string>& out, bool& done,
                   std::chrono::milliseconds timeout) const;

  /// Blocks until no session is running.
  void wait_idle();

  const std::map<std::string, UserDataset>& users() const { return users_; }

  /// Installs the /v1 and /healthz routes on `server`.
  void mount(httplib::Server& server);

  /// Binds and serves until stop() is called. Returns false if the bind fails.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port on host and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Session;

  std::map<std::string, UserDataset> users_;
  ServiceConfig config_;
  BackendFactory factory_;
  std::shared_ptr<retrieval::SearchTool> search_;

  mutable std::mutex mu_;
  std::condition_variable idle_cv_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::map<std::string, std::shared_ptr<agent::ModelBackend>> backends_;
  std::vector<std::thread> workers_;
  std::size_t running_ = 0;

  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;

  std::shared_ptr<Session> find(const std::string& id) const;
  void run(std::shared_ptr<Session> s, std::shared_ptr<agent::ModelBackend> backend);
  void append_event(Session& s, std::string event);
  void finish(Session& s, SessionStatus status);
  void load_persisted();
  std::string new_session_id();
};

/// Daily rows within [from, to] as JSON objects keyed by column name;
/// missing cells are null.
std::string daily_rows_json(const UserDataset& ds, std::optional<Date> from, std::optional<Date> to);

}  // namespace insight::service
