#include <doctest.h>

#include "../support.hpp"

#include <insight/service.hpp>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <thread>

using namespace insight;
using namespace insight::service;
using nlohmann::json;

namespace {

class SlowSession : public agent::ModelSession {
 public:
  explicit SlowSession(std::unique_ptr<agent::ModelSession> inner) : inner_(std::move(inner)) {}
  std::string complete(const std::string& prompt, const std::vector<std::string>& stop) override {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    return inner_->complete(prompt, stop);
  }

 private:
  std::unique_ptr<agent::ModelSession> inner_;
};

class SlowBackend : public agent::ModelBackend {
 public:
  std::string name() const override { return "demo"; }
  std::unique_ptr<agent::ModelSession> open(const agent::SessionInfo& info) const override {
    return std::make_unique<SlowSession>(inner_->open(info));
  }

 private:
  std::shared_ptr<agent::ModelBackend> inner_ = agent::make_backend("demo");
};

BackendFactory slow_factory() {
  return [](const std::string& name) -> std::shared_ptr<agent::ModelBackend> {
    if (name == "demo") return std::make_shared<SlowBackend>();
    return nullptr;
  };
}

std::map<std::string, UserDataset> one_user() {
  auto ds = testing::bmi_fixture();
  return {{ds.user_id, ds}};
}

std::vector<std::string> lines(const std::string& body) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    if (nl == std::string::npos) nl = body.size();
    if (nl > pos) out.push_back(body.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return out;
}

}  // namespace

TEST_CASE("service over HTTP") {
  testing::TempDir dir;
  ServiceConfig cfg;
  cfg.data_dir = dir.path;
  const auto users = one_user();
  const std::string uid = users.begin()->first;
  Service svc(users, cfg, slow_factory());
  const int port = svc.start_background();
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(10, 0);

  SUBCASE("health and CORS") {
    auto r = cli.Get("/healthz");
    REQUIRE(r);
    CHECK(r->status == 200);
    CHECK(r->body == "ok");
    CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
    auto o = cli.Options("/v1/sessions");
    REQUIRE(o);
    CHECK(o->status == 204);
  }

  SUBCASE("users and daily rows") {
    auto r = cli.Get("/v1/users");
    REQUIRE(r);
    auto arr = json::parse(r->body);
    REQUIRE(arr.size() == 1);
    CHECK(arr[0]["user_id"] == uid);
    CHECK(arr[0]["age"] == 35);
    CHECK(arr[0]["gender"] == "female");

    auto d = cli.Get(("/v1/users/" + uid + "/daily").c_str());
    REQUIRE(d);
    CHECK(d->status == 200);
    CHECK(json::parse(d->body).size() == users.begin()->second.daily.size());

    const std::string today = format_date(users.begin()->second.today);
    d = cli.Get(("/v1/users/" + uid + "/daily?from=" + today + "&to=" + today).c_str());
    REQUIRE(d);
    auto rows = json::parse(d->body);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0]["datetime"] == today);
    CHECK(rows[0]["steps"].is_null());

    CHECK(cli.Get(("/v1/users/" + uid + "/daily?from=2024-02-30").c_str())->status == 400);
    CHECK(cli.Get(("/v1/users/" + uid + "/daily?from=2023-10-05&to=2023-10-01").c_str())->status == 400);
    CHECK(cli.Get("/v1/users/nobody/daily")->status == 404);
  }

  SUBCASE("session creation errors") {
    auto post = [&](const json& body) { return cli.Post("/v1/sessions", body.dump(), "application/json"); };
    CHECK(post({{"user_id", "nobody"}, {"question", "hi"}})->status == 404);
    CHECK(post({{"user_id", uid}, {"question", "   "}})->status == 400);
    CHECK(post({{"user_id", uid}, {"question", std::string(2001, 'a')}})->status == 400);
    CHECK(post({{"user_id", uid}, {"question", "hi"}, {"backend", "gpt-nothing"}})->status == 400);
    CHECK(cli.Post("/v1/sessions", "{not json", "application/json")->status == 400);
    CHECK(cli.Get("/v1/sessions/deadbeef")->status == 404);
    CHECK(cli.Get("/v1/sessions/deadbeef/events")->status == 404);
  }

  SUBCASE("a session streams, finishes and replays") {
    auto r = cli.Post("/v1/sessions", json{{"user_id", uid}, {"question", "What is my BMI?"}}.dump(),
                      "application/json");
    REQUIRE(r);
    REQUIRE(r->status == 201);
    const std::string id = json::parse(r->body)["session_id"];

    auto live = cli.Get(("/v1/sessions/" + id + "/events").c_str());
    REQUIRE(live);
    CHECK(live->get_header_value("Content-Type") == "application/x-ndjson");
    auto evs = lines(live->body);
    REQUIRE_FALSE(evs.empty());
    for (std::size_t i = 0; i < evs.size(); ++i) CHECK(json::parse(evs[i])["seq"] == i);
    CHECK(json::parse(evs.back())["kind"] == "finish");
    CHECK(json::parse(evs.back())["content"].get<std::string>().find("27.12") != std::string::npos);

    svc.wait_idle();
    auto snap = json::parse(cli.Get(("/v1/sessions/" + id).c_str())->body);
    CHECK(snap["status"] == "finished");
    CHECK(snap["events"] == evs.size());

    auto replay = cli.Get(("/v1/sessions/" + id + "/events").c_str());
    CHECK(lines(replay->body) == evs);
    auto tail = cli.Get(("/v1/sessions/" + id + "/events?from=2").c_str());
    CHECK(lines(tail->body) == std::vector<std::string>(evs.begin() + 2, evs.end()));

    svc.stop();
    Service again({}, cfg, slow_factory());
    auto restored = again.snapshot(id);
    REQUIRE(restored);
    CHECK(restored->status == SessionStatus::finished);
    CHECK(restored->events == evs);
  }
  svc.stop();
}

TEST_CASE("a backend that never answers ends in a failed event") {
  std::map<std::string, std::vector<std::string>> scripts{{"*", {"Thought: still thinking"}}};
  auto scripted = std::make_shared<agent::ScriptedBackend>(scripts, "stuck");
  Service svc(one_user(), ServiceConfig{}, [&](const std::string&) { return scripted; });
  auto r = svc.create_session(one_user().begin()->first, "anything");
  REQUIRE(r.status == 201);
  svc.wait_idle();
  auto snap = svc.snapshot(r.session_id);
  REQUIRE(snap);
  CHECK(snap->status == SessionStatus::failed);
  auto last = json::parse(snap->events.back());
  CHECK(last["kind"] == "failed");
  CHECK(last["ok"] == false);
  CHECK(last["seq"] == snap->events.size() - 1);
}

TEST_CASE("backend factory failures map to 503") {
  Service svc(one_user(), ServiceConfig{},
              [](const std::string&) -> std::shared_ptr<agent::ModelBackend> { throw ConfigError("no key"); });
  CHECK(svc.create_session(one_user().begin()->first, "q").status == 503);
}
