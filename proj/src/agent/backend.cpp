#include <insight/agent/backend.hpp>

#include <insight/dsl/evaluator.hpp>
#include <insight/http_client.hpp>
#include <insight/resources.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdlib>

namespace insight::agent {

using json = nlohmann::json;

std::string apply_stop(std::string text, const std::vector<std::string>& stop) {
  std::size_t cut = text.size();
  for (const auto& s : stop) {
    if (s.empty()) continue;
    cut = std::min(cut, text.find(s));
  }
  text.resize(cut);
  return text;
}

// ---------------------------------------------------------------------------
// Scripted

namespace {

class ScriptedSession : public ModelSession {
 public:
  explicit ScriptedSession(const std::vector<std::string>* script) : script_(script) {}

  std::string complete(const std::string&, const std::vector<std::string>&) override {
    if (!script_) throw BackendError("no scripted outputs for this session");
    if (next_ >= script_->size()) throw BackendError("scripted outputs exhausted");
    return (*script_)[next_++];
  }

 private:
  const std::vector<std::string>* script_;
  std::size_t next_ = 0;
};

}  // namespace

ScriptedBackend::ScriptedBackend(std::map<std::string, std::vector<std::string>> scripts, std::string name)
    : scripts_(std::move(scripts)), name_(std::move(name)) {}

ScriptedBackend ScriptedBackend::from_jsonl(std::string_view text, std::string name) {
  std::map<std::string, std::map<int, std::string>> steps;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const json j = json::parse(line);
      const std::string key = j.value("session", "*");
      const int step = j.at("step").get<int>();
      if (!steps[key].emplace(step, j.at("output").get<std::string>()).second) {
        throw ParseError("script line " + std::to_string(line_no) + ": duplicate step " + std::to_string(step));
      }
    } catch (const json::exception& e) {
      throw ParseError("script line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::map<std::string, std::vector<std::string>> scripts;
  for (auto& [key, by_step] : steps) {
    auto& out = scripts[key];
    for (auto& [_, output] : by_step) out.push_back(std::move(output));
  }
  return ScriptedBackend(std::move(scripts), std::move(name));
}

std::unique_ptr<ModelSession> ScriptedBackend::open(const SessionInfo& info) const {
  auto it = scripts_.find(info.key);
  if (it == scripts_.end()) it = scripts_.find("*");
  return std::make_unique<ScriptedSession>(it == scripts_.end() ? nullptr : &it->second);
}

// ---------------------------------------------------------------------------
// Oracle

namespace {

/// First line of the last observation in the prompt.
std::string last_observation(const std::string& prompt) {
  const std::string marker = "Observe: ";
  const std::size_t at = prompt.rfind(marker);
  if (at == std::string::npos) throw BackendError("oracle found no observation to echo");
  const std::size_t start = at + marker.size();
  const std::size_t nl = prompt.find('\n', start);
  return prompt.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
}

std::string analyze_act(std::string_view program) {
  return "Thought: I will compute this from the data.\nAct: Analyze(```" + std::string(program) + "```)";
}

class OracleSession : public ModelSession {
 public:
  OracleSession(SessionInfo info, bool err_first) : info_(std::move(info)), err_first_(err_first) {}

  std::string complete(const std::string& prompt, const std::vector<std::string>&) override {
    if (!info_.gold_program) throw BackendError("oracle backend needs a benchmark query");
    const std::size_t call = calls_++;
    const std::size_t programs = err_first_ ? 2 : 1;
    if (info_.method == "numeric") {
      if (!info_.dataset) throw BackendError("oracle backend needs the user's data");
      return "Finish: " + dsl::analyze(*info_.gold_program, *info_.dataset);
    }
    if (info_.method == "codegen") {
      if (call == 0) return "Act: Analyze(```" + std::string(err_first_ ? kBrokenProgram : *info_.gold_program) + "```)";
      return "Finish: " + last_observation(prompt);
    }
    if (call + 1 < programs) return analyze_act(kBrokenProgram);
    if (call + 1 == programs) return analyze_act(*info_.gold_program);
    return "Thought: The result answers the question.\nFinish: " + last_observation(prompt);
  }

 private:
  SessionInfo info_;
  bool err_first_;
  std::size_t calls_ = 0;
};

}  // namespace

std::unique_ptr<ModelSession> OracleBackend::open(const SessionInfo& info) const {
  return std::make_unique<OracleSession>(info, err_first_);
}

// ---------------------------------------------------------------------------
// Remote

namespace {

class RemoteSession : public ModelSession {
 public:
  explicit RemoteSession(const RemoteBackend& backend) : backend_(backend) {}
  std::string complete(const std::string& prompt, const std::vector<std::string>& stop) override {
    return backend_.complete(prompt, stop);
  }

 private:
  const RemoteBackend& backend_;
};

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

RemoteBackend::RemoteBackend(std::string url, std::string api_key, std::string model)
    : url_(std::move(url)), api_key_(std::move(api_key)), model_(std::move(model)) {}

RemoteBackend RemoteBackend::from_env() {
  const std::string url = env_or("INSIGHT_LLM_URL", "");
  if (url.empty()) throw ConfigError("INSIGHT_LLM_URL is not set");
  return RemoteBackend(url, env_or("INSIGHT_LLM_KEY", ""), env_or("INSIGHT_LLM_MODEL", ""));
}

std::unique_ptr<ModelSession> RemoteBackend::open(const SessionInfo&) const {
  return std::make_unique<RemoteSession>(*this);
}

std::string RemoteBackend::complete(const std::string& prompt, const std::vector<std::string>& stop) const {
  json body;
  const bool chat = url_.ends_with("/chat/completions");
  if (chat) {
    body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
  } else {
    body["prompt"] = prompt;
  }
  body["stop"] = stop;
  body["temperature"] = 0;
  body["max_tokens"] = 1024;
  if (!model_.empty()) body["model"] = model_;

  http::Headers headers;
  if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
  http::Response r;
  try {
    r = http::post_json(url_, body.dump(), headers);
  } catch (const http::TransportError& e) {
    throw BackendError(e.what());
  }
  if (r.status != 200) {
    throw BackendError("model endpoint returned HTTP " + std::to_string(r.status) + ": " + r.body.substr(0, 200));
  }
  std::string text;
  try {
    const json j = json::parse(r.body);
    if (j.contains("text")) {
      text = j["text"].get<std::string>();
    } else if (j.contains("choices") && !j["choices"].empty()) {
      const json& c = j["choices"][0];
      if (c.contains("text")) text = c["text"].get<std::string>();
      else text = c.at("message").at("content").get<std::string>();
    } else {
      throw BackendError("model endpoint response has no text");
    }
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed model endpoint response: ") + e.what());
  }
  // Endpoints that ignore stop sequences are trimmed here.
  return apply_stop(std::move(text), stop);
}

// ---------------------------------------------------------------------------

std::shared_ptr<ModelBackend> make_backend(const std::string& spec) {
  if (spec == "oracle") return std::make_shared<OracleBackend>(false);
  if (spec == "oracle-recover") return std::make_shared<OracleBackend>(true);
  if (spec == "remote") return std::make_shared<RemoteBackend>(RemoteBackend::from_env());
  if (spec == "demo") {
    return std::make_shared<ScriptedBackend>(ScriptedBackend::from_jsonl(resources::get("scripted/demo.jsonl"), "demo"));
  }
  if (spec.starts_with("scripted:")) {
    const std::string path = spec.substr(9);
    std::string text;
    try {
      text = resources::read_file(path);
    } catch (const std::runtime_error& e) {
      throw ConfigError(e.what());
    }
    return std::make_shared<ScriptedBackend>(ScriptedBackend::from_jsonl(text, spec));
  }
  throw ConfigError("unknown backend '" + spec + "' (expected oracle, oracle-recover, remote, demo or scripted:<file>)");
}

}  // namespace insight::agent
