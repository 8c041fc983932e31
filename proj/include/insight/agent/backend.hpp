#pragma once

#include <insight/datamodel.hpp>
#include <insight/errors.hpp>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace insight::agent {

/// The model could not be reached or refused to produce output.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// What a backend may know about the session it serves. Only the oracle
/// backends look past `key`.
struct SessionInfo {
  std::string key;                          // query id or service session id
  std::string method = "agent";             // agent | codegen | numeric
  std::string question;
  const UserDataset* dataset = nullptr;
  std::optional<std::string> gold_program;  // benchmark runs only
};

/// One conversation with a model. Calls within a session are sequential.
class ModelSession {
 public:
  virtual ~ModelSession() = default;
  /// Throws BackendError.
  virtual std::string complete(const std::string& prompt, const std::vector<std::string>& stop) = 0;
};

/// A model provider. Implementations hold no per-session mutable state,
/// so sessions may be opened and driven from several threads at once.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual std::string name() const = 0;
  virtual std::unique_ptr<ModelSession> open(const SessionInfo& info) const = 0;
};

/// Replays canned outputs: the i-th call of a session returns the i-th
/// output recorded for its key, falling back to the "*" script.
class ScriptedBackend : public ModelBackend {
 public:
  /// JSONL lines {"session"?: key, "step": i, "output": text}; lines
  /// without a session belong to "*". Throws ParseError.
  static ScriptedBackend from_jsonl(std::string_view text, std::string name = "scripted");
  ScriptedBackend(std::map<std::string, std::vector<std::string>> scripts, std::string name);

  std::string name() const override { return name_; }
  std::unique_ptr<ModelSession> open(const SessionInfo& info) const override;

 private:
  std::map<std::string, std::vector<std::string>> scripts_;
  std::string name_;
};

/// Answers benchmark queries with their gold program and echoes the
/// resulting observation. With `err_first` the first program it writes
/// names a column that does not exist.
class OracleBackend : public ModelBackend {
 public:
  explicit OracleBackend(bool err_first = false) : err_first_(err_first) {}
  std::string name() const override { return err_first_ ? "oracle-recover" : "oracle"; }
  std::unique_ptr<ModelSession> open(const SessionInfo& info) const override;

 private:
  bool err_first_;
};

/// Program the err-first oracle writes before the gold one.
inline constexpr std::string_view kBrokenProgram = R"(daily["step_count"].during("last 7 days").mean())";

/// HTTP completion endpoint. Sends {"prompt", "stop", "model"?} and reads
/// "text", or an OpenAI-style choices[0].text / choices[0].message.content.
/// URLs ending in /chat/completions get a single-message chat body.
class RemoteBackend : public ModelBackend {
 public:
  RemoteBackend(std::string url, std::string api_key, std::string model);
  /// From INSIGHT_LLM_URL, INSIGHT_LLM_KEY and INSIGHT_LLM_MODEL; throws
  /// ConfigError when the URL is unset.
  static RemoteBackend from_env();

  std::string name() const override { return "remote"; }
  std::unique_ptr<ModelSession> open(const SessionInfo& info) const override;
  std::string complete(const std::string& prompt, const std::vector<std::string>& stop) const;

 private:
  std::string url_, api_key_, model_;
};

/// "oracle", "oracle-recover", "remote", "demo" (the shipped scripted
/// demonstration) or "scripted:<path>". Throws ConfigError.
std::shared_ptr<ModelBackend> make_backend(const std::string& spec);

/// Cuts `text` at the earliest stop sequence.
std::string apply_stop(std::string text, const std::vector<std::string>& stop);

}  // namespace insight::agent
