#pragma once

#include <insight/agent/backend.hpp>
#include <insight/agent/fewshot.hpp>
#include <insight/agent/prompt.hpp>
#include <insight/agent/trace.hpp>
#include <insight/datamodel.hpp>
#include <insight/retrieval.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace insight::agent {

struct AgentConfig {
  int max_steps = 8;  // model turns, not counting corrective retries
  int few_shot_k = 20;
  ToolSet tools_enabled = kAllTools;
  int retry_on_protocol_error = 1;
  std::uint64_t seed = 0;  // few-shot clustering

  /// Throws ConfigError.
  void validate() const;
};

struct SessionResult {
  Trace trace;
  std::optional<std::string> final_answer;
  int protocol_retries = 0;
};

using StepCallback = std::function<void(const TraceStep&)>;

/// Few-shots from the shipped agent pool, cached per (k, seed).
const std::vector<FewShotExample>& default_agent_few_shots(std::size_t k, std::uint64_t seed);

/// The observation text for a disabled tool.
std::string tool_disabled_observation(Tool tool);

/// Runs one ReAct session: prompt, model turn, parse, dispatch, observe,
/// until Finish or max_steps turns. Tool failures become "#ERROR#:"
/// observations; a malformed reply gets `retry_on_protocol_error`
/// corrective retries before the session ends with a protocol_error
/// step; a backend failure ends it the same way. `on_step` sees each step
/// as it is appended. `search` may be null when search is disabled.
SessionResult run_session(const std::string& question, const UserDataset& ds, ModelSession& model,
                          const retrieval::SearchTool* search, const AgentConfig& config,
                          const std::vector<FewShotExample>& few_shots, const StepCallback& on_step = {});

/// Convenience: opens a session on `backend` and uses the default pool.
SessionResult run_session(const std::string& question, const UserDataset& ds, const ModelBackend& backend,
                          const retrieval::SearchTool* search, const AgentConfig& config,
                          const std::string& session_key = "", const StepCallback& on_step = {});

}  // namespace insight::agent
