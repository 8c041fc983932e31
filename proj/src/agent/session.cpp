#include <insight/agent/session.hpp>

#include <insight/agent/step_parser.hpp>
#include <insight/dsl/evaluator.hpp>
#include <insight/dsl/value.hpp>
#include <insight/http_client.hpp>

#include <map>
#include <mutex>

namespace insight::agent {

namespace {

constexpr std::string_view kCorrective =
    "(Your last reply did not follow the step format. Reply with \"Thought:\" and then exactly one "
    "\"Act:\" line or a \"Finish:\" line.)";

bool starts_with_label(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\n' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  return s.starts_with("Thought:") || s.starts_with("Act:") || s.starts_with("Finish:");
}

}  // namespace

void AgentConfig::validate() const {
  if (max_steps < 1) throw ConfigError("max_steps must be at least 1");
  if (few_shot_k < 0) throw ConfigError("few_shot_k must not be negative");
  if (retry_on_protocol_error < 0) throw ConfigError("retry_on_protocol_error must not be negative");
  for (Tool t : tools_enabled) {
    if (t != Tool::analyze && t != Tool::search) throw ConfigError("unknown tool");
  }
}

const std::vector<FewShotExample>& default_agent_few_shots(std::size_t k, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, std::uint64_t>, std::vector<FewShotExample>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find({k, seed});
  if (it == cache.end()) {
    it = cache.emplace(std::pair{k, seed}, select_few_shots(agent_pool(), k, HashEmbedder(), seed)).first;
  }
  return it->second;
}

std::string tool_disabled_observation(Tool tool) {
  return std::string(dsl::kErrorPrefix) + "ToolDisabled: " + std::string(to_string(tool));
}

SessionResult run_session(const std::string& question, const UserDataset& ds, ModelSession& model,
                          const retrieval::SearchTool* search, const AgentConfig& config,
                          const std::vector<FewShotExample>& few_shots, const StepCallback& on_step) {
  config.validate();
  SessionResult res;
  const std::string schema = schema_card();

  auto push = [&](StepKind kind, std::optional<Tool> tool, std::string content, bool ok) {
    TraceStep s;
    s.seq = static_cast<int>(res.trace.size());
    s.kind = kind;
    s.tool = tool;
    s.content = std::move(content);
    s.ok = ok;
    res.trace.push_back(s);
    if (on_step) on_step(res.trace.back());
  };

  int retries_left = config.retry_on_protocol_error;
  std::string note;
  int turn = 0;
  while (turn < config.max_steps) {
    const std::string prompt =
        build_prompt(schema, few_shots, res.trace, question, config.tools_enabled, note);
    std::string output;
    try {
      output = apply_stop(model.complete(prompt, kStopSequences), kStopSequences);
    } catch (const BackendError& e) {
      push(StepKind::protocol_error, std::nullopt, std::string("BackendError: ") + e.what(), false);
      return res;
    } catch (const http::TransportError& e) {
      push(StepKind::protocol_error, std::nullopt, std::string("BackendError: ") + e.what(), false);
      return res;
    }
    // The prompt already ends with "Thought:", so a bare continuation is
    // the thought itself.
    if (!starts_with_label(output)) output = "Thought: " + output;

    StepAction action;
    try {
      action = parse_step(output);
    } catch (const ProtocolError& e) {
      if (retries_left > 0) {
        --retries_left;
        ++res.protocol_retries;
        note = std::string(kCorrective);
        continue;
      }
      push(StepKind::protocol_error, std::nullopt, std::string("ProtocolError: ") + e.what() + "\n" + output, false);
      return res;
    }
    note.clear();
    retries_left = config.retry_on_protocol_error;
    ++turn;

    if (action.thought && !action.thought->empty()) push(StepKind::thought, std::nullopt, *action.thought, true);
    if (action.type == StepAction::Type::finish) {
      push(StepKind::finish, std::nullopt, action.payload, true);
      res.final_answer = action.payload;
      return res;
    }

    push(StepKind::act, action.tool, action.payload, true);
    std::string observation;
    if (!config.tools_enabled.count(action.tool) || (action.tool == Tool::search && !search)) {
      observation = tool_disabled_observation(action.tool);
    } else if (action.tool == Tool::analyze) {
      observation = dsl::analyze(action.payload, ds);
    } else {
      try {
        observation = retrieval::format_search_observation(search->search(action.payload, 3));
      } catch (const Error& e) {
        observation = std::string(dsl::kErrorPrefix) + "SearchError: " + e.what();
      }
    }
    const bool ok = !observation.starts_with(dsl::kErrorPrefix);
    push(StepKind::observe, action.tool, std::move(observation), ok);
  }
  return res;
}

SessionResult run_session(const std::string& question, const UserDataset& ds, const ModelBackend& backend,
                          const retrieval::SearchTool* search, const AgentConfig& config,
                          const std::string& session_key, const StepCallback& on_step) {
  config.validate();
  SessionInfo info;
  info.key = session_key;
  info.question = question;
  info.dataset = &ds;
  auto model = backend.open(info);
  const auto& shots = default_agent_few_shots(static_cast<std::size_t>(config.few_shot_k), config.seed);
  return run_session(question, ds, *model, search, config, shots, on_step);
}

}  // namespace insight::agent
