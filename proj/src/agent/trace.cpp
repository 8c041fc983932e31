#include <insight/agent/trace.hpp>

#include <insight/errors.hpp>

#include <nlohmann/json.hpp>

namespace insight::agent {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(StepKind k) {
  switch (k) {
    case StepKind::thought: return "thought";
    case StepKind::act: return "act";
    case StepKind::observe: return "observe";
    case StepKind::finish: return "finish";
    case StepKind::protocol_error: return "protocol_error";
  }
  return "?";
}

std::string_view to_string(Tool t) { return t == Tool::analyze ? "analyze" : "search"; }

std::optional<StepKind> parse_step_kind(std::string_view s) {
  for (auto k : {StepKind::thought, StepKind::act, StepKind::observe, StepKind::finish,
                 StepKind::protocol_error}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::optional<Tool> parse_tool(std::string_view s) {
  if (s == "analyze") return Tool::analyze;
  if (s == "search") return Tool::search;
  return std::nullopt;
}

std::vector<std::string> check_trace(const Trace& trace) {
  std::vector<std::string> out;
  bool finished = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const TraceStep& s = trace[i];
    const std::string where = "step " + std::to_string(i);
    if (s.seq != static_cast<int>(i)) out.push_back(where + ": seq " + std::to_string(s.seq));
    if (finished) out.push_back(where + ": follows a finish step");
    if (s.kind == StepKind::finish) finished = true;
    if ((s.kind == StepKind::act || s.kind == StepKind::observe) && !s.tool) {
      out.push_back(where + ": " + std::string(to_string(s.kind)) + " without a tool");
    }
    if (s.kind == StepKind::observe) {
      if (i == 0 || trace[i - 1].kind != StepKind::act || trace[i - 1].tool != s.tool) {
        out.push_back(where + ": observe does not follow an act of the same tool");
      }
    }
    if (s.kind == StepKind::act && (i + 1 >= trace.size() || trace[i + 1].kind != StepKind::observe)) {
      // An act may only end the trace when the session was cut off by a
      // backend failure, which is recorded as protocol_error.
      if (i + 1 < trace.size()) out.push_back(where + ": act is not followed by its observation");
    }
  }
  return out;
}

TraceStats trace_stats(const Trace& trace) {
  TraceStats st;
  bool error_seen = false;
  bool success_after_error = false;
  for (const auto& s : trace) {
    if (s.kind == StepKind::act && s.tool == Tool::analyze) st.used_code = true;
    if (s.kind == StepKind::observe && s.tool == Tool::analyze) {
      if (!s.ok) error_seen = true;
      else if (error_seen) success_after_error = true;
    }
    if (s.kind == StepKind::finish) st.finished = true;
  }
  st.had_error = error_seen;
  st.recovered = error_seen && success_after_error && st.finished;
  return st;
}

std::string to_json(const TraceStep& step) {
  ordered_json j;
  j["seq"] = step.seq;
  j["kind"] = to_string(step.kind);
  if (step.tool) j["tool"] = to_string(*step.tool);
  j["content"] = step.content;
  j["ok"] = step.ok;
  return j.dump();
}

TraceStep step_from_json(std::string_view line) {
  try {
    const auto j = ordered_json::parse(line);
    TraceStep s;
    s.seq = j.at("seq").get<int>();
    auto kind = parse_step_kind(j.at("kind").get<std::string>());
    if (!kind) throw ParseError("unknown step kind '" + j.at("kind").get<std::string>() + "'");
    s.kind = *kind;
    if (j.contains("tool") && !j["tool"].is_null()) {
      s.tool = parse_tool(j["tool"].get<std::string>());
      if (!s.tool) throw ParseError("unknown tool '" + j["tool"].get<std::string>() + "'");
    }
    s.content = j.at("content").get<std::string>();
    s.ok = j.value("ok", true);
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("trace step: ") + e.what());
  }
}

std::string to_jsonl(const Trace& trace) {
  std::string out;
  for (const auto& s : trace) out += to_json(s) + "\n";
  return out;
}

Trace parse_trace_jsonl(std::string_view text) {
  Trace out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    out.push_back(step_from_json(line));
  }
  return out;
}

}  // namespace insight::agent
