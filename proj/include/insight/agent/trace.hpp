#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace insight::agent {

enum class StepKind { thought, act, observe, finish, protocol_error };
enum class Tool { analyze, search };

std::string_view to_string(StepKind k);
std::string_view to_string(Tool t);
std::optional<StepKind> parse_step_kind(std::string_view s);
std::optional<Tool> parse_tool(std::string_view s);

struct TraceStep {
  int seq = 0;
  StepKind kind = StepKind::thought;
  std::optional<Tool> tool;
  std::string content;
  bool ok = true;

  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

using Trace = std::vector<TraceStep>;

/// Ordering problems in a trace: dense seq from 0, every observe right
/// after an act of the same tool, at most one finish and nothing after it.
std::vector<std::string> check_trace(const Trace& trace);

struct TraceStats {
  bool used_code = false;  // at least one analyze act
  bool had_error = false;  // at least one failed analyze observation
  bool recovered = false;  // a successful analyze observation after a failed one, and finished
  bool finished = false;

  friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

TraceStats trace_stats(const Trace& trace);

/// {"seq", "kind", "tool"?, "content", "ok"}
std::string to_json(const TraceStep& step);
TraceStep step_from_json(std::string_view line);
std::string to_jsonl(const Trace& trace);
Trace parse_trace_jsonl(std::string_view text);

}  // namespace insight::agent
