#pragma once

#include <insight/agent/trace.hpp>
#include <insight/errors.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace insight::agent {

/// Model output that does not follow the step grammar.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// One model turn:
///   [Thought: <text>]
///   Act: Analyze(```<program>```)  |  Act: Search(request='<text>')  |  Finish: <text>
/// "Act:" and "Finish:" must start a line. Nothing may follow an act.
struct StepAction {
  enum class Type { act, finish };

  std::optional<std::string> thought;
  Type type = Type::finish;
  Tool tool = Tool::analyze;  // meaningful for acts
  std::string payload;        // program, search request or final answer

  friend bool operator==(const StepAction&, const StepAction&) = default;
};

/// Throws ProtocolError.
StepAction parse_step(std::string_view output);

/// Text form of one step as it appears in prompts; parse_step inverts it
/// for thought, act and finish steps.
std::string serialize_step(const TraceStep& step);
std::string serialize_action(const StepAction& action);

}  // namespace insight::agent
