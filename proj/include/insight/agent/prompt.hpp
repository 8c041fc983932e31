#pragma once

#include <insight/agent/fewshot.hpp>
#include <insight/agent/trace.hpp>

#include <set>
#include <string>
#include <vector>

namespace insight::agent {

using ToolSet = std::set<Tool>;

inline const ToolSet kAllTools{Tool::analyze, Tool::search};

/// Short reference for the analysis language.
std::string program_reference();

/// Step grammar, tool descriptions and a short reference for the
/// analysis language. Tools outside `tools` are not described.
std::string system_instructions(const ToolSet& tools = kAllTools);

/// "Question: q" followed by one serialized step per line.
std::string serialize_example(const FewShotExample& ex);

/// Serialized steps; protocol_error steps are skipped.
std::string serialize_history(const Trace& history);

/// Instructions, schema card, examples, then the live question and the
/// steps so far, ending with "Thought:". `note` (a corrective message
/// after a malformed reply) goes just before the trailing "Thought:".
std::string build_prompt(const std::string& schema_card, const std::vector<FewShotExample>& few_shots,
                         const Trace& history, const std::string& question, const ToolSet& tools = kAllTools,
                         const std::string& note = "");

/// The model is stopped before it writes its own observation.
inline const std::vector<std::string> kStopSequences{"Observe:"};

}  // namespace insight::agent
