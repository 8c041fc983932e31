#include <insight/agent/prompt.hpp>

#include <insight/agent/step_parser.hpp>

namespace insight::agent {

std::string program_reference() {
  return "Program reference:\n"
         "  daily[\"steps\"]                     a column of the daily table\n"
         "  activities[\"calories\"]             a column of the activity table\n"
         "  context[\"age\"]                     a demographic field\n"
         "  .during(\"last 7 days\")             keep rows in a period: today, yesterday, last N days, "
         "last week, last month, YYYY-MM-DD, YYYY-MM-DD..YYYY-MM-DD\n"
         "  .where(activityName == \"Run\" and duration > 30)   keep rows matching every condition\n"
         "  .mean() .sum() .min() .max() .median() .std() .count()\n"
         "  a.corr(b)                          correlation of two daily series on shared days\n"
         "  days_where(daily[\"steps\"] > 10000) the days matching a condition; .count() counts them\n"
         "  x.on(days)  x.dates()              restrict rows to a set of days; the days of a selection\n"
         "  most_recent_day_with(activityName == \"Yoga\")   the latest day with a matching activity\n"
         "  let x = <expr>; ...                name an intermediate value\n"
         "  + - * / and (a, b) for several values at once\n";
}

std::string system_instructions(const ToolSet& tools) {
  const bool analyze = tools.count(Tool::analyze) > 0;
  const bool search = tools.count(Tool::search) > 0;
  std::string s =
      "You are a personal health assistant. You answer one user's questions about their own wearable "
      "data and about health in general. Work in steps. Each reply is one step:\n"
      "Thought: <your reasoning about what to do next>\n"
      "followed by exactly one of\n";
  if (analyze) s += "Act: Analyze(```<program>```)\n";
  if (search) s += "Act: Search(request='<what to look up>')\n";
  s += "Finish: <your answer to the user>\n"
       "After an Act line, stop writing. The result comes back as \"Observe: <result>\" and you continue "
       "with a new Thought.\n\n";
  s += "Tools:\n";
  if (analyze) {
    s += "- Analyze runs a program over the user's tables and returns its value. Failures come back as "
         "\"#ERROR#: <kind>: <message>\"; read the message, fix the program and try again. NO_DATA means "
         "the data holds nothing for that selection.\n";
  }
  if (search) {
    s += "- Search looks up trusted health information and returns up to three passages, each with its "
         "source URL. Cite sources you rely on.\n";
  }
  if (!analyze && !search) s += "- none; answer from what you know.\n";
  if (analyze) {
    s += "\n" + program_reference();
  }
  s += "\nWhen the data cannot answer the question, say so rather than guess. When the question asks for "
       "a number, end the answer with that number.\n";
  return s;
}

std::string serialize_history(const Trace& history) {
  std::string out;
  for (const auto& step : history) {
    if (step.kind == StepKind::protocol_error) continue;
    out += serialize_step(step) + "\n";
  }
  return out;
}

std::string serialize_example(const FewShotExample& ex) {
  return "Question: " + ex.query + "\n" + serialize_history(ex.trajectory);
}

std::string build_prompt(const std::string& schema_card, const std::vector<FewShotExample>& few_shots,
                         const Trace& history, const std::string& question, const ToolSet& tools,
                         const std::string& note) {
  std::string p = system_instructions(tools);
  p += "\nData schema:\n" + schema_card;
  if (!schema_card.empty() && schema_card.back() != '\n') p += "\n";
  if (!few_shots.empty()) {
    p += "\nExamples:\n";
    for (const auto& ex : few_shots) p += "\n" + serialize_example(ex);
    p += "\nEnd of examples.\n";
  }
  p += "\nQuestion: " + question + "\n" + serialize_history(history);
  if (!note.empty()) p += note + "\n";
  p += "Thought:";
  return p;
}

}  // namespace insight::agent
