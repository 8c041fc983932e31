#include <insight/agent/step_parser.hpp>

#include <array>
#include <cctype>

namespace insight::agent {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  return s;
}

bool consume(std::string_view& s, std::string_view prefix) {
  if (!s.starts_with(prefix)) return false;
  s.remove_prefix(prefix.size());
  return true;
}

/// Position of the first line starting with `label`, or npos.
std::size_t find_label_line(std::string_view s, std::string_view label) {
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::string_view line = s.substr(pos);
    std::size_t indent = 0;
    while (indent < line.size() && (line[indent] == ' ' || line[indent] == '\t')) ++indent;
    if (line.substr(indent).starts_with(label)) return pos + indent;
    const std::size_t nl = s.find('\n', pos);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return std::string_view::npos;
}

std::string parse_program(std::string_view body) {
  // body starts after "Analyze(" and must be ```...``` then ")".
  body = ltrim(body);
  if (!consume(body, "```")) throw ProtocolError("Analyze expects a program fenced by ```");
  const std::size_t close = body.find("```");
  if (close == std::string_view::npos) throw ProtocolError("unterminated ``` fence in Analyze");
  std::string_view program = body.substr(0, close);
  std::string_view rest = ltrim(body.substr(close + 3));
  if (!consume(rest, ")")) throw ProtocolError("missing ')' after the Analyze program");
  if (!trim(rest).empty()) throw ProtocolError("unexpected text after the act");

  // Optional language tag on the opening fence line.
  static constexpr std::array<std::string_view, 3> tags{"dsl", "insight", "text"};
  for (auto tag : tags) {
    if (program.starts_with(tag) && program.size() > tag.size() && program[tag.size()] == '\n') {
      program.remove_prefix(tag.size());
      break;
    }
  }
  program = trim(program);
  if (program.empty()) throw ProtocolError("empty Analyze program");
  return std::string(program);
}

std::string parse_request(std::string_view body) {
  // body starts after "Search(".
  body = ltrim(body);
  if (consume(body, "request")) {
    body = ltrim(body);
    if (!consume(body, "=")) throw ProtocolError("expected '=' after request");
    body = ltrim(body);
  }
  if (body.empty() || (body.front() != '\'' && body.front() != '"')) {
    throw ProtocolError("Search expects a quoted request");
  }
  const char quote = body.front();
  std::string text;
  std::size_t i = 1;
  bool closed = false;
  for (; i < body.size(); ++i) {
    const char c = body[i];
    if (c == '\\' && i + 1 < body.size()) {
      text.push_back(body[++i]);
    } else if (c == quote) {
      closed = true;
      ++i;
      break;
    } else {
      text.push_back(c);
    }
  }
  if (!closed) throw ProtocolError("unterminated Search request");
  std::string_view rest = ltrim(body.substr(i));
  if (!consume(rest, ")")) throw ProtocolError("missing ')' after the Search request");
  if (!trim(rest).empty()) throw ProtocolError("unexpected text after the act");
  if (trim(text).empty()) throw ProtocolError("empty Search request");
  return std::string(trim(text));
}

std::string escape_request(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string fence(std::string_view program) {
  if (program.find('\n') == std::string_view::npos) return "```" + std::string(program) + "```";
  return "```\n" + std::string(program) + "\n```";
}

}  // namespace

StepAction parse_step(std::string_view output) {
  std::string_view s = trim(output);
  if (s.empty()) throw ProtocolError("empty model output");

  StepAction action;
  if (s.starts_with("Thought:")) {
    const std::size_t act = find_label_line(s, "Act:");
    const std::size_t fin = find_label_line(s, "Finish:");
    const std::size_t next = std::min(act, fin);
    if (next == std::string_view::npos) throw ProtocolError("thought is not followed by an Act or Finish line");
    action.thought = std::string(trim(s.substr(8, next - 8)));
    s = s.substr(next);
  }

  if (consume(s, "Finish:")) {
    const std::string_view answer = trim(s);
    if (answer.empty()) throw ProtocolError("empty Finish answer");
    action.type = StepAction::Type::finish;
    action.payload = std::string(answer);
    return action;
  }
  if (!consume(s, "Act:")) {
    throw ProtocolError("expected 'Thought:', 'Act:' or 'Finish:' at the start of the output");
  }
  s = ltrim(s);
  action.type = StepAction::Type::act;
  if (consume(s, "Analyze(")) {
    action.tool = Tool::analyze;
    action.payload = parse_program(s);
  } else if (consume(s, "Search(")) {
    action.tool = Tool::search;
    action.payload = parse_request(s);
  } else {
    throw ProtocolError("unknown act; expected Analyze(...) or Search(...)");
  }
  return action;
}

std::string serialize_step(const TraceStep& step) {
  switch (step.kind) {
    case StepKind::thought: return "Thought: " + step.content;
    case StepKind::finish: return "Finish: " + step.content;
    case StepKind::observe: return "Observe: " + step.content;
    case StepKind::act:
      if (step.tool == Tool::search) return "Act: Search(request='" + escape_request(step.content) + "')";
      return "Act: Analyze(" + fence(step.content) + ")";
    case StepKind::protocol_error: return "";
  }
  return "";
}

std::string serialize_action(const StepAction& action) {
  std::string out;
  if (action.thought) out += "Thought: " + *action.thought + "\n";
  TraceStep s;
  s.kind = action.type == StepAction::Type::finish ? StepKind::finish : StepKind::act;
  s.tool = action.tool;
  s.content = action.payload;
  return out + serialize_step(s);
}

}  // namespace insight::agent
