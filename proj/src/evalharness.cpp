#include <insight/evalharness.hpp>

#include <insight/agent/step_parser.hpp>
#include <insight/dsl/evaluator.hpp>
#include <insight/http_client.hpp>
#include <insight/rng.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <set>
#include <thread>
#include <tuple>

namespace insight::eval {

using ordered_json = nlohmann::ordered_json;
using agent::StepKind;
using agent::Tool;
using agent::TraceStep;

std::string_view to_string(Method m) {
  switch (m) {
    case Method::agent: return "agent";
    case Method::codegen: return "codegen";
    case Method::numeric: return "numeric";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view s) {
  for (auto m : {Method::agent, Method::codegen, Method::numeric}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scoring

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::optional<std::string> last_numeric_token(std::string_view text) {
  std::optional<std::string> last;
  std::size_t i = 0;
  while (i < text.size()) {
    const bool starts = is_digit(text[i]) || (text[i] == '.' && i + 1 < text.size() && is_digit(text[i + 1]));
    if (!starts) {
      ++i;
      continue;
    }
    // Digits glued to a word ("user_0003", "q00012") are identifiers.
    if (i > 0 && (std::isalpha(static_cast<unsigned char>(text[i - 1])) || text[i - 1] == '_')) {
      while (i < text.size() && (is_alnum(text[i]) || text[i] == '_')) ++i;
      continue;
    }
    std::string tok;
    if (i > 0 && text[i - 1] == '-' && (i < 2 || !is_alnum(text[i - 2]))) tok.push_back('-');
    std::size_t run = 0;
    while (i < text.size() && is_digit(text[i])) {
      tok.push_back(text[i++]);
      ++run;
    }
    if (run == 0) tok.push_back('0');
    // Thousands groups: ",ddd" not followed by another digit.
    if (run >= 1 && run <= 3) {
      while (i + 3 < text.size() && text[i] == ',' && is_digit(text[i + 1]) && is_digit(text[i + 2]) &&
             is_digit(text[i + 3]) && (i + 4 >= text.size() || !is_digit(text[i + 4]))) {
        tok.append(text.substr(i + 1, 3));
        i += 4;
      }
    }
    if (i + 1 < text.size() && text[i] == '.' && is_digit(text[i + 1])) {
      tok.push_back('.');
      ++i;
      while (i < text.size() && is_digit(text[i])) tok.push_back(text[i++]);
    }
    last = std::move(tok);
  }
  return last;
}

std::optional<double> extract_last_number(std::string_view text) {
  auto tok = last_numeric_token(text);
  if (!tok) return std::nullopt;
  return std::strtod(tok->c_str(), nullptr);
}

std::int64_t round_hundredths(std::string_view decimal) {
  bool negative = false;
  if (!decimal.empty() && (decimal.front() == '-' || decimal.front() == '+')) {
    negative = decimal.front() == '-';
    decimal.remove_prefix(1);
  }
  const std::size_t dot = decimal.find('.');
  const std::string_view whole = decimal.substr(0, dot);
  const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : decimal.substr(dot + 1);
  std::int64_t units = 0;
  for (char c : whole) {
    if (c != ',') units = units * 10 + (c - '0');
  }
  const int d1 = frac.size() > 0 ? frac[0] - '0' : 0;
  const int d2 = frac.size() > 1 ? frac[1] - '0' : 0;
  const int d3 = frac.size() > 2 ? frac[2] - '0' : 0;
  units = units * 100 + d1 * 10 + d2;
  if (d3 >= 5) ++units;  // half away from zero on the magnitude
  return negative ? -units : units;
}

std::int64_t round_hundredths(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", v);
  return round_hundredths(std::string_view(buf));
}

const std::vector<std::string>& no_data_phrases() {
  static const std::vector<std::string> phrases = {
      "no data",          "not enough data",  "insufficient data", "cannot answer",  "can't answer",
      "can not answer",   "unable to answer", "no record",         "not recorded",   "no information",
      "not available",    "cannot determine", "can't determine",   "unable to determine",
      "don't have any",   "do not have any",  "no sessions",       "no activities",
  };
  return phrases;
}

bool exact_match(std::string_view answer, std::optional<double> gold, const MatchOptions& opts) {
  const auto tok = last_numeric_token(answer);
  if (!gold) {
    if (answer.find("NO_DATA") != std::string_view::npos) return true;
    if (tok) return false;
    std::string lower(answer);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    for (const auto& p : no_data_phrases()) {
      if (lower.find(p) != std::string::npos) return true;
    }
    return false;
  }
  if (!tok) return false;
  if (opts.absolute_tolerance) return std::fabs(std::strtod(tok->c_str(), nullptr) - *gold) <= 0.005;
  return round_hundredths(std::string_view(*tok)) == round_hundredths(*gold);
}

std::pair<double, double> bootstrap_ci(const std::vector<bool>& correct, double level, int resamples,
                                       std::uint64_t seed) {
  if (correct.empty()) throw ConfigError("bootstrap over an empty list");
  if (resamples < 1) throw ConfigError("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must be in (0, 1)");
  const std::size_t n = correct.size();
  Rng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  for (auto& m : means) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) hits += correct[rng.below(n)] ? 1 : 0;
    m = double(hits) / double(n);
  }
  std::sort(means.begin(), means.end());
  auto quantile = [&](double q) {
    const double pos = q * double(means.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (pos - double(lo)) * (means[hi] - means[lo]);
  };
  const double alpha = (1.0 - level) / 2.0;
  double low = quantile(alpha), high = quantile(1.0 - alpha);
  const double point = double(std::count(correct.begin(), correct.end(), true)) / double(n);
  // Percentile intervals can miss the point estimate for tiny samples.
  low = std::min(low, point);
  high = std::max(high, point);
  return {low, high};
}

// ---------------------------------------------------------------------------
// Reports

std::optional<double> error_rate(const std::vector<MethodResult>& results) {
  std::size_t used = 0, errored = 0;
  for (const auto& r : results) {
    const auto st = agent::trace_stats(r.trace);
    used += st.used_code;
    errored += st.had_error;
  }
  if (used == 0) return std::nullopt;
  return double(errored) / double(used);
}

std::optional<double> recovery_rate(const std::vector<MethodResult>& results) {
  std::size_t errored = 0, recovered = 0;
  for (const auto& r : results) {
    const auto st = agent::trace_stats(r.trace);
    errored += st.had_error;
    recovered += st.recovered;
  }
  if (errored == 0) return std::nullopt;
  return double(recovered) / double(errored);
}

EvalReport make_report(Method method, const std::vector<MethodResult>& results, std::uint64_t seed,
                       int resamples) {
  std::vector<MethodResult> scored;
  for (const auto& r : results) {
    if (r.scored) scored.push_back(r);
  }
  if (scored.empty()) throw ConfigError("no scored results to report");
  EvalReport rep;
  rep.method = method;
  rep.n = scored.size();
  std::vector<bool> correct;
  std::map<std::string, std::pair<std::size_t, std::size_t>> cats;
  for (const auto& r : scored) {
    correct.push_back(r.correct);
    if (!r.category.empty()) {
      auto& c = cats[r.category];
      c.first += r.correct;
      ++c.second;
    }
    const auto st = agent::trace_stats(r.trace);
    rep.used_code += st.used_code;
    rep.errored += st.had_error;
    rep.recovered += st.recovered;
  }
  rep.accuracy = double(std::count(correct.begin(), correct.end(), true)) / double(rep.n);
  rep.accuracy_ci = bootstrap_ci(correct, 0.95, resamples, seed);
  rep.error_rate = error_rate(scored);
  rep.recovery_rate = recovery_rate(scored);
  for (const auto& [cat, c] : cats) rep.per_category[cat] = double(c.first) / double(c.second);
  return rep;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", v * 100.0);
  return buf;
}

std::string rate(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *v);
  return buf;
}

ordered_json opt_json(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

std::string render_markdown(const std::vector<EvalReport>& reports) {
  std::string out = "| Method | N | Accuracy | 95% CI | Error rate | Recovery rate |\n";
  out += "|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    out += "| " + std::string(to_string(r.method)) + " | " + std::to_string(r.n) + " | " + pct(r.accuracy) +
           " | " + pct(r.accuracy_ci.first) + " - " + pct(r.accuracy_ci.second) + " | " + rate(r.error_rate) +
           " (" + std::to_string(r.errored) + "/" + std::to_string(r.used_code) + ") | " + rate(r.recovery_rate) +
           " (" + std::to_string(r.recovered) + "/" + std::to_string(r.errored) + ") |\n";
  }
  std::set<std::string> cats;
  for (const auto& r : reports) {
    for (const auto& [c, _] : r.per_category) cats.insert(c);
  }
  if (cats.empty()) return out;
  out += "\n### Accuracy by category\n\n| Category |";
  for (const auto& r : reports) out += " " + std::string(to_string(r.method)) + " |";
  out += "\n|---|";
  for (std::size_t i = 0; i < reports.size(); ++i) out += "---|";
  out += "\n";
  for (const auto& c : cats) {
    out += "| " + c + " |";
    for (const auto& r : reports) {
      auto it = r.per_category.find(c);
      out += " " + (it == r.per_category.end() ? std::string("-") : pct(it->second)) + " |";
    }
    out += "\n";
  }
  return out;
}

std::string report_json(const std::vector<EvalReport>& reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json j;
    j["method"] = to_string(r.method);
    j["n"] = r.n;
    j["accuracy"] = r.accuracy;
    j["accuracy_ci"] = {r.accuracy_ci.first, r.accuracy_ci.second};
    j["error_rate"] = opt_json(r.error_rate);
    j["recovery_rate"] = opt_json(r.recovery_rate);
    j["used_code"] = r.used_code;
    j["errored"] = r.errored;
    j["recovered"] = r.recovered;
    j["per_category"] = ordered_json::object();
    for (const auto& [c, v] : r.per_category) j["per_category"][c] = v;
    arr.push_back(std::move(j));
  }
  return ordered_json{{"reports", arr}}.dump(2) + "\n";
}

std::vector<EvalReport> parse_report_json(std::string_view text) {
  std::vector<EvalReport> out;
  try {
    const auto j = ordered_json::parse(text);
    for (const auto& r : j.at("reports")) {
      EvalReport rep;
      auto m = parse_method(r.at("method").get<std::string>());
      if (!m) throw ParseError("unknown method in report");
      rep.method = *m;
      rep.n = r.at("n").get<std::size_t>();
      rep.accuracy = r.at("accuracy").get<double>();
      rep.accuracy_ci = {r.at("accuracy_ci").at(0).get<double>(), r.at("accuracy_ci").at(1).get<double>()};
      if (!r.at("error_rate").is_null()) rep.error_rate = r["error_rate"].get<double>();
      if (!r.at("recovery_rate").is_null()) rep.recovery_rate = r["recovery_rate"].get<double>();
      rep.used_code = r.value("used_code", std::size_t{0});
      rep.errored = r.value("errored", std::size_t{0});
      rep.recovered = r.value("recovered", std::size_t{0});
      for (const auto& [c, v] : r.at("per_category").items()) rep.per_category[c] = v.get<double>();
      out.push_back(std::move(rep));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what());
  }
  return out;
}

std::string to_json_line(const MethodResult& r) {
  ordered_json j;
  j["query_id"] = r.query_id;
  j["method"] = to_string(r.method);
  j["category"] = r.category;
  j["final_answer"] = r.final_answer ? ordered_json(*r.final_answer) : ordered_json(nullptr);
  j["parsed_number"] = opt_json(r.parsed_number);
  j["correct"] = r.correct;
  j["scored"] = r.scored;
  j["protocol_retries"] = r.protocol_retries;
  j["trace"] = ordered_json::array();
  for (const auto& s : r.trace) j["trace"].push_back(ordered_json::parse(agent::to_json(s)));
  return j.dump();
}

std::string to_jsonl(const std::vector<MethodResult>& results) {
  std::string out;
  for (const auto& r : results) out += to_json_line(r) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Runners

std::string codegen_prompt(const std::vector<agent::FewShotExample>& shots, const std::string& question) {
  std::string p =
      "You answer questions about one user's wearable data by writing a single program in the analysis "
      "language. Reply with exactly one line:\n"
      "Act: Analyze(```<program>```)\n"
      "If the data cannot answer the question, reply with \"Finish: <answer>\" instead. You will see the "
      "program's result once and then write the final answer after \"Finish:\".\n\n";
  p += agent::program_reference();
  p += "\nData schema:\n" + schema_card();
  if (!shots.empty()) {
    p += "\nExamples:\n";
    for (const auto& ex : shots) p += "\n" + agent::serialize_example(ex);
    p += "\nEnd of examples.\n";
  }
  p += "\nQuestion: " + question + "\n";
  return p;
}

std::string numeric_prompt(const std::vector<agent::FewShotExample>& shots, const UserDataset& ds,
                           const std::string& question, int days) {
  std::string p =
      "You answer questions about one user's wearable data by reading the tables below. Show your working "
      "after \"Thought:\" and give the final answer after \"Finish:\". When the question asks for a number, "
      "the final answer is just that number.\n";
  if (!shots.empty()) {
    p += "\nExamples:\n";
    for (const auto& ex : shots) p += "\n" + agent::serialize_example(ex);
    p += "\nEnd of examples.\n";
  }
  p += "\nToday is " + format_date(ds.today) + ".\n\n" + render_markdown(ds, days);
  p += "\nQuestion: " + question + "\nThought:";
  return p;
}

namespace {

struct TraceBuilder {
  agent::Trace trace;
  void push(StepKind kind, std::optional<Tool> tool, std::string content, bool ok = true) {
    TraceStep s;
    s.seq = static_cast<int>(trace.size());
    s.kind = kind;
    s.tool = tool;
    s.content = std::move(content);
    s.ok = ok;
    trace.push_back(std::move(s));
  }
};

std::string with_label(std::string output, std::string_view label) {
  std::string_view v = output;
  while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
  if (v.starts_with("Thought:") || v.starts_with("Act:") || v.starts_with("Finish:")) return output;
  return std::string(label) + " " + output;
}

const std::vector<agent::FewShotExample>& cached_shots(Method m, std::size_t k, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::tuple<int, std::size_t, std::uint64_t>, std::vector<agent::FewShotExample>> cache;
  std::lock_guard lock(mu);
  const auto key = std::tuple{static_cast<int>(m), k, seed};
  auto it = cache.find(key);
  if (it == cache.end()) {
    const auto& pool = m == Method::codegen ? agent::codegen_pool() : agent::numeric_pool();
    const std::size_t take = std::min(k, pool.size());
    it = cache.emplace(key, agent::select_few_shots(pool, take, agent::HashEmbedder(), seed)).first;
  }
  return it->second;
}

void run_codegen(MethodResult& res, agent::ModelSession& model, const bench::ObjectiveQuery& q,
                 const UserDataset& ds, const RunConfig& config) {
  TraceBuilder tb;
  const std::string prefix = codegen_prompt(cached_shots(Method::codegen, config.codegen_shots, config.seed),
                                            q.question);
  std::string output = agent::apply_stop(model.complete(prefix, agent::kStopSequences), agent::kStopSequences);
  agent::StepAction action;
  try {
    action = agent::parse_step(with_label(output, "Act:"));
  } catch (const agent::ProtocolError& e) {
    tb.push(StepKind::protocol_error, std::nullopt, std::string("ProtocolError: ") + e.what() + "\n" + output, false);
    res.trace = std::move(tb.trace);
    return;
  }
  if (action.type == agent::StepAction::Type::finish) {
    tb.push(StepKind::finish, std::nullopt, action.payload);
    res.final_answer = action.payload;
    res.trace = std::move(tb.trace);
    return;
  }
  if (action.tool != Tool::analyze) {
    tb.push(StepKind::protocol_error, std::nullopt, "ProtocolError: the single step must be an Analyze act", false);
    res.trace = std::move(tb.trace);
    return;
  }
  tb.push(StepKind::act, Tool::analyze, action.payload);
  const std::string obs = dsl::analyze(action.payload, ds);
  tb.push(StepKind::observe, Tool::analyze, obs, !obs.starts_with(dsl::kErrorPrefix));
  const std::string second = prefix + agent::serialize_history(tb.trace) + "Finish:";
  std::string answer = agent::apply_stop(model.complete(second, agent::kStopSequences), agent::kStopSequences);
  std::string_view a = answer;
  while (!a.empty() && std::isspace(static_cast<unsigned char>(a.front()))) a.remove_prefix(1);
  if (a.starts_with("Finish:")) a.remove_prefix(7);
  while (!a.empty() && std::isspace(static_cast<unsigned char>(a.front()))) a.remove_prefix(1);
  while (!a.empty() && std::isspace(static_cast<unsigned char>(a.back()))) a.remove_suffix(1);
  tb.push(StepKind::finish, std::nullopt, std::string(a));
  res.final_answer = std::string(a);
  res.trace = std::move(tb.trace);
}

void run_numeric(MethodResult& res, agent::ModelSession& model, const bench::ObjectiveQuery& q,
                 const UserDataset& ds, const RunConfig& config) {
  TraceBuilder tb;
  const std::string prompt = numeric_prompt(cached_shots(Method::numeric, config.numeric_shots, config.seed), ds,
                                            q.question, config.numeric_days);
  const std::string output =
      agent::apply_stop(model.complete(prompt, agent::kStopSequences), agent::kStopSequences);
  agent::StepAction action;
  try {
    action = agent::parse_step(with_label(output, "Thought:"));
    if (action.type != agent::StepAction::Type::finish) throw agent::ProtocolError("numeric answers may not use tools");
  } catch (const agent::ProtocolError& e) {
    tb.push(StepKind::protocol_error, std::nullopt, std::string("ProtocolError: ") + e.what() + "\n" + output, false);
    res.trace = std::move(tb.trace);
    return;
  }
  if (action.thought && !action.thought->empty()) tb.push(StepKind::thought, std::nullopt, *action.thought);
  tb.push(StepKind::finish, std::nullopt, action.payload);
  res.final_answer = action.payload;
  res.trace = std::move(tb.trace);
}

}  // namespace

MethodResult run_one(Method method, const bench::ObjectiveQuery& q, const UserDataset& ds,
                     const agent::ModelBackend& backend, const retrieval::SearchTool* search,
                     const RunConfig& config) {
  MethodResult res;
  res.query_id = q.id;
  res.method = method;
  res.category = q.category;

  agent::SessionInfo info;
  info.key = q.id;
  info.method = std::string(to_string(method));
  info.question = q.question;
  info.dataset = &ds;
  if (!q.gold_program.empty()) info.gold_program = q.gold_program;

  try {
    auto model = backend.open(info);
    switch (method) {
      case Method::agent: {
        const auto& shots =
            agent::default_agent_few_shots(static_cast<std::size_t>(config.agent.few_shot_k), config.seed);
        auto session = agent::run_session(q.question, ds, *model, search, config.agent, shots);
        res.trace = std::move(session.trace);
        res.final_answer = std::move(session.final_answer);
        res.protocol_retries = session.protocol_retries;
        break;
      }
      case Method::codegen: run_codegen(res, *model, q, ds, config); break;
      case Method::numeric: run_numeric(res, *model, q, ds, config); break;
    }
  } catch (const agent::BackendError& e) {
    TraceStep s;
    s.seq = static_cast<int>(res.trace.size());
    s.kind = StepKind::protocol_error;
    s.content = std::string("BackendError: ") + e.what();
    s.ok = false;
    res.trace.push_back(std::move(s));
  } catch (const http::TransportError& e) {
    TraceStep s;
    s.seq = static_cast<int>(res.trace.size());
    s.kind = StepKind::protocol_error;
    s.content = std::string("BackendError: ") + e.what();
    s.ok = false;
    res.trace.push_back(std::move(s));
  }

  if (res.final_answer) {
    res.parsed_number = extract_last_number(*res.final_answer);
    res.correct = exact_match(*res.final_answer, q.gold_answer, config.match);
  }
  return res;
}

std::vector<MethodResult> run_method(Method method, const std::vector<bench::ObjectiveQuery>& queries,
                                     const std::map<std::string, UserDataset>& datasets,
                                     const agent::ModelBackend& backend, const retrieval::SearchTool* search,
                                     const RunConfig& config) {
  config.agent.validate();
  for (const auto& q : queries) {
    if (!datasets.count(q.user_id)) throw ConfigError("query " + q.id + " names unknown user '" + q.user_id + "'");
  }
  std::vector<MethodResult> results(queries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      results[i] = run_one(method, queries[i], datasets.at(queries[i].user_id), backend, search, config);
    }
  };
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(queries.size())));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const MethodResult& a, const MethodResult& b) { return a.query_id < b.query_id; });
  return results;
}

// ---------------------------------------------------------------------------
// Open-ended

std::vector<OpenEndedQuery> parse_open_ended_jsonl(std::string_view text) {
  std::vector<OpenEndedQuery> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "open-ended line " + std::to_string(line_no);
    try {
      const auto j = ordered_json::parse(line);
      OpenEndedQuery q;
      q.id = j.at("id").get<std::string>();
      q.category = j.at("category").get<std::string>();
      q.question = j.at("question").get<std::string>();
      if (j.contains("user_id") && !j["user_id"].is_null()) q.user_id = j["user_id"].get<std::string>();
      if (std::find(kOpenEndedCategories.begin(), kOpenEndedCategories.end(), q.category) ==
          kOpenEndedCategories.end()) {
        throw ParseError(where + ": unknown category '" + q.category + "'");
      }
      if (q.question.empty()) throw ParseError(where + ": empty question");
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
  }
  return out;
}

std::vector<MethodResult> collect_open_ended(Method method, const std::vector<OpenEndedQuery>& queries,
                                             const std::map<std::string, UserDataset>& datasets,
                                             const agent::ModelBackend& backend,
                                             const retrieval::SearchTool* search, const RunConfig& config) {
  if (datasets.empty()) throw ConfigError("no users to ask open-ended questions about");
  std::vector<bench::ObjectiveQuery> as_queries;
  for (const auto& oq : queries) {
    bench::ObjectiveQuery q;
    q.id = oq.id;
    q.user_id = oq.user_id.value_or(datasets.begin()->first);
    q.category = oq.category;
    q.question = oq.question;
    as_queries.push_back(std::move(q));
  }
  auto results = run_method(method, as_queries, datasets, backend, search, config);
  for (auto& r : results) {
    r.scored = false;
    r.correct = false;
  }
  return results;
}

}  // namespace insight::eval
