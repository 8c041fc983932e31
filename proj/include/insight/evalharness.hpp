#pragma once

#include <insight/agent/session.hpp>
#include <insight/agent/trace.hpp>
#include <insight/benchgen.hpp>
#include <insight/datamodel.hpp>
#include <insight/retrieval.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace insight::eval {

enum class Method { agent, codegen, numeric };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view s);

// ---------------------------------------------------------------------------
// Scoring

/// The last numeric token: optional sign, digits (comma thousands
/// separators allowed), optional decimal part. A sign counts only at a
/// word boundary, so dates do not yield negative numbers. Separators are
/// dropped from the returned token.
std::optional<std::string> last_numeric_token(std::string_view text);
std::optional<double> extract_last_number(std::string_view text);

/// Rounds a decimal string half away from zero to hundredths, exactly.
std::int64_t round_hundredths(std::string_view decimal);
/// Same for a double, via its 9-decimal rendering.
std::int64_t round_hundredths(double v);

/// Lower-case phrases that declare an answer impossible.
const std::vector<std::string>& no_data_phrases();

struct MatchOptions {
  bool absolute_tolerance = false;  // |answer - gold| <= 0.005 instead of rounding
};

/// gold = nullopt means NoData.
bool exact_match(std::string_view answer, std::optional<double> gold, const MatchOptions& opts = {});

/// Percentile bootstrap of the mean. Throws ConfigError on an empty list.
std::pair<double, double> bootstrap_ci(const std::vector<bool>& correct, double level = 0.95,
                                       int resamples = 10000, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Results and reports

struct MethodResult {
  std::string query_id;
  Method method = Method::agent;
  std::string category;
  std::optional<std::string> final_answer;
  std::optional<double> parsed_number;
  bool correct = false;
  bool scored = true;  // false for open-ended queries
  agent::Trace trace;
  int protocol_retries = 0;
};

/// nullopt when the denominator is zero.
std::optional<double> error_rate(const std::vector<MethodResult>& results);
std::optional<double> recovery_rate(const std::vector<MethodResult>& results);

struct EvalReport {
  Method method = Method::agent;
  std::size_t n = 0;
  double accuracy = 0.0;
  std::pair<double, double> accuracy_ci{0.0, 0.0};
  std::optional<double> error_rate;
  std::optional<double> recovery_rate;
  std::size_t used_code = 0;
  std::size_t errored = 0;
  std::size_t recovered = 0;
  std::map<std::string, double> per_category;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Over scored results only. Throws ConfigError when there are none.
EvalReport make_report(Method method, const std::vector<MethodResult>& results, std::uint64_t seed = 0,
                       int resamples = 10000);

/// Markdown summary table plus an accuracy-by-category table when any
/// report has categories.
std::string render_markdown(const std::vector<EvalReport>& reports);
std::string report_json(const std::vector<EvalReport>& reports);
std::vector<EvalReport> parse_report_json(std::string_view text);

std::string to_json_line(const MethodResult& r);
std::string to_jsonl(const std::vector<MethodResult>& results);

// ---------------------------------------------------------------------------
// Runners

struct RunConfig {
  agent::AgentConfig agent;
  std::size_t codegen_shots = 8;
  std::size_t numeric_shots = 3;
  int numeric_days = 31;
  int jobs = 1;
  std::uint64_t seed = 0;
  MatchOptions match;
};

/// The prompts the two baselines send.
std::string codegen_prompt(const std::vector<agent::FewShotExample>& shots, const std::string& question);
std::string numeric_prompt(const std::vector<agent::FewShotExample>& shots, const UserDataset& ds,
                           const std::string& question, int days);

/// One query under one method. Never throws for model misbehaviour: the
/// failure is recorded in the trace and the item is incorrect.
MethodResult run_one(Method method, const bench::ObjectiveQuery& q, const UserDataset& ds,
                     const agent::ModelBackend& backend, const retrieval::SearchTool* search,
                     const RunConfig& config);

/// Runs every query, `config.jobs` at a time; results come back sorted by
/// query id. Throws ConfigError for a query whose user is unknown.
std::vector<MethodResult> run_method(Method method, const std::vector<bench::ObjectiveQuery>& queries,
                                     const std::map<std::string, UserDataset>& datasets,
                                     const agent::ModelBackend& backend, const retrieval::SearchTool* search,
                                     const RunConfig& config);

// ---------------------------------------------------------------------------
// Open-ended queries: collected, never scored

inline constexpr std::array<std::string_view, 9> kOpenEndedCategories = {
    "Correlation", "General Knowledge", "Problematic",      "Personal Min/Max/Avg.", "Trend",
    "Summary",     "Compare Time Periods", "Compare to Cohort", "Anomaly"};

struct OpenEndedQuery {
  std::string id;
  std::string category;
  std::string question;
  std::optional<std::string> user_id;
};

/// {"id", "category", "question", "user_id"?} per line. Throws ParseError.
std::vector<OpenEndedQuery> parse_open_ended_jsonl(std::string_view text);

/// Queries without a user_id go to the first user by id.
std::vector<MethodResult> collect_open_ended(Method method, const std::vector<OpenEndedQuery>& queries,
                                             const std::map<std::string, UserDataset>& datasets,
                                             const agent::ModelBackend& backend,
                                             const retrieval::SearchTool* search, const RunConfig& config);

}  // namespace insight::eval
