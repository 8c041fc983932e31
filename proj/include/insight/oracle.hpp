#pragma once

#include <insight/datamodel.hpp>

#include <string>

namespace insight::bench {

/// Period of a query in structured form. The oracle never reads the DSL
/// phrase; it works from these fields alone.
struct PeriodSpec {
  enum class Kind { all, yesterday, last_n_days, range };
  Kind kind = Kind::all;
  int n = 0;  // last_n_days
  int y1 = 0, m1 = 0, d1 = 0;  // range start (inclusive)
  int y2 = 0, m2 = 0, d2 = 0;  // range end (inclusive)

  friend bool operator==(const PeriodSpec&, const PeriodSpec&) = default;
};

enum class SemanticKind {
  daily_agg,
  corr,
  days_count,
  activity_count,
  activity_agg,
  metric_on_activity_days,
  activity_on_threshold_days,
  most_recent_metric,
  most_recent_day_activities,
  pct_days,
  pct_activity_days,
};

/// What an objective query asks, independent of how its gold program is
/// written. Fields not used by a kind are left empty.
struct QuerySemantics {
  SemanticKind kind = SemanticKind::daily_agg;
  std::string agg;        // mean | sum | min | max | median | std | count
  std::string metric;     // daily column
  std::string metric2;    // second daily column (corr)
  std::string activity;   // activity type
  std::string field;      // activity column being aggregated
  std::string op;         // comparison against `number`: < <= > >= == !=
  double number = 0.0;
  std::string filter_op;  // optional duration filter on activities, against `number`
  PeriodSpec period;

  friend bool operator==(const QuerySemantics&, const QuerySemantics&) = default;
};

struct OracleAnswer {
  enum class State { number, no_data, undefined };
  State state = State::no_data;
  double value = 0.0;

  static OracleAnswer of(double v) { return {State::number, v}; }
  static OracleAnswer none() { return {State::no_data, 0.0}; }
  /// The question has no meaningful answer (e.g. a percentage over zero days).
  static OracleAnswer undefined() { return {State::undefined, 0.0}; }
};

/// Brute-force answer by direct loops over the records. Shares no code
/// with the DSL evaluator: dates, column access, filtering and statistics
/// are all restated here.
OracleAnswer oracle_answer(const QuerySemantics& q, const UserDataset& ds);

std::string to_string(SemanticKind k);
SemanticKind parse_semantic_kind(const std::string& s);

}  // namespace insight::bench
