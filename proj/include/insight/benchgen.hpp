#pragma once

#include <insight/datamodel.hpp>
#include <insight/oracle.hpp>
#include <insight/rng.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace insight::bench {

inline constexpr std::array<std::string_view, 6> kCategories = {
    "metric-aggregate",     "day-count-predicate",  "activity-aggregate",
    "cross-table-condition", "most-recent-activity", "percentage-of-days"};

/// No slot assignment can produce a usable query.
class DomainExhausted : public Error {
 public:
  using Error::Error;
};

struct SlotSpec {
  std::string domain;         // aggs | metrics | summable_metrics | periods | thresholds
                              // | duration_thresholds | activities | present_activities
  std::string form;           // phrasing variant used in the question
  std::string of;             // thresholds: the metric slot they belong to
  std::string distinct_from;  // slot whose value this one must differ from
};

struct QueryTemplate {
  std::string id;
  std::string category;
  std::string question_pattern;
  std::string program_pattern;
  std::map<std::string, SlotSpec> slots;
  /// Fixed parts of the query meaning; slot values fill in the rest.
  QuerySemantics semantics;
  bool fixed_period = false;
};

struct MetricPhrasing {
  std::string name;
  std::string agg_form;
  double threshold_lo = 0, threshold_hi = 0, threshold_step = 1;
};

struct ActivityPhrasing {
  std::string name, plural, gerund, did;
};

struct PeriodPhrase {
  std::string phrase;  // DSL period phrase
  std::string text;    // question wording
  PeriodSpec spec;
};

/// Templates plus the phrasing tables and slot domains they draw from.
struct TemplateLibrary {
  std::map<std::string, MetricPhrasing> metrics;
  std::vector<std::string> metric_order;
  std::vector<std::string> summable_metrics;
  std::map<std::string, ActivityPhrasing> activities;
  std::vector<PeriodPhrase> periods;
  double range_period_weight = 0.0;
  std::vector<std::pair<std::string, std::string>> aggs;  // (DSL method, question word)
  double duration_lo = 15, duration_hi = 90, duration_step = 5;
  std::vector<QueryTemplate> templates;

  const QueryTemplate& find(std::string_view id) const;

  /// Throws ConfigError when a template references unknown slots or
  /// domains, or when a program pattern fails to parse.
  static TemplateLibrary from_json(std::string_view text);
  /// data/templates.json
  static const TemplateLibrary& defaults();
};

struct ObjectiveQuery {
  std::string id;
  std::string user_id;
  std::string category;
  std::string question;
  std::string gold_program;
  std::optional<double> gold_answer;  // nullopt = NO_DATA
  bool expect_no_data = false;

  // In-memory only: where the query came from and what it means.
  std::string template_id;
  QuerySemantics semantics;
};

/// Slot values a caller pins instead of sampling, keyed by slot name.
/// PERIOD accepts a phrase from the library or "YYYY-MM-DD..YYYY-MM-DD".
using SlotOverrides = std::map<std::string, std::string>;

/// Samples slot values until the oracle yields a number (at most 20
/// attempts). Falls back to a NoData query flagged expect_no_data.
ObjectiveQuery instantiate(const TemplateLibrary& lib, const QueryTemplate& tpl,
                           const UserDataset& ds, Rng& rng, const SlotOverrides& fixed = {});

/// Round-robins templates over users until n distinct (user, question)
/// pairs exist. Ids are q00001, q00002, ...
std::vector<ObjectiveQuery> generate_benchmark(const std::vector<UserDataset>& users, int n_queries,
                                               std::uint64_t seed,
                                               const TemplateLibrary& lib = TemplateLibrary::defaults());

std::string to_json_line(const ObjectiveQuery& q);
std::string to_jsonl(const std::vector<ObjectiveQuery>& queries);
/// Reads benchmark JSONL; semantics and template_id are not restored.
std::vector<ObjectiveQuery> parse_jsonl(std::string_view text);

}  // namespace insight::bench
