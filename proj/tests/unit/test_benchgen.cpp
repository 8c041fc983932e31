#include <doctest.h>

#include "../support.hpp"

#include <insight/benchgen.hpp>
#include <insight/dsl/evaluator.hpp>
#include <insight/dsl/parser.hpp>
#include <insight/synthgen.hpp>

#include <cmath>
#include <set>

using namespace insight;
using namespace insight::bench;

namespace {

std::vector<UserDataset> users(int n, std::uint64_t seed = 0) {
  auto cfg = synth::GeneratorConfig::defaults();
  cfg.seed = seed;
  std::vector<UserDataset> out;
  for (int i = 0; i < n; ++i) out.push_back(synth::synthesize_user(cfg, i));
  return out;
}

}  // namespace

TEST_CASE("the shipped template library loads") {
  const auto& lib = TemplateLibrary::defaults();
  CHECK(lib.templates.size() >= 15);
  std::map<std::string, int> per_category;
  for (const auto& t : lib.templates) per_category[t.category]++;
  for (auto c : kCategories) CHECK(per_category[std::string(c)] >= 2);
}

TEST_CASE("template libraries with broken programs are rejected") {
  const std::string bad = R"({"metrics": {}, "activities": {}, "periods": [], "aggs": {},
    "templates": [{"id": "t", "category": "metric-aggregate", "question": "q $METRIC",
                   "program": "daily[\"$METRIC\"].mean(", "slots": {"METRIC": {"domain": "metrics"}},
                   "semantics": {"kind": "daily_agg", "agg": "mean"}}]})";
  CHECK_THROWS_AS(TemplateLibrary::from_json(bad), ConfigError);
}

TEST_CASE("instantiating the average-steps template") {
  const auto& lib = TemplateLibrary::defaults();
  auto ds = users(1).front();
  Rng rng(1);
  auto q = instantiate(lib, lib.find("metric_agg_period"), ds, rng,
                       {{"AGG", "mean"}, {"METRIC", "steps"}, {"PERIOD", "last 7 days"}});
  CHECK(q.question == "What was my average daily steps during the last seven days?");
  CHECK(q.gold_program == R"(daily["steps"].during("last 7 days").mean())");
  CHECK(q.category == "metric-aggregate");
}

TEST_CASE("max REM over the fixture") {
  const auto& lib = TemplateLibrary::defaults();
  auto ds = testing::rem_fixture();
  Rng rng(1);
  auto q = instantiate(lib, lib.find("metric_agg_period"), ds, rng,
                       {{"AGG", "max"}, {"METRIC", "rem_sleep_minutes"}, {"PERIOD", "last 7 days"}});
  REQUIRE(q.gold_answer);
  CHECK(*q.gold_answer == 172.42);
}

TEST_CASE("an activity the user never did cannot fill a present-activity slot") {
  const auto& lib = TemplateLibrary::defaults();
  auto ds = testing::elliptical_fixture();
  Rng rng(1);
  CHECK_THROWS_AS(instantiate(lib, lib.find("most_recent_metric"), ds, rng,
                              {{"METRIC", "light_sleep_percent"}, {"ACTIVITY", "Treadmill"}}),
                  DomainExhausted);
  ds.activities.clear();
  CHECK_THROWS_AS(instantiate(lib, lib.find("most_recent_metric"), ds, rng), DomainExhausted);
}

TEST_CASE("oracle by hand") {
  auto ds = testing::daily_fixture(&DailyRecord::sleep_minutes, {400, 500}, make_date(2023, 10, 31));
  QuerySemantics s;
  s.kind = SemanticKind::days_count;
  s.metric = "sleep_minutes";
  s.op = "<";
  s.number = 420;
  auto a = oracle_answer(s, ds);
  CHECK(a.state == OracleAnswer::State::number);
  CHECK(a.value == 1);

  QuerySemantics mean;
  mean.kind = SemanticKind::daily_agg;
  mean.agg = "mean";
  mean.metric = "resting_heart_rate";
  auto rhr = oracle_answer(mean, testing::rhr_fixture());
  CHECK(std::round(rhr.value * 100) == 6244);

  QuerySemantics join;
  join.kind = SemanticKind::activity_on_threshold_days;
  join.agg = "sum";
  join.field = "duration";
  join.activity = "Elliptical";
  join.metric = "deep_sleep_minutes";
  join.op = ">=";
  join.number = 120;
  auto ell = oracle_answer(join, testing::elliptical_fixture());
  CHECK(ell.state == OracleAnswer::State::number);
  CHECK(ell.value == 146);

  mean.metric = "steps";
  CHECK(oracle_answer(mean, testing::rhr_fixture()).state == OracleAnswer::State::no_data);
}

TEST_CASE("benchmark generation") {
  auto four = users(4);
  SUBCASE("one query") {
    auto qs = generate_benchmark(four, 1, 3);
    REQUIRE(qs.size() == 1);
    CHECK(qs[0].id == "q00001");
  }
  SUBCASE("4000 distinct queries over four users") {
    auto qs = generate_benchmark(four, 4000, 3);
    REQUIRE(qs.size() == 4000);
    std::set<std::pair<std::string, std::string>> seen;
    std::set<std::string> categories;
    for (const auto& q : qs) {
      seen.insert({q.user_id, q.question});
      categories.insert(q.category);
    }
    CHECK(seen.size() == 4000);
    CHECK(categories.size() == kCategories.size());
    CHECK(to_jsonl(generate_benchmark(four, 4000, 3)) == to_jsonl(qs));
    CHECK(to_jsonl(generate_benchmark(four, 4000, 4)) != to_jsonl(qs));
  }
  SUBCASE("gold answers agree with the evaluator") {
    auto qs = generate_benchmark(four, 400, 9);
    std::map<std::string, const UserDataset*> by_id;
    for (const auto& u : four) by_id[u.user_id] = &u;
    for (const auto& q : qs) {
      CAPTURE(q.gold_program);
      auto v = dsl::evaluate(dsl::parse(q.gold_program), *by_id.at(q.user_id));
      if (q.gold_answer) {
        REQUIRE(std::holds_alternative<double>(v));
        CHECK(std::abs(std::get<double>(v) - *q.gold_answer) <= 1e-9);
      } else {
        CHECK(std::holds_alternative<dsl::NoData>(v));
        CHECK(q.expect_no_data);
      }
    }
  }
  SUBCASE("empty inputs") {
    CHECK_THROWS(generate_benchmark({}, 10, 1));
    CHECK_THROWS(generate_benchmark(four, 0, 1));
  }
}

TEST_CASE("benchmark JSONL round trip") {
  auto qs = generate_benchmark(users(2), 60, 1);
  auto text = to_jsonl(qs);
  auto back = parse_jsonl(text);
  REQUIRE(back.size() == qs.size());
  for (std::size_t i = 0; i < qs.size(); ++i) {
    CHECK(back[i].id == qs[i].id);
    CHECK(back[i].user_id == qs[i].user_id);
    CHECK(back[i].question == qs[i].question);
    CHECK(back[i].gold_program == qs[i].gold_program);
    CHECK(back[i].gold_answer == qs[i].gold_answer);
    CHECK(back[i].expect_no_data == qs[i].expect_no_data);
  }
  CHECK(to_jsonl(back) == text);
  CHECK_THROWS_AS(parse_jsonl("{\"id\": 3}\n"), ParseError);
}
