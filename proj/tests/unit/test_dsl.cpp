#include <doctest.h>

#include "../support.hpp"

#include <insight/benchgen.hpp>
#include <insight/dsl/evaluator.hpp>
#include <insight/dsl/parser.hpp>
#include <insight/dsl/period.hpp>
#include <insight/oracle.hpp>
#include <insight/synthgen.hpp>

#include <cmath>
#include <numeric>
#include <thread>

using namespace insight;
using namespace insight::dsl;

namespace {

double number(std::string_view src, const UserDataset& ds) {
  Value v = evaluate(parse(src), ds);
  REQUIRE(std::holds_alternative<double>(v));
  return std::get<double>(v);
}

ErrorKind error_kind(std::string_view src, const UserDataset& ds) {
  auto out = run_program(src, ds);
  REQUIRE(std::holds_alternative<EvalError>(out));
  return std::get<EvalError>(out).kind();
}

std::string round2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

TEST_CASE("parse builds the template program shape") {
  auto p = parse(R"(daily["steps"].during("last 7 days").mean())");
  CHECK(p.lets.empty());
  const auto* agg = std::get_if<Aggregate>(&p.body->kind);
  REQUIRE(agg);
  CHECK(agg->fn == AggFn::mean);
  const auto* during = std::get_if<During>(&agg->input->kind);
  REQUIRE(during);
  CHECK(during->period == "last 7 days");
  const auto* proj = std::get_if<Projection>(&during->input->kind);
  REQUIRE(proj);
  CHECK(proj->column == "steps");
  const auto* table = std::get_if<TableRef>(&proj->input->kind);
  REQUIRE(table);
  CHECK(table->table == TableKind::daily);
}

TEST_CASE("parse errors carry a position") {
  try {
    parse(R"(daily["steps")");
    FAIL("expected a parse error");
  } catch (const EvalError& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
    CHECK(e.message().rfind("1:", 0) == 0);
  }
  CHECK_THROWS_AS(parse("daily[\"steps\"].mean()\n  + )"), EvalError);
  CHECK_THROWS_AS(parse(R"(daily["steps"].during("next tuesday").mean())"), EvalError);
  try {
    parse(R"(daily["steps"].during("next tuesday").mean())");
  } catch (const EvalError& e) {
    CHECK(e.kind() == ErrorKind::PeriodParseError);
  }
}

TEST_CASE("statically ill-typed programs are rejected at parse time") {
  for (auto src : {"(3).corr(daily[\"steps\"])", "daily.mean()", "daily[\"steps\"].mean()[\"x\"]",
                   "activities[\"duration\"].corr(daily[\"steps\"])"}) {
    CAPTURE(src);
    try {
      parse(src);
      FAIL("expected TypeMismatch");
    } catch (const EvalError& e) {
      CHECK(e.kind() == ErrorKind::TypeMismatch);
    }
  }
}

TEST_CASE("the elliptical/deep-sleep program parses") {
  auto p = parse(
      R"(let d = days_where(daily["deep_sleep_minutes"] >= 120); activities.on(d).where(activityName == "Elliptical")["duration"].sum())");
  REQUIRE(p.lets.size() == 1);
  CHECK(p.lets[0].name == "d");
  CHECK(std::holds_alternative<DaysWhere>(p.lets[0].expr->kind));
  CHECK(std::holds_alternative<Aggregate>(p.body->kind));
}

TEST_CASE("period phrases") {
  const Date today = make_date(2023, 10, 31);
  CHECK(resolve_period("last 7 days", today) == DateInterval{make_date(2023, 10, 25), today});
  CHECK(resolve_period("Last Week", today) == resolve_period("last 7 days", today));
  CHECK(resolve_period("today", today) == DateInterval{today, today});
  CHECK(resolve_period("yesterday", today) == DateInterval{make_date(2023, 10, 30), make_date(2023, 10, 30)});
  CHECK(resolve_period("last month", make_date(2023, 10, 15)) ==
        DateInterval{make_date(2023, 9, 1), make_date(2023, 9, 30)});
  CHECK(resolve_period("last month", make_date(2024, 1, 3)) ==
        DateInterval{make_date(2023, 12, 1), make_date(2023, 12, 31)});
  CHECK(resolve_period("last month", make_date(2024, 3, 31)) ==
        DateInterval{make_date(2024, 2, 1), make_date(2024, 2, 29)});
  CHECK(resolve_period("2023-10-02", today) == DateInterval{make_date(2023, 10, 2), make_date(2023, 10, 2)});
  CHECK(resolve_period("2023-10-02..2023-10-09", today) ==
        DateInterval{make_date(2023, 10, 2), make_date(2023, 10, 9)});
  CHECK(resolve_period("last 1 days", today) == DateInterval{today, today});
  for (auto bad : {"next tuesday", "last 0 days", "last days", "2023-10-09..2023-10-02", "2023-13-01"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(resolve_period(bad, today), EvalError);
  }
}

TEST_CASE("worked values from hand fixtures") {
  SUBCASE("mean resting heart rate") {
    auto ds = testing::rhr_fixture();
    const auto& v = testing::rhr_values();
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    CHECK(round2(sum) == "1498.51");
    const double got = number(R"(daily["resting_heart_rate"].mean())", ds);
    CHECK(got == doctest::Approx(sum / 24).epsilon(1e-12));
    CHECK(round2(got) == "62.44");
    CHECK(analyze(R"(daily["resting_heart_rate"].during("last 30 days").mean())", ds) ==
          format_number(sum / 24));
  }
  SUBCASE("max REM") {
    CHECK(round2(number(R"(daily["rem_sleep_minutes"].max())", testing::rem_fixture())) == "172.42");
  }
  SUBCASE("elliptical on deep-sleep days") {
    auto ds = testing::elliptical_fixture();
    REQUIRE(validate_dataset(ds).empty());
    const double got = number(
        R"(let d = days_where(daily["deep_sleep_minutes"] >= 120); activities.on(d).where(activityName == "Elliptical")["duration"].sum())",
        ds);
    CHECK(got == 35 + 66 + 45);
  }
  SUBCASE("BMI from context") {
    auto ds = testing::bmi_fixture();
    const double got = number(
        R"(context["weight_kg"] / (context["height_cm"]/100) / (context["height_cm"]/100))", ds);
    CHECK(round2(got) == "27.12");
    CHECK(round2(66.0 / 1.56 / 1.56) == "27.12");
  }
}

TEST_CASE("aggregate rules") {
  auto ds = testing::daily_fixture(&DailyRecord::steps, {1000, 4000, 2000, 3000}, make_date(2023, 10, 31));
  ds.daily[1].steps.reset();
  CHECK(number(R"(daily["steps"].mean())", ds) == 2000);
  CHECK(number(R"(daily["steps"].count())", ds) == 3);
  CHECK(number(R"(daily["steps"].median())", ds) == 2000);
  CHECK(number(R"(daily["steps"].std())", ds) == doctest::Approx(1000.0));
  ds.daily[1].steps = 4000;
  CHECK(number(R"(daily["steps"].median())", ds) == 2500);
  CHECK(number(R"(daily["steps"].during("yesterday").sum())", ds) == 2000);
  CHECK(number(R"(daily.where(steps > 1500)["steps"].count())", ds) == 3);
  CHECK(number(R"(daily["steps"].during("2023-10-28..2023-10-29").sum())", ds) == 5000);
}

TEST_CASE("empty selections") {
  auto ds = testing::daily_fixture(&DailyRecord::sleep_minutes, {400, 420, 410}, make_date(2023, 10, 31));
  CHECK(analyze(R"(daily["steps"].during("last 7 days").mean())", ds) == "NO_DATA");
  CHECK(analyze(R"(daily["steps"].std())", ds) == "NO_DATA");
  CHECK(analyze(R"(daily["steps"].count())", ds) == "0");
  CHECK(analyze(R"(daily["sleep_minutes"].during("today").std())", ds) == "NO_DATA");
  CHECK(analyze(R"(activities["duration"].sum())", ds) == "NO_DATA");
}

TEST_CASE("evaluation errors") {
  auto ds = testing::rhr_fixture();
  CHECK(error_kind(R"(daily["breathing_rate"].mean())", ds) == ErrorKind::UnknownColumn);
  CHECK(analyze(R"(daily["breathing_rate"].mean())", ds) == "#ERROR#: UnknownColumn: 'breathing_rate'");
  CHECK(error_kind(R"(sleep["minutes"].mean())", ds) == ErrorKind::UnknownTable);
  CHECK(error_kind("x + 1", ds) == ErrorKind::UnboundVariable);
  CHECK(error_kind(R"(daily["steps"].count() / 0)", ds) == ErrorKind::DivisionByZero);
  CHECK(error_kind(R"(daily["steps"].mean(")", ds) == ErrorKind::ParseError);
  CHECK(analyze(R"(daily["steps"].mean(")", ds).rfind("#ERROR#: ParseError: ", 0) == 0);
}

TEST_CASE("observation formatting") {
  CHECK(format_observation(Value{ValueTuple{{446.08, 30.0}}}) == "(446.08, 30)");
  CHECK(format_observation(Value{NoData{}}) == "NO_DATA");
  CHECK(format_number(1.0 / 3) == "0.333333");
  CHECK(format_number(-0.0000001) == "0");
  CHECK(format_number(62.4400) == "62.44");
  CHECK(format_observation(EvalError(ErrorKind::UnknownColumn, "'breathing_rate'")) ==
        "#ERROR#: UnknownColumn: 'breathing_rate'");
  CHECK(format_observation(EvalError(ErrorKind::ParseError, "a\nb")) == "#ERROR#: ParseError: a b");

  auto ds = synth::synthesize_user(synth::GeneratorConfig::defaults(), 0);
  const std::string listing = analyze(R"(daily["sleep_minutes"])", ds);
  CHECK(listing.find("more rows") != std::string::npos);
  CHECK(std::count(listing.begin(), listing.end(), '\n') <= static_cast<long>(kMaxListedRows) + 2);
  const std::string dates = analyze(R"(days_where(daily["steps"] >= 0))", ds);
  const auto first = std::find_if(ds.daily.begin(), ds.daily.end(), [](const auto& r) { return r.steps.has_value(); });
  REQUIRE(first != ds.daily.end());
  CHECK(dates.rfind(format_date(first->date), 0) == 0);
  CHECK(dates.find("more rows") != std::string::npos);
}

TEST_CASE("most recent day with an activity") {
  auto ds = testing::elliptical_fixture();
  CHECK(analyze(R"(most_recent_day_with(activityName == "Elliptical"))", ds).find("2024-03-30") !=
        std::string::npos);
  CHECK(number(R"(activities.on(most_recent_day_with(activityName == "Elliptical" and duration > 60))["duration"].sum())",
               ds) == 66);
  CHECK(analyze(R"(daily["deep_sleep_minutes"].on(most_recent_day_with(activityName == "Treadmill")).mean())", ds) ==
        "NO_DATA");
  CHECK(number(R"(daily["deep_sleep_minutes"].on(activities.where(activityName == "Yoga").dates()).mean())", ds) ==
        140);
}

TEST_CASE("corr is unchanged by positive scaling") {
  auto ds = synth::synthesize_user(synth::GeneratorConfig::defaults(), 3);
  const double base = number(R"(daily["steps"].corr(daily["sleep_minutes"]))", ds);
  for (auto& r : ds.daily) {
    if (r.steps) *r.steps *= 3.7;
  }
  CHECK(std::abs(number(R"(daily["steps"].corr(daily["sleep_minutes"]))", ds) - base) < 1e-12);

  // Pearson on the jointly present days, restated.
  std::vector<double> x, y;
  for (const auto& r : ds.daily) {
    if (r.steps && r.sleep_minutes) {
      x.push_back(*r.steps);
      y.push_back(*r.sleep_minutes);
    }
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / y.size();
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  CHECK(base == doctest::Approx(sxy / std::sqrt(sxx * syy)).epsilon(1e-9));
}

TEST_CASE("gold programs round-trip through the printer and evaluate purely") {
  std::vector<UserDataset> users;
  auto cfg = synth::GeneratorConfig::defaults();
  for (int i = 0; i < 4; ++i) users.push_back(synth::synthesize_user(cfg, i));
  auto queries = bench::generate_benchmark(users, 300, 5);
  std::map<std::string, const UserDataset*> by_id;
  for (const auto& u : users) by_id[u.user_id] = &u;

  for (const auto& q : queries) {
    CAPTURE(q.gold_program);
    auto p = parse(q.gold_program);
    auto printed = to_source(p);
    CHECK(structurally_equal(parse(printed), p));
    CHECK(to_source(parse(printed)) == printed);
  }

  // Same value from several threads at once.
  const auto& q = queries.front();
  const Value expected = evaluate(parse(q.gold_program), *by_id.at(q.user_id));
  std::vector<int> same(4, 0);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      int ok = 1;
      for (const auto& other : queries) {
        (void)evaluate(parse(other.gold_program), *by_id.at(other.user_id));
        ok &= evaluate(parse(q.gold_program), *by_id.at(q.user_id)) == expected;
      }
      same[t] = ok;
    });
  }
  for (auto& t : threads) t.join();
  CHECK(same == std::vector<int>(4, 1));
}

TEST_CASE("count and mean stay within their bounds") {
  auto cfg = synth::GeneratorConfig::defaults();
  for (int i = 0; i < 10; ++i) {
    auto ds = synth::synthesize_user(cfg, i);
    for (int n : {3, 7, 14, 31}) {
      const std::string period = "\"last " + std::to_string(n) + " days\"";
      for (auto col : {"steps", "sleep_minutes", "resting_heart_rate"}) {
        const std::string sel = std::string("daily[\"") + col + "\"].during(" + period + ")";
        CHECK(number(sel + ".count()", ds) <= n);
        auto mean = run_program(sel + ".mean()", ds);
        if (std::holds_alternative<double>(std::get<Value>(mean))) {
          const double m = std::get<double>(std::get<Value>(mean));
          CHECK(m >= number(sel + ".min()", ds) - 1e-9);
          CHECK(m <= number(sel + ".max()", ds) + 1e-9);
        }
      }
    }
  }
}
