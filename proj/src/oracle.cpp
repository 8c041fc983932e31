#include <insight/oracle.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

namespace insight::bench {

namespace {

// Day number (days since 1970-01-01) of a proleptic Gregorian date.
std::int64_t civil_day(int y, int m, int d) {
  y -= m <= 2 ? 1 : 0;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const int yoe = static_cast<int>(y - era * 400);
  const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

std::int64_t day_number(Date d) { return d.time_since_epoch().count(); }

std::int64_t day_number(Timestamp t) {
  const std::int64_t s = t.time_since_epoch().count();
  return s >= 0 ? s / 86400 : -((-s + 86399) / 86400);
}

struct Window {
  std::int64_t first;
  std::int64_t last;
  bool holds(std::int64_t d) const { return d >= first && d <= last; }
};

Window window_of(const PeriodSpec& p, std::int64_t today) {
  switch (p.kind) {
    case PeriodSpec::Kind::all: return {INT64_MIN, INT64_MAX};
    case PeriodSpec::Kind::yesterday: return {today - 1, today - 1};
    case PeriodSpec::Kind::last_n_days: return {today - p.n + 1, today};
    case PeriodSpec::Kind::range: return {civil_day(p.y1, p.m1, p.d1), civil_day(p.y2, p.m2, p.d2)};
  }
  return {0, -1};
}

bool holds(double lhs, const std::string& op, double rhs) {
  if (op == "<") return lhs < rhs;
  if (op == "<=") return lhs <= rhs;
  if (op == ">") return lhs > rhs;
  if (op == ">=") return lhs >= rhs;
  if (op == "==") return lhs == rhs;
  if (op == "!=") return lhs != rhs;
  throw std::invalid_argument("oracle: unknown comparison '" + op + "'");
}

Metric daily_value(const DailyRecord& r, const std::string& name) {
  if (name == "steps") return r.steps;
  if (name == "sleep_minutes") return r.sleep_minutes;
  if (name == "resting_heart_rate") return r.resting_heart_rate;
  if (name == "heart_rate_variability") return r.heart_rate_variability;
  if (name == "active_zone_minutes") return r.active_zone_minutes;
  if (name == "deep_sleep_minutes") return r.deep_sleep_minutes;
  if (name == "rem_sleep_minutes") return r.rem_sleep_minutes;
  if (name == "light_sleep_minutes") return r.light_sleep_minutes;
  if (name == "awake_minutes") return r.awake_minutes;
  if (name == "deep_sleep_percent") return r.deep_sleep_percent;
  if (name == "rem_sleep_percent") return r.rem_sleep_percent;
  if (name == "light_sleep_percent") return r.light_sleep_percent;
  if (name == "awake_percent") return r.awake_percent;
  if (name == "stress_management_score") return r.stress_management_score;
  if (name == "fatburn_active_zone_minutes") return r.fatburn_active_zone_minutes;
  if (name == "cardio_active_zone_minutes") return r.cardio_active_zone_minutes;
  if (name == "peak_active_zone_minutes") return r.peak_active_zone_minutes;
  throw std::invalid_argument("oracle: unknown daily metric '" + name + "'");
}

Metric activity_value(const ActivityRecord& a, const std::string& name) {
  if (name == "duration") return a.duration;
  if (name == "distance") return a.distance;
  if (name == "elevationGain") return a.elevation_gain;
  if (name == "averageHeartRate") return a.average_heart_rate;
  if (name == "calories") return a.calories;
  if (name == "steps") return a.steps;
  if (name == "activeZoneMinutes") return a.active_zone_minutes;
  if (name == "speed") return a.speed;
  throw std::invalid_argument("oracle: unknown activity field '" + name + "'");
}

OracleAnswer reduce(const std::vector<double>& v, const std::string& agg) {
  if (agg == "count") return OracleAnswer::of(static_cast<double>(v.size()));
  if (v.empty()) return OracleAnswer::none();
  double total = 0.0;
  for (double x : v) total += x;
  if (agg == "sum") return OracleAnswer::of(total);
  const double n = static_cast<double>(v.size());
  if (agg == "mean") return OracleAnswer::of(total / n);
  if (agg == "min") {
    double best = v[0];
    for (double x : v) best = x < best ? x : best;
    return OracleAnswer::of(best);
  }
  if (agg == "max") {
    double best = v[0];
    for (double x : v) best = x > best ? x : best;
    return OracleAnswer::of(best);
  }
  if (agg == "median") {
    std::vector<double> s = v;
    std::sort(s.begin(), s.end());
    const std::size_t h = s.size() / 2;
    return OracleAnswer::of(s.size() % 2 == 1 ? s[h] : (s[h - 1] + s[h]) / 2.0);
  }
  if (agg == "std") {
    if (v.size() < 2) return OracleAnswer::none();
    const double mean = total / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return OracleAnswer::of(std::sqrt(ss / (n - 1.0)));
  }
  throw std::invalid_argument("oracle: unknown aggregate '" + agg + "'");
}

bool activity_selected(const ActivityRecord& a, const QuerySemantics& q) {
  if (a.activity_name != q.activity) return false;
  if (!q.filter_op.empty() && !holds(a.duration, q.filter_op, q.number)) return false;
  return true;
}

std::optional<std::int64_t> latest_activity_day(const QuerySemantics& q, const UserDataset& ds) {
  std::optional<std::int64_t> best;
  for (const auto& a : ds.activities) {
    if (!activity_selected(a, q)) continue;
    const std::int64_t d = day_number(a.start_time);
    if (!best || d > *best) best = d;
  }
  return best;
}

}  // namespace

OracleAnswer oracle_answer(const QuerySemantics& q, const UserDataset& ds) {
  const Window w = window_of(q.period, day_number(ds.today));

  switch (q.kind) {
    case SemanticKind::daily_agg: {
      std::vector<double> v;
      for (const auto& r : ds.daily) {
        if (!w.holds(day_number(r.date))) continue;
        if (auto x = daily_value(r, q.metric)) v.push_back(*x);
      }
      return reduce(v, q.agg);
    }

    case SemanticKind::corr: {
      std::vector<double> xs, ys;
      for (const auto& r : ds.daily) {
        if (!w.holds(day_number(r.date))) continue;
        auto x = daily_value(r, q.metric);
        auto y = daily_value(r, q.metric2);
        if (x && y) {
          xs.push_back(*x);
          ys.push_back(*y);
        }
      }
      const std::size_t n = xs.size();
      if (n < 2) return OracleAnswer::none();
      double sx = 0, sy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
      }
      const double mx = sx / double(n), my = sy / double(n);
      double cxy = 0, cxx = 0, cyy = 0;
      for (std::size_t i = 0; i < n; ++i) {
        cxy += (xs[i] - mx) * (ys[i] - my);
        cxx += (xs[i] - mx) * (xs[i] - mx);
        cyy += (ys[i] - my) * (ys[i] - my);
      }
      if (cxx <= 0 || cyy <= 0) return OracleAnswer::none();
      return OracleAnswer::of(cxy / std::sqrt(cxx * cyy));
    }

    case SemanticKind::days_count: {
      int count = 0;
      for (const auto& r : ds.daily) {
        if (!w.holds(day_number(r.date))) continue;
        auto x = daily_value(r, q.metric);
        if (x && holds(*x, q.op, q.number)) ++count;
      }
      return OracleAnswer::of(count);
    }

    case SemanticKind::activity_count: {
      int count = 0;
      for (const auto& a : ds.activities) {
        if (activity_selected(a, q) && w.holds(day_number(a.start_time))) ++count;
      }
      return OracleAnswer::of(count);
    }

    case SemanticKind::activity_agg: {
      std::vector<double> v;
      for (const auto& a : ds.activities) {
        if (!activity_selected(a, q) || !w.holds(day_number(a.start_time))) continue;
        if (auto x = activity_value(a, q.field)) v.push_back(*x);
      }
      return reduce(v, q.agg);
    }

    case SemanticKind::metric_on_activity_days: {
      std::set<std::int64_t> days;
      for (const auto& a : ds.activities) {
        if (activity_selected(a, q)) days.insert(day_number(a.start_time));
      }
      std::vector<double> v;
      for (const auto& r : ds.daily) {
        const std::int64_t d = day_number(r.date);
        if (!w.holds(d) || !days.count(d)) continue;
        if (auto x = daily_value(r, q.metric)) v.push_back(*x);
      }
      return reduce(v, q.agg);
    }

    case SemanticKind::activity_on_threshold_days: {
      std::set<std::int64_t> days;
      for (const auto& r : ds.daily) {
        auto x = daily_value(r, q.metric);
        if (x && holds(*x, q.op, q.number)) days.insert(day_number(r.date));
      }
      std::vector<double> v;
      for (const auto& a : ds.activities) {
        if (a.activity_name != q.activity || !days.count(day_number(a.start_time))) continue;
        if (q.agg == "count") {
          v.push_back(0.0);
        } else if (auto x = activity_value(a, q.field)) {
          v.push_back(*x);
        }
      }
      return reduce(v, q.agg);
    }

    case SemanticKind::most_recent_metric: {
      auto day = latest_activity_day(q, ds);
      if (!day) return OracleAnswer::none();
      for (const auto& r : ds.daily) {
        if (day_number(r.date) != *day) continue;
        auto x = daily_value(r, q.metric);
        return x ? OracleAnswer::of(*x) : OracleAnswer::none();
      }
      return OracleAnswer::none();
    }

    case SemanticKind::most_recent_day_activities: {
      auto day = latest_activity_day(q, ds);
      if (!day) return OracleAnswer::none();
      std::vector<double> v;
      for (const auto& a : ds.activities) {
        if (day_number(a.start_time) != *day) continue;
        if (auto x = activity_value(a, q.field)) v.push_back(*x);
      }
      return reduce(v, q.agg);
    }

    case SemanticKind::pct_days: {
      int hits = 0, total = 0;
      for (const auto& r : ds.daily) {
        if (!w.holds(day_number(r.date))) continue;
        auto x = daily_value(r, q.metric);
        if (!x) continue;
        ++total;
        if (holds(*x, q.op, q.number)) ++hits;
      }
      if (total == 0) return OracleAnswer::undefined();
      return OracleAnswer::of(double(hits) / double(total) * 100.0);
    }

    case SemanticKind::pct_activity_days: {
      std::set<std::int64_t> days;
      for (const auto& a : ds.activities) {
        const std::int64_t d = day_number(a.start_time);
        if (activity_selected(a, q) && w.holds(d)) days.insert(d);
      }
      int total = 0;
      for (const auto& r : ds.daily) total += w.holds(day_number(r.date)) ? 1 : 0;
      if (total == 0) return OracleAnswer::undefined();
      return OracleAnswer::of(double(days.size()) / double(total) * 100.0);
    }
  }
  return OracleAnswer::undefined();
}

std::string to_string(SemanticKind k) {
  switch (k) {
    case SemanticKind::daily_agg: return "daily_agg";
    case SemanticKind::corr: return "corr";
    case SemanticKind::days_count: return "days_count";
    case SemanticKind::activity_count: return "activity_count";
    case SemanticKind::activity_agg: return "activity_agg";
    case SemanticKind::metric_on_activity_days: return "metric_on_activity_days";
    case SemanticKind::activity_on_threshold_days: return "activity_on_threshold_days";
    case SemanticKind::most_recent_metric: return "most_recent_metric";
    case SemanticKind::most_recent_day_activities: return "most_recent_day_activities";
    case SemanticKind::pct_days: return "pct_days";
    case SemanticKind::pct_activity_days: return "pct_activity_days";
  }
  return "?";
}

SemanticKind parse_semantic_kind(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(SemanticKind::pct_activity_days); ++i) {
    const auto k = static_cast<SemanticKind>(i);
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown semantic kind '" + s + "'");
}

}  // namespace insight::bench
