#include <insight/datamodel.hpp>

#include <insight/csv.hpp>
#include <insight/resources.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace insight {

using json = nlohmann::json;

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::female: return "female";
    case Gender::male: return "male";
    case Gender::unspecified: return "unspecified";
  }
  return "unspecified";
}

std::optional<Gender> parse_gender(std::string_view s) {
  if (s == "female") return Gender::female;
  if (s == "male") return Gender::male;
  if (s == "unspecified") return Gender::unspecified;
  return std::nullopt;
}

bool is_activity_type(std::string_view name) {
  return std::find(kActivityTypes.begin(), kActivityTypes.end(), name) != kActivityTypes.end();
}

// ---------------------------------------------------------------------------

namespace {

constexpr DailyColumn kDailyColumns[] = {
    {"datetime", ColumnKind::date, nullptr, "The day the data describes"},
    {"steps", ColumnKind::integer, &DailyRecord::steps, "Number of steps taken during the day"},
    {"sleep_minutes", ColumnKind::integer, &DailyRecord::sleep_minutes,
     "Total minutes of sleep from the night before"},
    {"bed_time", ColumnKind::timestamp, nullptr, "Time the user went to sleep the night before"},
    {"wake_up_time", ColumnKind::timestamp, nullptr, "Time the user woke up that morning"},
    {"resting_heart_rate", ColumnKind::integer, &DailyRecord::resting_heart_rate,
     "Measured resting heart rate for that day (bpm)"},
    {"heart_rate_variability", ColumnKind::decimal, &DailyRecord::heart_rate_variability,
     "Heart rate variability for that day (ms)"},
    {"active_zone_minutes", ColumnKind::integer, &DailyRecord::active_zone_minutes,
     "Minutes with elevated heart rate that day"},
    {"deep_sleep_minutes", ColumnKind::integer, &DailyRecord::deep_sleep_minutes,
     "Minutes of deep sleep the night before"},
    {"rem_sleep_minutes", ColumnKind::integer, &DailyRecord::rem_sleep_minutes,
     "Minutes of REM sleep the night before"},
    {"light_sleep_minutes", ColumnKind::integer, &DailyRecord::light_sleep_minutes,
     "Minutes of light sleep the night before"},
    {"awake_minutes", ColumnKind::integer, &DailyRecord::awake_minutes,
     "Minutes awake during last night's sleep period"},
    {"deep_sleep_percent", ColumnKind::decimal, &DailyRecord::deep_sleep_percent,
     "Percent of last night's sleep period in deep sleep"},
    {"rem_sleep_percent", ColumnKind::decimal, &DailyRecord::rem_sleep_percent,
     "Percent of last night's sleep period in REM sleep"},
    {"light_sleep_percent", ColumnKind::decimal, &DailyRecord::light_sleep_percent,
     "Percent of last night's sleep period in light sleep"},
    {"awake_percent", ColumnKind::decimal, &DailyRecord::awake_percent,
     "Percent of last night's sleep period spent awake"},
    {"stress_management_score", ColumnKind::integer, &DailyRecord::stress_management_score,
     "Stress management score, 1-100, higher is better"},
    {"fatburn_active_zone_minutes", ColumnKind::integer,
     &DailyRecord::fatburn_active_zone_minutes, "Active zone minutes in the fat burn zone"},
    {"cardio_active_zone_minutes", ColumnKind::integer, &DailyRecord::cardio_active_zone_minutes,
     "Active zone minutes in the cardio zone"},
    {"peak_active_zone_minutes", ColumnKind::integer, &DailyRecord::peak_active_zone_minutes,
     "Active zone minutes in the peak zone"},
};

constexpr ActivityColumn kActivityColumns[] = {
    {"startTime", ColumnKind::timestamp, nullptr, "Start of the activity"},
    {"endTime", ColumnKind::timestamp, nullptr, "End of the activity"},
    {"activityName", ColumnKind::text, nullptr,
     "Activity type: Outdoor Bike, Run, Bike, Aerobic Workout, Weights, Elliptical, Yoga, "
     "Spinning or Treadmill"},
    {"distance", ColumnKind::integer, [](const ActivityRecord& a) { return a.distance; },
     "Distance covered (meters)"},
    {"duration", ColumnKind::integer, [](const ActivityRecord& a) { return Metric{a.duration}; },
     "Duration (minutes)"},
    {"elevationGain", ColumnKind::integer,
     [](const ActivityRecord& a) { return a.elevation_gain; }, "Elevation gain (meters)"},
    {"averageHeartRate", ColumnKind::integer,
     [](const ActivityRecord& a) { return a.average_heart_rate; },
     "Average heart rate during the activity (bpm)"},
    {"calories", ColumnKind::integer, [](const ActivityRecord& a) { return a.calories; },
     "Calories burned"},
    {"steps", ColumnKind::integer, [](const ActivityRecord& a) { return a.steps; },
     "Steps taken during the activity"},
    {"activeZoneMinutes", ColumnKind::integer,
     [](const ActivityRecord& a) { return a.active_zone_minutes; },
     "Active zone minutes during the activity"},
    {"speed", ColumnKind::decimal, [](const ActivityRecord& a) { return a.speed; },
     "Average speed (m/s)"},
};

}  // namespace

std::span<const DailyColumn> daily_columns() { return kDailyColumns; }
std::span<const ActivityColumn> activity_columns() { return kActivityColumns; }

const DailyColumn* find_daily_column(std::string_view name) {
  for (const auto& c : kDailyColumns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

const ActivityColumn* find_activity_column(std::string_view name) {
  for (const auto& c : kActivityColumns) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Validation

std::string to_string(const Violation& v) { return v.record + "." + v.field + ": " + v.rule; }

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error([&] {
        std::string msg = "dataset failed validation (" + std::to_string(violations.size()) +
                          " violation(s))";
        for (std::size_t i = 0; i < violations.size() && i < 5; ++i) {
          msg += "; " + to_string(violations[i]);
        }
        return msg;
      }()),
      violations_(std::move(violations)) {}

namespace {

class Checker {
 public:
  void fail(std::string record, std::string field, std::string rule) {
    out.push_back({std::move(record), std::move(field), std::move(rule)});
  }

  void non_negative(const std::string& rec, std::string_view field, const Metric& m) {
    if (m && !(*m >= 0.0)) fail(rec, std::string(field), "non_negative");
  }

  void in_range(const std::string& rec, std::string_view field, const Metric& m, double lo,
                double hi) {
    if (m && !(*m >= lo && *m <= hi)) fail(rec, std::string(field), "range");
  }

  std::vector<Violation> out;
};

void check_daily(Checker& c, const std::string& rec, const DailyRecord& d) {
  for (const auto& col : kDailyColumns) {
    if (!col.metric) continue;
    const Metric& m = d.*col.metric;
    if (m && !std::isfinite(*m)) c.fail(rec, std::string(col.name), "finite");
  }
  c.non_negative(rec, "steps", d.steps);
  c.non_negative(rec, "sleep_minutes", d.sleep_minutes);
  c.non_negative(rec, "deep_sleep_minutes", d.deep_sleep_minutes);
  c.non_negative(rec, "rem_sleep_minutes", d.rem_sleep_minutes);
  c.non_negative(rec, "light_sleep_minutes", d.light_sleep_minutes);
  c.non_negative(rec, "awake_minutes", d.awake_minutes);
  c.non_negative(rec, "active_zone_minutes", d.active_zone_minutes);
  c.non_negative(rec, "fatburn_active_zone_minutes", d.fatburn_active_zone_minutes);
  c.non_negative(rec, "cardio_active_zone_minutes", d.cardio_active_zone_minutes);
  c.non_negative(rec, "peak_active_zone_minutes", d.peak_active_zone_minutes);
  c.non_negative(rec, "resting_heart_rate", d.resting_heart_rate);
  c.non_negative(rec, "heart_rate_variability", d.heart_rate_variability);
  c.in_range(rec, "deep_sleep_percent", d.deep_sleep_percent, 0, 100);
  c.in_range(rec, "rem_sleep_percent", d.rem_sleep_percent, 0, 100);
  c.in_range(rec, "light_sleep_percent", d.light_sleep_percent, 0, 100);
  c.in_range(rec, "awake_percent", d.awake_percent, 0, 100);
  c.in_range(rec, "stress_management_score", d.stress_management_score, 1, 100);

  if (d.deep_sleep_minutes && d.rem_sleep_minutes && d.light_sleep_minutes && d.sleep_minutes) {
    const double stages = *d.deep_sleep_minutes + *d.rem_sleep_minutes + *d.light_sleep_minutes;
    if (std::abs(stages - *d.sleep_minutes) > 1.0) c.fail(rec, "sleep_minutes", "stage_sum");
  }
  if (d.deep_sleep_percent && d.rem_sleep_percent && d.light_sleep_percent && d.awake_percent) {
    const double total = *d.deep_sleep_percent + *d.rem_sleep_percent +
                         *d.light_sleep_percent + *d.awake_percent;
    if (std::abs(total - 100.0) > 0.5) c.fail(rec, "sleep_percent", "percent_sum");
  }
  if (d.sleep_minutes && d.awake_minutes && *d.sleep_minutes + *d.awake_minutes > 0) {
    const double period = *d.sleep_minutes + *d.awake_minutes;
    auto consistent = [&](std::string_view field, const Metric& minutes, const Metric& pct) {
      if (minutes && pct && std::abs(*minutes / period * 100.0 - *pct) > 0.5) {
        c.fail(rec, std::string(field), "percent_consistency");
      }
    };
    consistent("deep_sleep_percent", d.deep_sleep_minutes, d.deep_sleep_percent);
    consistent("rem_sleep_percent", d.rem_sleep_minutes, d.rem_sleep_percent);
    consistent("light_sleep_percent", d.light_sleep_minutes, d.light_sleep_percent);
    consistent("awake_percent", d.awake_minutes, d.awake_percent);
  }
  if (d.fatburn_active_zone_minutes && d.cardio_active_zone_minutes &&
      d.peak_active_zone_minutes && d.active_zone_minutes) {
    const double zones = *d.fatburn_active_zone_minutes + *d.cardio_active_zone_minutes +
                         *d.peak_active_zone_minutes;
    if (std::abs(zones - *d.active_zone_minutes) > 1.0) {
      c.fail(rec, "active_zone_minutes", "zone_sum");
    }
  }
  if (d.bed_time && d.wake_up_time && !(*d.bed_time < *d.wake_up_time)) {
    c.fail(rec, "bed_time", "bed_before_wake");
  }
  if (d.wake_up_time && date_of(*d.wake_up_time) != d.date) {
    c.fail(rec, "wake_up_time", "wake_on_date");
  }
}

void check_activity(Checker& c, const std::string& rec, const ActivityRecord& a) {
  if (!is_activity_type(a.activity_name)) c.fail(rec, "activityName", "activity_enum");
  for (const auto& col : kActivityColumns) {
    if (!col.get) continue;
    Metric m = col.get(a);
    if (m && !std::isfinite(*m)) c.fail(rec, std::string(col.name), "finite");
  }
  c.non_negative(rec, "distance", a.distance);
  c.non_negative(rec, "duration", a.duration);
  c.non_negative(rec, "elevationGain", a.elevation_gain);
  c.non_negative(rec, "calories", a.calories);
  c.non_negative(rec, "steps", a.steps);
  c.non_negative(rec, "activeZoneMinutes", a.active_zone_minutes);
  c.non_negative(rec, "speed", a.speed);
  const double elapsed =
      std::chrono::duration<double, std::ratio<60>>(a.end_time - a.start_time).count();
  if (std::abs(elapsed - a.duration) > 1.0) c.fail(rec, "duration", "duration_matches_times");
  if (a.distance && a.speed && a.duration > 0) {
    const double expected = *a.distance / (a.duration * 60.0);
    if (std::abs(expected - *a.speed) > 0.05) c.fail(rec, "speed", "speed_matches_distance");
  }
}

}  // namespace

std::vector<Violation> validate_dataset(const UserDataset& ds) {
  Checker c;
  const auto& ctx = ds.context;
  if (ctx.age < 18 || ctx.age > 80) c.fail("context", "age", "range");
  if (!(ctx.weight_kg > 0.0) || !std::isfinite(ctx.weight_kg)) {
    c.fail("context", "weight_kg", "positive");
  }
  if (ctx.height_cm && !(*ctx.height_cm >= 100.0 && *ctx.height_cm <= 230.0)) {
    c.fail("context", "height_cm", "range");
  }

  for (std::size_t i = 0; i < ds.daily.size(); ++i) {
    const std::string rec = "daily[" + std::to_string(i) + "]";
    check_daily(c, rec, ds.daily[i]);
    if (i > 0 && !(ds.daily[i - 1].date < ds.daily[i].date)) {
      c.fail(rec, "datetime", "strictly_increasing");
    }
  }
  if (!ds.daily.empty()) {
    const auto span = (ds.daily.back().date - ds.daily.front().date).count() + 1;
    if (span > 31) c.fail("dataset", "datetime", "span_at_most_31_days");
    if (ds.today < ds.daily.back().date) c.fail("dataset", "today", "today_after_last_day");
  }

  for (std::size_t i = 0; i < ds.activities.size(); ++i) {
    const std::string rec = "activities[" + std::to_string(i) + "]";
    const auto& a = ds.activities[i];
    check_activity(c, rec, a);
    if (i > 0 && a.start_time < ds.activities[i - 1].start_time) {
      c.fail(rec, "startTime", "sorted_by_start");
    }
    const Date day = a.date();
    const bool before_first = !ds.daily.empty() && day < ds.daily.front().date;
    if (before_first || day > ds.today) c.fail(rec, "startTime", "within_dataset_window");
  }
  return std::move(c.out);
}

// ---------------------------------------------------------------------------
// Cells

namespace {

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Metric parse_number(std::string_view cell, std::string_view column, std::size_t line) {
  if (cell.empty()) return std::nullopt;
  double v = 0;
  auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    throw ParseError("line " + std::to_string(line) + ": column '" + std::string(column) +
                     "': not a number: '" + std::string(cell) + "'");
  }
  return v;
}

std::optional<Timestamp> parse_ts_cell(std::string_view cell, std::string_view column,
                                       std::size_t line) {
  if (cell.empty()) return std::nullopt;
  auto t = parse_timestamp(cell);
  if (!t) {
    throw ParseError("line " + std::to_string(line) + ": column '" + std::string(column) +
                     "': bad timestamp '" + std::string(cell) + "'");
  }
  return t;
}

// Maps each header name to its column index, enforcing required columns.
template <typename Column>
std::vector<const Column*> bind_header(const csv::Row& header, std::span<const Column> schema,
                                       std::initializer_list<std::string_view> required,
                                       const Column* (*find)(std::string_view),
                                       std::string_view table) {
  std::vector<const Column*> bound;
  for (const auto& name : header) {
    const Column* col = find(name);
    if (!col) {
      throw SchemaError(std::string(table) + ": unknown column '" + name + "'");
    }
    if (std::find(bound.begin(), bound.end(), col) != bound.end()) {
      throw SchemaError(std::string(table) + ": duplicate column '" + name + "'");
    }
    bound.push_back(col);
  }
  for (auto req : required) {
    if (std::none_of(bound.begin(), bound.end(), [&](auto* c) { return c->name == req; })) {
      throw SchemaError(std::string(table) + ": missing required column '" +
                        std::string(req) + "'");
    }
  }
  (void)schema;
  return bound;
}

}  // namespace

std::string format_cell(Metric v, ColumnKind kind) {
  if (!v) return "";
  char buf[64];
  if (kind == ColumnKind::integer && *v == std::round(*v)) {
    std::snprintf(buf, sizeof buf, "%.0f", *v);
  } else {
    std::snprintf(buf, sizeof buf, "%.2f", *v);
  }
  return buf;
}

// ---------------------------------------------------------------------------
// CSV / JSON

std::string write_daily_csv(std::span<const DailyRecord> rows) {
  std::string out;
  csv::Row header;
  for (const auto& c : kDailyColumns) header.emplace_back(c.name);
  out += csv::join_row(header) + "\n";
  for (const auto& r : rows) {
    csv::Row row;
    for (const auto& c : kDailyColumns) {
      if (c.name == "datetime") {
        row.push_back(format_date(r.date));
      } else if (c.name == "bed_time") {
        row.push_back(r.bed_time ? format_timestamp(*r.bed_time) : "");
      } else if (c.name == "wake_up_time") {
        row.push_back(r.wake_up_time ? format_timestamp(*r.wake_up_time) : "");
      } else {
        const Metric& m = r.*c.metric;
        row.push_back(m ? shortest(*m) : "");
      }
    }
    out += csv::join_row(row) + "\n";
  }
  return out;
}

std::string write_activities_csv(std::span<const ActivityRecord> rows) {
  std::string out;
  csv::Row header;
  for (const auto& c : kActivityColumns) header.emplace_back(c.name);
  out += csv::join_row(header) + "\n";
  for (const auto& a : rows) {
    csv::Row row;
    for (const auto& c : kActivityColumns) {
      if (c.name == "startTime") {
        row.push_back(format_timestamp(a.start_time));
      } else if (c.name == "endTime") {
        row.push_back(format_timestamp(a.end_time));
      } else if (c.name == "activityName") {
        row.push_back(a.activity_name);
      } else {
        Metric m = c.get(a);
        row.push_back(m ? shortest(*m) : "");
      }
    }
    out += csv::join_row(row) + "\n";
  }
  return out;
}

std::vector<DailyRecord> parse_daily_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("daily: missing header row");
  auto bound = bind_header<DailyColumn>(rows[0], kDailyColumns, {"datetime"},
                                        &find_daily_column, "daily");
  std::vector<DailyRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::size_t line = i + 1;
    if (row.size() != bound.size()) {
      throw ParseError("daily line " + std::to_string(line) + ": expected " +
                       std::to_string(bound.size()) + " fields, got " +
                       std::to_string(row.size()));
    }
    DailyRecord rec;
    for (std::size_t j = 0; j < bound.size(); ++j) {
      const auto* col = bound[j];
      const std::string& cell = row[j];
      if (col->name == "datetime") {
        auto d = parse_date(cell);
        if (!d) {
          throw ParseError("daily line " + std::to_string(line) + ": bad date '" + cell + "'");
        }
        rec.date = *d;
      } else if (col->name == "bed_time") {
        rec.bed_time = parse_ts_cell(cell, col->name, line);
      } else if (col->name == "wake_up_time") {
        rec.wake_up_time = parse_ts_cell(cell, col->name, line);
      } else {
        rec.*col->metric = parse_number(cell, col->name, line);
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<ActivityRecord> parse_activities_csv(std::string_view text) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("activities: missing header row");
  auto bound = bind_header<ActivityColumn>(
      rows[0], kActivityColumns, {"startTime", "endTime", "activityName", "duration"},
      &find_activity_column, "activities");
  std::vector<ActivityRecord> out;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::size_t line = i + 1;
    if (row.size() != bound.size()) {
      throw ParseError("activities line " + std::to_string(line) + ": expected " +
                       std::to_string(bound.size()) + " fields, got " +
                       std::to_string(row.size()));
    }
    ActivityRecord a;
    for (std::size_t j = 0; j < bound.size(); ++j) {
      const std::string_view name = bound[j]->name;
      const std::string& cell = row[j];
      if (name == "startTime" || name == "endTime") {
        auto t = parse_ts_cell(cell, name, line);
        if (!t) throw ParseError("activities line " + std::to_string(line) + ": empty " +
                                 std::string(name));
        (name == "startTime" ? a.start_time : a.end_time) = *t;
      } else if (name == "activityName") {
        a.activity_name = cell;
      } else {
        Metric m = parse_number(cell, name, line);
        if (name == "distance") a.distance = m;
        else if (name == "duration") {
          if (!m) throw ParseError("activities line " + std::to_string(line) + ": empty duration");
          a.duration = *m;
        } else if (name == "elevationGain") a.elevation_gain = m;
        else if (name == "averageHeartRate") a.average_heart_rate = m;
        else if (name == "calories") a.calories = m;
        else if (name == "steps") a.steps = m;
        else if (name == "activeZoneMinutes") a.active_zone_minutes = m;
        else if (name == "speed") a.speed = m;
      }
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string write_context_json(const UserDataset& ds) {
  json j;
  j["user_id"] = ds.user_id;
  j["age"] = ds.context.age;
  j["gender"] = to_string(ds.context.gender);
  j["weight_kg"] = ds.context.weight_kg;
  if (ds.context.height_cm) j["height_cm"] = *ds.context.height_cm;
  j["today"] = format_date(ds.today);
  return j.dump(2) + "\n";
}

ContextFile parse_context_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("context: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("context: expected a JSON object");
  for (const char* key : {"user_id", "age", "gender", "weight_kg"}) {
    if (!j.contains(key)) throw SchemaError(std::string("context: missing key '") + key + "'");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "user_id" && key != "age" && key != "gender" && key != "weight_kg" &&
        key != "height_cm" && key != "today") {
      throw SchemaError("context: unknown key '" + key + "'");
    }
  }
  ContextFile out;
  try {
    out.user_id = j.at("user_id").get<std::string>();
    out.context.age = j.at("age").get<int>();
    auto g = parse_gender(j.at("gender").get<std::string>());
    if (!g) throw SchemaError("context: unknown gender '" + j.at("gender").get<std::string>() + "'");
    out.context.gender = *g;
    out.context.weight_kg = j.at("weight_kg").get<double>();
    if (j.contains("height_cm") && !j["height_cm"].is_null()) {
      out.context.height_cm = j["height_cm"].get<double>();
    }
    if (j.contains("today")) {
      auto d = parse_date(j["today"].get<std::string>());
      if (!d) throw ParseError("context: bad 'today' date");
      out.today = d;
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("context: ") + e.what());
  }
  return out;
}

UserDataset load_dataset(const std::filesystem::path& daily_path,
                         const std::filesystem::path& activities_path,
                         const std::filesystem::path& context_path, std::optional<Date> today) {
  auto read = [](const std::filesystem::path& p) {
    try {
      return resources::read_file(p.string());
    } catch (const std::runtime_error& e) {
      throw ParseError(e.what());
    }
  };
  UserDataset ds;
  auto ctx = parse_context_json(read(context_path));
  ds.user_id = ctx.user_id;
  ds.context = ctx.context;
  ds.daily = parse_daily_csv(read(daily_path));
  ds.activities = parse_activities_csv(read(activities_path));
  if (today) {
    ds.today = *today;
  } else if (ctx.today) {
    ds.today = *ctx.today;
  } else if (!ds.daily.empty()) {
    ds.today = ds.daily.back().date;
  } else {
    throw SchemaError("cannot infer 'today': no daily rows and no anchor date");
  }
  auto violations = validate_dataset(ds);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return ds;
}

UserDataset load_user_dir(const std::filesystem::path& dir) {
  return load_dataset(dir / "daily.csv", dir / "activities.csv", dir / "context.json");
}

void save_user_dir(const UserDataset& ds, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << text;
  };
  write(dir / "daily.csv", write_daily_csv(ds.daily));
  write(dir / "activities.csv", write_activities_csv(ds.activities));
  write(dir / "context.json", write_context_json(ds));
}

// ---------------------------------------------------------------------------
// Markdown

namespace {

void append_row(std::string& out, const std::vector<std::string>& cells) {
  out += "|";
  for (const auto& c : cells) out += " " + c + " |";
  out += "\n";
}

}  // namespace

std::string render_markdown(const UserDataset& ds, int max_days) {
  if (max_days < 1) max_days = 1;
  const Date first = ds.today - std::chrono::days{max_days - 1};
  auto in_window = [&](Date d) { return d >= first && d <= ds.today; };

  std::string out = "Daily metrics (" + format_date(first) + " to " + format_date(ds.today) +
                    "):\n\n";
  std::vector<std::string> cells;
  for (const auto& c : kDailyColumns) cells.emplace_back(c.name);
  append_row(out, cells);
  append_row(out, std::vector<std::string>(cells.size(), "---"));
  for (const auto& r : ds.daily) {
    if (!in_window(r.date)) continue;
    cells.clear();
    for (const auto& c : kDailyColumns) {
      if (c.name == "datetime") cells.push_back(format_date(r.date));
      else if (c.name == "bed_time") cells.push_back(r.bed_time ? format_timestamp(*r.bed_time) : "");
      else if (c.name == "wake_up_time")
        cells.push_back(r.wake_up_time ? format_timestamp(*r.wake_up_time) : "");
      else cells.push_back(format_cell(r.*c.metric, c.kind));
    }
    append_row(out, cells);
  }

  out += "\nActivities:\n\n";
  cells.clear();
  for (const auto& c : kActivityColumns) cells.emplace_back(c.name);
  append_row(out, cells);
  append_row(out, std::vector<std::string>(cells.size(), "---"));
  for (const auto& a : ds.activities) {
    if (!in_window(a.date())) continue;
    cells.clear();
    for (const auto& c : kActivityColumns) {
      if (c.name == "startTime") cells.push_back(format_timestamp(a.start_time));
      else if (c.name == "endTime") cells.push_back(format_timestamp(a.end_time));
      else if (c.name == "activityName") cells.push_back(a.activity_name);
      else cells.push_back(format_cell(c.get(a), c.kind));
    }
    append_row(out, cells);
  }
  return out;
}

std::string schema_card() {
  std::string out = "Table `daily` (one row per day, keyed by `datetime`):\n";
  for (const auto& c : kDailyColumns) {
    out += "- " + std::string(c.name) + ": " + std::string(c.description) + "\n";
  }
  out += "Table `activities` (one row per logged workout):\n";
  for (const auto& c : kActivityColumns) {
    out += "- " + std::string(c.name) + ": " + std::string(c.description) + "\n";
  }
  out += "Table `context`: age, gender, weight_kg, height_cm\n";
  return out;
}

}  // namespace insight
