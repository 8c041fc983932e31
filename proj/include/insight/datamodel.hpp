#pragma once

#include <insight/date.hpp>
#include <insight/errors.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace insight {

/// A possibly-missing daily or per-activity measurement. Integer-typed
/// columns are stored as whole-valued doubles so the analysis layer can
/// treat every metric uniformly.
using Metric = std::optional<double>;

enum class Gender { female, male, unspecified };

std::string_view to_string(Gender g);
std::optional<Gender> parse_gender(std::string_view s);

struct DemographicContext {
  int age = 40;
  Gender gender = Gender::unspecified;
  double weight_kg = 70.0;
  std::optional<double> height_cm;

  friend bool operator==(const DemographicContext&, const DemographicContext&) = default;
};

/// One row of the daily summary table.
struct DailyRecord {
  Date date;
  Metric steps;
  Metric sleep_minutes;
  std::optional<Timestamp> bed_time;
  std::optional<Timestamp> wake_up_time;
  Metric resting_heart_rate;
  Metric heart_rate_variability;
  Metric active_zone_minutes;
  Metric deep_sleep_minutes;
  Metric rem_sleep_minutes;
  Metric light_sleep_minutes;
  Metric awake_minutes;
  Metric deep_sleep_percent;
  Metric rem_sleep_percent;
  Metric light_sleep_percent;
  Metric awake_percent;
  Metric stress_management_score;
  Metric fatburn_active_zone_minutes;
  Metric cardio_active_zone_minutes;
  Metric peak_active_zone_minutes;

  friend bool operator==(const DailyRecord&, const DailyRecord&) = default;
};

/// One row of the activities table.
struct ActivityRecord {
  Timestamp start_time;
  Timestamp end_time;
  std::string activity_name;
  Metric distance;
  double duration = 0.0;
  Metric elevation_gain;
  Metric average_heart_rate;
  Metric calories;
  Metric steps;
  Metric active_zone_minutes;
  Metric speed;

  Date date() const { return date_of(start_time); }

  friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

inline constexpr std::array<std::string_view, 9> kActivityTypes = {
    "Outdoor Bike", "Run", "Bike", "Aerobic Workout", "Weights",
    "Elliptical",   "Yoga", "Spinning", "Treadmill"};

bool is_activity_type(std::string_view name);

struct UserDataset {
  std::string user_id;
  DemographicContext context;
  std::vector<DailyRecord> daily;
  std::vector<ActivityRecord> activities;
  Date today;

  friend bool operator==(const UserDataset&, const UserDataset&) = default;
};

// ---------------------------------------------------------------------------
// Column schemas

enum class ColumnKind { date, integer, decimal, timestamp, text };

struct DailyColumn {
  std::string_view name;
  ColumnKind kind;
  Metric DailyRecord::*metric;  // null for date/timestamp columns
  std::string_view description;
};

struct ActivityColumn {
  std::string_view name;
  ColumnKind kind;
  Metric (*get)(const ActivityRecord&);  // null for non-numeric columns
  std::string_view description;
};

/// Daily summary columns in file order.
std::span<const DailyColumn> daily_columns();
/// Activity columns in file order.
std::span<const ActivityColumn> activity_columns();

const DailyColumn* find_daily_column(std::string_view name);
const ActivityColumn* find_activity_column(std::string_view name);

// ---------------------------------------------------------------------------
// Validation

struct Violation {
  std::string record;  // e.g. "daily[3]", "activities[0]", "context", "dataset"
  std::string field;
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

std::string to_string(const Violation& v);

/// Checks every schema invariant. Violations are data: an empty result
/// means the dataset is well formed.
std::vector<Violation> validate_dataset(const UserDataset& ds);

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// ---------------------------------------------------------------------------
// File formats

std::string write_daily_csv(std::span<const DailyRecord> rows);
std::string write_activities_csv(std::span<const ActivityRecord> rows);
/// Context JSON; `today` is stored alongside the demographic fields.
std::string write_context_json(const UserDataset& ds);

std::vector<DailyRecord> parse_daily_csv(std::string_view text);
std::vector<ActivityRecord> parse_activities_csv(std::string_view text);

struct ContextFile {
  std::string user_id;
  DemographicContext context;
  std::optional<Date> today;
};
ContextFile parse_context_json(std::string_view text);

/// Loads and validates one user. When `today` is not given it is taken
/// from the context file, falling back to the last daily date.
UserDataset load_dataset(const std::filesystem::path& daily_path,
                         const std::filesystem::path& activities_path,
                         const std::filesystem::path& context_path,
                         std::optional<Date> today = std::nullopt);

/// Convenience over a user directory holding daily.csv, activities.csv
/// and context.json.
UserDataset load_user_dir(const std::filesystem::path& dir);
void save_user_dir(const UserDataset& ds, const std::filesystem::path& dir);

/// Renders the daily and activity tables for the last `max_days` days
/// ending at `today` as GitHub pipe tables.
std::string render_markdown(const UserDataset& ds, int max_days);

/// Column names with one-line descriptions, used in agent prompts.
std::string schema_card();

/// Formats a cell value according to its column kind: whole numbers bare
/// for integer columns, two decimals for decimal columns.
std::string format_cell(Metric v, ColumnKind kind);

}  // namespace insight
