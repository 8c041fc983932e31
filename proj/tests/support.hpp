#pragma once

// Small hand-built datasets shared by the unit and acceptance tests.

#include <insight/datamodel.hpp>

#include <cstdlib>
#include <stdexcept>
#include <filesystem>
#include <string>
#include <vector>

namespace insight::testing {

inline UserDataset empty_user(Date today, std::string id = "fixture") {
  UserDataset ds;
  ds.user_id = std::move(id);
  ds.context.age = 35;
  ds.context.gender = Gender::female;
  ds.context.weight_kg = 66;
  ds.context.height_cm = 156;
  ds.today = today;
  return ds;
}

/// One daily row per value, ending on `today`; value v goes into `field`.
inline UserDataset daily_fixture(Metric DailyRecord::*field, const std::vector<double>& values, Date today) {
  UserDataset ds = empty_user(today);
  const int n = static_cast<int>(values.size());
  for (int i = 0; i < n; ++i) {
    DailyRecord r;
    r.date = today - std::chrono::days{n - 1 - i};
    r.*field = values[i];
    ds.daily.push_back(r);
  }
  return ds;
}

/// The 24 resting heart rate readings from the worked averaging example.
inline const std::vector<double>& rhr_values() {
  static const std::vector<double> v = {61.72, 62.16, 63.71, 62.3,  62.64, 61.73, 59.51, 61.87,
                                        60.64, 60.24, 56.27, 59.16, 59.49, 60.2,  57.76, 61.88,
                                        61.71, 64.79, 66.53, 67.4,  62.64, 66.01, 67.71, 70.44};
  return v;
}

inline UserDataset rhr_fixture() {
  return daily_fixture(&DailyRecord::resting_heart_rate, rhr_values(), make_date(2023, 10, 31));
}

inline UserDataset rem_fixture() {
  return daily_fixture(&DailyRecord::rem_sleep_minutes, {138.22, 142.56, 172.42, 140.75},
                       make_date(2023, 10, 31));
}

inline ActivityRecord activity(Date day, int hour, std::string name, double minutes) {
  ActivityRecord a;
  a.start_time = at_time(day, hour, 0);
  a.end_time = a.start_time + std::chrono::minutes{static_cast<int>(minutes)};
  a.activity_name = std::move(name);
  a.duration = minutes;
  return a;
}

/// Elliptical sessions of 35, 66 and 45 minutes on the three days with at
/// least 120 deep sleep minutes, plus decoys that must not count: an
/// elliptical session on a short-sleep day, one on a day with no sleep
/// data, and yoga on a long-sleep day.
inline UserDataset elliptical_fixture() {
  const Date today = make_date(2024, 4, 4);
  UserDataset ds = empty_user(today);
  for (int i = 30; i >= 0; --i) {
    DailyRecord r;
    r.date = today - std::chrono::days{i};
    r.deep_sleep_minutes = 90;
    ds.daily.push_back(r);
  }
  auto row = [&](int m, int d) -> DailyRecord& {
    for (auto& r : ds.daily) {
      if (r.date == make_date(2024, m, d)) return r;
    }
    throw std::logic_error("no row");
  };
  row(3, 22).deep_sleep_minutes = 131;
  row(3, 24).deep_sleep_minutes = 126;
  row(3, 26).deep_sleep_minutes = 120;
  row(3, 28).deep_sleep_minutes = 140;
  row(3, 30).deep_sleep_minutes.reset();
  ds.activities = {
      activity(make_date(2024, 3, 22), 7, "Elliptical", 35),
      activity(make_date(2024, 3, 23), 7, "Elliptical", 50),
      activity(make_date(2024, 3, 24), 18, "Elliptical", 66),
      activity(make_date(2024, 3, 26), 7, "Elliptical", 45),
      activity(make_date(2024, 3, 28), 8, "Yoga", 30),
      activity(make_date(2024, 3, 30), 9, "Elliptical", 40),
  };
  return ds;
}

/// Weight 66 kg and height 156 cm, plus a week of daily rows.
inline UserDataset bmi_fixture() {
  UserDataset ds = daily_fixture(&DailyRecord::active_zone_minutes, {20, 35, 30, 41, 28, 33, 25},
                                 make_date(2024, 2, 10));
  ds.context.weight_kg = 66;
  ds.context.height_cm = 156;
  return ds;
}

/// Removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    char buf[] = "/tmp/insight_test_XXXXXX";
    if (!mkdtemp(buf)) throw std::runtime_error("mkdtemp failed");
    path = buf;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace insight::testing
