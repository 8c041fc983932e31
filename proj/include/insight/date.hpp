#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace insight {

/// Naive local calendar date. Timezones are never modelled.
using Date = std::chrono::sys_days;
/// Naive local timestamp at one-second resolution.
using Timestamp = std::chrono::sys_seconds;

Date make_date(int year, unsigned month, unsigned day);

/// Parses `YYYY-MM-DD`. Returns nullopt on malformed or impossible dates.
std::optional<Date> parse_date(std::string_view text);

/// Parses `YYYY-MM-DDTHH:MM:SS` (a space separator is also accepted).
std::optional<Timestamp> parse_timestamp(std::string_view text);

std::string format_date(Date d);
std::string format_timestamp(Timestamp t);

inline Date date_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

inline Timestamp at_time(Date d, int hour, int minute, int second = 0) {
  return Timestamp{d} + std::chrono::hours{hour} + std::chrono::minutes{minute} +
         std::chrono::seconds{second};
}

}  // namespace insight
