#pragma once

#include <insight/date.hpp>

#include <string_view>

namespace insight::dsl {

/// Inclusive date interval.
struct DateInterval {
  Date start;
  Date end;

  bool contains(Date d) const { return d >= start && d <= end; }
  friend bool operator==(const DateInterval&, const DateInterval&) = default;
};

/// Interprets a period phrase relative to `today`. Supported, case
/// insensitive:
///   today | yesterday | last N days | last week (= last 7 days)
///   | last month (previous full calendar month)
///   | YYYY-MM-DD | YYYY-MM-DD..YYYY-MM-DD
/// "last N days" covers N calendar days ending with today.
/// Throws EvalError(PeriodParseError) for anything else.
DateInterval resolve_period(std::string_view phrase, Date today);

/// Syntax-only check used by the parser. Throws like resolve_period.
void check_period_phrase(std::string_view phrase);

}  // namespace insight::dsl
