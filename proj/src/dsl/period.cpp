#include <insight/dsl/period.hpp>

#include <insight/dsl/value.hpp>

#include <cctype>
#include <charconv>
#include <string>

namespace insight::dsl {

namespace {

struct PeriodSyntax {
  enum class Kind { today, yesterday, last_n_days, last_month, single_day, range } kind;
  int days = 0;
  Date first{};
  Date last{};
};

std::string normalize(std::string_view phrase) {
  std::string out;
  bool pending_space = false;
  for (char c : phrase) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

[[noreturn]] void reject(std::string_view phrase) {
  throw EvalError(ErrorKind::PeriodParseError,
                  "unsupported period '" + std::string(phrase) + "'");
}

PeriodSyntax parse_syntax(std::string_view phrase) {
  const std::string p = normalize(phrase);
  using K = PeriodSyntax::Kind;
  if (p == "today") return {K::today};
  if (p == "yesterday") return {K::yesterday};
  if (p == "last week") return {K::last_n_days, 7};
  if (p == "last month") return {K::last_month};
  if (p.starts_with("last ")) {
    std::string_view rest = std::string_view(p).substr(5);
    const auto space = rest.find(' ');
    if (space == std::string_view::npos) reject(phrase);
    std::string_view num = rest.substr(0, space);
    std::string_view unit = rest.substr(space + 1);
    int n = 0;
    auto res = std::from_chars(num.data(), num.data() + num.size(), n);
    if (res.ec != std::errc{} || res.ptr != num.data() + num.size() || n < 1) reject(phrase);
    if (unit != "days" && unit != "day") reject(phrase);
    return {K::last_n_days, n};
  }
  if (auto sep = p.find(".."); sep != std::string::npos) {
    auto a = parse_date(std::string_view(p).substr(0, sep));
    auto b = parse_date(std::string_view(p).substr(sep + 2));
    if (!a || !b || *b < *a) reject(phrase);
    return {K::range, 0, *a, *b};
  }
  if (auto d = parse_date(p)) return {K::single_day, 0, *d, *d};
  reject(phrase);
}

}  // namespace

void check_period_phrase(std::string_view phrase) { parse_syntax(phrase); }

DateInterval resolve_period(std::string_view phrase, Date today) {
  using K = PeriodSyntax::Kind;
  const PeriodSyntax s = parse_syntax(phrase);
  switch (s.kind) {
    case K::today:
      return {today, today};
    case K::yesterday:
      return {today - std::chrono::days{1}, today - std::chrono::days{1}};
    case K::last_n_days:
      return {today - std::chrono::days{s.days - 1}, today};
    case K::last_month: {
      const std::chrono::year_month_day ymd{today};
      const auto this_month = ymd.year() / ymd.month() / std::chrono::day{1};
      const Date first_of_this{this_month};
      const Date last_of_prev = first_of_this - std::chrono::days{1};
      const std::chrono::year_month_day prev{last_of_prev};
      return {Date{prev.year() / prev.month() / std::chrono::day{1}}, last_of_prev};
    }
    case K::single_day:
    case K::range:
      return {s.first, s.last};
  }
  reject(phrase);
}

}  // namespace insight::dsl
