#include <insight/dsl/value.hpp>

#include <insight/datamodel.hpp>

#include <cmath>
#include <cstdio>

namespace insight::dsl {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::UnknownTable: return "UnknownTable";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::PeriodParseError: return "PeriodParseError";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
  }
  return "Error";
}

EvalError::EvalError(ErrorKind kind, std::string message)
    : Error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      message_(std::move(message)) {}

std::string_view type_name(const Value& v) {
  switch (v.index()) {
    case 0: return "NoData";
    case 1: return "Number";
    case 2: return "Date";
    case 3: return "DateSet";
    case 4: return std::get<Series>(v).source == TableKind::daily ? "Series(daily)"
                                                                  : "Series(activities)";
    case 5: {
      switch (std::get<TableView>(v).table) {
        case TableKind::daily: return "Table(daily)";
        case TableKind::activities: return "Table(activities)";
        case TableKind::context: return "Context";
      }
      return "Table";
    }
    case 6: return "Tuple";
  }
  return "?";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

namespace {

std::string elision(std::size_t total) {
  return "... (" + std::to_string(total - kMaxListedRows) + " more rows)";
}

std::string activity_label(const UserDataset* ds, std::int64_t row) {
  if (ds && row >= 0 && static_cast<std::size_t>(row) < ds->activities.size()) {
    const auto& a = ds->activities[static_cast<std::size_t>(row)];
    return format_timestamp(a.start_time) + " " + a.activity_name;
  }
  return "row " + std::to_string(row);
}

std::string format_series(const Series& s, const UserDataset* ds) {
  if (s.keys.empty()) return "(empty series)";
  std::string out;
  const std::size_t n = s.keys.size();
  for (std::size_t i = 0; i < n && i < kMaxListedRows; ++i) {
    if (i) out += "\n";
    const std::string key = s.source == TableKind::daily
                                ? format_date(Date{std::chrono::days{s.keys[i]}})
                                : activity_label(ds, s.keys[i]);
    out += key + "    " + format_number(s.values[i]);
  }
  if (n > kMaxListedRows) out += "\n" + elision(n);
  return out;
}

std::string format_table(const TableView& t, const UserDataset* ds) {
  if (t.table == TableKind::context) {
    if (!ds) return "context";
    const auto& c = ds->context;
    return "age=" + std::to_string(c.age) + " gender=" + std::string(to_string(c.gender)) +
           " weight_kg=" + format_number(c.weight_kg) +
           " height_cm=" + (c.height_cm ? format_number(*c.height_cm) : std::string());
  }
  if (t.rows.empty()) return "(empty table)";
  std::string out;
  if (t.table == TableKind::daily) {
    for (const auto& col : daily_columns()) {
      if (!out.empty()) out += "  ";
      out += col.name;
    }
  } else {
    for (const auto& col : activity_columns()) {
      if (!out.empty()) out += "  ";
      out += col.name;
    }
  }
  const std::size_t n = t.rows.size();
  for (std::size_t i = 0; i < n && i < kMaxListedRows; ++i) {
    out += "\n";
    const std::size_t r = t.rows[i];
    if (!ds) {
      out += "row " + std::to_string(r);
      continue;
    }
    std::string line;
    if (t.table == TableKind::daily) {
      const auto& rec = ds->daily.at(r);
      for (const auto& col : daily_columns()) {
        if (!line.empty()) line += "  ";
        if (col.name == "datetime") line += format_date(rec.date);
        else if (col.name == "bed_time") line += rec.bed_time ? format_timestamp(*rec.bed_time) : "-";
        else if (col.name == "wake_up_time")
          line += rec.wake_up_time ? format_timestamp(*rec.wake_up_time) : "-";
        else {
          std::string cell = format_cell(rec.*col.metric, col.kind);
          line += cell.empty() ? "-" : cell;
        }
      }
    } else {
      const auto& a = ds->activities.at(r);
      for (const auto& col : activity_columns()) {
        if (!line.empty()) line += "  ";
        if (col.name == "startTime") line += format_timestamp(a.start_time);
        else if (col.name == "endTime") line += format_timestamp(a.end_time);
        else if (col.name == "activityName") line += a.activity_name;
        else {
          std::string cell = format_cell(col.get(a), col.kind);
          line += cell.empty() ? "-" : cell;
        }
      }
    }
    out += line;
  }
  if (n > kMaxListedRows) out += "\n" + elision(n);
  return out;
}

std::string format_any(const Value& v, const UserDataset* ds) {
  switch (v.index()) {
    case 0: return std::string(kNoDataToken);
    case 1: return format_number(std::get<double>(v));
    case 2: return format_date(std::get<Date>(v));
    case 3: {
      const auto& dates = std::get<DateSet>(v).dates;
      if (dates.empty()) return "(empty date set)";
      std::string out;
      for (std::size_t i = 0; i < dates.size() && i < kMaxListedRows; ++i) {
        if (i) out += "\n";
        out += format_date(dates[i]);
      }
      if (dates.size() > kMaxListedRows) out += "\n" + elision(dates.size());
      return out;
    }
    case 4: return format_series(std::get<Series>(v), ds);
    case 5: return format_table(std::get<TableView>(v), ds);
    case 6: {
      const auto& items = std::get<ValueTuple>(v).items;
      std::string out = "(";
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += format_any(items[i], ds);
      }
      return out + ")";
    }
  }
  return "?";
}

}  // namespace

std::string format_observation(const Value& v, const UserDataset& ds) { return format_any(v, &ds); }

std::string format_observation(const Value& v) { return format_any(v, nullptr); }

std::string format_observation(const EvalError& e) {
  std::string msg = e.message();
  for (char& c : msg) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return std::string(kErrorPrefix) + std::string(to_string(e.kind())) + ": " + msg;
}

}  // namespace insight::dsl
