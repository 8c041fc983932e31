#pragma once

#include <insight/date.hpp>
#include <insight/dsl/ast.hpp>
#include <insight/errors.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace insight {
struct UserDataset;
}

namespace insight::dsl {

enum class ErrorKind {
  UnknownColumn,
  UnknownTable,
  TypeMismatch,
  ParseError,
  PeriodParseError,
  DivisionByZero,
  UnboundVariable,
};

std::string_view to_string(ErrorKind kind);

/// Fault raised while parsing or evaluating a program. These are reported
/// back to the agent as observations rather than aborting a session.
class EvalError : public Error {
 public:
  EvalError(ErrorKind kind, std::string message);
  ErrorKind kind() const { return kind_; }
  const std::string& message() const { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

struct NoData {
  friend bool operator==(NoData, NoData) { return true; }
};

/// Ordered (key, value) pairs. Keys are day numbers for daily series and
/// activity row indices for activity series; they strictly increase.
struct Series {
  TableKind source = TableKind::daily;
  std::string column;
  std::vector<std::int64_t> keys;
  std::vector<double> values;

  friend bool operator==(const Series&, const Series&) = default;
};

/// A filtered view over one table: row indices in ascending order.
struct TableView {
  TableKind table = TableKind::daily;
  std::vector<std::size_t> rows;

  friend bool operator==(const TableView&, const TableView&) = default;
};

/// Sorted, duplicate-free set of dates.
struct DateSet {
  std::vector<Date> dates;

  friend bool operator==(const DateSet&, const DateSet&) = default;
};

struct ValueTuple;

using Value = std::variant<NoData, double, Date, DateSet, Series, TableView, ValueTuple>;

struct ValueTuple {
  std::vector<Value> items;

  friend bool operator==(const ValueTuple&, const ValueTuple&) = default;
};

std::string_view type_name(const Value& v);

/// Formats a number with at most six decimals, trailing zeros trimmed.
std::string format_number(double v);

/// Text the agent sees after an Analyze act. Series and tables are listed
/// up to 20 rows; `ds` is used to label activity rows and table cells.
std::string format_observation(const Value& v, const UserDataset& ds);
std::string format_observation(const Value& v);
std::string format_observation(const EvalError& e);

inline constexpr std::string_view kErrorPrefix = "#ERROR#: ";
inline constexpr std::string_view kNoDataToken = "NO_DATA";
inline constexpr std::size_t kMaxListedRows = 20;

}  // namespace insight::dsl
