#include <insight/dsl/evaluator.hpp>

#include <insight/dsl/parser.hpp>
#include <insight/dsl/period.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace insight::dsl {

namespace {

std::int64_t day_key(Date d) { return d.time_since_epoch().count(); }
Date key_date(std::int64_t k) { return Date{std::chrono::days{k}}; }

bool compare(double lhs, CmpOp op, double rhs) {
  switch (op) {
    case CmpOp::eq: return lhs == rhs;
    case CmpOp::ne: return lhs != rhs;
    case CmpOp::lt: return lhs < rhs;
    case CmpOp::le: return lhs <= rhs;
    case CmpOp::gt: return lhs > rhs;
    case CmpOp::ge: return lhs >= rhs;
  }
  return false;
}

template <typename T>
bool compare_ordered(const T& lhs, CmpOp op, const T& rhs) {
  switch (op) {
    case CmpOp::eq: return lhs == rhs;
    case CmpOp::ne: return lhs != rhs;
    case CmpOp::lt: return lhs < rhs;
    case CmpOp::le: return lhs <= rhs;
    case CmpOp::gt: return lhs > rhs;
    case CmpOp::ge: return lhs >= rhs;
  }
  return false;
}

[[noreturn]] void mismatch(const std::string& what) { throw EvalError(ErrorKind::TypeMismatch, what); }

[[noreturn]] void unknown_column(std::string_view name) {
  throw EvalError(ErrorKind::UnknownColumn, "'" + std::string(name) + "'");
}

Value aggregate(const std::vector<double>& xs, AggFn fn) {
  if (fn == AggFn::count) return static_cast<double>(xs.size());
  if (xs.empty()) return NoData{};
  switch (fn) {
    case AggFn::sum: return std::accumulate(xs.begin(), xs.end(), 0.0);
    case AggFn::mean: return std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
    case AggFn::min: return *std::min_element(xs.begin(), xs.end());
    case AggFn::max: return *std::max_element(xs.begin(), xs.end());
    case AggFn::std: {
      if (xs.size() < 2) return NoData{};
      const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
      double ss = 0.0;
      for (double x : xs) ss += (x - mean) * (x - mean);
      return std::sqrt(ss / double(xs.size() - 1));
    }
    case AggFn::median: {
      std::vector<double> s = xs;
      std::sort(s.begin(), s.end());
      const std::size_t n = s.size();
      return n % 2 ? s[n / 2] : (s[n / 2 - 1] + s[n / 2]) / 2.0;
    }
    case AggFn::count: break;
  }
  return NoData{};
}

class Evaluator {
 public:
  explicit Evaluator(const UserDataset& ds) : ds_(ds) {}

  Value run(const Program& p) {
    for (const auto& let : p.lets) env_[let.name] = eval(*let.expr);
    return eval(*p.body);
  }

 private:
  Date row_date(TableKind t, std::size_t row) const {
    return t == TableKind::daily ? ds_.daily[row].date : ds_.activities[row].date();
  }

  Date series_key_date(const Series& s, std::size_t i) const {
    return s.source == TableKind::daily ? key_date(s.keys[i])
                                        : ds_.activities[static_cast<std::size_t>(s.keys[i])].date();
  }

  TableView all_rows(TableKind t) const {
    TableView v{t, {}};
    const std::size_t n = t == TableKind::daily ? ds_.daily.size()
                          : t == TableKind::activities ? ds_.activities.size() : 0;
    v.rows.resize(n);
    std::iota(v.rows.begin(), v.rows.end(), std::size_t{0});
    return v;
  }

  // Returns whether the row satisfies the predicate; missing cells never do.
  bool row_matches(TableKind t, std::size_t row, const Predicate& p) const {
    if (t == TableKind::daily) {
      const DailyColumn* col = find_daily_column(p.column);
      if (!col) unknown_column(p.column);
      const DailyRecord& rec = ds_.daily[row];
      if (col->metric) {
        const double* rhs = std::get_if<double>(&p.rhs);
        if (!rhs) mismatch("column '" + p.column + "' is numeric; compare it with a number");
        const Metric& m = rec.*col->metric;
        return m && compare(*m, p.op, *rhs);
      }
      if (col->name == "datetime") {
        const std::string* rhs = std::get_if<std::string>(&p.rhs);
        auto d = rhs ? parse_date(*rhs) : std::nullopt;
        if (!d) mismatch("column 'datetime' must be compared with a \"YYYY-MM-DD\" string");
        return compare_ordered(rec.date, p.op, *d);
      }
      mismatch("column '" + p.column + "' cannot be used in a predicate");
    }
    const ActivityColumn* col = find_activity_column(p.column);
    if (!col) unknown_column(p.column);
    const ActivityRecord& a = ds_.activities[row];
    if (col->name == "activityName") {
      const std::string* rhs = std::get_if<std::string>(&p.rhs);
      if (!rhs) mismatch("column 'activityName' must be compared with a string");
      if (p.op != CmpOp::eq && p.op != CmpOp::ne) {
        mismatch("column 'activityName' supports only == and !=");
      }
      return (a.activity_name == *rhs) == (p.op == CmpOp::eq);
    }
    if (!col->get) mismatch("column '" + p.column + "' cannot be used in a predicate");
    const double* rhs = std::get_if<double>(&p.rhs);
    if (!rhs) mismatch("column '" + p.column + "' is numeric; compare it with a number");
    const Metric m = col->get(a);
    return m && compare(*m, p.op, *rhs);
  }

  DateSet as_dateset(const Value& v) const {
    if (const auto* ds = std::get_if<DateSet>(&v)) return *ds;
    if (const auto* d = std::get_if<Date>(&v)) return DateSet{{*d}};
    if (std::holds_alternative<NoData>(v)) return DateSet{};
    mismatch(".on() needs a DateSet or Date, got " + std::string(type_name(v)));
  }

  std::vector<double> numbers_of(const Value& v, AggFn fn) const {
    if (const auto* s = std::get_if<Series>(&v)) return s->values;
    if (fn == AggFn::count) {
      if (const auto* t = std::get_if<TableView>(&v); t && t->table != TableKind::context) {
        return std::vector<double>(t->rows.size(), 0.0);
      }
      if (const auto* d = std::get_if<DateSet>(&v)) return std::vector<double>(d->dates.size(), 0.0);
    }
    mismatch("." + std::string(to_string(fn)) + "() needs a series, got " +
             std::string(type_name(v)));
  }

  Value project(const Value& in, const std::string& column) const {
    const auto* t = std::get_if<TableView>(&in);
    if (!t) mismatch("cannot select column '" + column + "' from " + std::string(type_name(in)));
    if (t->table == TableKind::context) {
      const auto& c = ds_.context;
      if (column == "age") return static_cast<double>(c.age);
      if (column == "weight_kg") return c.weight_kg;
      if (column == "height_cm") return c.height_cm ? Value{*c.height_cm} : Value{NoData{}};
      if (column == "gender") mismatch("context column 'gender' is not numeric");
      unknown_column(column);
    }
    Series s;
    s.source = t->table;
    s.column = column;
    if (t->table == TableKind::daily) {
      const DailyColumn* col = find_daily_column(column);
      if (!col) unknown_column(column);
      if (!col->metric) mismatch("column '" + column + "' is not numeric");
      for (std::size_t r : t->rows) {
        const Metric& m = ds_.daily[r].*col->metric;
        if (m) {
          s.keys.push_back(day_key(ds_.daily[r].date));
          s.values.push_back(*m);
        }
      }
    } else {
      const ActivityColumn* col = find_activity_column(column);
      if (!col) unknown_column(column);
      if (!col->get) mismatch("column '" + column + "' is not numeric");
      for (std::size_t r : t->rows) {
        const Metric m = col->get(ds_.activities[r]);
        if (m) {
          s.keys.push_back(static_cast<std::int64_t>(r));
          s.values.push_back(*m);
        }
      }
    }
    return s;
  }

  template <typename Keep>
  Value filter_by_date(const Value& in, Keep keep, std::string_view op) const {
    if (const auto* t = std::get_if<TableView>(&in); t && t->table != TableKind::context) {
      TableView out{t->table, {}};
      for (std::size_t r : t->rows) {
        if (keep(row_date(t->table, r))) out.rows.push_back(r);
      }
      return out;
    }
    if (const auto* s = std::get_if<Series>(&in)) {
      Series out{s->source, s->column, {}, {}};
      for (std::size_t i = 0; i < s->keys.size(); ++i) {
        if (keep(series_key_date(*s, i))) {
          out.keys.push_back(s->keys[i]);
          out.values.push_back(s->values[i]);
        }
      }
      return out;
    }
    mismatch(std::string(op) + " needs a table or series, got " + std::string(type_name(in)));
  }

  Value eval(const Node& n) {
    return std::visit([&](const auto& x) -> Value { return eval_node(x); }, n.kind);
  }

  Value eval_node(const TableRef& x) {
    if (x.table == TableKind::context) return TableView{TableKind::context, {}};
    return all_rows(x.table);
  }

  Value eval_node(const VarRef& x) {
    auto it = env_.find(x.name);
    if (it != env_.end()) return it->second;
    const bool looks_like_table = x.name.find("df") != std::string::npos ||
                                  x.name.find("table") != std::string::npos ||
                                  x.name.find("metrics") != std::string::npos ||
                                  x.name.find("summary") != std::string::npos;
    if (looks_like_table) {
      throw EvalError(ErrorKind::UnknownTable,
                      "'" + x.name + "' (available tables: daily, activities, context)");
    }
    throw EvalError(ErrorKind::UnboundVariable, "'" + x.name + "'");
  }

  Value eval_node(const NumberLit& x) { return x.value; }

  Value eval_node(const Projection& x) {
    // An unbound name indexed by a column is a table the model invented.
    if (const auto* v = std::get_if<VarRef>(&x.input->kind); v && !env_.count(v->name)) {
      throw EvalError(ErrorKind::UnknownTable, "'" + v->name + "' (available tables: daily, activities, context)");
    }
    return project(eval(*x.input), x.column);
  }

  Value eval_node(const During& x) {
    const DateInterval iv = resolve_period(x.period, ds_.today);
    return filter_by_date(eval(*x.input), [&](Date d) { return iv.contains(d); }, ".during()");
  }

  Value eval_node(const Where& x) {
    Value in = eval(*x.input);
    const auto* t = std::get_if<TableView>(&in);
    if (!t || t->table == TableKind::context) {
      mismatch(".where() needs a table, got " + std::string(type_name(in)));
    }
    TableView out{t->table, {}};
    for (std::size_t r : t->rows) {
      bool keep = true;
      for (const auto& p : x.predicates) {
        if (!row_matches(t->table, r, p)) {
          keep = false;
          break;
        }
      }
      if (keep) out.rows.push_back(r);
    }
    return out;
  }

  Value eval_node(const OnDates& x) {
    Value in = eval(*x.input);
    const DateSet set = as_dateset(eval(*x.dates));
    return filter_by_date(
        in, [&](Date d) { return std::binary_search(set.dates.begin(), set.dates.end(), d); },
        ".on()");
  }

  Value eval_node(const Aggregate& x) {
    Value in = eval(*x.input);
    return aggregate(numbers_of(in, x.fn), x.fn);
  }

  Value eval_node(const Corr& x) {
    Value l = eval(*x.left);
    Value r = eval(*x.right);
    const auto* a = std::get_if<Series>(&l);
    const auto* b = std::get_if<Series>(&r);
    if (!a || !b || a->source != TableKind::daily || b->source != TableKind::daily) {
      mismatch(".corr() needs two daily series, got " + std::string(type_name(l)) + " and " +
               std::string(type_name(r)));
    }
    std::vector<double> xs, ys;
    std::size_t i = 0, j = 0;
    while (i < a->keys.size() && j < b->keys.size()) {
      if (a->keys[i] < b->keys[j]) ++i;
      else if (b->keys[j] < a->keys[i]) ++j;
      else {
        xs.push_back(a->values[i++]);
        ys.push_back(b->values[j++]);
      }
    }
    const std::size_t n = xs.size();
    if (n < 2) return NoData{};
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / double(n);
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / double(n);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < n; ++k) {
      sxy += (xs[k] - mx) * (ys[k] - my);
      sxx += (xs[k] - mx) * (xs[k] - mx);
      syy += (ys[k] - my) * (ys[k] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return NoData{};
    const double denom = double(n - 1);
    return (sxy / denom) / (std::sqrt(sxx / denom) * std::sqrt(syy / denom));
  }

  Value eval_node(const Dates& x) {
    Value in = eval(*x.input);
    std::vector<Date> out;
    if (const auto* t = std::get_if<TableView>(&in); t && t->table != TableKind::context) {
      for (std::size_t r : t->rows) out.push_back(row_date(t->table, r));
    } else if (const auto* s = std::get_if<Series>(&in)) {
      for (std::size_t i = 0; i < s->keys.size(); ++i) out.push_back(series_key_date(*s, i));
    } else {
      mismatch(".dates() needs a table or series, got " + std::string(type_name(in)));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return DateSet{std::move(out)};
  }

  Value eval_node(const DaysWhere& x) {
    Value in = eval(*x.series);
    const auto* s = std::get_if<Series>(&in);
    if (!s) mismatch("days_where() needs a series, got " + std::string(type_name(in)));
    std::vector<Date> out;
    for (std::size_t i = 0; i < s->keys.size(); ++i) {
      if (compare(s->values[i], x.op, x.threshold)) out.push_back(series_key_date(*s, i));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return DateSet{std::move(out)};
  }

  Value eval_node(const MostRecentDayWith& x) {
    std::optional<Date> best;
    for (std::size_t r = 0; r < ds_.activities.size(); ++r) {
      bool keep = true;
      for (const auto& p : x.predicates) {
        if (!row_matches(TableKind::activities, r, p)) {
          keep = false;
          break;
        }
      }
      if (keep) {
        const Date d = ds_.activities[r].date();
        if (!best || d > *best) best = d;
      }
    }
    if (!best) return NoData{};
    return *best;
  }

  Value eval_node(const BinaryArith& x) {
    Value l = eval(*x.lhs);
    Value r = eval(*x.rhs);
    for (const Value* v : {&l, &r}) {
      if (!std::holds_alternative<double>(*v) && !std::holds_alternative<NoData>(*v)) {
        mismatch("arithmetic needs numbers, got " + std::string(type_name(*v)));
      }
    }
    if (std::holds_alternative<NoData>(l) || std::holds_alternative<NoData>(r)) return NoData{};
    const double a = std::get<double>(l);
    const double b = std::get<double>(r);
    switch (x.op) {
      case ArithOp::add: return a + b;
      case ArithOp::sub: return a - b;
      case ArithOp::mul: return a * b;
      case ArithOp::div:
        if (b == 0.0) throw EvalError(ErrorKind::DivisionByZero, "division by zero");
        return a / b;
    }
    return NoData{};
  }

  Value eval_node(const Tuple& x) {
    ValueTuple out;
    for (const auto& item : x.items) out.items.push_back(eval(*item));
    return out;
  }

  const UserDataset& ds_;
  std::map<std::string, Value> env_;
};

}  // namespace

Value evaluate(const Program& program, const UserDataset& ds) { return Evaluator(ds).run(program); }

Outcome run_program(std::string_view source, const UserDataset& ds) {
  try {
    return evaluate(parse(source), ds);
  } catch (const EvalError& e) {
    return e;
  }
}

std::string analyze(std::string_view source, const UserDataset& ds) {
  Outcome out = run_program(source, ds);
  if (const auto* err = std::get_if<EvalError>(&out)) return format_observation(*err);
  return format_observation(std::get<Value>(out), ds);
}

}  // namespace insight::dsl
