#include <insight/dsl/ast.hpp>

#include <charconv>

namespace insight::dsl {

std::string_view to_string(AggFn fn) {
  switch (fn) {
    case AggFn::mean: return "mean";
    case AggFn::sum: return "sum";
    case AggFn::min: return "min";
    case AggFn::max: return "max";
    case AggFn::count: return "count";
    case AggFn::std: return "std";
    case AggFn::median: return "median";
  }
  return "?";
}

std::string_view to_string(CmpOp op) {
  switch (op) {
    case CmpOp::eq: return "==";
    case CmpOp::ne: return "!=";
    case CmpOp::lt: return "<";
    case CmpOp::le: return "<=";
    case CmpOp::gt: return ">";
    case CmpOp::ge: return ">=";
  }
  return "?";
}

std::string_view to_string(ArithOp op) {
  switch (op) {
    case ArithOp::add: return "+";
    case ArithOp::sub: return "-";
    case ArithOp::mul: return "*";
    case ArithOp::div: return "/";
  }
  return "?";
}

std::string_view to_string(TableKind t) {
  switch (t) {
    case TableKind::daily: return "daily";
    case TableKind::activities: return "activities";
    case TableKind::context: return "context";
  }
  return "?";
}

namespace {

std::string number_text(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  return out + "\"";
}

std::string literal_text(const Literal& lit) {
  if (const double* d = std::get_if<double>(&lit)) return number_text(*d);
  return quoted(std::get<std::string>(lit));
}

std::string predicates_text(const std::vector<Predicate>& preds) {
  std::string out;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (i) out += " and ";
    out += preds[i].column + " " + std::string(to_string(preds[i].op)) + " " +
           literal_text(preds[i].rhs);
  }
  return out;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string to_source(const Node& node) {
  return std::visit(
      overloaded{
          [](const TableRef& n) { return std::string(to_string(n.table)); },
          [](const VarRef& n) { return n.name; },
          [](const NumberLit& n) { return number_text(n.value); },
          [](const Projection& n) { return to_source(*n.input) + "[" + quoted(n.column) + "]"; },
          [](const During& n) {
            return to_source(*n.input) + ".during(" + quoted(n.period) + ")";
          },
          [](const Where& n) {
            return to_source(*n.input) + ".where(" + predicates_text(n.predicates) + ")";
          },
          [](const OnDates& n) {
            return to_source(*n.input) + ".on(" + to_source(*n.dates) + ")";
          },
          [](const Aggregate& n) {
            return to_source(*n.input) + "." + std::string(to_string(n.fn)) + "()";
          },
          [](const Corr& n) { return to_source(*n.left) + ".corr(" + to_source(*n.right) + ")"; },
          [](const Dates& n) { return to_source(*n.input) + ".dates()"; },
          [](const DaysWhere& n) {
            return "days_where(" + to_source(*n.series) + " " + std::string(to_string(n.op)) +
                   " " + number_text(n.threshold) + ")";
          },
          [](const MostRecentDayWith& n) {
            return "most_recent_day_with(" + predicates_text(n.predicates) + ")";
          },
          [](const BinaryArith& n) {
            return "(" + to_source(*n.lhs) + " " + std::string(to_string(n.op)) + " " +
                   to_source(*n.rhs) + ")";
          },
          [](const Tuple& n) {
            std::string out = "(";
            for (std::size_t i = 0; i < n.items.size(); ++i) {
              if (i) out += ", ";
              out += to_source(*n.items[i]);
            }
            return out + ")";
          },
      },
      node.kind);
}

std::string to_source(const Program& program) {
  std::string out;
  for (const auto& let : program.lets) {
    out += "let " + let.name + " = " + to_source(*let.expr) + "; ";
  }
  return out + to_source(*program.body);
}

namespace {

bool same(const NodePtr& a, const NodePtr& b) {
  if (!a || !b) return a == b;
  return structurally_equal(*a, *b);
}

bool same_preds(const std::vector<Predicate>& a, const std::vector<Predicate>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].column != b[i].column || a[i].op != b[i].op || a[i].rhs != b[i].rhs) return false;
  }
  return true;
}

}  // namespace

bool structurally_equal(const Node& a, const Node& b) {
  if (a.kind.index() != b.kind.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b.kind);
        if constexpr (std::is_same_v<T, TableRef>) return x.table == y.table;
        else if constexpr (std::is_same_v<T, VarRef>) return x.name == y.name;
        else if constexpr (std::is_same_v<T, NumberLit>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, Projection>)
          return x.column == y.column && same(x.input, y.input);
        else if constexpr (std::is_same_v<T, During>)
          return x.period == y.period && same(x.input, y.input);
        else if constexpr (std::is_same_v<T, Where>)
          return same_preds(x.predicates, y.predicates) && same(x.input, y.input);
        else if constexpr (std::is_same_v<T, OnDates>)
          return same(x.input, y.input) && same(x.dates, y.dates);
        else if constexpr (std::is_same_v<T, Aggregate>)
          return x.fn == y.fn && same(x.input, y.input);
        else if constexpr (std::is_same_v<T, Corr>)
          return same(x.left, y.left) && same(x.right, y.right);
        else if constexpr (std::is_same_v<T, Dates>) return same(x.input, y.input);
        else if constexpr (std::is_same_v<T, DaysWhere>)
          return x.op == y.op && x.threshold == y.threshold && same(x.series, y.series);
        else if constexpr (std::is_same_v<T, MostRecentDayWith>)
          return same_preds(x.predicates, y.predicates);
        else if constexpr (std::is_same_v<T, BinaryArith>)
          return x.op == y.op && same(x.lhs, y.lhs) && same(x.rhs, y.rhs);
        else {
          if (x.items.size() != y.items.size()) return false;
          for (std::size_t i = 0; i < x.items.size(); ++i) {
            if (!same(x.items[i], y.items[i])) return false;
          }
          return true;
        }
      },
      a.kind);
}

bool structurally_equal(const Program& a, const Program& b) {
  if (a.lets.size() != b.lets.size()) return false;
  for (std::size_t i = 0; i < a.lets.size(); ++i) {
    if (a.lets[i].name != b.lets[i].name || !same(a.lets[i].expr, b.lets[i].expr)) return false;
  }
  return same(a.body, b.body);
}

}  // namespace insight::dsl
