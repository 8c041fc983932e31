#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace insight::dsl {

enum class TableKind { daily, activities, context };
enum class AggFn { mean, sum, min, max, count, std, median };
enum class CmpOp { eq, ne, lt, le, gt, ge };
enum class ArithOp { add, sub, mul, div };

struct SourcePos {
  int line = 1;
  int column = 1;
};

/// Right-hand side of a row predicate.
using Literal = std::variant<double, std::string>;

/// `column OP literal`, evaluated per row; missing cells never match.
struct Predicate {
  std::string column;
  CmpOp op = CmpOp::eq;
  Literal rhs;
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct TableRef { TableKind table; };
struct VarRef { std::string name; };
struct NumberLit { double value; };
struct Projection { NodePtr input; std::string column; };
struct During { NodePtr input; std::string period; };
struct Where { NodePtr input; std::vector<Predicate> predicates; };
struct OnDates { NodePtr input; NodePtr dates; };
struct Aggregate { NodePtr input; AggFn fn; };
struct Corr { NodePtr left; NodePtr right; };
struct Dates { NodePtr input; };
struct DaysWhere { NodePtr series; CmpOp op; double threshold; };
struct MostRecentDayWith { std::vector<Predicate> predicates; };
struct BinaryArith { ArithOp op; NodePtr lhs; NodePtr rhs; };
struct Tuple { std::vector<NodePtr> items; };

struct Node {
  std::variant<TableRef, VarRef, NumberLit, Projection, During, Where, OnDates, Aggregate, Corr,
               Dates, DaysWhere, MostRecentDayWith, BinaryArith, Tuple>
      kind;
  SourcePos pos;
};

struct LetBinding {
  std::string name;
  NodePtr expr;
};

/// Zero or more `let` bindings followed by one result expression.
struct Program {
  std::vector<LetBinding> lets;
  NodePtr body;
};

template <typename T>
NodePtr make_node(T value, SourcePos pos = {}) {
  return std::make_shared<const Node>(Node{std::move(value), pos});
}

std::string_view to_string(AggFn fn);
std::string_view to_string(CmpOp op);
std::string_view to_string(ArithOp op);
std::string_view to_string(TableKind t);

/// Canonical source text; parse(to_source(p)) is structurally equal to p.
std::string to_source(const Program& program);
std::string to_source(const Node& node);

/// Equality ignoring source positions.
bool structurally_equal(const Program& a, const Program& b);
bool structurally_equal(const Node& a, const Node& b);

}  // namespace insight::dsl
