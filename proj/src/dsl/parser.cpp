#include <insight/dsl/parser.hpp>

#include <insight/dsl/lexer.hpp>
#include <insight/dsl/period.hpp>
#include <insight/dsl/value.hpp>

#include <map>
#include <optional>

namespace insight::dsl {

namespace {

// Static types for the parse-time check. `unknown` defers to evaluation.
enum class Type {
  unknown, number, date, dateset, daily_series, activity_series,
  daily_table, activity_table, context, tuple,
};

std::string_view type_text(Type t) {
  switch (t) {
    case Type::unknown: return "unknown";
    case Type::number: return "Number";
    case Type::date: return "Date";
    case Type::dateset: return "DateSet";
    case Type::daily_series: return "Series(daily)";
    case Type::activity_series: return "Series(activities)";
    case Type::daily_table: return "Table(daily)";
    case Type::activity_table: return "Table(activities)";
    case Type::context: return "Context";
    case Type::tuple: return "Tuple";
  }
  return "?";
}

bool is_table(Type t) { return t == Type::daily_table || t == Type::activity_table; }
bool is_series(Type t) { return t == Type::daily_series || t == Type::activity_series; }

[[noreturn]] void type_error(SourcePos pos, const std::string& what) {
  throw EvalError(ErrorKind::TypeMismatch,
                  std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + what);
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  Program program() {
    Program p;
    while (peek_ident("let")) {
      const SourcePos at = cur().pos;
      next();
      const Token& name = expect(TokenKind::Ident, "variable name");
      if (is_reserved(name.text)) fail(name.pos, "'" + name.text + "' is a reserved name");
      std::string var = name.text;
      expect(TokenKind::Assign, "'='");
      NodePtr e = expr();
      expect(TokenKind::Semicolon, "';' after let binding");
      Type t = infer(*e);
      env_[var] = t;
      p.lets.push_back({std::move(var), std::move(e)});
      (void)at;
    }
    p.body = expr();
    infer(*p.body);
    if (cur().kind == TokenKind::Semicolon) next();
    if (cur().kind != TokenKind::End) {
      fail(cur().pos, "unexpected " + std::string(describe(cur().kind)) + " after expression");
    }
    return p;
  }

 private:
  const Token& cur() const { return toks_[pos_]; }
  const Token& next() { return toks_[pos_++]; }

  bool peek_ident(std::string_view name) const {
    return cur().kind == TokenKind::Ident && cur().text == name;
  }

  static bool is_reserved(std::string_view s) {
    return s == "let" || s == "and" || s == "daily" || s == "activities" || s == "context" ||
           s == "days_where" || s == "most_recent_day_with";
  }

  [[noreturn]] static void fail(SourcePos pos, const std::string& what) {
    throw EvalError(ErrorKind::ParseError,
                    std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + what);
  }

  const Token& expect(TokenKind kind, std::string_view what) {
    if (cur().kind != kind) {
      fail(cur().pos, "expected " + std::string(what) + ", found " +
                          std::string(describe(cur().kind)));
    }
    return next();
  }

  // expr := term (('+'|'-') term)*
  NodePtr expr() {
    NodePtr lhs = term();
    while (cur().kind == TokenKind::Plus || cur().kind == TokenKind::Minus) {
      const SourcePos at = cur().pos;
      ArithOp op = next().kind == TokenKind::Plus ? ArithOp::add : ArithOp::sub;
      NodePtr rhs = term();
      lhs = make_node(BinaryArith{op, lhs, rhs}, at);
    }
    return lhs;
  }

  // term := unary (('*'|'/') unary)*
  NodePtr term() {
    NodePtr lhs = unary();
    while (cur().kind == TokenKind::Star || cur().kind == TokenKind::Slash) {
      const SourcePos at = cur().pos;
      ArithOp op = next().kind == TokenKind::Star ? ArithOp::mul : ArithOp::div;
      NodePtr rhs = unary();
      lhs = make_node(BinaryArith{op, lhs, rhs}, at);
    }
    return lhs;
  }

  NodePtr unary() {
    if (cur().kind == TokenKind::Minus) {
      const SourcePos at = next().pos;
      if (cur().kind == TokenKind::Number) {
        return postfix(make_node(NumberLit{-next().number}, at));
      }
      NodePtr operand = unary();
      return make_node(BinaryArith{ArithOp::sub, make_node(NumberLit{0.0}, at), operand}, at);
    }
    return postfix(primary());
  }

  NodePtr primary() {
    const Token& t = cur();
    const SourcePos at = t.pos;
    switch (t.kind) {
      case TokenKind::Number:
        next();
        return make_node(NumberLit{t.number}, at);
      case TokenKind::LParen: {
        next();
        NodePtr first = expr();
        if (cur().kind == TokenKind::Comma) {
          std::vector<NodePtr> items{first};
          while (cur().kind == TokenKind::Comma) {
            next();
            items.push_back(expr());
          }
          expect(TokenKind::RParen, "')' to close tuple");
          return make_node(Tuple{std::move(items)}, at);
        }
        expect(TokenKind::RParen, "')'");
        return first;
      }
      case TokenKind::Ident: {
        next();
        if (t.text == "daily") return make_node(TableRef{TableKind::daily}, at);
        if (t.text == "activities") return make_node(TableRef{TableKind::activities}, at);
        if (t.text == "context") return make_node(TableRef{TableKind::context}, at);
        if (t.text == "days_where") {
          expect(TokenKind::LParen, "'(' after days_where");
          NodePtr series = unary();
          auto op = cmp_op();
          if (!op) fail(cur().pos, "expected comparison operator in days_where");
          double threshold = signed_number();
          expect(TokenKind::RParen, "')' to close days_where");
          return make_node(DaysWhere{series, *op, threshold}, at);
        }
        if (t.text == "most_recent_day_with") {
          expect(TokenKind::LParen, "'(' after most_recent_day_with");
          auto preds = predicate_list();
          expect(TokenKind::RParen, "')' to close most_recent_day_with");
          return make_node(MostRecentDayWith{std::move(preds)}, at);
        }
        if (t.text == "let" || t.text == "and") fail(at, "unexpected keyword '" + t.text + "'");
        return make_node(VarRef{t.text}, at);
      }
      default:
        fail(at, "expected an expression, found " + std::string(describe(t.kind)));
    }
  }

  NodePtr postfix(NodePtr base) {
    for (;;) {
      const SourcePos at = cur().pos;
      if (cur().kind == TokenKind::LBracket) {
        next();
        const Token& col = expect(TokenKind::String, "quoted column name");
        std::string name = col.text;
        expect(TokenKind::RBracket, "']'");
        base = make_node(Projection{base, std::move(name)}, at);
        continue;
      }
      if (cur().kind != TokenKind::Dot) return base;
      next();
      const Token& method = expect(TokenKind::Ident, "method name after '.'");
      const std::string name = method.text;
      expect(TokenKind::LParen, "'(' after ." + name);
      if (name == "during") {
        const Token& phrase = expect(TokenKind::String, "quoted period phrase");
        std::string period = phrase.text;
        check_period_phrase(period);
        expect(TokenKind::RParen, "')'");
        base = make_node(During{base, std::move(period)}, at);
      } else if (name == "where") {
        auto preds = predicate_list();
        expect(TokenKind::RParen, "')' to close where");
        base = make_node(Where{base, std::move(preds)}, at);
      } else if (name == "on") {
        NodePtr dates = expr();
        expect(TokenKind::RParen, "')' to close on");
        base = make_node(OnDates{base, dates}, at);
      } else if (name == "corr") {
        NodePtr other = expr();
        expect(TokenKind::RParen, "')' to close corr");
        base = make_node(Corr{base, other}, at);
      } else if (name == "dates") {
        expect(TokenKind::RParen, "')'");
        base = make_node(Dates{base}, at);
      } else if (auto fn = agg_fn(name)) {
        expect(TokenKind::RParen, "')'");
        base = make_node(Aggregate{base, *fn}, at);
      } else {
        fail(method.pos, "unknown method '" + name + "'");
      }
    }
  }

  static std::optional<AggFn> agg_fn(std::string_view name) {
    if (name == "mean") return AggFn::mean;
    if (name == "sum") return AggFn::sum;
    if (name == "min") return AggFn::min;
    if (name == "max") return AggFn::max;
    if (name == "count") return AggFn::count;
    if (name == "std") return AggFn::std;
    if (name == "median") return AggFn::median;
    return std::nullopt;
  }

  std::optional<CmpOp> cmp_op() {
    std::optional<CmpOp> op;
    switch (cur().kind) {
      case TokenKind::Eq: op = CmpOp::eq; break;
      case TokenKind::Ne: op = CmpOp::ne; break;
      case TokenKind::Lt: op = CmpOp::lt; break;
      case TokenKind::Le: op = CmpOp::le; break;
      case TokenKind::Gt: op = CmpOp::gt; break;
      case TokenKind::Ge: op = CmpOp::ge; break;
      default: return std::nullopt;
    }
    next();
    return op;
  }

  double signed_number() {
    bool negative = false;
    if (cur().kind == TokenKind::Minus) {
      next();
      negative = true;
    }
    const Token& n = expect(TokenKind::Number, "number");
    return negative ? -n.number : n.number;
  }

  std::vector<Predicate> predicate_list() {
    std::vector<Predicate> preds;
    preds.push_back(predicate());
    while (peek_ident("and")) {
      next();
      preds.push_back(predicate());
    }
    return preds;
  }

  Predicate predicate() {
    const Token& col = expect(TokenKind::Ident, "column name in predicate");
    Predicate p;
    p.column = col.text;
    auto op = cmp_op();
    if (!op) fail(cur().pos, "expected comparison operator after '" + p.column + "'");
    p.op = *op;
    if (cur().kind == TokenKind::String) {
      p.rhs = next().text;
    } else {
      p.rhs = signed_number();
    }
    return p;
  }

  // Static typing: rejects programs whose types are fully known and wrong.
  Type infer(const Node& n) {
    const SourcePos at = n.pos;
    return std::visit(
        [&](const auto& x) -> Type {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, TableRef>) {
            switch (x.table) {
              case TableKind::daily: return Type::daily_table;
              case TableKind::activities: return Type::activity_table;
              case TableKind::context: return Type::context;
            }
            return Type::unknown;
          } else if constexpr (std::is_same_v<T, VarRef>) {
            auto it = env_.find(x.name);
            return it == env_.end() ? Type::unknown : it->second;
          } else if constexpr (std::is_same_v<T, NumberLit>) {
            return Type::number;
          } else if constexpr (std::is_same_v<T, Projection>) {
            Type in = infer(*x.input);
            if (in == Type::daily_table) return Type::daily_series;
            if (in == Type::activity_table) return Type::activity_series;
            if (in == Type::context) return Type::number;
            if (in == Type::unknown) return Type::unknown;
            type_error(at, "cannot select a column from " + std::string(type_text(in)));
          } else if constexpr (std::is_same_v<T, During>) {
            Type in = infer(*x.input);
            if (is_table(in) || is_series(in) || in == Type::unknown) return in;
            type_error(at, ".during() needs a table or series, got " + std::string(type_text(in)));
          } else if constexpr (std::is_same_v<T, Where>) {
            Type in = infer(*x.input);
            if (is_table(in) || in == Type::unknown) return in;
            type_error(at, ".where() needs a table, got " + std::string(type_text(in)));
          } else if constexpr (std::is_same_v<T, OnDates>) {
            Type in = infer(*x.input);
            Type d = infer(*x.dates);
            if (d != Type::unknown && d != Type::dateset && d != Type::date) {
              type_error(at, ".on() needs a DateSet or Date, got " + std::string(type_text(d)));
            }
            if (is_table(in) || is_series(in) || in == Type::unknown) return in;
            type_error(at, ".on() needs a table or series, got " + std::string(type_text(in)));
          } else if constexpr (std::is_same_v<T, Aggregate>) {
            Type in = infer(*x.input);
            if (is_series(in) || in == Type::unknown) return Type::number;
            if (x.fn == AggFn::count && (is_table(in) || in == Type::dateset)) return Type::number;
            type_error(at, "." + std::string(to_string(x.fn)) + "() needs a series, got " +
                               std::string(type_text(in)));
          } else if constexpr (std::is_same_v<T, Corr>) {
            Type l = infer(*x.left);
            Type r = infer(*x.right);
            for (Type t : {l, r}) {
              if (t != Type::daily_series && t != Type::unknown) {
                type_error(at, ".corr() needs two daily series, got " +
                                   std::string(type_text(t)));
              }
            }
            return Type::number;
          } else if constexpr (std::is_same_v<T, Dates>) {
            Type in = infer(*x.input);
            if (is_table(in) || is_series(in) || in == Type::unknown) return Type::dateset;
            type_error(at, ".dates() needs a table or series, got " + std::string(type_text(in)));
          } else if constexpr (std::is_same_v<T, DaysWhere>) {
            Type in = infer(*x.series);
            if (is_series(in) || in == Type::unknown) return Type::dateset;
            type_error(at, "days_where() needs a series, got " + std::string(type_text(in)));
          } else if constexpr (std::is_same_v<T, MostRecentDayWith>) {
            return Type::date;
          } else if constexpr (std::is_same_v<T, BinaryArith>) {
            for (Type t : {infer(*x.lhs), infer(*x.rhs)}) {
              if (t != Type::number && t != Type::unknown) {
                type_error(at, "arithmetic needs numbers, got " + std::string(type_text(t)));
              }
            }
            return Type::number;
          } else {
            for (const auto& item : x.items) infer(*item);
            return Type::tuple;
          }
        },
        n.kind);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::map<std::string, Type> env_;
};

}  // namespace

Program parse(std::string_view source) { return Parser(tokenize(source)).program(); }

}  // namespace insight::dsl
