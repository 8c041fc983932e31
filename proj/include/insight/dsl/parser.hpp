#pragma once

#include <insight/dsl/ast.hpp>

#include <string_view>

namespace insight::dsl {

/// Parses and statically type-checks a program. Parsing never looks at a
/// dataset. Throws EvalError with kind ParseError (syntax, with line and
/// column), TypeMismatch (statically ill-typed) or PeriodParseError
/// (unsupported period phrase).
Program parse(std::string_view source);

}  // namespace insight::dsl
