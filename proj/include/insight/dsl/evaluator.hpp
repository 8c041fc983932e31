#pragma once

#include <insight/datamodel.hpp>
#include <insight/dsl/ast.hpp>
#include <insight/dsl/value.hpp>

#include <string_view>
#include <variant>

namespace insight::dsl {

/// Evaluates a parsed program against one user's data. Pure: the same
/// program and dataset always give the same value. Aggregates skip
/// missing cells; std and corr use the n-1 denominator; an aggregate
/// over an empty selection is NoData, except count which is 0.
/// Throws EvalError.
Value evaluate(const Program& program, const UserDataset& ds);

using Outcome = std::variant<Value, EvalError>;

/// Parses and evaluates, capturing any EvalError.
Outcome run_program(std::string_view source, const UserDataset& ds);

/// Parses, evaluates and formats the observation text.
std::string analyze(std::string_view source, const UserDataset& ds);

}  // namespace insight::dsl
