#pragma once

#include <string>
#include <string_view>

#include "gradalg/grade.hpp"
#include "gradalg/model.hpp"
#include "gradalg/syntax.hpp"

namespace gradalg {

/// Inverse of GradeMonoid::describe, e.g. `exception {e1,e2}` or
/// `product(powerset {*}, nat)`. Throws StructuralError.
GradeMonoid parse_monoid(std::string_view text);

/// Theory files, one declaration per line, `#` starts a comment:
///
///   theory state
///   monoid powerset {*}
///   normalizer state
///   op lookup : 2 @ {*}
///   eq lookup-update: forall x : lookup(update_0(x),update_1(x)) = c[{*}](x)
///
/// The monoid line comes before any grade literal. Throws ParseError with the
/// line and column of the offending construct.
Theory parse_theory(std::string_view text);
// Canonical text; parse_theory(print_theory(t)) prints back identically.
std::string print_theory(const Theory& theory);

/// Model files over a given theory:
///
///   model two
///   support {} {*}
///   carrier {} = a b
///   action {} <= {*} = f0 f1
///   op lookup @ {} = ...
///
/// Labels are whitespace-free tokens; action and operation tables list result
/// labels in argument-tuple order (first argument most significant).
FiniteModel parse_model(const Theory& theory, std::string_view text);
std::string print_model(const FiniteModel& model);

}  // namespace gradalg
