#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gradalg/grade.hpp"
#include "gradalg/logic.hpp"
#include "gradalg/syntax.hpp"

namespace gradalg {

// ---- catalog ----

// raise_<e> : 0 @ {e} for each e in `raised` (default: every exception).
Theory exception_theory(const std::vector<std::string>& exceptions,
                        std::optional<std::vector<std::string>> raised = std::nullopt);
// One location over powerset {*}: lookup : V @ top, update_v : 1 @ top.
Theory state_theory(std::size_t values);
// One nullary operation `none` over the trivial monoid.
Theory constant_theory();
// constant_theory extended along the unique map into `target` (default powerset {*}).
Theory lift_theory(const GradeMonoid& target = GradeMonoid::powerset({"*"}));
// Graded module over F2[t]/(t^3), graded by nat.
Theory module_theory();

std::vector<Theory> catalog();

// ---- morphisms ----

/// Assigns to each source operation of arity n a target term over x1..xn
/// with the operation's grade.
struct TheoryMorphism {
  Theory source;
  Theory target;
  std::map<std::string, Term> assignment;
};

std::vector<std::string> standard_variables(std::size_t n);

TheoryMorphism identity_morphism(const Theory& theory);
// Syntactic image of a source term in the target signature.
Term translate(const TheoryMorphism& alpha, const Term& t);
// Canonical class of the image, as decided over the term's variables.
Term apply_morphism(const TheoryMorphism& alpha, const Term& t, const DeciderConfig& config = {});
// (beta . alpha)(f) = F_beta(alpha(f)).
TheoryMorphism compose(const TheoryMorphism& beta, const TheoryMorphism& alpha);
// Grade and arity checks plus preservation of every source axiom; empty when valid.
std::vector<std::string> check_morphism(const TheoryMorphism& alpha,
                                        const DeciderConfig& config = {});

// ---- combinators ----

struct SumResult {
  Theory theory;
  TheoryMorphism left;
  TheoryMorphism right;
};

// Operations of both theories are prefixed when any name clashes.
SumResult sum(const Theory& a, const Theory& b, const std::string& left_prefix = "l_",
              const std::string& right_prefix = "r_");

Theory coequalize(const TheoryMorphism& alpha, const TheoryMorphism& beta);

Theory tensor(const Theory& a, const Theory& b, const std::string& left_prefix = "l_",
              const std::string& right_prefix = "r_");

Term extend_term(const LaxMonoidalMap& g, const Signature& source, const Signature& target,
                 const Term& t);
Theory extend(const LaxMonoidalMap& g, const Theory& theory);

// ---- L-fold state oracle ----

/// A function V^L -> V^L x X on state indices (location i is the i-th digit
/// in base |V|, least significant first).
struct StateFunction {
  std::vector<std::size_t> next;
  std::vector<std::size_t> output;

  friend bool operator==(const StateFunction&, const StateFunction&) = default;
};

/// All f with read(L', f) and write(L', f), by exhaustive enumeration.
std::vector<StateFunction> lfold_state_oracle(const std::vector<std::string>& locations,
                                              const std::vector<std::string>& values,
                                              const std::vector<std::string>& xs,
                                              const std::vector<std::string>& subset,
                                              double candidate_cap = 5e7);

}  // namespace gradalg
