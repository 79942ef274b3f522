#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gradalg/syntax.hpp"

namespace gradalg {

/// A model in grade-indexed finite sets over a finite slice of grades.
/// Elements are indices into per-grade carriers; labels are for printing.
/// An operation f of grade m is interpreted at each stage m' with m (x) m'
/// supported as a table A(m')^n -> A(m (x) m') indexed by tuple number
/// (first argument most significant).
class FiniteModel {
 public:
  FiniteModel(Theory theory, std::vector<Grade> support, std::string name = "model");

  const Theory& theory() const { return theory_; }
  const std::string& name() const { return name_; }
  const std::vector<Grade>& support() const { return support_; }

  std::optional<std::size_t> find_grade(const Grade& g) const;
  // Throws SupportError naming g.
  std::size_t grade_index(const Grade& g) const;

  void set_carrier(const Grade& m, std::vector<std::string> labels);
  const std::vector<std::string>& carrier(std::size_t gi) const { return carriers_[gi]; }
  std::size_t carrier_size(std::size_t gi) const { return carriers_[gi].size(); }
  std::size_t element(std::size_t gi, const std::string& label) const;

  // Action of m <= m' (identity tables for m = m' are filled in by default).
  void set_action(const Grade& from, const Grade& to, std::vector<std::size_t> table);
  const std::vector<std::size_t>* action(std::size_t from, std::size_t to) const;

  void set_operation(const std::string& op, const Grade& stage, std::vector<std::size_t> table);
  const std::vector<std::size_t>* operation(std::size_t op, std::size_t stage) const;

  // Supported stages m' of an operation, i.e. those with m_f (x) m' in the support.
  std::vector<std::size_t> stages(std::size_t op) const;
  // |A(gi)|^n, throwing ResourceError above 5e7.
  std::size_t tuple_count(std::size_t gi, std::size_t n) const;

 private:
  Theory theory_;
  std::string name_;
  std::vector<Grade> support_;
  std::map<Grade, std::size_t> index_;
  std::vector<std::vector<std::string>> carriers_;
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> actions_;
  std::vector<std::map<std::size_t, std::vector<std::size_t>>> operations_;
};

/// Builds every table from callbacks: carriers per grade, the action of
/// from <= to on an element, and an operation at a stage on an argument tuple.
FiniteModel build_model(
    const Theory& theory, const std::vector<Grade>& support, const std::string& name,
    const std::function<std::vector<std::string>(const Grade&)>& carrier,
    const std::function<std::size_t(const Grade& from, const Grade& to, std::size_t)>& action,
    const std::function<std::size_t(const Operation&, const Grade& stage,
                                    const std::vector<std::size_t>&)>& operation);

FiniteModel terminal_model(const Theory& theory, const std::vector<Grade>& support);

// Support used by catalog models: every grade for finite monoids,
// grades up to `nat_bound` otherwise.
std::vector<Grade> default_support(const GradeMonoid& gm, std::uint64_t nat_bound = 2);

/// |t| over a context: per stage m' (support index) with m_t (x) m' supported,
/// a table A(m')^n -> A(m_t (x) m').
struct Interpretation {
  Grade grade;
  std::size_t arity = 0;
  std::map<std::size_t, std::vector<std::size_t>> tables;
};

// Throws StructuralError for free variables outside the context and
// SupportError when an intermediate grade is missing at a stage whose
// result grade is supported.
Interpretation interpret(const FiniteModel& model, const std::vector<std::string>& context,
                         const Term& t);
// Value of t at one stage under an environment of elements of A(stage).
std::size_t evaluate(const FiniteModel& model, const std::vector<std::string>& context,
                     const Term& t, std::size_t stage, const std::vector<std::size_t>& env);

// Stages where eq.grade (x) m' is unsupported are skipped.
bool satisfies(const FiniteModel& model, const Equation& eq);
std::optional<std::string> counterexample(const FiniteModel& model, const Equation& eq);

// Failed invariants and axioms, one line each; empty for a valid model.
std::vector<std::string> check_model(const FiniteModel& model);

struct ModelHom {
  FiniteModel source;
  FiniteModel target;
  // Per support index, A(m) -> B(m).
  std::vector<std::vector<std::size_t>> components;
};

ModelHom identity_hom(const FiniteModel& model);
ModelHom hom_to_terminal(const FiniteModel& model);

// Throws StructuralError on mismatched theories, supports or component shapes.
bool hom_check(const ModelHom& h);
std::vector<std::string> hom_report(const ModelHom& h);

/// Exhaustive backtracking search for homomorphisms (natural families that
/// satisfy the homomorphism law), with some components fixed in advance as
/// (grade index, element) -> value. Stops after `limit` results.
std::vector<ModelHom> enumerate_homs(const FiniteModel& source, const FiniteModel& target,
                                     const std::map<std::pair<std::size_t, std::size_t>,
                                                    std::size_t>& fixed,
                                     std::size_t limit);

}  // namespace gradalg
