#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gradalg/logic.hpp"
#include "gradalg/model.hpp"

namespace gradalg {

/// F_T X over the variables X, restricted to a finite set of supported grades.
/// Elements are canonical terms; operations act on representatives.
class FreeModel {
 public:
  FreeModel(const Theory& theory, std::vector<std::string> vars, std::vector<Grade> support,
            DeciderConfig config = {});

  const Theory& theory() const { return theory_; }
  const std::vector<std::string>& variables() const { return vars_; }
  const std::vector<Grade>& support() const { return support_; }
  bool exact() const { return decider_.exact(); }

  Term canonical(const Term& t) const;
  const std::vector<Term>& elements(const Grade& m) const;
  std::size_t size(const Grade& m) const { return elements(m).size(); }
  // Position of the class of t among elements(grade of t); nullopt when the
  // canonical form is not one of the enumerated elements.
  std::optional<std::size_t> index(const Term& t) const;

  // [t]_m |-> [c(t)]_m2.
  std::size_t coerce(const Grade& m, const Grade& m2, std::size_t e) const;
  // [f(t_1..t_n)] at grade m_f (x) stage.
  std::size_t apply(const std::string& op, const Grade& stage,
                    const std::vector<std::size_t>& args) const;

  // Tables for every supported grade; labels are printed representatives.
  FiniteModel to_finite_model(const std::string& name = "free") const;

 private:
  Theory theory_;
  std::vector<std::string> vars_;
  std::vector<Grade> support_;
  Decider decider_;
  mutable std::mutex mutex_;
  mutable std::map<Grade, std::vector<Term>> elements_;
  mutable std::map<Grade, std::unordered_map<Term, std::size_t, TermHash>> positions_;
};

// Throws ResourceError when the closure cap is hit.
FreeModel free_model(const Theory& theory, std::vector<std::string> vars,
                     std::vector<Grade> support, std::size_t depth = 3);

/// The unique homomorphism F X -> B extending a valuation X -> B(I):
/// [t]_m |-> |t| evaluated at stage I. Throws SupportError when I or a grade
/// of F is missing from B.
ModelHom universal_hom(const FreeModel& free, const FiniteModel& target,
                       const std::vector<std::size_t>& valuation);

/// A finitary graded monad materialized on the sets [k] = {0..k-1}.
/// Elements of T(m, [k]) are indices 0..size(m, k)-1.
class GradedMonad {
 public:
  virtual ~GradedMonad() = default;

  virtual const GradeMonoid& monoid() const = 0;
  // Grades the monad is materialized at.
  virtual std::vector<Grade> grades() const = 0;
  virtual std::string name() const { return "monad"; }

  virtual std::size_t size(const Grade& m, std::size_t k) const = 0;
  virtual std::string show(const Grade& m, std::size_t k, std::size_t e) const = 0;

  // eta : [k] -> T(I, [k])
  virtual std::size_t unit(std::size_t k, std::size_t i) const = 0;
  // T(m <= m2, [k])
  virtual std::size_t coerce(const Grade& m, const Grade& m2, std::size_t k,
                             std::size_t e) const = 0;
  // T(m, h) for h : [k] -> [k2]
  virtual std::size_t fmap(const Grade& m, std::size_t k, std::size_t k2,
                           const std::vector<std::size_t>& h, std::size_t e) const = 0;
  // mu : T(m1, T(m2, [k])) -> T(m1 (x) m2, [k]); e lies in T(m1, [size(m2, k)]).
  virtual std::size_t mult(const Grade& m1, const Grade& m2, std::size_t k,
                           std::size_t e) const;
  // mu . T(m1, f) for e in T(m1, [k]) and f : [k] -> T(m2, [k2]).
  virtual std::size_t bind(const Grade& m1, std::size_t k, std::size_t e, const Grade& m2,
                           std::size_t k2, const std::vector<std::size_t>& f) const;
};

enum class SubstitutionMode {
  Simultaneous,
  // Broken on purpose: variables are replaced one after another, last first,
  // so a bound term mentioning an earlier variable is rewritten again.
  // Used by mutant tests.
  Sequential,
};

struct FreeMonadConfig {
  DeciderConfig decider;
  // Largest space whose elements are listed and indexed; larger spaces can
  // only be sampled through element().
  std::size_t table_cap = 200'000;
  SubstitutionMode substitution = SubstitutionMode::Simultaneous;
};

/// The monad induced by the free-model adjunction: T(m, [k]) is F_T [k] m over
/// the variables x1..xk, mu substitutes representatives and renormalizes.
class FreeMonad : public GradedMonad {
 public:
  FreeMonad(const Theory& theory, std::vector<Grade> grades, FreeMonadConfig config = {});

  const Theory& theory() const { return theory_; }
  const GradeMonoid& monoid() const override { return theory_.monoid(); }
  std::vector<Grade> grades() const override { return grades_; }
  std::string name() const override { return theory_.name; }

  std::size_t size(const Grade& m, std::size_t k) const override;
  std::string show(const Grade& m, std::size_t k, std::size_t e) const override;
  std::size_t unit(std::size_t k, std::size_t i) const override;
  std::size_t coerce(const Grade& m, const Grade& m2, std::size_t k,
                     std::size_t e) const override;
  std::size_t fmap(const Grade& m, std::size_t k, std::size_t k2,
                   const std::vector<std::size_t>& h, std::size_t e) const override;
  std::size_t mult(const Grade& m1, const Grade& m2, std::size_t k,
                   std::size_t e) const override;
  std::size_t bind(const Grade& m1, std::size_t k, std::size_t e, const Grade& m2,
                   std::size_t k2, const std::vector<std::size_t>& f) const override;

  // Representative of element e of T(m, [k]).
  Term element(const Grade& m, std::size_t k, std::size_t e) const;
  // Index of the class of t (over x1..xk) in T(grade of t, [k]).
  std::size_t index(std::size_t k, const Term& t) const;

 private:
  struct Space {
    std::size_t count = 0;
    bool listed = false;
    std::vector<Term> elements;
    std::unordered_map<Term, std::size_t, TermHash> positions;
  };
  const Decider& decider(std::size_t k) const;
  Space& space(const Grade& m, std::size_t k, bool need_list) const;
  Term substitute_all(const Term& e, std::size_t k, const Grade& m2,
                      const std::vector<Term>& values) const;

  Theory theory_;
  std::vector<Grade> grades_;
  FreeMonadConfig config_;
  mutable std::recursive_mutex mutex_;
  mutable std::map<std::size_t, std::unique_ptr<Decider>> deciders_;
  mutable std::map<std::pair<Grade, std::size_t>, Space> spaces_;
  mutable std::map<std::pair<std::size_t, std::size_t>, std::size_t> units_;
};

struct LawConfig {
  // Sizes k of the base sets [k].
  std::vector<std::size_t> set_sizes{1, 2};
  // Per grade triple, enumerate every element when the space is at most this big.
  std::size_t exhaustive_budget = 20'000;
  // Random samples per grade triple otherwise.
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  // Report lines kept; further failures are only counted.
  std::size_t max_lines = 20;
};

struct LawReport {
  std::vector<std::string> failures;
  std::size_t failure_count = 0;
  std::size_t checked = 0;
  // False when at least one grade triple was sampled.
  bool exhaustive = true;

  bool ok() const { return failure_count == 0; }
};

/// Unit and associativity squares, naturality of eta and mu in the set and of
/// mu in both grades, and functoriality of the order action.
LawReport check_monad_laws(const GradedMonad& monad, const LawConfig& config = {});

/// f : [source] -> T(grade, [target]).
struct KleisliHom {
  std::size_t source = 0;
  std::size_t target = 0;
  Grade grade;
  std::vector<std::size_t> map;

  friend bool operator==(const KleisliHom&, const KleisliHom&) = default;
};

KleisliHom kleisli_unit(const GradedMonad& monad, std::size_t n);
// f then g: mu . (m_f * g) . f, of grade m_f (x) m_g. Throws StructuralError
// when f.target != g.source.
KleisliHom kleisli_compose(const GradedMonad& monad, const KleisliHom& f, const KleisliHom& g);
// The same composite written in the opposite order, g after f.
KleisliHom kleisli_after(const GradedMonad& monad, const KleisliHom& g, const KleisliHom& f);

}  // namespace gradalg
