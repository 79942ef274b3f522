#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "gradalg/freemonad.hpp"

namespace gradalg {

/// Graded Lawvere theory data on the objects 0..arity_bound.
///
/// hom(n, n', m) is stored as n'-tuples of elements of hom(n, 1, m), which in
/// turn are elements of T(m, [n]) for an underlying graded monad T. Tuples are
/// encoded as numbers with the first component most significant. Composition
/// is supplied per component, so th_of and l_of differ only in how a single
/// component is composed.
class GradedLawvere {
 public:
  // g in hom(n1, 1, m1) after f in hom(n, n1, m2) (given by its components).
  using ComponentCompose =
      std::function<std::size_t(const Grade& m1, std::size_t n1, std::size_t g, const Grade& m2,
                                std::size_t n, const std::vector<std::size_t>& f)>;

  GradedLawvere(std::string name, std::shared_ptr<const GradedMonad> monad,
                std::size_t arity_bound, std::vector<Grade> support, ComponentCompose compose);

  const std::string& name() const { return name_; }
  const GradeMonoid& monoid() const { return monad_->monoid(); }
  const GradedMonad& monad() const { return *monad_; }
  std::size_t arity_bound() const { return bound_; }
  const std::vector<Grade>& support() const { return support_; }
  bool supported(const Grade& m) const;

  // |hom(n, 1, m)|
  std::size_t component_count(std::size_t n, const Grade& m) const;
  // |hom(n, n', m)|; throws ResourceError when it does not fit.
  std::size_t hom_size(std::size_t n, std::size_t n2, const Grade& m) const;
  std::vector<std::size_t> components(std::size_t n, std::size_t n2, const Grade& m,
                                      std::size_t f) const;
  std::size_t tuple(std::size_t n, const Grade& m, const std::vector<std::size_t>& parts) const;
  std::string show(std::size_t n, std::size_t n2, const Grade& m, std::size_t f) const;

  std::size_t compose_component(const Grade& m1, std::size_t n1, std::size_t g, const Grade& m2,
                                std::size_t n, const std::vector<std::size_t>& f) const;
  // g in hom(n1, n2, m1), f in hom(n, n1, m2); result in hom(n, n2, m1 (x) m2).
  std::size_t compose(std::size_t n, std::size_t n1, std::size_t n2, const Grade& m1,
                      std::size_t g, const Grade& m2, std::size_t f) const;
  // Order action hom(n, n', m) -> hom(n, n', m2), componentwise.
  std::size_t act(std::size_t n, std::size_t n2, const Grade& m, const Grade& m2,
                  std::size_t f) const;

  std::size_t projection(std::size_t n, std::size_t i) const;
  // Overrides a projection; only for mutant tests.
  void set_projection(std::size_t n, std::size_t i, std::size_t element);
  // <pi_0, ..., pi_{n-1}> in hom(n, n, I).
  std::size_t identity(std::size_t n) const;

  // Set when built from a theory; used to check term interpretation.
  const FreeMonad* free_monad() const { return free_.get(); }
  void attach_free_monad(std::shared_ptr<const FreeMonad> free) { free_ = std::move(free); }

 private:
  std::string name_;
  std::shared_ptr<const GradedMonad> monad_;
  std::shared_ptr<const FreeMonad> free_;
  std::size_t bound_;
  std::vector<Grade> support_;
  ComponentCompose compose_;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> projection_overrides_;
  struct MemoKey {
    Grade m1;
    std::size_t n1, g;
    Grade m2;
    std::size_t n;
    std::vector<std::size_t> f;
    friend bool operator==(const MemoKey&, const MemoKey&) = default;
  };
  struct MemoHash {
    std::size_t operator()(const MemoKey& k) const;
  };
  struct Memo {
    std::mutex mutex;
    std::unordered_map<MemoKey, std::size_t, MemoHash> values;
  };
  // Component composites; copies share it, which is safe since composition
  // does not depend on the projections.
  std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();
};

/// (Th T)(n, n')m = (F_T n m)^{n'}; composition substitutes representatives
/// and renormalizes.
GradedLawvere th_of(const Theory& theory, std::size_t arity_bound, std::vector<Grade> support,
                    DeciderConfig config = {});

/// L_T(n, n')m = functions n' -> T(m, n); composition is Kleisli composition
/// read in the opposite order, projections are pi_i = (* |-> eta(i)).
GradedLawvere l_of(std::shared_ptr<const GradedMonad> monad, std::size_t arity_bound);

/// T_L(m, [k]) = L(k, 1)m with eta = projections and mu by composition.
class LawvereMonad : public GradedMonad {
 public:
  // The theory must outlive the monad.
  explicit LawvereMonad(const GradedLawvere& theory) : law_(&theory) {}

  const GradeMonoid& monoid() const override { return law_->monoid(); }
  std::vector<Grade> grades() const override { return law_->support(); }
  std::string name() const override { return "T(" + law_->name() + ")"; }
  std::size_t size(const Grade& m, std::size_t k) const override;
  std::string show(const Grade& m, std::size_t k, std::size_t e) const override;
  std::size_t unit(std::size_t k, std::size_t i) const override;
  std::size_t coerce(const Grade& m, const Grade& m2, std::size_t k,
                     std::size_t e) const override;
  std::size_t fmap(const Grade& m, std::size_t k, std::size_t k2,
                   const std::vector<std::size_t>& h, std::size_t e) const override;
  std::size_t mult(const Grade& m1, const Grade& m2, std::size_t k,
                   std::size_t e) const override;

 private:
  const GradedLawvere* law_;
};

struct LawvereConfig {
  // Single cells up to this many elements are enumerated.
  std::size_t exhaustive_budget = 100'000;
  // Pairs and triples of morphisms up to this many are enumerated.
  std::size_t combo_budget = 4096;
  // Random instances per cell combination above the budgets.
  std::size_t samples = 200;
  std::uint64_t seed = 1;
  // Random terms per arity for the term interpretation check.
  std::size_t terms = 100;
  std::size_t max_lines = 50;
};

struct LawvereReport {
  // One failed check per line, prefixed by its cell "(n, n', m)".
  std::vector<std::string> lines;
  std::size_t failure_count = 0;
  std::size_t checked = 0;
  // Cell combinations that were sampled instead of enumerated.
  std::size_t sampled = 0;
  // Law instances in all cell combinations, checked or not (saturating).
  std::size_t instances = 0;

  bool ok() const { return failure_count == 0; }
};

/// Identity, associativity, naturality of composition in the grades and the
/// tupling bijection f |-> (pi_1 . f, ..., pi_n . f).
LawvereReport check_lawvere(const GradedLawvere& law, const LawvereConfig& config = {});

/// Compares L with L_{T_L}: the maps f |-> (pi_i . f)_i are bijections that
/// preserve composition, projections and identities. For theories built by
/// th_of, also checks that interpreting terms by composition lands on their
/// canonical classes.
LawvereReport roundtrip_check(const GradedLawvere& law, const LawvereConfig& config = {});

}  // namespace gradalg
