#pragma once

// Graded monads written directly from their set-level descriptions, with no
// terms involved. Used to cross-check the term-based monad.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gradalg/freemonad.hpp"
#include "support/closed_forms.hpp"

namespace closed {

using gradalg::GradedMonad;

// m * X = { Er(e) | e in m \ {Ok} } u { Ok(x) | x in X, Ok in m }, errors first.
class ExceptionMonad : public GradedMonad {
 public:
  explicit ExceptionMonad(std::vector<std::string> ex)
      : gm_(GradeMonoid::exception(std::move(ex))) {}

  const GradeMonoid& monoid() const override { return gm_; }
  std::vector<Grade> grades() const override { return gm_.enumerate(0); }
  std::string name() const override { return "closed exception"; }

  std::size_t size(const Grade& m, std::size_t k) const override {
    return errors(m).size() + (has_ok(m) ? k : 0);
  }
  std::string show(const Grade& m, std::size_t k, std::size_t e) const override {
    auto errs = errors(m);
    if (e < errs.size()) return "Er(" + errs[e] + ")";
    (void)k;
    return "Ok(" + std::to_string(e - errs.size()) + ")";
  }
  std::size_t unit(std::size_t, std::size_t i) const override { return i; }
  std::size_t coerce(const Grade& m, const Grade& m2, std::size_t,
                     std::size_t e) const override {
    return relocate(m, m2, e);
  }
  std::size_t fmap(const Grade& m, std::size_t, std::size_t, const std::vector<std::size_t>& h,
                   std::size_t e) const override {
    std::size_t ne = errors(m).size();
    return e < ne ? e : ne + h[e - ne];
  }
  std::size_t mult(const Grade& m1, const Grade& m2, std::size_t,
                   std::size_t e) const override {
    Grade m12 = gm_.tensor(m1, m2);
    std::size_t ne = errors(m1).size();
    if (e < ne) return relocate(m1, m12, e);
    return relocate(m2, m12, e - ne);
  }

 private:
  std::vector<std::string> errors(const Grade& m) const {
    std::vector<std::string> out;
    const auto& atoms = gm_.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if ((m.value >> i & 1) && atoms[i] != "Ok") out.push_back(atoms[i]);
    }
    return out;
  }
  bool has_ok(const Grade& m) const {
    const auto& atoms = gm_.atoms();
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if ((m.value >> i & 1) && atoms[i] == "Ok") return true;
    }
    return false;
  }
  // Same element read at a larger grade.
  std::size_t relocate(const Grade& from, const Grade& to, std::size_t e) const {
    auto a = errors(from);
    auto b = errors(to);
    if (e < a.size()) return index_of(b, a[e]);
    return b.size() + (e - a.size());
  }

  GradeMonoid gm_;
};

// One location with values 0..V-1 over powerset {*}: T(bot, X) = X and
// T(top, X) = (V x X)^V encoded by state_code.
class StateMonad : public GradedMonad {
 public:
  explicit StateMonad(std::size_t values)
      : gm_(GradeMonoid::powerset({"*"})), values_(values) {}

  const GradeMonoid& monoid() const override { return gm_; }
  std::vector<Grade> grades() const override { return {gm_.bottom(), gm_.top()}; }
  std::string name() const override { return "closed state"; }

  std::size_t size(const Grade& m, std::size_t k) const override {
    if (m == gm_.bottom()) return k;
    std::size_t n = 1;
    for (std::size_t v = 0; v < values_; ++v) n *= values_ * k;
    return n;
  }
  std::string show(const Grade& m, std::size_t k, std::size_t e) const override {
    std::vector<std::string> xs;
    for (std::size_t i = 0; i < k; ++i) xs.push_back(std::to_string(i));
    return state_label(as_fn(m, k, e), xs);
  }
  std::size_t unit(std::size_t, std::size_t i) const override { return i; }
  std::size_t coerce(const Grade& m, const Grade& m2, std::size_t k,
                     std::size_t e) const override {
    return encode(m2, k, as_fn(m, k, e));
  }
  std::size_t fmap(const Grade& m, std::size_t k, std::size_t k2,
                   const std::vector<std::size_t>& h, std::size_t e) const override {
    StateFn f = as_fn(m, k, e);
    for (auto& p : f.map) p.second = h[p.second];
    return encode(m, k2, f);
  }
  std::size_t mult(const Grade& m1, const Grade& m2, std::size_t k,
                   std::size_t e) const override {
    std::size_t n2 = size(m2, k);
    StateFn outer = as_fn(m1, n2, e);
    StateFn r;
    for (std::size_t v = 0; v < values_; ++v) {
      auto [v1, j] = outer.map[v];
      r.map.push_back(as_fn(m2, k, j).map[v1]);
    }
    return encode(gm_.tensor(m1, m2), k, r);
  }

  StateFn as_fn(const Grade& m, std::size_t k, std::size_t e) const {
    if (m == gm_.bottom()) {
      StateFn f;
      for (std::size_t v = 0; v < values_; ++v) f.map.emplace_back(v, e);
      return f;
    }
    StateFn f;
    const std::size_t choices = values_ * k;
    for (std::size_t v = 0; v < values_; ++v) {
      f.map.emplace_back((e % choices) % values_, (e % choices) / values_);
      e /= choices;
    }
    return f;
  }

 private:
  std::size_t encode(const Grade& m, std::size_t k, const StateFn& f) const {
    if (m == gm_.bottom()) return f.map.front().second;
    return state_code(f, values_, k);
  }

  GradeMonoid gm_;
  std::size_t values_;
};

}  // namespace closed
