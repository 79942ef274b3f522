#include "gradalg/freemonad.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

#include "gradalg/errors.hpp"

namespace gradalg {

namespace {

std::string var_name(std::size_t i) { return "x" + std::to_string(i + 1); }

std::vector<std::string> var_names(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(var_name(i));
  return out;
}

Term constant_at(const GradeMonoid& gm, const std::string& op, const Grade& ambient) {
  if (ambient == gm.unit()) return Term::app(op);
  return Term::app(op, {}, ambient);
}

// Shifts every coercion target and nullary ambient by m, leaving variables.
Term shift(const GradeMonoid& gm, const Term& t, const Grade& m) {
  switch (t.kind()) {
    case Term::Kind::Var: return t;
    case Term::Kind::Coerce: return Term::coerce(gm.tensor(t.target(), m), shift(gm, t.body(), m));
    case Term::Kind::App: {
      if (t.children().empty()) {
        return constant_at(gm, t.name(), gm.tensor(t.ambient().value_or(gm.unit()), m));
      }
      std::vector<Term> kids;
      for (const auto& c : t.children()) kids.push_back(shift(gm, c, m));
      return Term::app(t.name(), std::move(kids));
    }
  }
  return t;
}

Term replace_var(const Term& t, const std::string& name, const Term& value) {
  switch (t.kind()) {
    case Term::Kind::Var: return t.name() == name ? value : t;
    case Term::Kind::Coerce: return Term::coerce(t.target(), replace_var(t.body(), name, value));
    case Term::Kind::App: {
      if (t.children().empty()) return t;
      std::vector<Term> kids;
      for (const auto& c : t.children()) kids.push_back(replace_var(c, name, value));
      return Term::app(t.name(), std::move(kids), t.ambient());
    }
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------- FreeModel

FreeModel::FreeModel(const Theory& theory, std::vector<std::string> vars,
                     std::vector<Grade> support, DeciderConfig config)
    : theory_(theory),
      vars_(std::move(vars)),
      support_(std::move(support)),
      decider_(theory_, vars_, config) {
  for (const auto& g : support_) {
    if (!theory_.monoid().contains(g)) throw StructuralError("support grade outside the monoid");
  }
}

Term FreeModel::canonical(const Term& t) const {
  std::lock_guard lock(mutex_);
  return decider_.canonical(t);
}

const std::vector<Term>& FreeModel::elements(const Grade& m) const {
  std::lock_guard lock(mutex_);
  auto it = elements_.find(m);
  if (it != elements_.end()) return it->second;
  auto elems = decider_.elements(m);
  auto& pos = positions_[m];
  for (std::size_t i = 0; i < elems.size(); ++i) pos.emplace(elems[i], i);
  return elements_.emplace(m, std::move(elems)).first->second;
}

std::optional<std::size_t> FreeModel::index(const Term& t) const {
  Term c = canonical(t);
  Grade g = infer_grade(theory_.signature, c);
  (void)elements(g);
  std::lock_guard lock(mutex_);
  const auto& pos = positions_.at(g);
  auto it = pos.find(c);
  if (it == pos.end()) return std::nullopt;
  return it->second;
}

std::size_t FreeModel::coerce(const Grade& m, const Grade& m2, std::size_t e) const {
  if (!theory_.monoid().leq(m, m2)) throw StructuralError("coercion against the order");
  auto idx = index(Term::coerce(m2, elements(m).at(e)));
  if (!idx) throw ResourceError("coerced element is outside the enumerated free model");
  return *idx;
}

std::size_t FreeModel::apply(const std::string& op, const Grade& stage,
                             const std::vector<std::size_t>& args) const {
  const Operation& f = theory_.signature.at(op);
  if (args.size() != f.arity) throw StructuralError("wrong number of arguments for " + op);
  Term t = constant_at(theory_.monoid(), op, stage);
  if (f.arity > 0) {
    const auto& elems = elements(stage);
    std::vector<Term> kids;
    for (auto a : args) kids.push_back(elems.at(a));
    t = Term::app(op, std::move(kids));
  }
  auto idx = index(t);
  if (!idx) throw ResourceError("operation result is outside the enumerated free model");
  return *idx;
}

FiniteModel FreeModel::to_finite_model(const std::string& name) const {
  const Signature& sig = theory_.signature;
  return build_model(
      theory_, support_, name,
      [&](const Grade& g) {
        std::vector<std::string> labels;
        for (const auto& t : elements(g)) labels.push_back(format_term(sig, t));
        return labels;
      },
      [&](const Grade& a, const Grade& b, std::size_t i) { return coerce(a, b, i); },
      [&](const Operation& op, const Grade& stage, const std::vector<std::size_t>& args) {
        return apply(op.name, stage, args);
      });
}

FreeModel free_model(const Theory& theory, std::vector<std::string> vars,
                     std::vector<Grade> support, std::size_t depth) {
  DeciderConfig config;
  config.depth = depth;
  return FreeModel(theory, std::move(vars), std::move(support), config);
}

ModelHom universal_hom(const FreeModel& free, const FiniteModel& target,
                       const std::vector<std::size_t>& valuation) {
  const GradeMonoid& gm = free.theory().monoid();
  if (valuation.size() != free.variables().size()) {
    throw StructuralError("valuation size differs from the variable set");
  }
  std::size_t unit = target.grade_index(gm.unit());
  for (auto v : valuation) {
    if (v >= target.carrier_size(unit)) throw StructuralError("valuation outside B(I)");
  }
  FiniteModel source = free.to_finite_model();
  ModelHom h{source, target, {}};
  for (const auto& g : free.support()) {
    (void)target.grade_index(g);
    std::vector<std::size_t> comp;
    for (const auto& t : free.elements(g)) {
      comp.push_back(evaluate(target, free.variables(), t, unit, valuation));
    }
    h.components.push_back(std::move(comp));
  }
  return h;
}

// ---------------------------------------------------------------- GradedMonad

std::size_t GradedMonad::mult(const Grade& m1, const Grade& m2, std::size_t k,
                              std::size_t e) const {
  std::vector<std::size_t> id(size(m2, k));
  std::iota(id.begin(), id.end(), std::size_t{0});
  return bind(m1, id.size(), e, m2, k, id);
}

std::size_t GradedMonad::bind(const Grade& m1, std::size_t k, std::size_t e, const Grade& m2,
                              std::size_t k2, const std::vector<std::size_t>& f) const {
  std::size_t n = size(m2, k2);
  return mult(m1, m2, k2, fmap(m1, k, n, f, e));
}

// ---------------------------------------------------------------- FreeMonad

FreeMonad::FreeMonad(const Theory& theory, std::vector<Grade> grades, FreeMonadConfig config)
    : theory_(theory), grades_(std::move(grades)), config_(config) {
  for (const auto& g : grades_) {
    if (!theory_.monoid().contains(g)) throw StructuralError("monad grade outside the monoid");
  }
}

const Decider& FreeMonad::decider(std::size_t k) const {
  auto it = deciders_.find(k);
  if (it == deciders_.end()) {
    it = deciders_.emplace(k, std::make_unique<Decider>(theory_, var_names(k), config_.decider))
             .first;
  }
  return *it->second;
}

FreeMonad::Space& FreeMonad::space(const Grade& m, std::size_t k, bool need_list) const {
  auto key = std::make_pair(m, k);
  auto it = spaces_.find(key);
  if (it == spaces_.end()) {
    Space s;
    s.count = decider(k).count(m);
    it = spaces_.emplace(key, std::move(s)).first;
  }
  Space& s = it->second;
  if (need_list && !s.listed) {
    if (s.count > config_.table_cap) {
      throw ResourceError("T(" + theory_.monoid().format(m) + ", " + std::to_string(k) +
                          ") has " + std::to_string(s.count) + " elements, above the table cap " +
                          std::to_string(config_.table_cap));
    }
    s.elements = decider(k).elements(m);
    for (std::size_t i = 0; i < s.elements.size(); ++i) s.positions.emplace(s.elements[i], i);
    s.count = s.elements.size();
    s.listed = true;
  }
  return s;
}

std::size_t FreeMonad::size(const Grade& m, std::size_t k) const {
  std::lock_guard lock(mutex_);
  return space(m, k, false).count;
}

Term FreeMonad::element(const Grade& m, std::size_t k, std::size_t e) const {
  std::lock_guard lock(mutex_);
  Space& s = space(m, k, false);
  if (e >= s.count) throw StructuralError("element index out of range");
  if (s.listed) return s.elements[e];
  if (s.count <= config_.table_cap) return space(m, k, true).elements[e];
  return decider(k).element_at(m, e);
}

std::string FreeMonad::show(const Grade& m, std::size_t k, std::size_t e) const {
  return format_term(theory_.signature, element(m, k, e));
}

std::size_t FreeMonad::index(std::size_t k, const Term& t) const {
  std::lock_guard lock(mutex_);
  Term c = decider(k).canonical(t);
  Grade g = infer_grade(theory_.signature, c);
  Space& s = space(g, k, true);
  auto it = s.positions.find(c);
  if (it == s.positions.end()) {
    throw ResourceError("class of " + format_term(theory_.signature, c) +
                        " is outside the enumerated free model");
  }
  return it->second;
}

std::size_t FreeMonad::unit(std::size_t k, std::size_t i) const {
  if (i >= k) throw StructuralError("unit argument out of range");
  {
    std::lock_guard lock(mutex_);
    auto it = units_.find({k, i});
    if (it != units_.end()) return it->second;
  }
  std::size_t r = index(k, Term::var(var_name(i)));
  std::lock_guard lock(mutex_);
  units_.emplace(std::make_pair(k, i), r);
  return r;
}

std::size_t FreeMonad::coerce(const Grade& m, const Grade& m2, std::size_t k,
                              std::size_t e) const {
  if (!theory_.monoid().leq(m, m2)) throw StructuralError("coercion against the order");
  return index(k, Term::coerce(m2, element(m, k, e)));
}

std::size_t FreeMonad::fmap(const Grade& m, std::size_t k, std::size_t k2,
                            const std::vector<std::size_t>& h, std::size_t e) const {
  if (h.size() != k) throw StructuralError("function domain differs from the set size");
  std::map<std::string, std::string> sigma;
  for (std::size_t i = 0; i < k; ++i) {
    if (h[i] >= k2) throw StructuralError("function value out of range");
    sigma[var_name(i)] = var_name(h[i]);
  }
  return index(k2, rename(element(m, k, e), sigma));
}

Term FreeMonad::substitute_all(const Term& e, std::size_t k, const Grade& m2,
                               const std::vector<Term>& values) const {
  const Signature& sig = theory_.signature;
  if (config_.substitution == SubstitutionMode::Simultaneous) {
    Binding b;
    for (std::size_t j = 0; j < k; ++j) b.emplace(var_name(j), values[j]);
    return substitute(sig, e, b, m2);
  }
  Term t = shift(sig.monoid(), e, m2);
  for (std::size_t j = k; j-- > 0;) t = replace_var(t, var_name(j), values[j]);
  return t;
}

std::size_t FreeMonad::bind(const Grade& m1, std::size_t k, std::size_t e, const Grade& m2,
                            std::size_t k2, const std::vector<std::size_t>& f) const {
  if (f.size() != k) throw StructuralError("function domain differs from the set size");
  std::vector<Term> values;
  values.reserve(k);
  for (auto v : f) values.push_back(element(m2, k2, v));
  return index(k2, substitute_all(element(m1, k, e), k, m2, values));
}

std::size_t FreeMonad::mult(const Grade& m1, const Grade& m2, std::size_t k,
                            std::size_t e) const {
  return GradedMonad::mult(m1, m2, k, e);
}

// ---------------------------------------------------------------- law checks

namespace {

class LawRun {
 public:
  LawRun(const GradedMonad& m, const LawConfig& c, LawReport& r)
      : monad(m), config(c), report(r), rng(c.seed) {}

  // Runs check(e) on every e < n, or on sampled ones when n is above budget.
  void over(std::size_t n, const std::function<std::optional<std::string>(std::size_t)>& check,
            const std::string& where) {
    std::vector<std::size_t> picks;
    if (n <= config.exhaustive_budget) {
      picks.resize(n);
      std::iota(picks.begin(), picks.end(), std::size_t{0});
    } else {
      report.exhaustive = false;
      std::uniform_int_distribution<std::size_t> d(0, n - 1);
      for (std::size_t i = 0; i < config.trials; ++i) picks.push_back(d(rng));
    }
    for (auto e : picks) {
      ++report.checked;
      std::optional<std::string> bad;
      try {
        bad = check(e);
      } catch (const std::exception& ex) {
        bad = std::string("error: ") + ex.what();
      }
      if (bad) fail(where + ": " + *bad);
    }
  }

  void fail(const std::string& line) {
    ++report.failure_count;
    if (report.failures.size() < config.max_lines) report.failures.push_back(line);
  }

  // Size with resource errors turned into a failure line.
  std::optional<std::size_t> size(const Grade& m, std::size_t k, const std::string& where) {
    try {
      return monad.size(m, k);
    } catch (const std::exception& ex) {
      fail(where + ": not checked, " + ex.what());
      return std::nullopt;
    }
  }

  std::vector<std::size_t> random_function(std::size_t k, std::size_t k2) {
    std::vector<std::size_t> h(k);
    if (k2 == 0) return h;
    std::uniform_int_distribution<std::size_t> d(0, k2 - 1);
    for (auto& v : h) v = d(rng);
    return h;
  }

  const GradedMonad& monad;
  const LawConfig& config;
  LawReport& report;
  std::mt19937_64 rng;
};

std::string mismatch(const GradedMonad& monad, const Grade& m, std::size_t k, std::size_t a,
                     std::size_t b) {
  return monad.show(m, k, a) + " vs " + monad.show(m, k, b);
}

}  // namespace

LawReport check_monad_laws(const GradedMonad& monad, const LawConfig& config) {
  LawReport report;
  LawRun run(monad, config, report);
  const GradeMonoid& gm = monad.monoid();
  const auto grades = monad.grades();
  const Grade I = gm.unit();
  auto supported = [&](const Grade& g) {
    return std::find(grades.begin(), grades.end(), g) != grades.end();
  };
  auto fmt = [&](const Grade& g) { return gm.format(g); };
  if (!supported(I)) {
    run.fail("unit grade " + fmt(I) + " is not among the monad's grades");
    return report;
  }

  for (std::size_t k : config.set_sizes) {
    const std::string X = " |X|=" + std::to_string(k);
    auto nI = run.size(I, k, "unit" + X);
    if (!nI) continue;
    std::vector<std::size_t> eta(k);
    for (std::size_t i = 0; i < k; ++i) eta[i] = monad.unit(k, i);

    for (const auto& m : grades) {
      const std::string at = " at m=" + fmt(m) + X;
      auto n = run.size(m, k, "unit laws" + at);
      if (!n) continue;
      // mu . eta_{T(m,X)} = id
      run.over(*n, [&](std::size_t e) -> std::optional<std::string> {
        std::size_t lifted = monad.unit(*n, e);
        std::size_t back = monad.mult(I, m, k, lifted);
        if (back == e) return std::nullopt;
        return mismatch(monad, m, k, back, e);
      }, "left unit" + at);
      // mu . (m * eta) = id
      run.over(*n, [&](std::size_t e) -> std::optional<std::string> {
        std::size_t inner = monad.fmap(m, k, *nI, eta, e);
        std::size_t back = monad.mult(m, I, k, inner);
        if (back == e) return std::nullopt;
        return mismatch(monad, m, k, back, e);
      }, "right unit" + at);
      // order action: identity and composition, natural in X
      run.over(*n, [&](std::size_t e) -> std::optional<std::string> {
        std::size_t same = monad.coerce(m, m, k, e);
        if (same != e) return "identity coercion moves " + monad.show(m, k, e);
        for (const auto& m2 : grades) {
          if (!gm.leq(m, m2)) continue;
          std::size_t up = monad.coerce(m, m2, k, e);
          for (const auto& m3 : grades) {
            if (!gm.leq(m2, m3)) continue;
            std::size_t a = monad.coerce(m2, m3, k, up);
            std::size_t b = monad.coerce(m, m3, k, e);
            if (a != b) return "coercion to " + fmt(m3) + " via " + fmt(m2) + ": " +
                               mismatch(monad, m3, k, a, b);
          }
          for (std::size_t k2 : config.set_sizes) {
            auto h = run.random_function(k, k2);
            if (k2 == 0 && k > 0) continue;
            std::size_t a = monad.fmap(m2, k, k2, h, up);
            std::size_t b = monad.coerce(m, m2, k2, monad.fmap(m, k, k2, h, e));
            if (a != b) return "coercion to " + fmt(m2) + " not natural in X: " +
                               mismatch(monad, m2, k2, a, b);
          }
        }
        return std::nullopt;
      }, "order action" + at);
    }

    // eta natural in X
    for (std::size_t k2 : config.set_sizes) {
      if (k2 == 0 && k > 0) continue;
      auto h = run.random_function(k, k2);
      run.over(k, [&](std::size_t i) -> std::optional<std::string> {
        std::size_t a = monad.fmap(I, k, k2, h, eta[i]);
        std::size_t b = monad.unit(k2, h[i]);
        if (a == b) return std::nullopt;
        return mismatch(monad, I, k2, a, b);
      }, "unit naturality" + X + " -> " + std::to_string(k2));
    }

    for (const auto& m1 : grades) {
      for (const auto& m2 : grades) {
        const Grade m12 = gm.tensor(m1, m2);
        if (!supported(m12)) continue;
        const std::string at = " at m1=" + fmt(m1) + " m2=" + fmt(m2) + X;
        auto n2 = run.size(m2, k, "multiplication" + at);
        if (!n2) continue;
        auto n1 = run.size(m1, *n2, "multiplication" + at);
        if (!n1) continue;

        // mu natural in X
        for (std::size_t k2 : config.set_sizes) {
          if (k2 == 0 && k > 0) continue;
          auto h = run.random_function(k, k2);
          auto n2b = run.size(m2, k2, "multiplication naturality" + at);
          if (!n2b) continue;
          std::vector<std::size_t> th(*n2);
          for (std::size_t j = 0; j < *n2; ++j) th[j] = monad.fmap(m2, k, k2, h, j);
          run.over(*n1, [&](std::size_t e) -> std::optional<std::string> {
            std::size_t a = monad.fmap(m12, k, k2, h, monad.mult(m1, m2, k, e));
            std::size_t b = monad.mult(m1, m2, k2, monad.fmap(m1, *n2, *n2b, th, e));
            if (a == b) return std::nullopt;
            return mismatch(monad, m12, k2, a, b);
          }, "multiplication naturality in X" + at + " -> " + std::to_string(k2));
        }

        // mu natural in both grades
        for (const auto& m1b : grades) {
          if (m1b == m1 || !gm.leq(m1, m1b) || !supported(gm.tensor(m1b, m2))) continue;
          const Grade target = gm.tensor(m1b, m2);
          run.over(*n1, [&](std::size_t e) -> std::optional<std::string> {
            std::size_t a = monad.mult(m1b, m2, k, monad.coerce(m1, m1b, *n2, e));
            std::size_t b = monad.coerce(m12, target, k, monad.mult(m1, m2, k, e));
            if (a == b) return std::nullopt;
            return mismatch(monad, target, k, a, b);
          }, "multiplication naturality in m1 along " + fmt(m1b) + at);
        }
        for (const auto& m2b : grades) {
          if (m2b == m2 || !gm.leq(m2, m2b) || !supported(gm.tensor(m1, m2b))) continue;
          const Grade target = gm.tensor(m1, m2b);
          auto n2b = run.size(m2b, k, "multiplication naturality" + at);
          if (!n2b) continue;
          std::vector<std::size_t> up(*n2);
          for (std::size_t j = 0; j < *n2; ++j) up[j] = monad.coerce(m2, m2b, k, j);
          run.over(*n1, [&](std::size_t e) -> std::optional<std::string> {
            std::size_t a = monad.mult(m1, m2b, k, monad.fmap(m1, *n2, *n2b, up, e));
            std::size_t b = monad.coerce(m12, target, k, monad.mult(m1, m2, k, e));
            if (a == b) return std::nullopt;
            return mismatch(monad, target, k, a, b);
          }, "multiplication naturality in m2 along " + fmt(m2b) + at);
        }

        // associativity
        for (const auto& m3 : grades) {
          const Grade m23 = gm.tensor(m2, m3);
          const Grade m123 = gm.tensor(m12, m3);
          if (!supported(m23) || !supported(m123)) continue;
          const std::string where = "associativity at m1=" + fmt(m1) + " m2=" + fmt(m2) +
                                    " m3=" + fmt(m3) + X;
          auto n3 = run.size(m3, k, where);
          if (!n3) continue;
          auto s2 = run.size(m2, *n3, where);
          if (!s2) continue;
          auto s1 = run.size(m1, *s2, where);
          if (!s1) continue;
          auto n23 = run.size(m23, k, where);
          if (!n23) continue;
          std::vector<std::size_t> mu23(*s2);
          try {
            for (std::size_t j = 0; j < *s2; ++j) mu23[j] = monad.mult(m2, m3, k, j);
          } catch (const std::exception& ex) {
            run.fail(where + ": not checked, " + ex.what());
            continue;
          }
          run.over(*s1, [&](std::size_t e) -> std::optional<std::string> {
            std::size_t a = monad.mult(m12, m3, k, monad.mult(m1, m2, *n3, e));
            std::size_t b = monad.mult(m1, m23, k, monad.fmap(m1, *s2, *n23, mu23, e));
            if (a == b) return std::nullopt;
            return mismatch(monad, m123, k, a, b);
          }, where);
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------- Kleisli

KleisliHom kleisli_unit(const GradedMonad& monad, std::size_t n) {
  KleisliHom h{n, n, monad.monoid().unit(), {}};
  for (std::size_t i = 0; i < n; ++i) h.map.push_back(monad.unit(n, i));
  return h;
}

KleisliHom kleisli_compose(const GradedMonad& monad, const KleisliHom& f, const KleisliHom& g) {
  if (f.target != g.source) {
    throw StructuralError("Kleisli composition: target " + std::to_string(f.target) +
                          " differs from source " + std::to_string(g.source));
  }
  if (f.map.size() != f.source || g.map.size() != g.source) {
    throw StructuralError("Kleisli map size differs from its source");
  }
  KleisliHom h{f.source, g.target, monad.monoid().tensor(f.grade, g.grade), {}};
  h.map.reserve(f.source);
  for (auto v : f.map) h.map.push_back(monad.bind(f.grade, f.target, v, g.grade, g.target, g.map));
  return h;
}

KleisliHom kleisli_after(const GradedMonad& monad, const KleisliHom& g, const KleisliHom& f) {
  return kleisli_compose(monad, f, g);
}

}  // namespace gradalg
