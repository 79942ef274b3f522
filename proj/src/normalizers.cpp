#include <algorithm>
#include <cmath>
#include <map>

#include "gradalg/errors.hpp"
#include "gradalg/logic.hpp"

namespace gradalg {

namespace {

Term coerce_to(const Signature& sig, const Grade& g, Term t) {
  if (infer_grade(sig, t) == g) return t;
  return Term::coerce(g, std::move(t));
}

// Free models of exception theories: Er(e) or Ok(x).
class ExceptionNormalizer final : public Normalizer {
 public:
  explicit ExceptionNormalizer(const Theory& theory) : Normalizer(theory) {
    const GradeMonoid& gm = theory.monoid();
    if (gm.kind() != MonoidKind::Exception) {
      throw StructuralError("exception normalizer needs an exception monoid");
    }
    if (!theory.axioms.empty()) throw StructuralError("exception normalizer expects no axioms");
    const auto& atoms = gm.atoms();
    for (const auto& op : theory.signature.operations()) {
      if (op.arity != 0) throw StructuralError("exception operations must be nullary");
      std::size_t atom = atoms.size();
      for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
        if (op.grade.value == (std::uint64_t{1} << i)) atom = i;
      }
      if (atom == atoms.size()) {
        throw StructuralError("operation '" + op.name + "' does not raise a single exception");
      }
      if (!raiser_.emplace(atom, op.name).second) {
        throw StructuralError("two operations raise exception '" + atoms[atom] + "'");
      }
    }
  }

  std::string kind() const override { return "exception"; }

  Term normalize(const Term& t) const override {
    const Signature& sig = theory().signature;
    Grade g = infer_grade(sig, t);
    const Term* cur = &t;
    while (cur->is_coerce()) cur = &cur->body();
    if (cur->is_var()) return coerce_to(sig, g, Term::var(cur->name()));
    return coerce_to(sig, g, Term::app(cur->name()));
  }

  std::vector<Term> elements(const Grade& g, const std::vector<std::string>& vars) const override {
    const Signature& sig = theory().signature;
    const GradeMonoid& gm = sig.monoid();
    if (!gm.contains(g)) throw StructuralError("grade outside the theory's monoid");
    std::vector<Term> out;
    for (const auto& [atom, name] : raiser_) {
      if (g.value & (std::uint64_t{1} << atom)) {
        out.push_back(coerce_to(sig, g, Term::app(name)));
      }
    }
    if (gm.leq(gm.unit(), g)) {
      for (const auto& x : vars) out.push_back(coerce_to(sig, g, Term::var(x)));
    }
    return out;
  }

 private:
  std::map<std::size_t, std::string> raiser_;
};

// Global state over one or more locations, each with lookup/update_v operations.
class StateNormalizer final : public Normalizer {
 public:
  explicit StateNormalizer(const Theory& theory) : Normalizer(theory) {
    const Signature& sig = theory.signature;
    const GradeMonoid& gm = sig.monoid();
    auto is_powerset = [](const GradeMonoid& m) { return m.kind() == MonoidKind::PowersetJoin; };
    if (!is_powerset(gm) &&
        !(gm.kind() == MonoidKind::Product && is_powerset(gm.left()) && is_powerset(gm.right()))) {
      throw StructuralError("state normalizer needs a powerset grading or a product of two");
    }
    const std::string suffix = "lookup";
    std::size_t accounted = 0;
    for (const auto& op : sig.operations()) {
      if (op.name.size() < suffix.size() ||
          op.name.compare(op.name.size() - suffix.size(), suffix.size(), suffix) != 0) {
        continue;
      }
      Location loc;
      loc.lookup = op.name;
      loc.grade = op.grade;
      std::string prefix = op.name.substr(0, op.name.size() - suffix.size());
      if (values_ == 0) values_ = op.arity;
      if (op.arity == 0 || op.arity != values_) {
        throw StructuralError("lookup operations must share a positive arity");
      }
      for (std::size_t v = 0; v < values_; ++v) {
        std::string name = prefix + "update_" + std::to_string(v);
        const Operation* up = sig.find(name);
        if (!up || up->arity != 1 || !(up->grade == op.grade)) {
          throw StructuralError("state theory lacks a matching '" + name + "'");
        }
        loc.updates.push_back(name);
      }
      accounted += 1 + values_;
      locations_.push_back(std::move(loc));
    }
    if (locations_.empty() || accounted != sig.operations().size()) {
      throw StructuralError("state normalizer: operations are not lookup/update families");
    }
    states_ = 1;
    for (std::size_t i = 0; i < locations_.size(); ++i) states_ *= values_;
    for (std::size_t l = 0; l < locations_.size(); ++l) {
      op_location_[locations_[l].lookup] = {l, kLookup};
      for (std::size_t v = 0; v < values_; ++v) op_location_[locations_[l].updates[v]] = {l, v};
    }
  }

  std::string kind() const override { return "state"; }

  Term normalize(const Term& t) const override {
    const Signature& sig = theory().signature;
    Grade g = infer_grade(sig, t);
    std::vector<Result> f(states_);
    for (std::size_t s = 0; s < states_; ++s) f[s] = run(t, s);
    auto locs = locations_of(g);
    std::vector<std::size_t> assignment(locations_.size(), 0);
    return coerce_to(sig, g, readback(locs, 0, assignment, [&](std::size_t s) { return f[s]; }));
  }

  std::size_t count(const Grade& g, std::size_t nvars) const override {
    if (!theory().monoid().contains(g)) throw StructuralError("grade outside the theory's monoid");
    std::size_t local = power_of(values_, locations_of(g).size());
    double total = std::pow(static_cast<double>(local * nvars), static_cast<double>(local));
    if (total > 1e18) throw ResourceError("state free model too large to count");
    return power_of(local * nvars, local);
  }

  Term element_at(const Grade& g, const std::vector<std::string>& vars,
                  std::size_t idx) const override {
    const Signature& sig = theory().signature;
    if (idx >= count(g, vars.size())) throw StructuralError("element index out of range");
    auto locs = locations_of(g);
    const std::size_t local = power_of(values_, locs.size());
    const std::size_t choices = local * vars.size();
    // Digits of idx, last local state least significant (the enumeration order).
    std::vector<std::size_t> pick(local, 0);
    for (std::size_t pos = local; pos-- > 0;) {
      pick[pos] = idx % choices;
      idx /= choices;
    }
    std::vector<Result> f(states_);
    for (std::size_t s = 0; s < states_; ++s) {
      std::size_t a = 0;
      std::size_t scale = 1;
      for (std::size_t i = 0; i < locs.size(); ++i) {
        a += digit(s, locs[i]) * scale;
        scale *= values_;
      }
      std::size_t choice = pick[a];
      std::size_t next = 0;
      std::size_t c = choice % local;
      for (std::size_t i = 0; i < locs.size(); ++i) {
        next += (c % values_) * power(locs[i]);
        c /= values_;
      }
      for (std::size_t l = 0; l < locations_.size(); ++l) {
        if (std::find(locs.begin(), locs.end(), l) == locs.end()) next += digit(s, l) * power(l);
      }
      f[s] = Result{next, &vars[choice / local]};
    }
    std::vector<std::size_t> assignment(locations_.size(), 0);
    return coerce_to(sig, g, readback(locs, 0, assignment, [&](std::size_t s) { return f[s]; }));
  }

  std::vector<Term> elements(const Grade& g, const std::vector<std::string>& vars) const override {
    const Signature& sig = theory().signature;
    if (!sig.monoid().contains(g)) throw StructuralError("grade outside the theory's monoid");
    auto locs = locations_of(g);
    std::size_t local = 1;
    for (std::size_t i = 0; i < locs.size(); ++i) local *= values_;
    const std::size_t choices = local * vars.size();
    double total = std::pow(static_cast<double>(choices), static_cast<double>(local));
    if (total > 5e6) throw ResourceError("state free model too large to enumerate");
    std::vector<Term> out;
    if (choices == 0) return out;
    std::vector<std::string> names(vars);
    std::vector<std::size_t> pick(local, 0);
    auto local_to_full = [&](std::size_t a) {
      std::size_t s = 0;
      for (std::size_t i = 0; i < locs.size(); ++i) {
        s += (a % values_) * power(locs[i]);
        a /= values_;
      }
      return s;
    };
    auto full_to_local = [&](std::size_t s) {
      std::size_t a = 0;
      std::size_t scale = 1;
      for (std::size_t i = 0; i < locs.size(); ++i) {
        a += digit(s, locs[i]) * scale;
        scale *= values_;
      }
      return a;
    };
    while (true) {
      std::vector<Result> f(states_);
      for (std::size_t s = 0; s < states_; ++s) {
        std::size_t choice = pick[full_to_local(s)];
        f[s] = Result{local_to_full(choice % local), &names[choice / local]};
      }
      std::vector<std::size_t> assignment(locations_.size(), 0);
      out.push_back(coerce_to(sig, g, readback(locs, 0, assignment,
                                              [&](std::size_t s) { return f[s]; })));
      std::size_t pos = local;
      bool done = true;
      while (pos-- > 0) {
        if (++pick[pos] < choices) {
          done = false;
          break;
        }
        pick[pos] = 0;
      }
      if (done) break;
    }
    return out;
  }

 private:
  static constexpr std::size_t kLookup = static_cast<std::size_t>(-1);

  struct Location {
    std::string lookup;
    std::vector<std::string> updates;
    Grade grade;
  };
  struct Result {
    std::size_t state = 0;
    const std::string* var = nullptr;
  };

  static std::size_t power_of(std::size_t b, std::size_t e) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < e; ++i) r *= b;
    return r;
  }
  std::size_t power(std::size_t l) const {
    std::size_t p = 1;
    for (std::size_t i = 0; i < l; ++i) p *= values_;
    return p;
  }
  std::size_t digit(std::size_t s, std::size_t l) const { return (s / power(l)) % values_; }
  std::size_t with_digit(std::size_t s, std::size_t l, std::size_t v) const {
    return s - digit(s, l) * power(l) + v * power(l);
  }

  std::vector<std::size_t> locations_of(const Grade& g) const {
    std::vector<std::size_t> out;
    const GradeMonoid& gm = theory().monoid();
    for (std::size_t l = 0; l < locations_.size(); ++l) {
      if (gm.leq(locations_[l].grade, g)) out.push_back(l);
    }
    return out;
  }

  Result run(const Term& t, std::size_t s) const {
    switch (t.kind()) {
      case Term::Kind::Var: return Result{s, &t.name()};
      case Term::Kind::Coerce: return run(t.body(), s);
      case Term::Kind::App: {
        auto it = op_location_.find(t.name());
        if (it == op_location_.end()) throw StructuralError("unknown operation '" + t.name() + "'");
        auto [l, v] = it->second;
        if (v == kLookup) return run(t.children()[digit(s, l)], s);
        return run(t.children().front(), with_digit(s, l, v));
      }
    }
    return Result{};
  }

  template <class F>
  Term readback(const std::vector<std::size_t>& locs, std::size_t j,
                std::vector<std::size_t>& assignment, const F& f) const {
    if (j == locs.size()) {
      std::size_t s = 0;
      for (std::size_t l = 0; l < locations_.size(); ++l) s += assignment[l] * power(l);
      Result r = f(s);
      Term out = Term::var(*r.var);
      for (std::size_t i = locs.size(); i-- > 0;) {
        const auto& loc = locations_[locs[i]];
        out = Term::app(loc.updates[digit(r.state, locs[i])], {std::move(out)});
      }
      return out;
    }
    std::vector<Term> kids;
    kids.reserve(values_);
    for (std::size_t v = 0; v < values_; ++v) {
      assignment[locs[j]] = v;
      kids.push_back(readback(locs, j + 1, assignment, f));
    }
    assignment[locs[j]] = 0;
    return Term::app(locations_[locs[j]].lookup, std::move(kids));
  }

  std::vector<Location> locations_;
  std::size_t values_ = 0;
  std::size_t states_ = 1;
  std::map<std::string, std::pair<std::size_t, std::size_t>> op_location_;
};

// Theories whose operations are all nullary constants at the unit grade.
class LiftNormalizer final : public Normalizer {
 public:
  explicit LiftNormalizer(const Theory& theory) : Normalizer(theory) {
    const GradeMonoid& gm = theory.monoid();
    if (!theory.axioms.empty()) throw StructuralError("lift normalizer expects no axioms");
    for (const auto& op : theory.signature.operations()) {
      if (op.arity != 0 || !(op.grade == gm.unit())) {
        throw StructuralError("lift normalizer expects nullary operations of grade I");
      }
    }
  }

  std::string kind() const override { return "lift"; }

  Term normalize(const Term& t) const override {
    const Signature& sig = theory().signature;
    Grade g = infer_grade(sig, t);
    const Term* cur = &t;
    while (cur->is_coerce()) cur = &cur->body();
    if (cur->is_var()) return coerce_to(sig, g, Term::var(cur->name()));
    return constant(cur->name(), g);
  }

  std::vector<Term> elements(const Grade& g, const std::vector<std::string>& vars) const override {
    const Signature& sig = theory().signature;
    const GradeMonoid& gm = sig.monoid();
    if (!gm.contains(g)) throw StructuralError("grade outside the theory's monoid");
    std::vector<Term> out;
    for (const auto& op : sig.operations()) out.push_back(constant(op.name, g));
    if (gm.leq(gm.unit(), g)) {
      for (const auto& x : vars) out.push_back(coerce_to(sig, g, Term::var(x)));
    }
    return out;
  }

 private:
  Term constant(const std::string& name, const Grade& g) const {
    if (g == theory().monoid().unit()) return Term::app(name);
    return Term::app(name, {}, g);
  }
};

}  // namespace

std::unique_ptr<Normalizer> make_normalizer(const Theory& theory) {
  if (theory.normalizer.empty()) return nullptr;
  if (theory.normalizer == "exception") return std::make_unique<ExceptionNormalizer>(theory);
  if (theory.normalizer == "state") return std::make_unique<StateNormalizer>(theory);
  if (theory.normalizer == "lift") return std::make_unique<LiftNormalizer>(theory);
  throw StructuralError("unknown normalizer '" + theory.normalizer + "'");
}

Term normalize(const Normalizer& nz, const Term& t) { return nz.normalize(t); }

std::size_t Normalizer::count(const Grade& g, std::size_t nvars) const {
  std::vector<std::string> vars;
  for (std::size_t i = 0; i < nvars; ++i) vars.push_back("x" + std::to_string(i));
  return elements(g, vars).size();
}

Term Normalizer::element_at(const Grade& g, const std::vector<std::string>& vars,
                            std::size_t idx) const {
  auto all = elements(g, vars);
  if (idx >= all.size()) throw StructuralError("element index out of range");
  return all[idx];
}

Decider::Decider(const Theory& theory, std::vector<std::string> vars, DeciderConfig config)
    : theory_(theory), vars_(std::move(vars)), config_(config) {
  normalizer_ = make_normalizer(theory_);
}

void Decider::rebuild(std::vector<Term> extra) const {
  for (auto& t : extra) seeds_.push_back(std::move(t));
  ClosureConfig cc;
  cc.depth = config_.depth;
  cc.universe_cap = config_.universe_cap;
  cc.nat_bound = config_.nat_bound;
  cc.seeds = seeds_;
  closure_ = std::make_shared<ClosureUniverse>(derive_closure(theory_, vars_, cc));
}

void Decider::prepare(const std::vector<Term>& terms) const {
  if (normalizer_) return;
  std::vector<Term> missing;
  for (const auto& t : terms) {
    if (!closure_ || !closure_->find(t)) missing.push_back(t);
  }
  if (!missing.empty() || !closure_) rebuild(std::move(missing));
}

Term Decider::canonical(const Term& t) const {
  if (normalizer_) return normalizer_->normalize(t);
  (void)infer_grade(theory_.signature, t);
  if (!closure_ || !closure_->find(t)) rebuild({t});
  auto id = closure_->find(t);
  return closure_->representative(closure_->class_of(*id));
}

std::size_t Decider::count(const Grade& g) const {
  if (normalizer_) return normalizer_->count(g, vars_.size());
  return elements(g).size();
}

Term Decider::element_at(const Grade& g, std::size_t idx) const {
  if (normalizer_) return normalizer_->element_at(g, vars_, idx);
  auto all = elements(g);
  if (idx >= all.size()) throw StructuralError("element index out of range");
  return all[idx];
}

std::vector<Term> Decider::elements(const Grade& g) const {
  if (normalizer_) return normalizer_->elements(g, vars_);
  if (!closure_) rebuild({});
  std::vector<Term> out;
  for (auto c : closure_->classes_of_grade(g)) out.push_back(closure_->representative(c));
  std::sort(out.begin(), out.end(), [&](const Term& a, const Term& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return format_term(theory_.signature, a) < format_term(theory_.signature, b);
  });
  return out;
}

}  // namespace gradalg
