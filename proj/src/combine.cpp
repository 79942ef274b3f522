#include "gradalg/combine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gradalg/errors.hpp"

namespace gradalg {

namespace {

Term rename_ops(const Term& t, const std::map<std::string, std::string>& names) {
  switch (t.kind()) {
    case Term::Kind::Var: return t;
    case Term::Kind::Coerce: return Term::coerce(t.target(), rename_ops(t.body(), names));
    case Term::Kind::App: {
      std::vector<Term> kids;
      kids.reserve(t.children().size());
      for (const auto& c : t.children()) kids.push_back(rename_ops(c, names));
      return Term::app(names.at(t.name()), std::move(kids), t.ambient());
    }
  }
  return t;
}

Term call(const std::string& op, std::vector<Term> kids) { return Term::app(op, std::move(kids)); }

void add_axiom(Theory& th, std::vector<std::string> ctx, const Term& l, const Term& r,
               const std::string& label) {
  th.axioms.push_back(make_equation(th.signature, std::move(ctx), l, r, label));
}

}  // namespace

std::vector<std::string> standard_variables(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back("x" + std::to_string(i));
  return out;
}

Theory exception_theory(const std::vector<std::string>& exceptions,
                        std::optional<std::vector<std::string>> raised) {
  GradeMonoid gm = GradeMonoid::exception(exceptions);
  Theory th;
  th.name = "exception";
  th.signature = Signature(gm);
  th.normalizer = "exception";
  for (const auto& e : raised.value_or(exceptions)) th.signature.add({"raise_" + e, 0, gm.set({e})});
  return th;
}

Theory state_theory(std::size_t values) {
  if (values == 0) throw StructuralError("state theory needs at least one value");
  GradeMonoid gm = GradeMonoid::powerset({"*"});
  Theory th;
  th.name = "state";
  th.signature = Signature(gm);
  th.normalizer = "state";
  const Grade top = gm.top();
  th.signature.add({"lookup", values, top});
  auto update = [](std::size_t v) { return "update_" + std::to_string(v); };
  for (std::size_t v = 0; v < values; ++v) th.signature.add({update(v), 1, top});

  Term x = Term::var("x");
  std::vector<Term> kids;
  for (std::size_t v = 0; v < values; ++v) kids.push_back(call(update(v), {x}));
  add_axiom(th, {"x"}, call("lookup", kids), Term::coerce(top, x), "lookup-update");

  auto xv = [](std::size_t v, std::size_t w) {
    return "x" + std::to_string(v) + "_" + std::to_string(w);
  };
  std::vector<std::string> ctx;
  std::vector<Term> outer;
  std::vector<Term> diagonal;
  for (std::size_t v = 0; v < values; ++v) {
    std::vector<Term> inner;
    for (std::size_t w = 0; w < values; ++w) {
      ctx.push_back(xv(v, w));
      inner.push_back(Term::var(xv(v, w)));
    }
    outer.push_back(call("lookup", inner));
    diagonal.push_back(Term::var(xv(v, v)));
  }
  add_axiom(th, ctx, call("lookup", outer), call("lookup", diagonal), "lookup-lookup");

  for (std::size_t v = 0; v < values; ++v) {
    for (std::size_t w = 0; w < values; ++w) {
      add_axiom(th, {"x"}, call(update(v), {call(update(w), {x})}), call(update(w), {x}),
                "update-update");
    }
  }
  std::vector<std::string> xs;
  std::vector<Term> vars;
  for (std::size_t v = 0; v < values; ++v) {
    xs.push_back("x" + std::to_string(v));
    vars.push_back(Term::var(xs.back()));
  }
  for (std::size_t v = 0; v < values; ++v) {
    add_axiom(th, xs, call(update(v), {call("lookup", vars)}), call(update(v), {vars[v]}),
              "update-lookup");
  }
  return th;
}

Theory constant_theory() {
  Theory th;
  th.name = "constant";
  th.signature = Signature(GradeMonoid::trivial());
  th.signature.add({"none", 0, GradeMonoid::trivial().unit()});
  th.normalizer = "lift";
  return th;
}

Theory lift_theory(const GradeMonoid& target) {
  Theory th = extend(LaxMonoidalMap::from_trivial(target), constant_theory());
  th.name = "lift";
  th.normalizer = "lift";
  return th;
}

Theory module_theory() {
  GradeMonoid nat = GradeMonoid::discrete_nat();
  Theory th;
  th.name = "module";
  th.signature = Signature(nat);
  auto& sig = th.signature;
  sig.add({"add", 2, nat.nat(0)});
  sig.add({"neg", 1, nat.nat(0)});
  sig.add({"zero", 0, nat.nat(0)});
  sig.add({"s_1", 1, nat.nat(0)});
  sig.add({"s_t", 1, nat.nat(1)});
  sig.add({"s_t2", 1, nat.nat(2)});
  Term x = Term::var("x");
  Term y = Term::var("y");
  Term z = Term::var("z");
  Term zero = Term::app("zero");
  add_axiom(th, {"x", "y", "z"}, call("add", {call("add", {x, y}), z}),
            call("add", {x, call("add", {y, z})}), "add-assoc");
  add_axiom(th, {"x", "y"}, call("add", {x, y}), call("add", {y, x}), "add-comm");
  add_axiom(th, {"x"}, call("add", {x, zero}), x, "add-zero");
  add_axiom(th, {"x"}, call("add", {x, call("neg", {x})}), zero, "add-neg");
  add_axiom(th, {"x"}, call("add", {x, x}), zero, "char-2");
  add_axiom(th, {"x"}, call("s_1", {x}), x, "scalar-one");
  add_axiom(th, {"x"}, call("s_t", {call("s_t", {x})}), call("s_t2", {x}), "scalar-mult");
  for (const char* s : {"s_t", "s_t2"}) {
    add_axiom(th, {"x", "y"}, call(s, {call("add", {x, y})}),
              call("add", {call(s, {x}), call(s, {y})}), "scalar-add");
  }
  return th;
}

std::vector<Theory> catalog() {
  return {exception_theory({"e1", "e2"}), state_theory(2), lift_theory(), module_theory()};
}

TheoryMorphism identity_morphism(const Theory& theory) {
  TheoryMorphism m{theory, theory, {}};
  for (const auto& op : theory.signature.operations()) {
    std::vector<Term> kids;
    for (const auto& v : standard_variables(op.arity)) kids.push_back(Term::var(v));
    m.assignment.emplace(op.name, Term::app(op.name, std::move(kids)));
  }
  return m;
}

Term translate(const TheoryMorphism& alpha, const Term& t) {
  const Signature& src = alpha.source.signature;
  const Signature& dst = alpha.target.signature;
  switch (t.kind()) {
    case Term::Kind::Var: return t;
    case Term::Kind::Coerce: return Term::coerce(t.target(), translate(alpha, t.body()));
    case Term::Kind::App: {
      const Operation& op = src.at(t.name());
      auto it = alpha.assignment.find(op.name);
      if (it == alpha.assignment.end()) {
        throw StructuralError("morphism does not assign operation '" + op.name + "'");
      }
      if (t.children().empty()) {
        return substitute(dst, it->second, {}, t.ambient().value_or(src.monoid().unit()));
      }
      Binding b;
      auto names = standard_variables(op.arity);
      for (std::size_t i = 0; i < op.arity; ++i) {
        b.insert_or_assign(names[i], translate(alpha, t.children()[i]));
      }
      return substitute(dst, it->second, b);
    }
  }
  return t;
}

Term apply_morphism(const TheoryMorphism& alpha, const Term& t, const DeciderConfig& config) {
  (void)infer_grade(alpha.source.signature, t);
  Term image = translate(alpha, t);
  Decider d(alpha.target, free_variables(image), config);
  return d.canonical(image);
}

TheoryMorphism compose(const TheoryMorphism& beta, const TheoryMorphism& alpha) {
  if (!(alpha.target.monoid() == beta.source.monoid())) {
    throw StructuralError("morphisms do not compose");
  }
  TheoryMorphism out{alpha.source, beta.target, {}};
  for (const auto& [name, term] : alpha.assignment) {
    out.assignment.emplace(name, translate(beta, term));
  }
  return out;
}

std::vector<std::string> check_morphism(const TheoryMorphism& alpha, const DeciderConfig& config) {
  std::vector<std::string> report;
  const Signature& src = alpha.source.signature;
  const Signature& dst = alpha.target.signature;
  if (!(src.monoid() == dst.monoid())) {
    report.push_back("source and target are graded by different monoids");
    return report;
  }
  for (const auto& op : src.operations()) {
    auto it = alpha.assignment.find(op.name);
    if (it == alpha.assignment.end()) {
      report.push_back("operation " + op.name + ": unassigned");
      continue;
    }
    try {
      Grade g = infer_grade(dst, it->second);
      if (!(g == op.grade)) report.push_back("operation " + op.name + ": image has wrong grade");
      auto allowed = standard_variables(op.arity);
      for (const auto& v : free_variables(it->second)) {
        if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
          report.push_back("operation " + op.name + ": image uses variable " + v);
        }
      }
    } catch (const StructuralError& e) {
      report.push_back("operation " + op.name + ": " + e.what());
    }
  }
  if (!report.empty()) return report;
  auto nz = make_normalizer(alpha.target);
  for (std::size_t i = 0; i < alpha.source.axioms.size(); ++i) {
    const Equation& ax = alpha.source.axioms[i];
    Term l = translate(alpha, ax.lhs);
    Term r = translate(alpha, ax.rhs);
    const std::string name =
        "axiom " + std::to_string(i + 1) + (ax.label.empty() ? "" : " (" + ax.label + ")");
    if (nz) {
      if (!(nz->normalize(l) == nz->normalize(r))) report.push_back(name + ": not preserved");
      continue;
    }
    // Deepen until proved, the configured depth is exhausted, or the cap is hit.
    std::string failure;
    for (std::size_t depth = 1; depth <= config.depth; ++depth) {
      ClosureConfig cc;
      cc.depth = depth;
      cc.universe_cap = config.universe_cap;
      cc.nat_bound = config.nat_bound;
      try {
        if (entails(alpha.target, l, r, cc) == Verdict::Proved) {
          failure.clear();
          break;
        }
        failure = ": not derived at depth " + std::to_string(depth);
      } catch (const ResourceError&) {
        failure = ": undecided (closure cap reached at depth " + std::to_string(depth) + ")";
        break;
      }
    }
    if (!failure.empty()) report.push_back(name + failure);
  }
  return report;
}

SumResult sum(const Theory& a, const Theory& b, const std::string& left_prefix,
              const std::string& right_prefix) {
  if (!(a.monoid() == b.monoid())) throw StructuralError("sum of theories over different monoids");
  bool clash = false;
  for (const auto& op : a.signature.operations()) {
    if (b.signature.find(op.name)) clash = true;
  }
  std::map<std::string, std::string> ra;
  std::map<std::string, std::string> rb;
  for (const auto& op : a.signature.operations()) ra[op.name] = (clash ? left_prefix : "") + op.name;
  for (const auto& op : b.signature.operations()) rb[op.name] = (clash ? right_prefix : "") + op.name;

  Theory out;
  out.name = a.name + "+" + b.name;
  out.signature = Signature(a.monoid());
  for (const auto& op : a.signature.operations()) out.signature.add({ra[op.name], op.arity, op.grade});
  for (const auto& op : b.signature.operations()) out.signature.add({rb[op.name], op.arity, op.grade});
  for (const auto& [th, names] : {std::pair{&a, &ra}, std::pair{&b, &rb}}) {
    for (const auto& ax : th->axioms) {
      out.axioms.push_back(make_equation(out.signature, ax.context, rename_ops(ax.lhs, *names),
                                         rename_ops(ax.rhs, *names), ax.label));
    }
  }
  auto injection = [&](const Theory& from, const std::map<std::string, std::string>& names) {
    TheoryMorphism m{from, out, {}};
    for (const auto& op : from.signature.operations()) {
      std::vector<Term> kids;
      for (const auto& v : standard_variables(op.arity)) kids.push_back(Term::var(v));
      m.assignment.emplace(op.name, Term::app(names.at(op.name), std::move(kids)));
    }
    return m;
  };
  SumResult result{out, injection(a, ra), injection(b, rb)};
  return result;
}

Theory coequalize(const TheoryMorphism& alpha, const TheoryMorphism& beta) {
  auto same = [](const Theory& x, const Theory& y) {
    return x.monoid() == y.monoid() && x.signature.operations() == y.signature.operations();
  };
  if (!same(alpha.source, beta.source) || !same(alpha.target, beta.target)) {
    throw StructuralError("coequalizer of morphisms with different endpoints");
  }
  Theory out = alpha.target;
  out.name = alpha.target.name + "/coeq";
  out.normalizer.clear();
  for (const auto& op : alpha.source.signature.operations()) {
    auto ctx = standard_variables(op.arity);
    out.axioms.push_back(make_equation(out.signature, ctx, alpha.assignment.at(op.name),
                                       beta.assignment.at(op.name), "coeq-" + op.name));
  }
  return out;
}

Term extend_term(const LaxMonoidalMap& g, const Signature& source, const Signature& target,
                 const Term& t) {
  const GradeMonoid& src = source.monoid();
  auto coerce_if = [&](const Grade& to, Term body) {
    if (infer_grade(target, body) == to) return body;
    return Term::coerce(to, std::move(body));
  };
  switch (t.kind()) {
    case Term::Kind::Var: return coerce_if(g(src.unit()), t);
    case Term::Kind::Coerce:
      return coerce_if(g(t.target()), extend_term(g, source, target, t.body()));
    case Term::Kind::App: {
      const Operation& op = source.at(t.name());
      Grade whole = infer_grade(source, t);
      if (t.children().empty()) {
        Grade a = g(t.ambient().value_or(src.unit()));
        Term bare = a == target.monoid().unit() ? Term::app(op.name) : Term::app(op.name, {}, a);
        return coerce_if(g(whole), std::move(bare));
      }
      std::vector<Term> kids;
      for (const auto& c : t.children()) kids.push_back(extend_term(g, source, target, c));
      return coerce_if(g(whole), Term::app(op.name, std::move(kids)));
    }
  }
  return t;
}

Theory extend(const LaxMonoidalMap& g, const Theory& theory) {
  if (!(g.source() == theory.monoid())) {
    throw StructuralError("map source differs from the theory's monoid");
  }
  auto violations = g.validate();
  if (!violations.empty()) {
    throw StructuralError("not a lax monoidal map: " + violations.front());
  }
  Theory out;
  out.name = theory.name;
  // Normal forms are only known to survive the identity map.
  if (g.name() == "identity") out.normalizer = theory.normalizer;
  out.signature = Signature(g.target());
  for (const auto& op : theory.signature.operations()) {
    out.signature.add({op.name, op.arity, g(op.grade)});
  }
  for (const auto& ax : theory.axioms) {
    out.axioms.push_back(make_equation(out.signature, ax.context,
                                       extend_term(g, theory.signature, out.signature, ax.lhs),
                                       extend_term(g, theory.signature, out.signature, ax.rhs),
                                       ax.label));
  }
  return out;
}

Theory tensor(const Theory& a, const Theory& b, const std::string& left_prefix,
              const std::string& right_prefix) {
  const GradeMonoid& m1 = a.monoid();
  const GradeMonoid& m2 = b.monoid();
  LaxMonoidalMap k1 = LaxMonoidalMap::left_embedding(m1, m2);
  LaxMonoidalMap k2 = LaxMonoidalMap::right_embedding(m1, m2);
  Theory ea = extend(k1, a);
  Theory eb = extend(k2, b);
  SumResult s = sum(ea, eb, left_prefix, right_prefix);
  Theory out = s.theory;
  out.name = a.name + "*" + b.name;
  out.normalizer = a.normalizer == "state" && b.normalizer == "state" ? "state" : "";

  const Signature& sig = out.signature;
  const GradeMonoid& prod = sig.monoid();
  for (const auto& fa : a.signature.operations()) {
    for (const auto& gb : b.signature.operations()) {
      const Operation& f = sig.at(s.left.assignment.at(fa.name).name());
      const Operation& g = sig.at(s.right.assignment.at(gb.name).name());
      std::vector<std::string> ctx;
      auto xij = [](std::size_t i, std::size_t j) {
        return "x" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
      };
      for (std::size_t i = 0; i < f.arity; ++i) {
        for (std::size_t j = 0; j < g.arity; ++j) ctx.push_back(xij(i, j));
      }
      // f(lambda i. g(lambda j. x_ij)); a nullary outer operation takes the
      // grade of the missing arguments as its ambient.
      auto nest = [&](const Operation& outer, const Operation& inner, bool outer_is_f) {
        std::vector<Term> outs;
        for (std::size_t p = 0; p < outer.arity; ++p) {
          std::vector<Term> ins;
          for (std::size_t q = 0; q < inner.arity; ++q) {
            ins.push_back(Term::var(outer_is_f ? xij(p, q) : xij(q, p)));
          }
          if (inner.arity == 0) {
            outs.push_back(Term::app(inner.name));
          } else {
            outs.push_back(Term::app(inner.name, std::move(ins)));
          }
        }
        if (outer.arity == 0) {
          Grade amb = inner.grade;
          if (amb == prod.unit()) return Term::app(outer.name);
          return Term::app(outer.name, {}, amb);
        }
        return Term::app(outer.name, std::move(outs));
      };
      Term lhs = nest(f, g, true);
      Term rhs = nest(g, f, false);
      Equation eq = make_equation(sig, ctx, lhs, rhs, "commute");
      if (!(eq.grade == prod.tensor(f.grade, g.grade))) {
        throw std::logic_error("commutation equation has an unexpected grade");
      }
      out.axioms.push_back(std::move(eq));
    }
  }
  return out;
}

std::vector<StateFunction> lfold_state_oracle(const std::vector<std::string>& locations,
                                              const std::vector<std::string>& values,
                                              const std::vector<std::string>& xs,
                                              const std::vector<std::string>& subset,
                                              double candidate_cap) {
  const std::size_t nl = locations.size();
  const std::size_t nv = values.size();
  if (nv == 0) throw StructuralError("value set is empty");
  std::vector<bool> inside(nl, false);
  for (const auto& l : subset) {
    auto it = std::find(locations.begin(), locations.end(), l);
    if (it == locations.end()) throw StructuralError("'" + l + "' is not a location");
    inside[static_cast<std::size_t>(it - locations.begin())] = true;
  }
  std::size_t states = 1;
  for (std::size_t i = 0; i < nl; ++i) states *= nv;
  const std::size_t choices = states * xs.size();
  double candidates = std::pow(static_cast<double>(choices), static_cast<double>(states));
  if (candidates > candidate_cap) {
    throw ResourceError("state oracle would enumerate " + std::to_string(candidates) +
                        " candidates, above the cap of " + std::to_string(candidate_cap));
  }
  std::vector<StateFunction> out;
  if (choices == 0) return out;

  auto digit = [&](std::size_t s, std::size_t l) {
    for (std::size_t i = 0; i < l; ++i) s /= nv;
    return s % nv;
  };
  // Projection of a state onto the locations in L'.
  auto restrict = [&](std::size_t s) {
    std::size_t r = 0;
    for (std::size_t l = nl; l-- > 0;) r = r * nv + (inside[l] ? digit(s, l) : 0);
    return r;
  };
  std::vector<std::size_t> pick(states, 0);
  while (true) {
    StateFunction f;
    f.next.resize(states);
    f.output.resize(states);
    for (std::size_t s = 0; s < states; ++s) {
      f.next[s] = pick[s] % states;
      f.output[s] = pick[s] / states;
    }
    bool ok = true;
    for (std::size_t s = 0; s < states && ok; ++s) {
      for (std::size_t l = 0; l < nl && ok; ++l) {
        if (!inside[l] && digit(f.next[s], l) != digit(s, l)) ok = false;
      }
      for (std::size_t t = s + 1; t < states && ok; ++t) {
        if (restrict(s) != restrict(t)) continue;
        if (f.output[s] != f.output[t] || restrict(f.next[s]) != restrict(f.next[t])) ok = false;
      }
    }
    if (ok) out.push_back(std::move(f));
    bool done = true;
    for (std::size_t pos = states; pos-- > 0;) {
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

}  // namespace gradalg
