#include <random>

#include "doctest.h"
#include "gradalg/combine.hpp"
#include "gradalg/errors.hpp"
#include "gradalg/model.hpp"
#include "support/closed_forms.hpp"
#include "support/generators.hpp"

using namespace gradalg;

namespace {

Term P(const Theory& th, const std::string& text) { return parse_term(th.signature, text); }

}  // namespace

TEST_CASE("variables are projections at every stage") {
  Theory ex = exception_theory({"e1", "e2"});
  FiniteModel m = closed::exception_model(ex, {"a", "b"});
  Interpretation i = interpret(m, {"x1", "x2"}, Term::var("x2"));
  CHECK(i.tables.size() == m.support().size());
  for (const auto& [s, table] : i.tables) {
    std::size_t k = m.carrier_size(s);
    for (std::size_t idx = 0; idx < table.size(); ++idx) CHECK(table[idx] == idx % k);
  }
  CHECK_THROWS_AS(interpret(m, {"x1"}, Term::var("y")), StructuralError);
}

TEST_CASE("raise is the constant Er(e)") {
  Theory ex = exception_theory({"e1", "e2"});
  FiniteModel m = closed::exception_model(ex, {"a"});
  std::size_t ok = m.grade_index(ex.monoid().unit());
  std::size_t v = evaluate(m, {}, Term::app("raise_e1"), ok, {});
  std::size_t e1 = m.grade_index(ex.monoid().set({"e1"}));
  CHECK(m.carrier(e1)[v] == "Er(e1)");
}

TEST_CASE("identity coercion interprets like its body") {
  Theory st = state_theory(2);
  FiniteModel m = closed::state_model(st, 2, {"a", "b"});
  Term body = P(st, "lookup(update_1(x),update_0(x))");
  Interpretation a = interpret(m, {"x"}, body);
  Interpretation b = interpret(m, {"x"}, Term::coerce(st.monoid().top(), body));
  CHECK(a.tables == b.tables);
}

TEST_CASE("state closed form satisfies the state axioms") {
  Theory st = state_theory(2);
  for (std::size_t k = 1; k <= 2; ++k) {
    FiniteModel m = closed::state_model(st, 2, k == 1 ? std::vector<std::string>{"a"}
                                                     : std::vector<std::string>{"a", "b"});
    for (const auto& ax : st.axioms) CHECK_MESSAGE(satisfies(m, ax), ax.label);
    CHECK(check_model(m).empty());
  }
  // Three values: the 9-variable lookup-lookup law is out of exhaustive reach.
  Theory st3 = state_theory(3);
  FiniteModel three = closed::state_model(st3, 3, {"a"});
  for (const auto& ax : st3.axioms) {
    if (ax.label != "lookup-lookup") CHECK(satisfies(three, ax));
  }
  auto report = check_model(three);
  REQUIRE(report.size() == 1);
  CHECK(report.front().find("not checked") != std::string::npos);
}

TEST_CASE("terminal models are models") {
  for (const auto& th : catalog()) {
    FiniteModel t = terminal_model(th, default_support(th.monoid()));
    CHECK(check_model(t).empty());
    for (const auto& ax : th.axioms) CHECK(satisfies(t, ax));
  }
}

TEST_CASE("syntactically equal sides are satisfied") {
  Theory st = state_theory(2);
  FiniteModel m = closed::state_model(st, 2, {"a"});
  Term t = P(st, "update_0(x)");
  Equation eq = make_equation(st.signature, {"x"}, t, t, "refl");
  CHECK(satisfies(m, eq));
}

TEST_CASE("exception models pass check_model") {
  Theory ex = exception_theory({"e1", "e2"});
  CHECK(check_model(closed::exception_model(ex, {"a", "b"})).empty());
  CHECK(check_model(closed::exception_model(ex, {"a"}, true)).empty());
  CHECK(check_model(closed::ring_model()).empty());
}

TEST_CASE("corrupted actions and operations are reported") {
  Theory ex = exception_theory({"e1", "e2"});
  FiniteModel m = closed::exception_model(ex, {"a"});
  const GradeMonoid& gm = ex.monoid();
  Grade e1 = gm.set({"e1"});
  Grade e12 = gm.set({"e1", "e2"});
  std::size_t to = m.grade_index(e12);
  // Er(e1) lands on Er(e2) in this one component only.
  m.set_action(e1, e12, {m.element(to, "Er(e2)")});
  auto report = check_model(m);
  REQUIRE_FALSE(report.empty());
  CHECK(report.front().find("functoriality") == 0);

  Theory st = state_theory(2);
  FiniteModel s = closed::state_model(st, 2, {"a"});
  auto table = *s.operation(st.signature.index_of("update_0"), s.grade_index(st.monoid().top()));
  std::swap(table[0], table[1]);
  s.set_operation("update_0", st.monoid().top(), table);
  auto rs = check_model(s);
  CHECK_FALSE(rs.empty());

  FiniteModel missing(st, {st.monoid().bottom(), st.monoid().top()});
  missing.set_carrier(st.monoid().bottom(), {"a"});
  missing.set_carrier(st.monoid().top(), {"f"});
  auto rm = check_model(missing);
  CHECK(rm.size() == 1 + 3 * 2);
}

TEST_CASE("support errors name the missing grade") {
  Theory mod = module_theory();
  const GradeMonoid& gm = mod.monoid();
  FiniteModel ring = closed::ring_model();
  Term deep = P(mod, "s_t(s_t(s_t(x)))");
  Interpretation i = interpret(ring, {"x"}, deep);
  CHECK(i.tables.empty());
  try {
    (void)evaluate(ring, {"x"}, deep, 0, {1});
    FAIL("expected SupportError");
  } catch (const SupportError& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  FiniteModel sparse(mod, {gm.nat(0), gm.nat(2)});
  sparse.set_carrier(gm.nat(0), {"0", "1"});
  sparse.set_carrier(gm.nat(2), {"0", "t2"});
  CHECK_THROWS_AS(interpret(sparse, {"x"}, P(mod, "s_t(s_t(x))")), SupportError);
  CHECK_THROWS_AS(sparse.grade_index(gm.nat(1)), SupportError);
}

TEST_CASE("module axioms hold in the ring where supported") {
  FiniteModel ring = closed::ring_model();
  Theory mod = module_theory();
  for (const auto& ax : mod.axioms) CHECK_MESSAGE(satisfies(ring, ax), ax.label);
  Equation wrong = make_equation(mod.signature, {"x"}, P(mod, "s_t(x)"),
                                 P(mod, "s_t(zero())"), "bogus");
  CHECK_FALSE(satisfies(ring, wrong));
  CHECK(counterexample(ring, wrong)->find("stage nat:0") == 0);
}

TEST_CASE("interpretation is stable under renaming") {
  Theory st = state_theory(2);
  FiniteModel m = closed::state_model(st, 2, {"a", "b"});
  testgen::TermGen gen(st.signature, {"x", "y"});
  std::mt19937_64 rng(5);
  for (int n = 0; n < 50; ++n) {
    Term t = gen.term(rng, 3);
    Term swapped = rename(t, {{"x", "y"}, {"y", "x"}});
    Interpretation a = interpret(m, {"x", "y"}, t);
    Interpretation b = interpret(m, {"x", "y"}, swapped);
    for (const auto& [s, table] : a.tables) {
      std::size_t k = m.carrier_size(s);
      for (std::size_t idx = 0; idx < table.size(); ++idx) {
        std::size_t flipped = (idx % k) * k + idx / k;
        CHECK(b.tables.at(s)[flipped] == table[idx]);
      }
    }
  }
}

TEST_CASE("homomorphism checks") {
  Theory ex = exception_theory({"e1", "e2"});
  FiniteModel free = closed::exception_model(ex, {"a", "b"});
  CHECK(hom_check(identity_hom(free)));
  CHECK(hom_check(hom_to_terminal(free)));

  // Swapping a and b is an automorphism; collapsing Ok(a), Ok(b) only at one grade is not natural.
  ModelHom swap = identity_hom(free);
  for (std::size_t gi = 0; gi < free.support().size(); ++gi) {
    for (std::size_t e = 0; e < free.carrier_size(gi); ++e) {
      const std::string& l = free.carrier(gi)[e];
      if (l == "Ok(a)") swap.components[gi][e] = free.element(gi, "Ok(b)");
      if (l == "Ok(b)") swap.components[gi][e] = free.element(gi, "Ok(a)");
    }
  }
  CHECK(hom_check(swap));
  ModelHom bad = identity_hom(free);
  std::size_t ok = free.grade_index(ex.monoid().unit());
  bad.components[ok][free.element(ok, "Ok(b)")] = free.element(ok, "Ok(a)");
  CHECK_FALSE(hom_check(bad));
  CHECK(hom_report(bad).front().find("naturality") == 0);

  ModelHom foreign = identity_hom(free);
  foreign.target = terminal_model(state_theory(2), default_support(state_theory(2).monoid()));
  CHECK_THROWS_AS(hom_check(foreign), StructuralError);
}

TEST_CASE("homomorphisms out of the free exception model are determined at I") {
  Theory ex = exception_theory({"e1", "e2"});
  FiniteModel f1 = closed::exception_model(ex, {"a"});
  FiniteModel f2 = closed::exception_model(ex, {"a", "b"});
  FiniteModel collapsed = closed::exception_model(ex, {"a", "b"}, true);
  std::size_t ok = f1.grade_index(ex.monoid().unit());
  CHECK(enumerate_homs(f1, f1, {}, 10).size() == 1);
  CHECK(enumerate_homs(f1, f2, {}, 10).size() == 2);
  CHECK(enumerate_homs(f2, f1, {}, 10).size() == 1);
  CHECK(enumerate_homs(f2, f2, {}, 10).size() == 4);
  auto homs = enumerate_homs(f2, collapsed, {{{ok, 0}, 1}, {{ok, 1}, 1}}, 10);
  REQUIRE(homs.size() == 1);
  CHECK(hom_check(homs.front()));
  CHECK(enumerate_homs(f2, collapsed, {}, 1).size() == 1);
}

TEST_CASE("state homomorphisms") {
  Theory st = state_theory(2);
  FiniteModel one = closed::state_model(st, 2, {"a"});
  FiniteModel two = closed::state_model(st, 2, {"a", "b"});
  CHECK(enumerate_homs(two, one, {}, 10).size() == 1);
  CHECK(enumerate_homs(one, two, {}, 10).size() == 2);
  CHECK(enumerate_homs(two, two, {}, 10).size() == 4);
}
