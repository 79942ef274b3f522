#include <random>

#include "doctest.h"
#include "gradalg/errors.hpp"
#include "gradalg/syntax.hpp"
#include "support/generators.hpp"

using namespace gradalg;

namespace {

Signature exception_sig() {
  auto gm = GradeMonoid::exception({"e1", "e2"});
  Signature sig(gm);
  sig.add({"raise_e1", 0, gm.set({"e1"})});
  sig.add({"raise_e2", 0, gm.set({"e2"})});
  return sig;
}

Signature state_sig() {
  auto gm = GradeMonoid::powerset({"*"});
  Signature sig(gm);
  sig.add({"lookup", 2, gm.top()});
  sig.add({"update_0", 1, gm.top()});
  sig.add({"update_1", 1, gm.top()});
  return sig;
}

}  // namespace

TEST_CASE("signature rejects duplicates and foreign grades") {
  Signature sig = state_sig();
  CHECK_THROWS_AS(sig.add({"lookup", 2, sig.monoid().top()}), StructuralError);
  CHECK_THROWS_AS(sig.add({"f", 1, GradeMonoid::discrete_nat().nat(1)}), StructuralError);
}

TEST_CASE("infer_grade examples") {
  Signature ex = exception_sig();
  CHECK(infer_grade(ex, Term::var("x")) == ex.monoid().unit());
  CHECK(infer_grade(ex, Term::app("raise_e1")) == ex.monoid().set({"e1"}));
  Signature st = state_sig();
  Term t = parse_term(st, "lookup(update_0(x),update_1(x))");
  CHECK(infer_grade(st, t) == st.monoid().top());
}

TEST_CASE("infer_grade errors") {
  Signature st = state_sig();
  CHECK_THROWS_AS(infer_grade(st, parse_term(st, "lookup(x,update_0(x))")), StructuralError);
  CHECK_THROWS_AS(infer_grade(st, Term::coerce(st.monoid().bottom(), parse_term(st, "update_0(x)"))),
                  StructuralError);
  CHECK_THROWS_AS(infer_grade(st, Term::app("nope", {Term::var("x")})), StructuralError);
}

TEST_CASE("substitute examples") {
  Signature ex = exception_sig();
  const auto& gm = ex.monoid();
  Term t = Term::coerce(gm.set({"e2"}), Term::app("raise_e2"));
  CHECK(substitute(ex, Term::var("x"), {{"x", t}}) == t);
  Term r = substitute(ex, Term::app("raise_e1"), {}, gm.set({"e2"}));
  CHECK(infer_grade(ex, r) == gm.set({"e1"}));
  CHECK(format_term(ex, r) == "raise_e1@{e2}()");

  Signature st = state_sig();
  Term s = parse_term(st, "update_0(x)");
  Term b = parse_term(st, "lookup(y,y)");
  Term out = substitute(st, s, {{"x", b}});
  CHECK(out == parse_term(st, "update_0(lookup(y,y))"));
  CHECK(infer_grade(st, out) == st.monoid().tensor(infer_grade(st, s), infer_grade(st, b)));
}

TEST_CASE("substitute errors") {
  Signature st = state_sig();
  Term s = parse_term(st, "lookup(x,y)");
  CHECK_THROWS_AS(substitute(st, s, {{"x", Term::var("z")}}), StructuralError);
  CHECK_THROWS_AS(substitute(st, s, {{"x", Term::var("z")}, {"y", parse_term(st, "update_0(z)")}}),
                  StructuralError);
}

TEST_CASE("normalize_coercions examples") {
  Signature st = state_sig();
  const auto& gm = st.monoid();
  Term t = parse_term(st, "update_0(x)");
  CHECK(normalize_coercions(st, Term::coerce(gm.top(), t)) == t);
  Term x = Term::var("x");
  CHECK(normalize_coercions(st, Term::coerce(gm.top(), Term::coerce(gm.bottom(), x))) ==
        Term::coerce(gm.top(), x));
  Term hoisted = parse_term(st, "lookup(c[top](x),c[top](y))");
  // lookup has grade top and top (x) top = top, so the hoisted coercion is an identity.
  CHECK(normalize_coercions(st, hoisted) == parse_term(st, "lookup(x,y)"));

  Signature ex = exception_sig();
  auto& egm = ex.monoid();
  Signature ex2(egm);
  ex2.add({"f", 2, egm.unit()});
  Term two = parse_term(ex2, "f(c[{e1,Ok}](x),c[{e1,Ok}](y))");
  CHECK(normalize_coercions(ex2, two) == parse_term(ex2, "c[{e1,Ok}](f(x,y))"));
}

TEST_CASE("rename examples") {
  Signature st = state_sig();
  CHECK(rename(Term::var("x"), {{"x", "y"}}) == Term::var("y"));
  CHECK(rename(parse_term(st, "lookup(x,x)"), {{"x", "z"}}) == parse_term(st, "lookup(z,z)"));
  Term c = Term::coerce(st.monoid().top(), Term::var("x"));
  Term rc = rename(c, {{"x", "y"}});
  CHECK(rc == Term::coerce(st.monoid().top(), Term::var("y")));
  CHECK(infer_grade(st, rc) == infer_grade(st, c));
  CHECK_THROWS_AS(rename(Term::var("q"), {{"x", "y"}}), StructuralError);
}

TEST_CASE("parse and format round-trip") {
  Signature ex = exception_sig();
  for (const char* text : {"x", "raise_e1()", "raise_e2@{e1}()", "c[{e1,Ok}](x)",
                           "c[{e1,e2,Ok}](c[{e1,Ok}](x))"}) {
    CHECK(format_term(ex, parse_term(ex, text)) == text);
  }
  CHECK(parse_term(ex, "raise_e1@I()") == parse_term(ex, "raise_e1()"));
}

TEST_CASE("parse errors carry columns") {
  Signature st = state_sig();
  try {
    (void)parse_term(st, "lookup(x, c[{q}](x))");
    FAIL("expected error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 13);
  }
  CHECK_THROWS_AS(parse_term(st, "lookup(x)"), ParseError);
  CHECK_THROWS_AS(parse_term(st, "update_0(x"), ParseError);
  CHECK_THROWS_AS(parse_term(st, "foo(x)"), ParseError);
}

TEST_CASE("property: substitution multiplies grades") {
  std::mt19937_64 rng(7);
  for (const Signature& sig : {exception_sig(), state_sig()}) {
    testgen::TermGen gen(sig, {"x", "y"});
    for (int i = 0; i < 300; ++i) {
      Term s = gen.term(rng, 3);
      Grade m = infer_grade(sig, s);
      Grade mp = gen.random_grade(rng);
      Binding b;
      for (const auto& v : free_variables(s)) b.insert_or_assign(v, gen.term_of_grade(rng, mp, 2, {"u", "v"}));
      Term out = substitute(sig, s, b, mp);
      CHECK(infer_grade(sig, out) == sig.monoid().tensor(m, mp));
    }
  }
}

TEST_CASE("property: normalize_coercions preserves grade and is idempotent") {
  std::mt19937_64 rng(11);
  for (const Signature& sig : {exception_sig(), state_sig()}) {
    testgen::TermGen gen(sig, {"x", "y"});
    for (int i = 0; i < 500; ++i) {
      Term t = gen.term(rng, 4);
      Term n = normalize_coercions(sig, t);
      CHECK(infer_grade(sig, n) == infer_grade(sig, t));
      CHECK(normalize_coercions(sig, n) == n);
    }
  }
}

TEST_CASE("property: renaming commutes with substitution and grading") {
  std::mt19937_64 rng(13);
  Signature sig = state_sig();
  testgen::TermGen gen(sig, {"x", "y"});
  for (int i = 0; i < 300; ++i) {
    Term s = gen.term(rng, 3);
    std::map<std::string, std::string> sigma{{"x", "p"}, {"y", "q"}};
    CHECK(infer_grade(sig, rename(s, sigma)) == infer_grade(sig, s));
    Grade mp = gen.random_grade(rng);
    Term bx = gen.term_of_grade(rng, mp, 2, {"u"});
    Term by = gen.term_of_grade(rng, mp, 2, {"u"});
    Term lhs = substitute(sig, rename(s, sigma), {{"p", bx}, {"q", by}}, mp);
    Term rhs = substitute(sig, s, {{"x", bx}, {"y", by}}, mp);
    CHECK(lhs == rhs);
  }
}
