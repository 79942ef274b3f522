#include <memory>

#include "doctest.h"
#include "gradalg/combine.hpp"
#include "gradalg/lawvere.hpp"
#include "support/closed_monads.hpp"

using namespace gradalg;

namespace {

bool mentions(const LawvereReport& r, const std::string& needle) {
  for (const auto& line : r.lines) {
    if (line.find(needle) != std::string::npos) return true;
  }
  return false;
}

std::vector<Grade> state_grades(const Theory& st) {
  return {st.monoid().bottom(), st.monoid().top()};
}

}  // namespace

TEST_CASE("hom-set sizes of Th(exception)") {
  Theory ex = exception_theory({"e1", "e2"});
  const GradeMonoid& gm = ex.monoid();
  GradedLawvere th = th_of(ex, 3, gm.enumerate(0));
  CHECK(th.hom_size(1, 1, gm.unit()) == 1);
  CHECK(th.hom_size(0, 1, gm.set({"e1"})) == 1);
  CHECK(th.hom_size(0, 1, gm.unit()) == 0);
  CHECK(th.hom_size(2, 3, gm.set({"e1", "Ok"})) == 27);
  CHECK(th.hom_size(3, 0, gm.set({"e2"})) == 1);
  for (const auto& m : gm.enumerate(0)) {
    std::size_t id = th.identity(1);
    for (std::size_t f = 0; f < th.hom_size(1, 1, m); ++f) {
      CHECK(th.compose(1, 1, 1, gm.unit(), id, m, f) == f);
    }
  }
}

TEST_CASE("composition lands in the product grade") {
  Theory ex = exception_theory({"e1", "e2"});
  const GradeMonoid& gm = ex.monoid();
  GradedLawvere th = th_of(ex, 2, gm.enumerate(0));
  const FreeMonad& T = *th.free_monad();
  Grade e1ok = gm.set({"e1", "Ok"});
  Grade e2 = gm.set({"e2"});
  // g = <raise_e1 or x1> in hom(1, 1, {e1,Ok}), f = <raise_e2> in hom(1, 1, {e2})
  for (std::size_t g = 0; g < th.hom_size(1, 1, e1ok); ++g) {
    std::size_t gf = th.compose(1, 1, 1, e1ok, g, e2, 0);
    Term t = T.element(gm.tensor(e1ok, e2), 1, th.components(1, 1, gm.tensor(e1ok, e2), gf)[0]);
    CHECK(infer_grade(ex.signature, t) == gm.tensor(e1ok, e2));
  }
}

TEST_CASE("Th and L of the exception theory pass the checks") {
  Theory ex = exception_theory({"e1", "e2"});
  auto grades = ex.monoid().enumerate(0);
  GradedLawvere th = th_of(ex, 2, grades);
  LawvereReport r = check_lawvere(th);
  CHECK(r.ok());
  for (const auto& line : r.lines) MESSAGE(line);
  CHECK(roundtrip_check(th).ok());

  auto monad = std::make_shared<const FreeMonad>(ex, grades);
  GradedLawvere l = l_of(monad, 2);
  CHECK(check_lawvere(l).ok());
  CHECK(roundtrip_check(l).ok());

  auto closed_monad = std::make_shared<const closed::ExceptionMonad>(
      std::vector<std::string>{"e1", "e2"});
  GradedLawvere lc = l_of(closed_monad, 3);
  CHECK(lc.hom_size(1, 1, ex.monoid().set({"e1", "Ok"})) == 2);
  for (const auto& m : grades) {
    for (std::size_t n = 0; n <= 3; ++n) CHECK(lc.hom_size(n, 0, m) == 1);
  }
  LawvereConfig quick;
  quick.combo_budget = 64;
  quick.samples = 20;
  LawvereReport rc = check_lawvere(lc, quick);
  CHECK(rc.sampled > 0);
  CHECK(rc.ok());
  CHECK(roundtrip_check(lc).ok());
}

TEST_CASE("duplicated projection breaks the tupling bijection") {
  Theory ex = exception_theory({"e1", "e2"});
  auto closed_monad = std::make_shared<const closed::ExceptionMonad>(
      std::vector<std::string>{"e1", "e2"});
  GradedLawvere l = l_of(closed_monad, 2);
  l.set_projection(2, 1, l.projection(2, 0));
  LawvereReport r = check_lawvere(l);
  CHECK_FALSE(r.ok());
  CHECK(mentions(r, "tupling is not bijective"));
  CHECK(r.lines.front().front() == '(');
  CHECK_FALSE(roundtrip_check(l).ok());
}

TEST_CASE("Th(state) and its roundtrip") {
  Theory st = state_theory(2);
  GradedLawvere th = th_of(st, 2, state_grades(st));
  CHECK(th.hom_size(1, 1, st.monoid().top()) == 4);
  CHECK(th.hom_size(2, 1, st.monoid().top()) == 16);
  CHECK(th.hom_size(2, 0, st.monoid().top()) == 1);
  LawvereReport r = check_lawvere(th);
  CHECK(r.ok());
  for (const auto& line : r.lines) MESSAGE(line);
  LawvereReport rt = roundtrip_check(th);
  CHECK(rt.ok());
  for (const auto& line : rt.lines) MESSAGE(line);
  CHECK(rt.checked > 0);

  auto closed_monad = std::make_shared<const closed::StateMonad>(2);
  GradedLawvere lc = l_of(closed_monad, 2);
  CHECK(check_lawvere(lc).ok());
  CHECK(roundtrip_check(lc).ok());
}

TEST_CASE("Lawvere monad of Th(exception) satisfies the monad laws") {
  Theory ex = exception_theory({"e1", "e2"});
  GradedLawvere th = th_of(ex, 2, ex.monoid().enumerate(0));
  LawvereMonad tl(th);
  CHECK(check_monad_laws(tl).ok());
}
