#include <cmath>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "gradalg/combine.hpp"
#include "gradalg/errors.hpp"
#include "support/generators.hpp"

using namespace gradalg;

namespace {

Term P(const Theory& th, const std::string& text) { return parse_term(th.signature, text); }

// Class count per grade of the bounded closure.
std::map<Grade, std::size_t> counts(const Theory& th, const std::vector<std::string>& ctx,
                                    std::size_t depth) {
  auto u = derive_closure(th, ctx, depth);
  std::map<Grade, std::size_t> out;
  for (std::size_t c = 0; c < u.class_count(); ++c) ++out[u.class_grade(c)];
  return out;
}

Theory empty_theory(const GradeMonoid& gm) {
  Theory th;
  th.name = "empty";
  th.signature = Signature(gm);
  return th;
}

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  while (e--) r *= b;
  return r;
}

}  // namespace

TEST_CASE("catalog theories are well formed") {
  for (const auto& th : catalog()) CHECK_NOTHROW(validate_theory(th));
  Theory st = state_theory(2);
  CHECK(st.signature.operations().size() == 3);
  std::set<std::string> labels;
  for (const auto& ax : st.axioms) labels.insert(ax.label);
  CHECK(labels == std::set<std::string>{"lookup-lookup", "lookup-update", "update-lookup",
                                        "update-update"});
  CHECK(st.axioms.size() == 2 + 4 + 2);
  Theory ex = exception_theory({"e1", "e2"});
  CHECK(ex.signature.operations().size() == 2);
  CHECK(ex.signature.at("raise_e2").grade == ex.monoid().set({"e2"}));
  CHECK_THROWS_AS(state_theory(0), StructuralError);
}

TEST_CASE("module theory has the truncated ring as free model") {
  auto c = counts(module_theory(), {"x"}, 3);
  const GradeMonoid nat = GradeMonoid::discrete_nat();
  CHECK(c[nat.nat(0)] == 2);
  CHECK(c[nat.nat(1)] == 2);
  CHECK(c[nat.nat(2)] == 2);
}

TEST_CASE("lifted constant has |X|+1 elements at both grades") {
  Theory lift = lift_theory();
  CHECK(lift.signature.at("none").grade == lift.monoid().unit());
  for (std::size_t k = 0; k <= 2; ++k) {
    std::vector<std::string> xs = standard_variables(k);
    auto c = counts(lift, xs, 2);
    CHECK(c[lift.monoid().bottom()] == k + 1);
    CHECK(c[lift.monoid().top()] == k + 1);
  }
}

TEST_CASE("sum renames on clash and injections are morphisms") {
  Theory st = state_theory(2);
  SumResult s = sum(st, st);
  CHECK(s.theory.signature.find("l_lookup"));
  CHECK(s.theory.signature.find("r_update_1"));
  CHECK(s.theory.axioms.size() == 2 * st.axioms.size());
  CHECK(check_morphism(s.left).empty());
  CHECK(check_morphism(s.right).empty());

  Theory a = exception_theory({"e1", "e2"}, std::vector<std::string>{"e1"});
  Theory b = exception_theory({"e1", "e2"}, std::vector<std::string>{"e2"});
  SumResult ab = sum(a, b);
  CHECK(ab.theory.signature.find("raise_e1"));
  CHECK(check_morphism(ab.left).empty());
  auto u = derive_closure(ab.theory, {}, 2);
  CHECK(u.classes_of_grade(ab.theory.monoid().set({"e1", "e2"})).size() == 2);

  CHECK_THROWS_AS(sum(st, exception_theory({"e1"})), StructuralError);
}

TEST_CASE("sum with the empty theory changes nothing") {
  Theory ex = exception_theory({"e1"});
  SumResult s = sum(ex, empty_theory(ex.monoid()));
  CHECK(counts(s.theory, {"x"}, 2) == counts(ex, {"x"}, 2));
}

TEST_CASE("sum of exceptions with a lifted constant") {
  // m * X plus one extra constant at every grade.
  Theory ex = exception_theory({"e1"});
  SumResult s = sum(ex, lift_theory(ex.monoid()));
  const GradeMonoid& gm = ex.monoid();
  for (std::size_t k = 1; k <= 2; ++k) {
    auto c = counts(s.theory, standard_variables(k), 2);
    for (const auto& m : gm.enumerate(2)) {
      std::size_t raised = gm.leq(gm.set({"e1"}), m) ? 1 : 0;
      std::size_t ok = gm.leq(gm.unit(), m) ? k : 0;
      CHECK(c[m] == raised + ok + 1);
    }
  }
}

TEST_CASE("coequalizer identifies the two images") {
  GradeMonoid gm = GradeMonoid::exception({"e1", "e2"});
  Theory src;
  src.name = "point";
  src.signature = Signature(gm);
  src.signature.add({"c", 0, gm.set({"e1", "e2"})});
  Theory tgt = exception_theory({"e1", "e2"});
  Term img1 = P(tgt, "c[{e1,e2}](raise_e1())");
  Term img2 = P(tgt, "c[{e1,e2}](raise_e2())");
  TheoryMorphism alpha{src, tgt, {{"c", img1}}};
  TheoryMorphism beta{src, tgt, {{"c", img2}}};
  CHECK(check_morphism(alpha).empty());

  Theory q = coequalize(alpha, beta);
  CHECK(q.axioms.size() == 1);
  CHECK(entails(q, img1, img2, 2) == Verdict::Proved);
  CHECK(entails(tgt, img1, img2, 2) == Verdict::Unknown);

  TheoryMorphism quotient = identity_morphism(tgt);
  quotient.target = q;
  CHECK(check_morphism(quotient).empty());
  Term c = Term::app("c");
  CHECK(apply_morphism(compose(quotient, alpha), c) == apply_morphism(compose(quotient, beta), c));

  Theory same = coequalize(alpha, alpha);
  CHECK(counts(same, {"x"}, 2) == counts(tgt, {"x"}, 2));

  TheoryMorphism foreign{src, state_theory(2), {}};
  CHECK_THROWS_AS(coequalize(alpha, foreign), StructuralError);
}

TEST_CASE("tensor of two state theories") {
  Theory st = state_theory(2);
  Theory tt = tensor(st, st);
  const GradeMonoid& gm = tt.monoid();
  CHECK(gm.kind() == MonoidKind::Product);
  const GradeMonoid& p = st.monoid();
  CHECK(tt.signature.at("l_lookup").grade == gm.pair(p.top(), p.bottom()));
  CHECK(tt.signature.at("r_update_0").grade == gm.pair(p.bottom(), p.top()));
  CHECK(tt.axioms.size() == 8 + 8 + 9);
  for (const auto& ax : tt.axioms) {
    if (ax.label == "commute") CHECK(ax.grade == gm.pair(p.top(), p.top()));
  }
  auto to_l = LaxMonoidalMap::product_to_powerset(gm);
  CHECK(to_l(tt.signature.at("l_lookup").grade) == to_l.target().set({"1"}));
  CHECK(to_l(tt.signature.at("r_lookup").grade) == to_l.target().set({"2"}));

  Term a = P(tt, "l_update_1(r_update_0(x))");
  Term b = P(tt, "r_update_0(l_update_1(x))");
  CHECK(entails(tt, a, b, 2) == Verdict::Proved);
  CHECK(make_normalizer(tt)->normalize(a) == make_normalizer(tt)->normalize(b));
}

TEST_CASE("tensor with the empty trivial theory pads grades") {
  Theory ex = exception_theory({"e1"});
  Theory t = tensor(ex, empty_theory(GradeMonoid::trivial()));
  CHECK(t.signature.at("raise_e1").grade == t.monoid().pair(ex.monoid().set({"e1"}),
                                                            GradeMonoid::trivial().unit()));
  auto base = counts(ex, {"x"}, 2);
  auto padded = counts(t, {"x"}, 2);
  CHECK(base.size() == padded.size());
  for (const auto& [g, n] : base) {
    CHECK(padded[t.monoid().pair(g, GradeMonoid::trivial().unit())] == n);
  }
}

TEST_CASE("tensor with nullary operations") {
  Theory ex = exception_theory({"e1"});
  Theory st = state_theory(2);
  Theory t = tensor(ex, st);
  for (const auto& ax : t.axioms) {
    if (ax.label == "commute") CHECK(ax.grade == infer_grade(t.signature, ax.rhs));
  }
  // raise commutes past lookup: the lookup branches collapse.
  Term l = P(t, "lookup(raise_e1(),raise_e1())");
  auto g = infer_grade(t.signature, l);
  Term r = Term::app("raise_e1", {}, g);
  CHECK(entails(t, l, r, 2) == Verdict::Proved);
}

TEST_CASE("extend along the identity and the embeddings") {
  for (const auto& th : catalog()) {
    Theory same = extend(LaxMonoidalMap::identity(th.monoid()), th);
    REQUIRE(same.axioms.size() == th.axioms.size());
    for (std::size_t i = 0; i < th.axioms.size(); ++i) {
      CHECK(same.axioms[i].lhs == normalize_coercions(th.signature, th.axioms[i].lhs));
      CHECK(same.axioms[i].rhs == normalize_coercions(th.signature, th.axioms[i].rhs));
    }
  }
  Theory st = state_theory(2);
  auto k = LaxMonoidalMap::left_embedding(st.monoid(), GradeMonoid::discrete_nat());
  Theory e = extend(k, st);
  CHECK(e.signature.at("lookup").grade == e.monoid().pair(st.monoid().top(), e.monoid().right().unit()));
  LaxMonoidalMap bad(st.monoid(), st.monoid(),
                     [&](const Grade& g) {
                       return g == st.monoid().top() ? st.monoid().bottom() : st.monoid().top();
                     },
                     "flip");
  CHECK_THROWS_AS(extend(bad, st), StructuralError);
  CHECK_THROWS_AS(extend(k, exception_theory({"e1"})), StructuralError);
}

TEST_CASE("extend preserves provable equations") {
  std::mt19937_64 rng(21);
  for (const auto& th : catalog()) {
    auto k = LaxMonoidalMap::left_embedding(th.monoid(), GradeMonoid::powerset({"p"}));
    Theory e = extend(k, th);
    auto u = derive_closure(th, {"x"}, 2);
    EntailmentOracle oracle(e, ClosureConfig{3});
    int checked = 0;
    for (int i = 0; i < 400 && checked < 25; ++i) {
      std::size_t a = std::uniform_int_distribution<std::size_t>(0, u.size() - 1)(rng);
      const auto& mates = u.members(u.class_of(a));
      std::size_t b = mates[std::uniform_int_distribution<std::size_t>(0, mates.size() - 1)(rng)];
      if (a == b) continue;
      ++checked;
      Term s = extend_term(k, th.signature, e.signature, u.term(a));
      Term t = extend_term(k, th.signature, e.signature, u.term(b));
      CHECK(oracle.entails(s, t) == Verdict::Proved);
    }
  }
}

TEST_CASE("morphisms: identity, composition, failures") {
  Theory st = state_theory(2);
  CHECK(check_morphism(identity_morphism(st)).empty());
  TheoryMorphism swap{st, st, {}};
  swap.assignment.emplace("lookup", P(st, "lookup(x2,x1)"));
  swap.assignment.emplace("update_0", P(st, "update_1(x1)"));
  swap.assignment.emplace("update_1", P(st, "update_0(x1)"));
  CHECK(check_morphism(swap).empty());
  TheoryMorphism twice = compose(swap, swap);
  Term t = P(st, "lookup(update_1(x),c[top](x))");
  CHECK(apply_morphism(twice, t) == apply_morphism(identity_morphism(st), t));

  TheoryMorphism collapse = swap;
  collapse.assignment.insert_or_assign("update_1", P(st, "update_1(x1)"));
  collapse.assignment.insert_or_assign("update_0", P(st, "update_1(x1)"));
  collapse.assignment.insert_or_assign("lookup", P(st, "lookup(x1,x2)"));
  CHECK_FALSE(check_morphism(collapse).empty());

  TheoryMorphism wrong = identity_morphism(st);
  wrong.assignment.insert_or_assign("update_0", P(st, "x1"));
  wrong.assignment.erase("update_1");
  auto report = check_morphism(wrong);
  CHECK(report.size() == 2);
}

TEST_CASE("L-fold state oracle examples") {
  std::vector<std::string> L{"1", "2"}, V{"0", "1"};
  CHECK(lfold_state_oracle(L, V, {"x"}, {}).size() == 1);
  CHECK(lfold_state_oracle(L, V, {"a", "b", "c"}, {}).size() == 3);
  CHECK(lfold_state_oracle(L, V, {"x"}, {"1"}).size() == 4);
  CHECK(lfold_state_oracle(L, V, {"x"}, {"2"}).size() == 4);
  CHECK(lfold_state_oracle(L, V, {"x"}, {"1", "2"}).size() == 256);
  CHECK_THROWS_AS(lfold_state_oracle(L, V, {"x"}, {"3"}), StructuralError);
  CHECK_THROWS_AS(lfold_state_oracle(L, V, {"a", "b", "c"}, {"1", "2"}, 1e4), ResourceError);
}

TEST_CASE("L-fold oracle matches the closed form") {
  struct Case {
    std::size_t locations, values, outputs, subset;
  };
  for (Case c : {Case{1, 3, 1, 1}, Case{2, 2, 2, 1}, Case{2, 2, 2, 0}, Case{1, 2, 3, 1},
                 Case{2, 2, 1, 2}, Case{1, 4, 1, 1}}) {
    std::vector<std::string> L, V, X, S;
    for (std::size_t i = 0; i < c.locations; ++i) L.push_back("l" + std::to_string(i));
    for (std::size_t i = 0; i < c.values; ++i) V.push_back(std::to_string(i));
    for (std::size_t i = 0; i < c.outputs; ++i) X.push_back("x" + std::to_string(i));
    for (std::size_t i = 0; i < c.subset; ++i) S.push_back(L[i]);
    std::size_t local = ipow(c.values, c.subset);
    CHECK(lfold_state_oracle(L, V, X, S).size() == ipow(local * c.outputs, local));
  }
}

TEST_CASE("sum injections are injective on classes and preserve provability") {
  Theory a = exception_theory({"e1", "e2"}, std::vector<std::string>{"e1"});
  Theory b = exception_theory({"e1", "e2"}, std::vector<std::string>{"e2"});
  SumResult ab = sum(a, b);
  auto u = derive_closure(a, {"x"}, 2);
  std::map<Grade, std::set<std::string>> images;
  std::map<Grade, std::size_t> sources;
  for (std::size_t c = 0; c < u.class_count(); ++c) {
    Term img = apply_morphism(ab.left, u.representative(c));
    images[u.class_grade(c)].insert(format_term(ab.theory.signature, img));
    ++sources[u.class_grade(c)];
  }
  for (const auto& [g, n] : sources) CHECK(images[g].size() == n);
  // Provably equal members of one class have equal images.
  for (std::size_t c = 0; c < u.class_count(); ++c) {
    Term first = apply_morphism(ab.left, u.term(u.members(c).front()));
    for (auto id : u.members(c)) CHECK(apply_morphism(ab.left, u.term(id)) == first);
  }
}
