#include "gradalg/lawvere.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "gradalg/errors.hpp"

namespace gradalg {

// ---------------------------------------------------------------- GradedLawvere

GradedLawvere::GradedLawvere(std::string name, std::shared_ptr<const GradedMonad> monad,
                             std::size_t arity_bound, std::vector<Grade> support,
                             ComponentCompose compose)
    : name_(std::move(name)),
      monad_(std::move(monad)),
      bound_(arity_bound),
      support_(std::move(support)),
      compose_(std::move(compose)) {}

bool GradedLawvere::supported(const Grade& m) const {
  return std::find(support_.begin(), support_.end(), m) != support_.end();
}

std::size_t GradedLawvere::component_count(std::size_t n, const Grade& m) const {
  return monad_->size(m, n);
}

std::size_t GradedLawvere::hom_size(std::size_t n, std::size_t n2, const Grade& m) const {
  const std::size_t base = component_count(n, m);
  std::size_t total = 1;
  for (std::size_t i = 0; i < n2; ++i) {
    if (base != 0 && total > (std::size_t{1} << 62) / base) {
      throw ResourceError("hom(" + std::to_string(n) + ", " + std::to_string(n2) + ", " +
                          monoid().format(m) + ") is too large to index");
    }
    total *= base;
  }
  return total;
}

std::vector<std::size_t> GradedLawvere::components(std::size_t n, std::size_t n2, const Grade& m,
                                                   std::size_t f) const {
  const std::size_t base = component_count(n, m);
  std::vector<std::size_t> parts(n2);
  for (std::size_t i = n2; i-- > 0;) {
    parts[i] = f % base;
    f /= base;
  }
  return parts;
}

std::size_t GradedLawvere::tuple(std::size_t n, const Grade& m,
                                 const std::vector<std::size_t>& parts) const {
  const std::size_t base = component_count(n, m);
  std::size_t code = 0;
  for (auto p : parts) {
    if (p >= base) throw StructuralError("tuple component out of range");
    code = code * base + p;
  }
  return code;
}

std::string GradedLawvere::show(std::size_t n, std::size_t n2, const Grade& m,
                                std::size_t f) const {
  std::string out = "<";
  auto parts = components(n, n2, m, f);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ", ";
    out += monad_->show(m, n, parts[i]);
  }
  return out + ">";
}

std::size_t GradedLawvere::MemoHash::operator()(const MemoKey& k) const {
  std::size_t h = hash_value(k.m1) * 31 + hash_value(k.m2);
  for (std::size_t v : {k.n1, k.g, k.n}) h = h * 1000003 ^ v;
  for (std::size_t v : k.f) h = h * 1000003 ^ v;
  return h;
}

std::size_t GradedLawvere::compose_component(const Grade& m1, std::size_t n1, std::size_t g,
                                             const Grade& m2, std::size_t n,
                                             const std::vector<std::size_t>& f) const {
  if (f.size() != n1) throw StructuralError("composite needs one component per argument");
  MemoKey key{m1, n1, g, m2, n, f};
  {
    std::lock_guard lock(memo_->mutex);
    auto it = memo_->values.find(key);
    if (it != memo_->values.end()) return it->second;
  }
  std::size_t r = compose_(m1, n1, g, m2, n, f);
  std::lock_guard lock(memo_->mutex);
  memo_->values.emplace(std::move(key), r);
  return r;
}

std::size_t GradedLawvere::compose(std::size_t n, std::size_t n1, std::size_t n2, const Grade& m1,
                                   std::size_t g, const Grade& m2, std::size_t f) const {
  auto fs = components(n, n1, m2, f);
  auto gs = components(n1, n2, m1, g);
  std::vector<std::size_t> out;
  out.reserve(n2);
  for (auto gj : gs) out.push_back(compose_component(m1, n1, gj, m2, n, fs));
  return tuple(n, monoid().tensor(m1, m2), out);
}

std::size_t GradedLawvere::act(std::size_t n, std::size_t n2, const Grade& m, const Grade& m2,
                               std::size_t f) const {
  auto parts = components(n, n2, m, f);
  for (auto& p : parts) p = monad_->coerce(m, m2, n, p);
  return tuple(n, m2, parts);
}

std::size_t GradedLawvere::projection(std::size_t n, std::size_t i) const {
  if (i >= n) throw StructuralError("projection index out of range");
  auto it = projection_overrides_.find({n, i});
  if (it != projection_overrides_.end()) return it->second;
  return monad_->unit(n, i);
}

void GradedLawvere::set_projection(std::size_t n, std::size_t i, std::size_t element) {
  projection_overrides_[{n, i}] = element;
}

std::size_t GradedLawvere::identity(std::size_t n) const {
  std::vector<std::size_t> parts;
  for (std::size_t i = 0; i < n; ++i) parts.push_back(projection(n, i));
  return tuple(n, monoid().unit(), parts);
}

GradedLawvere th_of(const Theory& theory, std::size_t arity_bound, std::vector<Grade> support,
                    DeciderConfig config) {
  FreeMonadConfig fc;
  fc.decider = config;
  auto free = std::make_shared<const FreeMonad>(theory, support, fc);
  const FreeMonad* T = free.get();
  const Signature& sig = free->theory().signature;
  auto compose = [T, &sig](const Grade& m1, std::size_t n1, std::size_t g, const Grade& m2,
                           std::size_t n, const std::vector<std::size_t>& f) {
    Binding b;
    for (std::size_t i = 0; i < n1; ++i) {
      b.emplace("x" + std::to_string(i + 1), T->element(m2, n, f[i]));
    }
    return T->index(n, substitute(sig, T->element(m1, n1, g), b, m2));
  };
  GradedLawvere law("Th(" + theory.name + ")", free, arity_bound, std::move(support), compose);
  law.attach_free_monad(free);
  return law;
}

GradedLawvere l_of(std::shared_ptr<const GradedMonad> monad, std::size_t arity_bound) {
  const GradedMonad* T = monad.get();
  auto compose = [T](const Grade& m1, std::size_t n1, std::size_t g, const Grade& m2,
                     std::size_t n, const std::vector<std::size_t>& f) {
    // g : 1 -> T(m1, n1) and f : n1 -> T(m2, n) in the Kleisli category.
    KleisliHom gk{1, n1, m1, {g}};
    KleisliHom fk{n1, n, m2, f};
    return kleisli_compose(*T, gk, fk).map.front();
  };
  std::string name = "L(" + monad->name() + ")";
  auto grades = monad->grades();
  return GradedLawvere(std::move(name), std::move(monad), arity_bound, std::move(grades),
                       compose);
}

// ---------------------------------------------------------------- LawvereMonad

std::size_t LawvereMonad::size(const Grade& m, std::size_t k) const {
  return law_->component_count(k, m);
}

std::string LawvereMonad::show(const Grade& m, std::size_t k, std::size_t e) const {
  return law_->show(k, 1, m, e);
}

std::size_t LawvereMonad::unit(std::size_t k, std::size_t i) const {
  return law_->projection(k, i);
}

std::size_t LawvereMonad::coerce(const Grade& m, const Grade& m2, std::size_t k,
                                 std::size_t e) const {
  return law_->act(k, 1, m, m2, e);
}

std::size_t LawvereMonad::fmap(const Grade& m, std::size_t k, std::size_t k2,
                               const std::vector<std::size_t>& h, std::size_t e) const {
  // e . <pi_{h(0)}, ..., pi_{h(k-1)}>
  std::vector<std::size_t> f;
  for (auto j : h) f.push_back(law_->projection(k2, j));
  return law_->compose_component(m, k, e, law_->monoid().unit(), k2, f);
}

std::size_t LawvereMonad::mult(const Grade& m1, const Grade& m2, std::size_t k,
                               std::size_t e) const {
  // e . <every element of L(k, 1)m2>
  std::vector<std::size_t> all(size(m2, k));
  std::iota(all.begin(), all.end(), std::size_t{0});
  return law_->compose_component(m1, all.size(), e, m2, k, all);
}

// ---------------------------------------------------------------- checks

namespace {

class Checker {
 public:
  Checker(const GradedLawvere& l, const LawvereConfig& c, LawvereReport& r)
      : law(l), config(c), report(r), rng(c.seed) {}

  std::string cell(std::size_t n, std::size_t n2, const Grade& m) const {
    return "(" + std::to_string(n) + ", " + std::to_string(n2) + ", " + law.monoid().format(m) +
           ")";
  }

  void fail(const std::string& line) {
    ++report.failure_count;
    if (report.lines.size() < config.max_lines) report.lines.push_back(line);
  }

  // Runs check over [0, total) or over samples when total exceeds budget;
  // exceptions become failures tagged with `where`.
  template <typename F>
  void over(std::size_t total, std::size_t budget, const std::string& where, F check) {
    std::vector<std::size_t> picks;
    report.instances = Checker::product({report.instances + total});
    if (total <= budget) {
      picks.resize(total);
      std::iota(picks.begin(), picks.end(), std::size_t{0});
    } else {
      ++report.sampled;
      std::uniform_int_distribution<std::size_t> d(0, total - 1);
      for (std::size_t i = 0; i < config.samples; ++i) picks.push_back(d(rng));
    }
    for (auto x : picks) {
      ++report.checked;
      try {
        if (auto bad = check(x)) fail(where + " " + *bad);
      } catch (const std::exception& e) {
        fail(where + " error: " + e.what());
      }
    }
  }

  // Size of a cell, or nullopt with a failure line.
  std::optional<std::size_t> size(std::size_t n, std::size_t n2, const Grade& m) {
    try {
      return law.hom_size(n, n2, m);
    } catch (const std::exception& e) {
      fail(cell(n, n2, m) + " not checked: " + e.what());
      return std::nullopt;
    }
  }

  // Product of sizes, saturating.
  static std::size_t product(std::initializer_list<std::size_t> xs) {
    std::size_t p = 1;
    for (auto x : xs) {
      if (x != 0 && p > (std::size_t{1} << 62) / x) return std::size_t{1} << 62;
      p *= x;
    }
    return p;
  }

  // pi_i . f for every i, as an element of hom(n, 1, m)^n2.
  std::vector<std::size_t> projections_of(std::size_t n, std::size_t n2, const Grade& m,
                                          std::size_t f) const {
    std::vector<std::size_t> parts;
    const Grade I = law.monoid().unit();
    for (std::size_t i = 0; i < n2; ++i) {
      std::size_t pi = law.tuple(n2, I, {law.projection(n2, i)});
      parts.push_back(law.compose(n, n2, 1, I, pi, m, f));
    }
    return parts;
  }

  const GradedLawvere& law;
  const LawvereConfig& config;
  LawvereReport& report;
  std::mt19937_64 rng;
};

// Tupling map hom(n, n2, m) -> hom(n, 1, m)^n2 through `encode`, checked bijective.
template <typename Encode>
void check_bijection(Checker& c, std::size_t n, std::size_t n2, const Grade& m,
                     std::size_t total, std::size_t target_total, const std::string& what,
                     Encode encode) {
  const std::string where = c.cell(n, n2, m) + " " + what;
  if (total != target_total) {
    c.fail(where + " is not bijective: " + std::to_string(total) + " elements against " +
           std::to_string(target_total));
    return;
  }
  if (total <= c.config.exhaustive_budget) {
    c.report.instances = Checker::product({c.report.instances + total});
    std::map<std::size_t, std::size_t> seen;
    for (std::size_t f = 0; f < total; ++f) {
      ++c.report.checked;
      std::size_t code;
      try {
        code = encode(f);
      } catch (const std::exception& e) {
        c.fail(where + " error: " + e.what());
        return;
      }
      auto [it, fresh] = seen.emplace(code, f);
      if (!fresh) {
        c.fail(where + " is not bijective: " + c.law.show(n, n2, m, it->second) + " and " +
               c.law.show(n, n2, m, f) + " have the same image");
        return;
      }
    }
    return;
  }
  // Sampled: the image must be the tuple of components, which is a bijection.
  c.over(total, 0, where, [&](std::size_t f) -> std::optional<std::string> {
    std::size_t code = encode(f);
    if (code == f) return std::nullopt;
    return "does not return the components of " + c.law.show(n, n2, m, f);
  });
}

}  // namespace

LawvereReport check_lawvere(const GradedLawvere& law, const LawvereConfig& config) {
  LawvereReport report;
  Checker c(law, config, report);
  const GradeMonoid& gm = law.monoid();
  const Grade I = gm.unit();
  const std::size_t B = law.arity_bound();
  const auto& grades = law.support();
  if (!law.supported(I)) {
    c.fail("(-, -, " + gm.format(I) + ") unit grade is not supported");
    return report;
  }

  // Projections have grade I and the identity is their tuple.
  for (std::size_t n = 0; n <= B; ++n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (law.projection(n, i) >= law.component_count(n, I)) {
        c.fail(c.cell(n, 1, I) + " projection " + std::to_string(i) + " is out of range");
      }
    }
  }

  for (std::size_t n = 0; n <= B; ++n) {
    for (std::size_t n2 = 0; n2 <= B; ++n2) {
      for (const auto& m : grades) {
        auto total = c.size(n, n2, m);
        if (!total) continue;
        const std::string at = c.cell(n, n2, m);
        std::size_t id_target = law.identity(n2);
        std::size_t id_source = law.identity(n);
        c.over(*total, config.exhaustive_budget, at + " identity",
               [&](std::size_t f) -> std::optional<std::string> {
                 std::size_t left = law.compose(n, n2, n2, I, id_target, m, f);
                 if (left != f) return "id . f differs from f = " + law.show(n, n2, m, f);
                 std::size_t right = law.compose(n, n, n2, m, f, I, id_source);
                 if (right != f) return "f . id differs from f = " + law.show(n, n2, m, f);
                 return std::nullopt;
               });
        auto target = c.size(n, 1, m);
        if (!target) continue;
        std::size_t target_total = Checker::product({});
        for (std::size_t i = 0; i < n2; ++i) target_total = Checker::product({target_total, *target});
        check_bijection(c, n, n2, m, *total, target_total, "tupling",
                        [&](std::size_t f) {
                          return law.tuple(n, m, c.projections_of(n, n2, m, f));
                        });
      }
    }
  }

  // Composition is componentwise, so the binary and ternary laws are checked
  // with a single-component outer morphism.
  for (std::size_t n = 0; n <= B; ++n) {
    for (std::size_t n1 = 0; n1 <= B; ++n1) {
      for (const auto& m1 : grades) {
        for (const auto& m2 : grades) {
          const Grade m12 = gm.tensor(m1, m2);
          if (!law.supported(m12)) continue;
          auto gs = c.size(n1, 1, m1);
          auto fs = c.size(n, n1, m2);
          if (!gs || !fs) continue;
          const std::size_t pairs = Checker::product({*gs, *fs});
          // naturality in m1 and in m2
          for (const auto& up : grades) {
            if (!(up == m1) && gm.leq(m1, up) && law.supported(gm.tensor(up, m2))) {
              const Grade to = gm.tensor(up, m2);
              c.over(pairs, config.combo_budget,
                     c.cell(n, 1, m12) + " naturality in the first grade along " + gm.format(up),
                     [&](std::size_t x) -> std::optional<std::string> {
                       std::size_t g = x / *fs, f = x % *fs;
                       std::size_t a = law.compose(n, n1, 1, up, law.act(n1, 1, m1, up, g), m2, f);
                       std::size_t b = law.act(n, 1, m12, to, law.compose(n, n1, 1, m1, g, m2, f));
                       if (a == b) return std::nullopt;
                       return law.show(n, 1, to, a) + " vs " + law.show(n, 1, to, b);
                     });
            }
            if (!(up == m2) && gm.leq(m2, up) && law.supported(gm.tensor(m1, up))) {
              const Grade to = gm.tensor(m1, up);
              c.over(pairs, config.combo_budget,
                     c.cell(n, 1, m12) + " naturality in the second grade along " + gm.format(up),
                     [&](std::size_t x) -> std::optional<std::string> {
                       std::size_t g = x / *fs, f = x % *fs;
                       std::size_t a = law.compose(n, n1, 1, m1, g, up, law.act(n, n1, m2, up, f));
                       std::size_t b = law.act(n, 1, m12, to, law.compose(n, n1, 1, m1, g, m2, f));
                       if (a == b) return std::nullopt;
                       return law.show(n, 1, to, a) + " vs " + law.show(n, 1, to, b);
                     });
            }
          }
          // associativity: h . (g . f) = (h . g) . f with h in hom(n2, 1, m0)
          for (std::size_t n2 = 0; n2 <= B; ++n2) {
            for (const auto& m0 : grades) {
              const Grade m01 = gm.tensor(m0, m1);
              const Grade all = gm.tensor(m01, m2);
              if (!law.supported(m01) || !law.supported(all)) continue;
              // here g ranges over hom(n1, n2, m1) and f over hom(n, n1, m2)
              auto hs = c.size(n2, 1, m0);
              auto gg = c.size(n1, n2, m1);
              if (!hs || !gg) continue;
              const std::size_t triples = Checker::product({*hs, *gg, *fs});
              c.over(triples, config.combo_budget,
                     c.cell(n, 1, all) + " associativity through " + std::to_string(n1) + ", " +
                         std::to_string(n2) + " at " + gm.format(m0) + ", " + gm.format(m1) +
                         ", " + gm.format(m2),
                     [&](std::size_t x) -> std::optional<std::string> {
                       std::size_t f = x % *fs;
                       std::size_t g = (x / *fs) % *gg;
                       std::size_t h = x / *fs / *gg;
                       std::size_t gf = law.compose(n, n1, n2, m1, g, m2, f);
                       std::size_t a = law.compose(n, n2, 1, m0, h, m12, gf);
                       std::size_t hg = law.compose(n1, n2, 1, m0, h, m1, g);
                       std::size_t b = law.compose(n, n1, 1, m01, hg, m2, f);
                       if (a == b) return std::nullopt;
                       return law.show(n, 1, all, a) + " vs " + law.show(n, 1, all, b);
                     });
            }
          }
        }
      }
    }
  }
  return report;
}

namespace {

// Random well-graded terms over x1..xn whose subterm grades stay in the support.
class TermSource {
 public:
  TermSource(const Theory& th, const std::vector<Grade>& support, std::mt19937_64& rng)
      : th_(th), support_(support), rng_(rng) {}

  Term term(std::size_t n, std::size_t depth) {
    const auto& ops = th_.signature.operations();
    std::uniform_int_distribution<int> pick(0, 9);
    int c = depth == 0 ? 0 : pick(rng_);
    if (c <= 2 || ops.empty()) return leaf(n);
    if (c <= 4) {
      Term body = term(n, depth - 1);
      Grade g = infer_grade(th_.signature, body);
      std::vector<Grade> ups;
      for (const auto& h : support_) {
        if (th_.monoid().leq(g, h)) ups.push_back(h);
      }
      if (ups.empty()) return body;
      return Term::coerce(ups[index(ups.size())], body);
    }
    const Operation& op = ops[index(ops.size())];
    if (op.arity == 0) return leaf(n);
    std::vector<Term> kids{term(n, depth - 1)};
    Grade g = infer_grade(th_.signature, kids.front());
    for (std::size_t i = 1; i < op.arity; ++i) {
      Term t = term(n, depth - 1);
      Grade h = infer_grade(th_.signature, t);
      if (h == g) {
        kids.push_back(t);
      } else if (th_.monoid().leq(h, g)) {
        kids.push_back(Term::coerce(g, t));
      } else {
        kids.push_back(kids.front());
      }
    }
    return Term::app(op.name, std::move(kids));
  }

 private:
  std::size_t index(std::size_t size) {
    return std::uniform_int_distribution<std::size_t>(0, size - 1)(rng_);
  }

  Term leaf(std::size_t n) {
    std::vector<Term> leaves;
    for (std::size_t i = 0; i < n; ++i) leaves.push_back(Term::var("x" + std::to_string(i + 1)));
    for (const auto& op : th_.signature.operations()) {
      if (op.arity == 0) leaves.push_back(Term::app(op.name));
    }
    if (leaves.empty()) return Term::var("x1");
    return leaves[index(leaves.size())];
  }

  const Theory& th_;
  const std::vector<Grade>& support_;
  std::mt19937_64& rng_;
};

// |t| in hom(n, 1, grade of t), built from projections, operation classes,
// composition and the order action; nullopt when a grade leaves the support.
std::optional<std::size_t> interpret_in(const GradedLawvere& law, const FreeMonad& free,
                                        std::size_t n, const Term& t) {
  const GradeMonoid& gm = law.monoid();
  const Signature& sig = free.theory().signature;
  const Grade I = gm.unit();
  switch (t.kind()) {
    case Term::Kind::Var: {
      std::size_t i = std::stoul(t.name().substr(1)) - 1;
      return law.projection(n, i);
    }
    case Term::Kind::Coerce: {
      Grade inner = infer_grade(sig, t.body());
      if (!law.supported(inner) || !law.supported(t.target())) return std::nullopt;
      auto b = interpret_in(law, free, n, t.body());
      if (!b) return std::nullopt;
      return law.act(n, 1, inner, t.target(), *b);
    }
    case Term::Kind::App: {
      const Operation& op = sig.at(t.name());
      if (!law.supported(op.grade)) return std::nullopt;
      const std::size_t k = op.arity;
      std::vector<Term> vars;
      for (std::size_t i = 0; i < k; ++i) vars.push_back(Term::var("x" + std::to_string(i + 1)));
      std::size_t f = free.index(k, Term::app(op.name, vars));
      if (k == 0) {
        // f . ! for the unique ! in hom(n, 0, I), then the ambient coercion.
        std::size_t at = law.compose(n, 0, 1, op.grade, f, I, 0);
        Grade a = gm.tensor(op.grade, t.ambient().value_or(I));
        if (!law.supported(a)) return std::nullopt;
        return law.act(n, 1, op.grade, a, at);
      }
      Grade g = infer_grade(sig, t.children().front());
      if (!law.supported(g) || !law.supported(gm.tensor(op.grade, g))) return std::nullopt;
      std::vector<std::size_t> args;
      for (const auto& child : t.children()) {
        auto v = interpret_in(law, free, n, child);
        if (!v) return std::nullopt;
        args.push_back(*v);
      }
      return law.compose(n, k, 1, op.grade, f, g, law.tuple(n, g, args));
    }
  }
  return std::nullopt;
}

}  // namespace

LawvereReport roundtrip_check(const GradedLawvere& law, const LawvereConfig& config) {
  LawvereReport report;
  Checker c(law, config, report);
  const GradeMonoid& gm = law.monoid();
  const Grade I = gm.unit();
  const std::size_t B = law.arity_bound();
  const auto& grades = law.support();

  auto tl = std::make_shared<const LawvereMonad>(law);
  GradedLawvere back = l_of(tl, B);

  // phi : L(n, n2, m) -> L_{T_L}(n, n2, m), f |-> (pi_i . f)_i
  std::map<std::tuple<std::size_t, std::size_t, Grade, std::size_t>, std::size_t> phi_cache;
  auto phi = [&](std::size_t n, std::size_t n2, const Grade& m, std::size_t f) {
    auto key = std::make_tuple(n, n2, m, f);
    auto it = phi_cache.find(key);
    if (it != phi_cache.end()) return it->second;
    std::size_t r = back.tuple(n, m, c.projections_of(n, n2, m, f));
    phi_cache.emplace(std::move(key), r);
    return r;
  };

  for (std::size_t n = 0; n <= B; ++n) {
    for (std::size_t n2 = 0; n2 <= B; ++n2) {
      for (const auto& m : grades) {
        auto total = c.size(n, n2, m);
        if (!total) continue;
        std::size_t other;
        try {
          other = back.hom_size(n, n2, m);
        } catch (const std::exception& e) {
          c.fail(c.cell(n, n2, m) + " roundtrip not checked: " + e.what());
          continue;
        }
        check_bijection(c, n, n2, m, *total, other, "roundtrip",
                        [&](std::size_t f) { return phi(n, n2, m, f); });
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t pi = law.tuple(n, I, {law.projection(n, i)});
      std::size_t pb = back.tuple(n, I, {back.projection(n, i)});
      if (phi(n, 1, I, pi) != pb) {
        c.fail(c.cell(n, 1, I) + " roundtrip moves projection " + std::to_string(i));
      }
    }
    if (phi(n, n, I, law.identity(n)) != back.identity(n)) {
      c.fail(c.cell(n, n, I) + " roundtrip moves the identity");
    }
  }

  // phi(g . f) = phi(g) . phi(f), single-component g.
  for (std::size_t n = 0; n <= B; ++n) {
    for (std::size_t n1 = 0; n1 <= B; ++n1) {
      for (const auto& m1 : grades) {
        for (const auto& m2 : grades) {
          const Grade m12 = gm.tensor(m1, m2);
          if (!law.supported(m12)) continue;
          auto gs = c.size(n1, 1, m1);
          auto fs = c.size(n, n1, m2);
          if (!gs || !fs) continue;
          c.over(Checker::product({*gs, *fs}), config.combo_budget,
                 c.cell(n, 1, m12) + " roundtrip composition through " + std::to_string(n1) +
                     " at " + gm.format(m1) + ", " + gm.format(m2),
                 [&](std::size_t x) -> std::optional<std::string> {
                   std::size_t g = x / *fs, f = x % *fs;
                   std::size_t a = phi(n, 1, m12, law.compose(n, n1, 1, m1, g, m2, f));
                   std::size_t b = back.compose(n, n1, 1, m1, phi(n1, 1, m1, g), m2,
                                                phi(n, n1, m2, f));
                   if (a == b) return std::nullopt;
                   return back.show(n, 1, m12, a) + " vs " + back.show(n, 1, m12, b);
                 });
        }
      }
    }
  }

  // Terms interpreted through composition land on their canonical classes.
  if (const FreeMonad* free = law.free_monad()) {
    std::mt19937_64 rng(config.seed);
    TermSource source(free->theory(), grades, rng);
    for (std::size_t n = 0; n <= B; ++n) {
      for (std::size_t k = 0; k < config.terms; ++k) {
        Term t = source.term(n, 2);
        if (n == 0 && !free_variables(t).empty()) continue;
        Grade g = infer_grade(free->theory().signature, t);
        if (!law.supported(g)) continue;
        ++report.checked;
        ++report.instances;
        try {
          auto got = interpret_in(law, *free, n, t);
          if (!got) continue;
          std::size_t expected = free->index(n, t);
          if (*got != expected) {
            c.fail(c.cell(n, 1, g) + " interpretation of " +
                   format_term(free->theory().signature, t) + " gives " +
                   free->show(g, n, *got) + ", expected " + free->show(g, n, expected));
          }
        } catch (const std::exception& e) {
          c.fail(c.cell(n, 1, g) + " interpretation of " +
                 format_term(free->theory().signature, t) + " error: " + e.what());
        }
      }
    }
  }
  return report;
}

}  // namespace gradalg
