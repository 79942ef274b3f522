#include "gradalg/model.hpp"

#include <algorithm>

#include "gradalg/errors.hpp"

namespace gradalg {

namespace {

constexpr double kTupleCap = 5e7;

std::string fmt(const GradeMonoid& gm, const Grade& g) { return gm.format(g); }

bool same_signature(const Theory& a, const Theory& b) {
  return a.monoid() == b.monoid() && a.signature.operations() == b.signature.operations();
}

// Decodes tuple number `idx` over a carrier of size k into n digits, first most significant.
void decode(std::size_t idx, std::size_t k, std::size_t n, std::vector<std::size_t>& out) {
  out.assign(n, 0);
  for (std::size_t i = n; i-- > 0;) {
    out[i] = idx % k;
    idx /= k;
  }
}

std::size_t encode(const std::vector<std::size_t>& digits, std::size_t k) {
  std::size_t idx = 0;
  for (auto d : digits) idx = idx * k + d;
  return idx;
}

std::string tuple_text(const FiniteModel& m, std::size_t gi, const std::vector<std::size_t>& xs) {
  std::string out = "(";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += m.carrier(gi)[xs[i]];
  }
  return out + ")";
}

// A term flattened in post-order with the grade of every subterm.
struct Compiled {
  struct Node {
    Term::Kind kind;
    std::size_t sym = 0;  // variable position or operation index
    Grade grade;          // grade of the subterm
    Grade extra;          // coercion target or nullary ambient
    std::vector<std::size_t> kids;
  };
  std::vector<Node> nodes;
};

std::size_t compile(const Signature& sig, const std::vector<std::string>& ctx, const Term& t,
                    Compiled& out) {
  Compiled::Node n{t.kind(), 0, infer_grade(sig, t), sig.monoid().unit(), {}};
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = std::find(ctx.begin(), ctx.end(), t.name());
      if (it == ctx.end()) throw StructuralError("variable '" + t.name() + "' is not in the context");
      n.sym = static_cast<std::size_t>(it - ctx.begin());
      break;
    }
    case Term::Kind::Coerce:
      n.extra = t.target();
      n.kids.push_back(compile(sig, ctx, t.body(), out));
      break;
    case Term::Kind::App:
      n.sym = sig.index_of(t.name());
      if (t.ambient()) n.extra = *t.ambient();
      for (const auto& c : t.children()) n.kids.push_back(compile(sig, ctx, c, out));
      break;
  }
  out.nodes.push_back(std::move(n));
  return out.nodes.size() - 1;
}

struct StagePlan {
  std::vector<std::size_t> carrier;   // per node: index of grade (x) stage
  std::vector<std::size_t> op_stage;  // per App node: stage of its table
};

std::optional<StagePlan> plan(const FiniteModel& model, const Compiled& c, std::size_t stage) {
  const GradeMonoid& gm = model.theory().monoid();
  const Grade& s = model.support()[stage];
  if (!model.find_grade(gm.tensor(c.nodes.back().grade, s))) return std::nullopt;
  StagePlan p;
  p.carrier.resize(c.nodes.size());
  p.op_stage.resize(c.nodes.size(), 0);
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const auto& n = c.nodes[i];
    p.carrier[i] = model.grade_index(gm.tensor(n.grade, s));
    if (n.kind == Term::Kind::App) {
      p.op_stage[i] = n.kids.empty() ? model.grade_index(gm.tensor(n.extra, s))
                                     : p.carrier[n.kids.front()];
    }
  }
  return p;
}

std::size_t run(const FiniteModel& model, const Compiled& c, const StagePlan& p,
                const std::vector<std::size_t>& env, std::vector<std::size_t>& vals) {
  vals.resize(c.nodes.size());
  std::vector<std::size_t> args;
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const auto& n = c.nodes[i];
    switch (n.kind) {
      case Term::Kind::Var: vals[i] = env[n.sym]; break;
      case Term::Kind::Coerce: {
        const auto* table = model.action(p.carrier[n.kids[0]], p.carrier[i]);
        if (!table) throw StructuralError("model lacks an action table");
        vals[i] = (*table)[vals[n.kids[0]]];
        break;
      }
      case Term::Kind::App: {
        const auto* table = model.operation(n.sym, p.op_stage[i]);
        if (!table) throw StructuralError("model lacks an operation table");
        args.clear();
        for (auto k : n.kids) args.push_back(vals[k]);
        vals[i] = (*table)[encode(args, model.carrier_size(p.op_stage[i]))];
        break;
      }
    }
  }
  return vals.back();
}

}  // namespace

// ---- FiniteModel ----

FiniteModel::FiniteModel(Theory theory, std::vector<Grade> support, std::string name)
    : theory_(std::move(theory)), name_(std::move(name)), support_(std::move(support)) {
  const GradeMonoid& gm = theory_.monoid();
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (!gm.contains(support_[i])) throw StructuralError("support grade outside the monoid");
    if (!index_.emplace(support_[i], i).second) {
      throw StructuralError("support lists grade " + gm.format(support_[i]) + " twice");
    }
  }
  carriers_.resize(support_.size());
  for (std::size_t i = 0; i < support_.size(); ++i) actions_[{i, i}] = {};
  operations_.resize(theory_.signature.operations().size());
}

std::optional<std::size_t> FiniteModel::find_grade(const Grade& g) const {
  auto it = index_.find(g);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t FiniteModel::grade_index(const Grade& g) const {
  auto i = find_grade(g);
  if (!i) {
    throw SupportError("grade " + theory_.monoid().format(g) + " is outside the support of " +
                       name_);
  }
  return *i;
}

void FiniteModel::set_carrier(const Grade& m, std::vector<std::string> labels) {
  std::size_t gi = grade_index(m);
  carriers_[gi] = std::move(labels);
  std::vector<std::size_t> id(carriers_[gi].size());
  for (std::size_t i = 0; i < id.size(); ++i) id[i] = i;
  actions_[{gi, gi}] = std::move(id);
}

std::size_t FiniteModel::element(std::size_t gi, const std::string& label) const {
  const auto& c = carriers_[gi];
  auto it = std::find(c.begin(), c.end(), label);
  if (it == c.end()) {
    throw StructuralError("'" + label + "' is not an element at grade " +
                          theory_.monoid().format(support_[gi]));
  }
  return static_cast<std::size_t>(it - c.begin());
}

void FiniteModel::set_action(const Grade& from, const Grade& to, std::vector<std::size_t> table) {
  if (!theory_.monoid().leq(from, to)) {
    throw StructuralError("no action for " + fmt(theory_.monoid(), from) +
                          " <= " + fmt(theory_.monoid(), to));
  }
  actions_[{grade_index(from), grade_index(to)}] = std::move(table);
}

const std::vector<std::size_t>* FiniteModel::action(std::size_t from, std::size_t to) const {
  auto it = actions_.find({from, to});
  return it == actions_.end() ? nullptr : &it->second;
}

void FiniteModel::set_operation(const std::string& op, const Grade& stage,
                                std::vector<std::size_t> table) {
  const Operation& o = theory_.signature.at(op);
  std::size_t s = grade_index(stage);
  (void)grade_index(theory_.monoid().tensor(o.grade, stage));
  operations_[theory_.signature.index_of(op)][s] = std::move(table);
}

const std::vector<std::size_t>* FiniteModel::operation(std::size_t op, std::size_t stage) const {
  auto it = operations_[op].find(stage);
  return it == operations_[op].end() ? nullptr : &it->second;
}

std::vector<std::size_t> FiniteModel::stages(std::size_t op) const {
  const Operation& o = theory_.signature.operations()[op];
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < support_.size(); ++s) {
    if (find_grade(theory_.monoid().tensor(o.grade, support_[s]))) out.push_back(s);
  }
  return out;
}

std::size_t FiniteModel::tuple_count(std::size_t gi, std::size_t n) const {
  double total = 1;
  std::size_t exact = 1;
  for (std::size_t i = 0; i < n; ++i) {
    total *= static_cast<double>(carriers_[gi].size());
    exact *= carriers_[gi].size();
  }
  if (total > kTupleCap) {
    throw ResourceError("argument tuples at grade " + theory_.monoid().format(support_[gi]) +
                        " exceed the cap of 5e7");
  }
  return exact;
}

// ---- construction ----

FiniteModel build_model(
    const Theory& theory, const std::vector<Grade>& support, const std::string& name,
    const std::function<std::vector<std::string>(const Grade&)>& carrier,
    const std::function<std::size_t(const Grade&, const Grade&, std::size_t)>& action,
    const std::function<std::size_t(const Operation&, const Grade&,
                                    const std::vector<std::size_t>&)>& operation) {
  FiniteModel m(theory, support, name);
  const GradeMonoid& gm = theory.monoid();
  for (const auto& g : support) m.set_carrier(g, carrier(g));
  for (std::size_t i = 0; i < support.size(); ++i) {
    for (std::size_t j = 0; j < support.size(); ++j) {
      if (i == j || !gm.leq(support[i], support[j])) continue;
      std::vector<std::size_t> table(m.carrier_size(i));
      for (std::size_t a = 0; a < table.size(); ++a) table[a] = action(support[i], support[j], a);
      m.set_action(support[i], support[j], std::move(table));
    }
  }
  const auto& ops = theory.signature.operations();
  std::vector<std::size_t> args;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    for (auto s : m.stages(k)) {
      std::size_t count = m.tuple_count(s, ops[k].arity);
      std::vector<std::size_t> table(count);
      for (std::size_t idx = 0; idx < count; ++idx) {
        decode(idx, m.carrier_size(s), ops[k].arity, args);
        table[idx] = operation(ops[k], support[s], args);
      }
      m.set_operation(ops[k].name, support[s], std::move(table));
    }
  }
  return m;
}

FiniteModel terminal_model(const Theory& theory, const std::vector<Grade>& support) {
  return build_model(
      theory, support, "terminal", [](const Grade&) { return std::vector<std::string>{"*"}; },
      [](const Grade&, const Grade&, std::size_t) { return std::size_t{0}; },
      [](const Operation&, const Grade&, const std::vector<std::size_t>&) { return std::size_t{0}; });
}

std::vector<Grade> default_support(const GradeMonoid& gm, std::uint64_t nat_bound) {
  return gm.enumerate(nat_bound);
}

// ---- interpretation ----

Interpretation interpret(const FiniteModel& model, const std::vector<std::string>& context,
                         const Term& t) {
  Compiled c;
  compile(model.theory().signature, context, t, c);
  Interpretation out;
  out.grade = c.nodes.back().grade;
  out.arity = context.size();
  std::vector<std::size_t> env;
  std::vector<std::size_t> vals;
  for (std::size_t s = 0; s < model.support().size(); ++s) {
    auto p = plan(model, c, s);
    if (!p) continue;
    std::size_t count = model.tuple_count(s, context.size());
    std::vector<std::size_t> table(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
      decode(idx, model.carrier_size(s), context.size(), env);
      table[idx] = run(model, c, *p, env, vals);
    }
    out.tables.emplace(s, std::move(table));
  }
  return out;
}

std::size_t evaluate(const FiniteModel& model, const std::vector<std::string>& context,
                     const Term& t, std::size_t stage, const std::vector<std::size_t>& env) {
  Compiled c;
  compile(model.theory().signature, context, t, c);
  auto p = plan(model, c, stage);
  if (!p) {
    const GradeMonoid& gm = model.theory().monoid();
    throw SupportError("grade " + gm.format(gm.tensor(c.nodes.back().grade,
                                                     model.support()[stage])) +
                       " is outside the support of " + model.name());
  }
  if (env.size() != context.size()) throw StructuralError("environment size differs from context");
  std::vector<std::size_t> vals;
  return run(model, c, *p, env, vals);
}

std::optional<std::string> counterexample(const FiniteModel& model, const Equation& eq) {
  if (eq.lhs == eq.rhs) return std::nullopt;
  Interpretation l = interpret(model, eq.context, eq.lhs);
  Interpretation r = interpret(model, eq.context, eq.rhs);
  const GradeMonoid& gm = model.theory().monoid();
  std::vector<std::size_t> env;
  for (const auto& [s, table] : l.tables) {
    const auto& other = r.tables.at(s);
    for (std::size_t idx = 0; idx < table.size(); ++idx) {
      if (table[idx] == other[idx]) continue;
      decode(idx, model.carrier_size(s), eq.context.size(), env);
      std::size_t res = model.grade_index(gm.tensor(eq.grade, model.support()[s]));
      return "stage " + gm.format(model.support()[s]) + " on " + tuple_text(model, s, env) +
             ": " + model.carrier(res)[table[idx]] + " vs " + model.carrier(res)[other[idx]];
    }
  }
  return std::nullopt;
}

bool satisfies(const FiniteModel& model, const Equation& eq) {
  return !counterexample(model, eq).has_value();
}

std::vector<std::string> check_model(const FiniteModel& model) {
  std::vector<std::string> report;
  const Theory& th = model.theory();
  const GradeMonoid& gm = th.monoid();
  const auto& sup = model.support();
  const auto& ops = th.signature.operations();
  auto g = [&](std::size_t i) { return gm.format(sup[i]); };

  // Shapes first; semantic checks need complete tables.
  for (std::size_t i = 0; i < sup.size(); ++i) {
    for (std::size_t j = 0; j < sup.size(); ++j) {
      if (!gm.leq(sup[i], sup[j])) continue;
      const auto* t = model.action(i, j);
      std::string where = "action " + g(i) + " <= " + g(j);
      if (!t) {
        report.push_back(where + ": missing");
      } else if (t->size() != model.carrier_size(i) ||
                 std::any_of(t->begin(), t->end(),
                             [&](std::size_t v) { return v >= model.carrier_size(j); })) {
        report.push_back(where + ": malformed table");
      }
    }
  }
  for (std::size_t k = 0; k < ops.size(); ++k) {
    for (auto s : model.stages(k)) {
      const auto* t = model.operation(k, s);
      std::size_t res = model.grade_index(gm.tensor(ops[k].grade, sup[s]));
      std::string where = "operation " + ops[k].name + " at stage " + g(s);
      if (!t) {
        report.push_back(where + ": missing");
      } else if (t->size() != model.tuple_count(s, ops[k].arity) ||
                 std::any_of(t->begin(), t->end(),
                             [&](std::size_t v) { return v >= model.carrier_size(res); })) {
        report.push_back(where + ": malformed table");
      }
    }
  }
  if (!report.empty()) return report;

  // Functoriality.
  for (std::size_t i = 0; i < sup.size(); ++i) {
    const auto& id = *model.action(i, i);
    for (std::size_t a = 0; a < id.size(); ++a) {
      if (id[a] != a) {
        report.push_back("functoriality: action " + g(i) + " <= " + g(i) + " is not the identity");
        break;
      }
    }
    for (std::size_t j = 0; j < sup.size(); ++j) {
      if (i == j || !gm.leq(sup[i], sup[j])) continue;
      for (std::size_t k = 0; k < sup.size(); ++k) {
        if (k == j || !gm.leq(sup[j], sup[k])) continue;
        const auto& ij = *model.action(i, j);
        const auto& jk = *model.action(j, k);
        const auto& ik = *model.action(i, k);
        for (std::size_t a = 0; a < ij.size(); ++a) {
          if (jk[ij[a]] != ik[a]) {
            report.push_back("functoriality: " + g(i) + " <= " + g(j) + " <= " + g(k) +
                             " fails on " + model.carrier(i)[a]);
            break;
          }
        }
      }
    }
  }

  // Naturality of every operation along s <= s'.
  std::vector<std::size_t> args;
  std::vector<std::size_t> moved;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    auto st = model.stages(k);
    for (auto s : st) {
      for (auto s2 : st) {
        if (s == s2 || !gm.leq(sup[s], sup[s2])) continue;
        std::size_t r = model.grade_index(gm.tensor(ops[k].grade, sup[s]));
        std::size_t r2 = model.grade_index(gm.tensor(ops[k].grade, sup[s2]));
        const auto& w = *model.action(s, s2);
        const auto& fw = *model.action(r, r2);
        const auto& f1 = *model.operation(k, s);
        const auto& f2 = *model.operation(k, s2);
        std::size_t count = model.tuple_count(s, ops[k].arity);
        for (std::size_t idx = 0; idx < count; ++idx) {
          decode(idx, model.carrier_size(s), ops[k].arity, args);
          moved.resize(args.size());
          for (std::size_t a = 0; a < args.size(); ++a) moved[a] = w[args[a]];
          if (f2[encode(moved, model.carrier_size(s2))] != fw[f1[idx]]) {
            report.push_back("naturality: " + ops[k].name + " along " + g(s) + " <= " + g(s2) +
                             " fails on " + tuple_text(model, s, args));
            break;
          }
        }
      }
    }
  }

  for (std::size_t i = 0; i < th.axioms.size(); ++i) {
    const Equation& ax = th.axioms[i];
    std::string name =
        "axiom " + std::to_string(i + 1) + (ax.label.empty() ? "" : " (" + ax.label + ")");
    try {
      if (auto cx = counterexample(model, ax)) report.push_back(name + ": fails at " + *cx);
    } catch (const SupportError& e) {
      report.push_back(name + ": " + e.what());
    } catch (const ResourceError& e) {
      report.push_back(name + ": not checked, " + e.what());
    }
  }
  return report;
}

// ---- homomorphisms ----

namespace {

void require_compatible(const FiniteModel& a, const FiniteModel& b) {
  if (!same_signature(a.theory(), b.theory())) {
    throw StructuralError("models interpret different theories");
  }
  if (a.support() != b.support()) throw StructuralError("models have different supports");
}

}  // namespace

ModelHom identity_hom(const FiniteModel& model) {
  ModelHom h{model, model, {}};
  for (std::size_t i = 0; i < model.support().size(); ++i) {
    std::vector<std::size_t> id(model.carrier_size(i));
    for (std::size_t a = 0; a < id.size(); ++a) id[a] = a;
    h.components.push_back(std::move(id));
  }
  return h;
}

ModelHom hom_to_terminal(const FiniteModel& model) {
  ModelHom h{model, terminal_model(model.theory(), model.support()), {}};
  for (std::size_t i = 0; i < model.support().size(); ++i) {
    h.components.emplace_back(model.carrier_size(i), 0);
  }
  return h;
}

std::vector<std::string> hom_report(const ModelHom& h) {
  const FiniteModel& A = h.source;
  const FiniteModel& B = h.target;
  require_compatible(A, B);
  const auto& sup = A.support();
  if (h.components.size() != sup.size()) throw StructuralError("wrong number of components");
  for (std::size_t i = 0; i < sup.size(); ++i) {
    if (h.components[i].size() != A.carrier_size(i)) {
      throw StructuralError("component size differs from its carrier");
    }
    for (auto v : h.components[i]) {
      if (v >= B.carrier_size(i)) throw StructuralError("component value out of range");
    }
  }
  const GradeMonoid& gm = A.theory().monoid();
  auto g = [&](std::size_t i) { return gm.format(sup[i]); };
  std::vector<std::string> report;
  for (std::size_t i = 0; i < sup.size(); ++i) {
    for (std::size_t j = 0; j < sup.size(); ++j) {
      if (i == j || !gm.leq(sup[i], sup[j])) continue;
      const auto* wa = A.action(i, j);
      const auto* wb = B.action(i, j);
      if (!wa || !wb) throw StructuralError("model lacks an action table");
      for (std::size_t a = 0; a < A.carrier_size(i); ++a) {
        if (h.components[j][(*wa)[a]] != (*wb)[h.components[i][a]]) {
          report.push_back("naturality " + g(i) + " <= " + g(j) + " fails on " + A.carrier(i)[a]);
          break;
        }
      }
    }
  }
  const auto& ops = A.theory().signature.operations();
  std::vector<std::size_t> args;
  std::vector<std::size_t> image;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    for (auto s : A.stages(k)) {
      std::size_t r = A.grade_index(gm.tensor(ops[k].grade, sup[s]));
      const auto* fa = A.operation(k, s);
      const auto* fb = B.operation(k, s);
      if (!fa || !fb) throw StructuralError("model lacks an operation table");
      std::size_t count = A.tuple_count(s, ops[k].arity);
      for (std::size_t idx = 0; idx < count; ++idx) {
        decode(idx, A.carrier_size(s), ops[k].arity, args);
        image.resize(args.size());
        for (std::size_t a = 0; a < args.size(); ++a) image[a] = h.components[s][args[a]];
        if (h.components[r][(*fa)[idx]] != (*fb)[encode(image, B.carrier_size(s))]) {
          report.push_back("homomorphism law for " + ops[k].name + " at stage " + g(s) +
                           " fails on " + tuple_text(A, s, args));
          break;
        }
      }
    }
  }
  return report;
}

bool hom_check(const ModelHom& h) { return hom_report(h).empty(); }

std::vector<ModelHom> enumerate_homs(
    const FiniteModel& A, const FiniteModel& B,
    const std::map<std::pair<std::size_t, std::size_t>, std::size_t>& fixed, std::size_t limit) {
  require_compatible(A, B);
  const GradeMonoid& gm = A.theory().monoid();
  const auto& sup = A.support();
  const std::size_t ng = sup.size();

  // Smaller grades first so that actions and constants constrain early.
  std::vector<std::size_t> grade_order(ng);
  std::vector<std::size_t> below(ng, 0);
  for (std::size_t i = 0; i < ng; ++i) {
    grade_order[i] = i;
    for (std::size_t j = 0; j < ng; ++j) {
      if (j != i && gm.leq(sup[j], sup[i])) ++below[i];
    }
  }
  std::stable_sort(grade_order.begin(), grade_order.end(),
                   [&](std::size_t a, std::size_t b) { return below[a] < below[b]; });
  std::vector<std::vector<std::size_t>> pos(ng);
  std::vector<std::pair<std::size_t, std::size_t>> vars;
  for (auto gi : grade_order) {
    pos[gi].resize(A.carrier_size(gi));
    for (std::size_t a = 0; a < A.carrier_size(gi); ++a) {
      pos[gi][a] = vars.size();
      vars.emplace_back(gi, a);
    }
  }
  for (const auto& [key, value] : fixed) {
    if (key.first >= ng || key.second >= A.carrier_size(key.first) ||
        value >= B.carrier_size(key.first)) {
      throw StructuralError("fixed component out of range");
    }
  }

  // Every constraint says: value(lhs var) mapped through `table` equals value of a
  // target expression; stored as closures bucketed by their last variable.
  std::vector<std::size_t> value(vars.size(), 0);
  std::vector<std::vector<std::function<bool()>>> checks(vars.size());
  auto val = [&](std::size_t gi, std::size_t a) { return value[pos[gi][a]]; };

  for (std::size_t i = 0; i < ng; ++i) {
    for (std::size_t j = 0; j < ng; ++j) {
      if (i == j || !gm.leq(sup[i], sup[j])) continue;
      const auto* wa = A.action(i, j);
      const auto* wb = B.action(i, j);
      if (!wa || !wb) throw StructuralError("model lacks an action table");
      for (std::size_t a = 0; a < A.carrier_size(i); ++a) {
        std::size_t moved = (*wa)[a];
        std::size_t last = std::max(pos[i][a], pos[j][moved]);
        checks[last].push_back(
            [&, i, j, a, moved, wb] { return val(j, moved) == (*wb)[val(i, a)]; });
      }
    }
  }
  const auto& ops = A.theory().signature.operations();
  std::vector<std::size_t> args;
  for (std::size_t k = 0; k < ops.size(); ++k) {
    for (auto s : A.stages(k)) {
      std::size_t r = A.grade_index(gm.tensor(ops[k].grade, sup[s]));
      const auto* fa = A.operation(k, s);
      const auto* fb = B.operation(k, s);
      if (!fa || !fb) throw StructuralError("model lacks an operation table");
      std::size_t count = A.tuple_count(s, ops[k].arity);
      const std::size_t kb = B.carrier_size(s);
      for (std::size_t idx = 0; idx < count; ++idx) {
        decode(idx, A.carrier_size(s), ops[k].arity, args);
        std::size_t res = (*fa)[idx];
        std::size_t last = pos[r][res];
        for (auto a : args) last = std::max(last, pos[s][a]);
        checks[last].push_back([&, s, r, res, args, fb, kb] {
          std::size_t image = 0;
          for (auto a : args) image = image * kb + val(s, a);
          return val(r, res) == (*fb)[image];
        });
      }
    }
  }

  std::vector<ModelHom> out;
  auto emit = [&] {
    ModelHom h{A, B, std::vector<std::vector<std::size_t>>(ng)};
    for (std::size_t i = 0; i < ng; ++i) {
      h.components[i].resize(A.carrier_size(i));
      for (std::size_t a = 0; a < A.carrier_size(i); ++a) h.components[i][a] = val(i, a);
    }
    out.push_back(std::move(h));
  };
  auto search = [&](auto&& self, std::size_t p) -> void {
    if (out.size() >= limit) return;
    if (p == vars.size()) {
      emit();
      return;
    }
    auto [gi, a] = vars[p];
    std::size_t lo = 0;
    std::size_t hi = B.carrier_size(gi);
    auto it = fixed.find({gi, a});
    if (it != fixed.end()) {
      lo = it->second;
      hi = lo + 1;
    }
    for (std::size_t v = lo; v < hi; ++v) {
      value[p] = v;
      bool ok = true;
      for (const auto& c : checks[p]) {
        if (!c()) {
          ok = false;
          break;
        }
      }
      if (ok) self(self, p + 1);
      if (out.size() >= limit) return;
    }
  };
  search(search, 0);
  return out;
}

}  // namespace gradalg
