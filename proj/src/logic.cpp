#include "gradalg/logic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "gradalg/errors.hpp"

namespace gradalg {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

struct VecHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const {
    std::size_t h = v.size();
    for (auto x : v) h ^= x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};

// Interned grades with memoized tensor and order.
class GradeTable {
 public:
  explicit GradeTable(const GradeMonoid& gm) : gm_(gm) {}

  std::uint32_t id(const Grade& g) {
    auto it = ids_.find(g);
    if (it != ids_.end()) return it->second;
    auto n = static_cast<std::uint32_t>(grades_.size());
    grades_.push_back(g);
    ids_.emplace(g, n);
    return n;
  }
  const Grade& grade(std::uint32_t id) const { return grades_[id]; }
  const std::vector<Grade>& all() const { return grades_; }

  std::uint32_t tensor(std::uint32_t a, std::uint32_t b) {
    std::uint64_t key = (std::uint64_t{a} << 32) | b;
    auto it = tensor_.find(key);
    if (it != tensor_.end()) return it->second;
    std::uint32_t r = id(gm_.tensor(grades_[a], grades_[b]));
    tensor_.emplace(key, r);
    return r;
  }
  bool leq(std::uint32_t a, std::uint32_t b) {
    std::uint64_t key = (std::uint64_t{a} << 32) | b;
    auto it = leq_.find(key);
    if (it != leq_.end()) return it->second;
    bool r = gm_.leq(grades_[a], grades_[b]);
    leq_.emplace(key, r);
    return r;
  }

 private:
  const GradeMonoid& gm_;
  std::vector<Grade> grades_;
  std::unordered_map<Grade, std::uint32_t, GradeHash> ids_;
  std::unordered_map<std::uint64_t, std::uint32_t> tensor_;
  std::unordered_map<std::uint64_t, bool> leq_;
};

struct Node {
  Term::Kind kind;
  std::uint32_t sym;    // variable index or operation index
  std::uint32_t gid;    // coercion target or nullary ambient; kNone otherwise
  std::uint32_t first;  // offset into the child array
  std::uint32_t arity;
  std::uint32_t grade;
  std::uint32_t depth;
  std::int32_t vdepth;  // deepest variable occurrence, -1 when ground
  std::uint32_t size;
};

}  // namespace

class ClosureBuilder {
 public:
  ClosureBuilder(const Theory& theory, std::vector<std::string> context,
                 const ClosureConfig& config)
      : theory_(theory),
        sig_(theory.signature),
        gm_(theory.signature.monoid()),
        context_(std::move(context)),
        config_(config),
        grades_(gm_) {}

  ClosureUniverse build() {
    for (std::size_t i = 0; i < context_.size(); ++i) {
      if (!var_index_.emplace(context_[i], static_cast<std::uint32_t>(i)).second) {
        throw StructuralError("repeated variable '" + context_[i] + "' in closure context");
      }
    }
    unit_ = grades_.id(gm_.unit());
    for (const auto& g : gm_.enumerate(config_.nat_bound)) {
      universe_grades_.push_back(grades_.id(g));
    }
    in_range_.assign(grades_.all().size(), false);
    for (auto g : universe_grades_) in_range_[g] = true;

    generate();
    for (const auto& s : config_.seeds) intern_term(s);
    materialize();
    add_static_equations();
    run_closure();
    return finish();
  }

 private:
  // ---- universe construction ----

  bool in_range(std::uint32_t g) const { return g < in_range_.size() && in_range_[g]; }

  const std::vector<std::uint32_t>& upper(std::uint32_t g) {
    auto it = upper_.find(g);
    if (it != upper_.end()) return it->second;
    std::vector<std::uint32_t> out;
    for (auto h : universe_grades_) {
      if (grades_.leq(g, h)) out.push_back(h);
    }
    return upper_.emplace(g, std::move(out)).first->second;
  }

  std::vector<std::uint32_t> key_of(Term::Kind kind, std::uint32_t sym, std::uint32_t gid,
                                    const std::uint32_t* kids, std::size_t n) const {
    std::vector<std::uint32_t> key;
    key.reserve(3 + n);
    key.push_back(static_cast<std::uint32_t>(kind));
    key.push_back(sym);
    key.push_back(gid);
    key.insert(key.end(), kids, kids + n);
    return key;
  }

  std::uint32_t lookup(Term::Kind kind, std::uint32_t sym, std::uint32_t gid,
                       const std::uint32_t* kids, std::size_t n) const {
    auto it = intern_.find(key_of(kind, sym, gid, kids, n));
    return it == intern_.end() ? kNone : it->second;
  }

  std::uint32_t intern(Term::Kind kind, std::uint32_t sym, std::uint32_t gid,
                       const std::uint32_t* kids, std::size_t n, std::uint32_t grade) {
    auto key = key_of(kind, sym, gid, kids, n);
    auto it = intern_.find(key);
    if (it != intern_.end()) return it->second;
    if (nodes_.size() >= config_.universe_cap) cap_exceeded();
    Node node{kind, sym, gid, static_cast<std::uint32_t>(children_.size()),
              static_cast<std::uint32_t>(n), grade, 0, -1, 1};
    if (kind == Term::Kind::Var) node.vdepth = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Node& c = nodes_[kids[i]];
      node.depth = std::max(node.depth, c.depth + 1);
      if (c.vdepth >= 0) node.vdepth = std::max(node.vdepth, c.vdepth + 1);
      node.size += c.size;
    }
    children_.insert(children_.end(), kids, kids + n);
    auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(node);
    intern_.emplace(std::move(key), id);
    return id;
  }

  [[noreturn]] void cap_exceeded() const {
    throw ResourceError("closure universe exceeds the cap of " +
                        std::to_string(config_.universe_cap) + " terms (depth " +
                        std::to_string(config_.depth) + ")");
  }

  void generate() {
    const auto& ops = sig_.operations();
    for (std::uint32_t i = 0; i < context_.size(); ++i) {
      intern(Term::Kind::Var, i, kNone, nullptr, 0, unit_);
    }
    for (std::uint32_t k = 0; k < ops.size(); ++k) {
      if (ops[k].arity != 0) continue;
      std::uint32_t mf = grades_.id(ops[k].grade);
      for (auto a : universe_grades_) {
        std::uint32_t g = grades_.tensor(mf, a);
        if (in_range(g)) intern(Term::Kind::App, k, a, nullptr, 0, g);
      }
    }
    std::size_t level_begin = 0;
    std::size_t level_end = nodes_.size();
    std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> all_by_grade;
    for (std::size_t d = 1; d <= config_.depth; ++d) {
      std::unordered_map<std::uint32_t, std::size_t> old_count;
      for (std::size_t id = level_begin; id < level_end; ++id) {
        all_by_grade[nodes_[id].grade];
      }
      for (auto& [g, v] : all_by_grade) old_count[g] = v.size();
      for (std::size_t id = level_begin; id < level_end; ++id) {
        all_by_grade[nodes_[id].grade].push_back(static_cast<std::uint32_t>(id));
      }
      // Predict the level size so oversized universes fail before allocating.
      double predicted = 0;
      for (std::size_t id = level_begin; id < level_end; ++id) {
        predicted += static_cast<double>(upper(nodes_[id].grade).size());
      }
      for (std::uint32_t k = 0; k < ops.size(); ++k) {
        if (ops[k].arity == 0) continue;
        std::uint32_t mf = grades_.id(ops[k].grade);
        for (const auto& [g, v] : all_by_grade) {
          if (!in_range(grades_.tensor(mf, g))) continue;
          double all = static_cast<double>(v.size());
          double old = static_cast<double>(old_count[g]);
          predicted += std::pow(all, ops[k].arity) - std::pow(old, ops[k].arity);
        }
      }
      if (static_cast<double>(nodes_.size()) + predicted > static_cast<double>(config_.universe_cap)) {
        cap_exceeded();
      }

      for (std::size_t id = level_begin; id < level_end; ++id) {
        auto child = static_cast<std::uint32_t>(id);
        for (auto h : upper(nodes_[id].grade)) {
          intern(Term::Kind::Coerce, 0, h, &child, 1, h);
        }
      }
      for (std::uint32_t k = 0; k < ops.size(); ++k) {
        const std::size_t n = ops[k].arity;
        if (n == 0) continue;
        std::uint32_t mf = grades_.id(ops[k].grade);
        // Deterministic grade order.
        std::vector<std::uint32_t> gs;
        for (const auto& [g, v] : all_by_grade) gs.push_back(g);
        std::sort(gs.begin(), gs.end());
        for (auto g : gs) {
          const auto& pool = all_by_grade[g];
          std::uint32_t result = grades_.tensor(mf, g);
          if (!in_range(result)) continue;
          if (pool.empty()) continue;
          std::vector<std::size_t> idx(n, 0);
          std::vector<std::uint32_t> kids(n);
          while (true) {
            bool fresh = false;
            for (std::size_t i = 0; i < n; ++i) {
              kids[i] = pool[idx[i]];
              if (kids[i] >= level_begin) fresh = true;
            }
            if (fresh) intern(Term::Kind::App, k, kNone, kids.data(), n, result);
            bool done = true;
            for (std::size_t pos = n; pos-- > 0;) {
              if (++idx[pos] < pool.size()) {
                done = false;
                break;
              }
              idx[pos] = 0;
            }
            if (done) break;
          }
        }
      }
      level_begin = level_end;
      level_end = nodes_.size();
    }
  }

  std::uint32_t intern_term(const Term& t) {
    switch (t.kind()) {
      case Term::Kind::Var: {
        auto it = var_index_.find(t.name());
        if (it == var_index_.end()) {
          throw StructuralError("variable '" + t.name() + "' is not in the closure context");
        }
        return intern(Term::Kind::Var, it->second, kNone, nullptr, 0, unit_);
      }
      case Term::Kind::Coerce: {
        std::uint32_t body = intern_term(t.body());
        if (!gm_.leq(grades_.grade(nodes_[body].grade), t.target())) {
          throw StructuralError("ill-formed coercion in closure seed");
        }
        std::uint32_t h = grades_.id(t.target());
        return intern(Term::Kind::Coerce, 0, h, &body, 1, h);
      }
      case Term::Kind::App: {
        auto k = static_cast<std::uint32_t>(sig_.index_of(t.name()));
        const Operation& op = sig_.operations()[k];
        std::uint32_t mf = grades_.id(op.grade);
        if (t.children().size() != op.arity) {
          throw StructuralError("arity mismatch in closure seed");
        }
        if (op.arity == 0) {
          std::uint32_t a = grades_.id(t.ambient().value_or(gm_.unit()));
          return intern(Term::Kind::App, k, a, nullptr, 0, grades_.tensor(mf, a));
        }
        std::vector<std::uint32_t> kids;
        for (const auto& c : t.children()) kids.push_back(intern_term(c));
        std::uint32_t g = nodes_[kids.front()].grade;
        for (auto c : kids) {
          if (nodes_[c].grade != g) throw StructuralError("ill-graded closure seed");
        }
        return intern(Term::Kind::App, k, kNone, kids.data(), kids.size(), grades_.tensor(mf, g));
      }
    }
    return kNone;
  }

  void materialize() {
    terms_.reserve(nodes_.size());
    const auto& ops = sig_.operations();
    for (const auto& n : nodes_) {
      switch (n.kind) {
        case Term::Kind::Var: terms_.push_back(Term::var(context_[n.sym])); break;
        case Term::Kind::Coerce:
          terms_.push_back(Term::coerce(grades_.grade(n.gid), terms_[children_[n.first]]));
          break;
        case Term::Kind::App:
          if (n.arity == 0) {
            if (n.gid == unit_) {
              terms_.push_back(Term::app(ops[n.sym].name));
            } else {
              terms_.push_back(Term::app(ops[n.sym].name, {}, grades_.grade(n.gid)));
            }
          } else {
            std::vector<Term> kids;
            kids.reserve(n.arity);
            for (std::uint32_t i = 0; i < n.arity; ++i) kids.push_back(terms_[children_[n.first + i]]);
            terms_.push_back(Term::app(ops[n.sym].name, std::move(kids)));
          }
          break;
      }
    }
  }

  // ---- equations ----

  void push(std::uint32_t a, std::uint32_t b) {
    if (a != b) pending_.emplace_back(a, b);
  }

  // c[h](body) when h differs from body's grade, body itself otherwise.
  std::uint32_t coerced(std::uint32_t body, std::uint32_t h) const {
    if (nodes_[body].grade == h) return body;
    return lookup(Term::Kind::Coerce, 0, h, &body, 1);
  }

  void add_static_equations() {
    const auto& ops = sig_.operations();
    const auto count = static_cast<std::uint32_t>(nodes_.size());
    for (std::uint32_t id = 0; id < count; ++id) {
      const Node& n = nodes_[id];
      if (n.kind == Term::Kind::Coerce) {
        std::uint32_t body = children_[n.first];
        const Node& b = nodes_[body];
        if (b.grade == n.gid) push(id, body);
        if (b.kind == Term::Kind::Coerce) {
          std::uint32_t inner = children_[b.first];
          std::uint32_t other = lookup(Term::Kind::Coerce, 0, n.gid, &inner, 1);
          if (other != kNone) push(id, other);
        }
      } else if (n.kind == Term::Kind::App && n.arity > 0) {
        // f(c[h](t_1),...,c[h](t_n)) = c[m_f (x) h](f(t_1,...,t_n)) for t_i of one grade.
        bool ok = true;
        std::uint32_t h = kNone;
        std::uint32_t inner_grade = kNone;
        std::vector<std::uint32_t> inner(n.arity);
        for (std::uint32_t i = 0; i < n.arity && ok; ++i) {
          const Node& c = nodes_[children_[n.first + i]];
          if (c.kind != Term::Kind::Coerce) {
            ok = false;
            break;
          }
          inner[i] = children_[c.first];
          std::uint32_t ig = nodes_[inner[i]].grade;
          if (i == 0) {
            h = c.gid;
            inner_grade = ig;
          } else if (c.gid != h || ig != inner_grade) {
            ok = false;
          }
        }
        if (ok) {
          std::uint32_t bare = lookup(Term::Kind::App, n.sym, kNone, inner.data(), inner.size());
          if (bare != kNone) {
            std::uint32_t target = grades_.tensor(grades_.id(ops[n.sym].grade), h);
            std::uint32_t other = coerced(bare, target);
            if (other != kNone) push(id, other);
          }
        }
      } else if (n.kind == Term::Kind::App) {
        // f@a' = c[m_f (x) a'](f@a) for a <= a'.
        std::uint32_t target = n.grade;
        for (auto a : universe_grades_) {
          if (a == n.gid || !grades_.leq(a, n.gid)) continue;
          std::uint32_t lower = lookup(Term::Kind::App, n.sym, a, nullptr, 0);
          if (lower == kNone) continue;
          std::uint32_t other = coerced(lower, target);
          if (other != kNone) push(id, other);
        }
      }
    }
    add_axiom_instances();
  }

  struct Pattern {
    Term term;
    std::map<std::string, std::uint32_t> vars;
  };

  bool match(const Term& p, std::uint32_t node, std::uint32_t mprime,
             const std::map<std::string, std::uint32_t>& vars,
             std::vector<std::uint32_t>& binding) {
    const Node& n = nodes_[node];
    switch (p.kind()) {
      case Term::Kind::Var: {
        if (n.grade != mprime) return false;
        std::uint32_t& slot = binding[vars.at(p.name())];
        if (slot == kNone) {
          slot = node;
          return true;
        }
        return slot == node;
      }
      case Term::Kind::Coerce:
        if (n.kind != Term::Kind::Coerce) return false;
        if (n.gid != grades_.tensor(grades_.id(p.target()), mprime)) return false;
        return match(p.body(), children_[n.first], mprime, vars, binding);
      case Term::Kind::App: {
        if (n.kind != Term::Kind::App || n.sym != sig_.index_of(p.name())) return false;
        if (n.arity == 0) {
          std::uint32_t a = grades_.id(p.ambient().value_or(gm_.unit()));
          return n.gid == grades_.tensor(a, mprime);
        }
        for (std::uint32_t i = 0; i < n.arity; ++i) {
          if (!match(p.children()[i], children_[n.first + i], mprime, vars, binding)) return false;
        }
        return true;
      }
    }
    return false;
  }

  std::uint32_t instantiate(const Term& p, std::uint32_t mprime,
                            const std::map<std::string, std::uint32_t>& vars,
                            const std::vector<std::uint32_t>& binding) {
    switch (p.kind()) {
      case Term::Kind::Var: return binding[vars.at(p.name())];
      case Term::Kind::Coerce: {
        std::uint32_t body = instantiate(p.body(), mprime, vars, binding);
        if (body == kNone) return kNone;
        std::uint32_t h = grades_.tensor(grades_.id(p.target()), mprime);
        return lookup(Term::Kind::Coerce, 0, h, &body, 1);
      }
      case Term::Kind::App: {
        auto k = static_cast<std::uint32_t>(sig_.index_of(p.name()));
        if (p.children().empty()) {
          std::uint32_t a = grades_.id(p.ambient().value_or(gm_.unit()));
          return lookup(Term::Kind::App, k, grades_.tensor(a, mprime), nullptr, 0);
        }
        std::vector<std::uint32_t> kids;
        kids.reserve(p.children().size());
        for (const auto& c : p.children()) {
          std::uint32_t id = instantiate(c, mprime, vars, binding);
          if (id == kNone) return kNone;
          kids.push_back(id);
        }
        return lookup(Term::Kind::App, k, kNone, kids.data(), kids.size());
      }
    }
    return kNone;
  }

  void add_axiom_instances() {
    std::vector<std::vector<std::uint32_t>> by_op(sig_.operations().size());
    std::vector<std::uint32_t> coercions;
    for (std::uint32_t id = 0; id < nodes_.size(); ++id) {
      if (nodes_[id].kind == Term::Kind::App) by_op[nodes_[id].sym].push_back(id);
      if (nodes_[id].kind == Term::Kind::Coerce) coercions.push_back(id);
    }
    std::vector<std::uint32_t> everything(nodes_.size());
    for (std::uint32_t id = 0; id < nodes_.size(); ++id) everything[id] = id;

    for (const auto& ax : theory_.axioms) {
      std::map<std::string, std::uint32_t> vars;
      for (std::size_t i = 0; i < ax.context.size(); ++i) {
        vars.emplace(ax.context[i], static_cast<std::uint32_t>(i));
      }
      for (int side = 0; side < 2; ++side) {
        const Term& from = side == 0 ? ax.lhs : ax.rhs;
        const Term& to = side == 0 ? ax.rhs : ax.lhs;
        const std::vector<std::uint32_t>* candidates = &everything;
        if (from.is_app()) candidates = &by_op[sig_.index_of(from.name())];
        if (from.is_coerce()) candidates = &coercions;
        for (auto node : *candidates) {
          for (auto mprime : universe_grades_) {
            std::vector<std::uint32_t> binding(ax.context.size(), kNone);
            if (!match(from, node, mprime, vars, binding)) continue;
            std::uint32_t other = instantiate(to, mprime, vars, binding);
            if (other != kNone) push(node, other);
          }
        }
      }
    }
  }

  // ---- congruence closure ----

  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  std::vector<std::uint32_t> signature(std::uint32_t id) {
    const Node& n = nodes_[id];
    std::vector<std::uint32_t> key;
    key.reserve(3 + n.arity);
    key.push_back(static_cast<std::uint32_t>(n.kind));
    key.push_back(n.sym);
    key.push_back(n.gid);
    for (std::uint32_t i = 0; i < n.arity; ++i) key.push_back(find(children_[n.first + i]));
    return key;
  }

  std::size_t drain() {
    std::size_t merges = 0;
    while (!pending_.empty()) {
      auto [a, b] = pending_.back();
      pending_.pop_back();
      std::uint32_t ra = find(a);
      std::uint32_t rb = find(b);
      if (ra == rb) continue;
      if (nodes_[ra].grade != nodes_[rb].grade) {
        throw std::logic_error("closure tried to equate terms of different grades");
      }
      if (class_size_[ra] < class_size_[rb]) std::swap(ra, rb);
      parent_[rb] = ra;
      class_size_[ra] += class_size_[rb];
      ++merges;
      for (auto p : uses_[rb]) {
        auto [it, inserted] = sigtable_.try_emplace(signature(p), p);
        if (!inserted && find(it->second) != find(p)) pending_.emplace_back(p, it->second);
      }
      auto& into = uses_[ra];
      into.insert(into.end(), uses_[rb].begin(), uses_[rb].end());
      uses_[rb].clear();
      uses_[rb].shrink_to_fit();
    }
    return merges;
  }

  // Instances of derived equations under x_i := u, other variables y := c[grade u](y).
  void substitution_pass() {
    const std::uint32_t depth_bound = static_cast<std::uint32_t>(config_.depth);
    std::vector<std::vector<std::uint32_t>> by_vdepth(depth_bound + 2);
    for (std::uint32_t id = 0; id < nodes_.size(); ++id) {
      const Node& n = nodes_[id];
      if (n.depth > depth_bound) continue;
      std::size_t bucket = n.vdepth < 0 ? 0 : static_cast<std::size_t>(n.vdepth);
      if (bucket <= depth_bound) by_vdepth[bucket].push_back(id);
    }
    std::vector<std::uint32_t> var_nodes(context_.size(), kNone);
    for (std::uint32_t i = 0; i < context_.size(); ++i) {
      var_nodes[i] = lookup(Term::Kind::Var, i, kNone, nullptr, 0);
    }
    std::vector<std::uint32_t> stamp(nodes_.size(), 0);
    std::vector<std::uint32_t> image(nodes_.size(), kNone);
    std::uint32_t generation = 0;
    std::unordered_map<std::uint32_t, std::uint32_t> first_image;

    // One shallowest member per class suffices: congruence carries the
    // instances over to the other members.
    std::unordered_map<std::uint32_t, std::uint32_t> shallowest;
    for (std::uint32_t id = 0; id < nodes_.size(); ++id) {
      if (nodes_[id].depth > depth_bound) continue;
      auto [it, inserted] = shallowest.try_emplace(find(id), id);
      if (!inserted && nodes_[id].depth < nodes_[it->second].depth) it->second = id;
    }
    std::vector<std::uint32_t> values;
    values.reserve(shallowest.size());
    for (const auto& kv : shallowest) values.push_back(kv.second);
    std::sort(values.begin(), values.end());

    for (std::uint32_t u : values) {
      const Node& un = nodes_[u];
      const std::uint32_t gu = un.grade;
      const std::uint32_t budget = depth_bound - un.depth;
      for (std::uint32_t i = 0; i < context_.size(); ++i) {
        if (u == var_nodes[i]) continue;
        ++generation;
        std::vector<std::uint32_t> var_image(context_.size(), kNone);
        for (std::uint32_t j = 0; j < context_.size(); ++j) {
          if (j == i) {
            var_image[j] = u;
          } else if (var_nodes[j] != kNone) {
            var_image[j] = coerced(var_nodes[j], gu);
          }
        }
        auto img = [&](auto&& self, std::uint32_t s) -> std::uint32_t {
          if (stamp[s] == generation) return image[s];
          const Node& n = nodes_[s];
          std::uint32_t r = kNone;
          switch (n.kind) {
            case Term::Kind::Var: r = var_image[n.sym]; break;
            case Term::Kind::Coerce: {
              std::uint32_t b = self(self, children_[n.first]);
              if (b != kNone) r = lookup(Term::Kind::Coerce, 0, grades_.tensor(n.gid, gu), &b, 1);
              break;
            }
            case Term::Kind::App: {
              if (n.arity == 0) {
                r = lookup(Term::Kind::App, n.sym, grades_.tensor(n.gid, gu), nullptr, 0);
                break;
              }
              std::uint32_t kids[16];
              std::vector<std::uint32_t> big;
              std::uint32_t* out = kids;
              if (n.arity > 16) {
                big.resize(n.arity);
                out = big.data();
              }
              bool ok = true;
              for (std::uint32_t c = 0; c < n.arity; ++c) {
                out[c] = self(self, children_[n.first + c]);
                if (out[c] == kNone) {
                  ok = false;
                  break;
                }
              }
              if (ok) r = lookup(Term::Kind::App, n.sym, kNone, out, n.arity);
              break;
            }
          }
          stamp[s] = generation;
          image[s] = r;
          return r;
        };
        first_image.clear();
        for (std::uint32_t b = 0; b <= budget; ++b) {
          for (auto s : by_vdepth[b]) {
            std::uint32_t r = img(img, s);
            if (r == kNone) continue;
            auto [it, inserted] = first_image.try_emplace(find(s), r);
            if (!inserted && find(it->second) != find(r)) pending_.emplace_back(it->second, r);
          }
        }
      }
    }
  }

  void run_closure() {
    const std::size_t n = nodes_.size();
    parent_.resize(n);
    class_size_.assign(n, 1);
    uses_.assign(n, {});
    for (std::uint32_t i = 0; i < n; ++i) parent_[i] = i;
    for (std::uint32_t id = 0; id < n; ++id) {
      const Node& node = nodes_[id];
      if (node.arity == 0) continue;
      auto [it, inserted] = sigtable_.try_emplace(signature(id), id);
      if (!inserted) pending_.emplace_back(id, it->second);
      for (std::uint32_t i = 0; i < node.arity; ++i) {
        auto c = children_[node.first + i];
        if (i == 0 || c != children_[node.first + i - 1]) uses_[c].push_back(id);
      }
    }
    drain();
    if (!config_.substitution_rule || context_.empty()) return;
    while (true) {
      substitution_pass();
      if (drain() == 0) break;
    }
  }

  ClosureUniverse finish() {
    ClosureUniverse u;
    u.theory_ = theory_;
    u.context_ = context_;
    u.depth_ = config_.depth;
    u.grades_ = grades_.all();
    u.grade_ids_.reserve(nodes_.size());
    for (const auto& n : nodes_) u.grade_ids_.push_back(n.grade);
    std::unordered_map<std::uint32_t, std::size_t> dense;
    u.class_.resize(nodes_.size());
    for (std::uint32_t id = 0; id < nodes_.size(); ++id) {
      std::uint32_t r = find(id);
      auto [it, inserted] = dense.try_emplace(r, u.members_.size());
      if (inserted) u.members_.emplace_back();
      u.class_[id] = it->second;
      u.members_[it->second].push_back(id);
    }
    u.rep_.resize(u.members_.size());
    for (std::size_t c = 0; c < u.members_.size(); ++c) {
      const auto& ms = u.members_[c];
      std::uint32_t best_size = std::numeric_limits<std::uint32_t>::max();
      for (auto m : ms) best_size = std::min(best_size, nodes_[m].size);
      std::size_t best = ms.front();
      std::string best_text;
      bool have = false;
      for (auto m : ms) {
        if (nodes_[m].size != best_size) continue;
        std::string text = format_term(sig_, terms_[m]);
        if (!have || text < best_text) {
          best = m;
          best_text = std::move(text);
          have = true;
        }
      }
      u.rep_[c] = best;
    }
    u.index_.reserve(terms_.size());
    for (std::size_t id = 0; id < terms_.size(); ++id) u.index_.emplace(terms_[id], id);
    u.terms_ = std::move(terms_);
    return u;
  }

  const Theory& theory_;
  const Signature& sig_;
  const GradeMonoid& gm_;
  std::vector<std::string> context_;
  ClosureConfig config_;
  GradeTable grades_;
  std::uint32_t unit_ = 0;
  std::map<std::string, std::uint32_t> var_index_;
  std::vector<std::uint32_t> universe_grades_;
  std::vector<bool> in_range_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> upper_;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> children_;
  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> intern_;
  std::vector<Term> terms_;

  std::vector<std::pair<std::uint32_t, std::uint32_t>> pending_;
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> class_size_;
  std::vector<std::vector<std::uint32_t>> uses_;
  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> sigtable_;
};

std::optional<std::size_t> ClosureUniverse::find(const Term& t) const {
  auto it = index_.find(t);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::size_t> ClosureUniverse::classes_of_grade(const Grade& g) const {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < members_.size(); ++c) {
    if (class_grade(c) == g) out.push_back(c);
  }
  return out;
}

bool ClosureUniverse::equivalent(const Term& s, const Term& t) const {
  auto a = find(s);
  auto b = find(t);
  if (!a || !b) throw StructuralError("term is outside the closure universe");
  return class_[*a] == class_[*b];
}

ClosureUniverse derive_closure(const Theory& theory, std::vector<std::string> context,
                               std::size_t depth) {
  ClosureConfig config;
  config.depth = depth;
  return derive_closure(theory, std::move(context), config);
}

ClosureUniverse derive_closure(const Theory& theory, std::vector<std::string> context,
                               const ClosureConfig& config) {
  if (config.depth < 1) throw StructuralError("closure depth must be at least 1");
  return ClosureBuilder(theory, std::move(context), config).build();
}

std::string to_string(Verdict v) { return v == Verdict::Proved ? "Proved" : "Unknown"; }

namespace {

std::vector<std::string> joint_variables(const Term& s, const Term& t) {
  std::vector<std::string> vars = free_variables(s);
  for (const auto& v : free_variables(t)) {
    if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
  }
  return vars;
}

void require_same_grade(const Theory& theory, const Term& s, const Term& t) {
  Grade gs = infer_grade(theory.signature, s);
  Grade gt = infer_grade(theory.signature, t);
  if (!(gs == gt)) {
    throw StructuralError("entailment between grades " + theory.monoid().format(gs) + " and " +
                          theory.monoid().format(gt));
  }
}

}  // namespace

Verdict entails(const Theory& theory, const Term& s, const Term& t, std::size_t depth) {
  ClosureConfig config;
  config.depth = depth;
  return entails(theory, s, t, config);
}

Verdict entails(const Theory& theory, const Term& s, const Term& t, const ClosureConfig& config) {
  require_same_grade(theory, s, t);
  if (s == t) return Verdict::Proved;
  ClosureConfig seeded = config;
  seeded.seeds.push_back(s);
  seeded.seeds.push_back(t);
  ClosureUniverse u = derive_closure(theory, joint_variables(s, t), seeded);
  return u.equivalent(s, t) ? Verdict::Proved : Verdict::Unknown;
}

EntailmentOracle::EntailmentOracle(Theory theory, ClosureConfig config)
    : theory_(std::move(theory)), config_(std::move(config)) {}

Verdict EntailmentOracle::entails(const Term& s, const Term& t) {
  require_same_grade(theory_, s, t);
  if (s == t) return Verdict::Proved;
  auto vars = joint_variables(s, t);
  std::sort(vars.begin(), vars.end());
  auto& slot = cache_[vars];
  if (!slot) slot = std::make_shared<ClosureUniverse>(derive_closure(theory_, vars, config_));
  if (slot->find(s) && slot->find(t)) {
    return slot->equivalent(s, t) ? Verdict::Proved : Verdict::Unknown;
  }
  ClosureConfig seeded = config_;
  seeded.seeds.push_back(s);
  seeded.seeds.push_back(t);
  return derive_closure(theory_, vars, seeded).equivalent(s, t) ? Verdict::Proved
                                                                 : Verdict::Unknown;
}

}  // namespace gradalg
