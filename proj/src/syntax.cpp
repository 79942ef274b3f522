#include "gradalg/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "gradalg/errors.hpp"

namespace gradalg {

namespace {

std::size_t mix(std::size_t h, std::size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

void Signature::add(Operation op) {
  if (op.name.empty()) throw StructuralError("operation with empty name");
  if (index_.count(op.name)) throw StructuralError("duplicate operation '" + op.name + "'");
  if (!monoid_.contains(op.grade)) {
    throw StructuralError("grade of operation '" + op.name + "' is not in monoid " +
                          monoid_.describe());
  }
  index_.emplace(op.name, ops_.size());
  ops_.push_back(std::move(op));
}

const Operation* Signature::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  return it == index_.end() ? nullptr : &ops_[it->second];
}

const Operation& Signature::at(std::string_view name) const {
  const Operation* op = find(name);
  if (!op) throw StructuralError("unknown operation '" + std::string(name) + "'");
  return *op;
}

std::size_t Signature::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw StructuralError("unknown operation '" + std::string(name) + "'");
  return it->second;
}

Term Term::make(Node node) {
  std::size_t h = mix(static_cast<std::size_t>(node.kind) + 1, std::hash<std::string>{}(node.name));
  if (node.has_grade) h = mix(h, hash_value(node.grade));
  for (const auto& c : node.children) {
    node.size += c.size();
    h = mix(h, c.hash());
  }
  if (!node.children.empty()) {
    std::size_t d = 0;
    for (const auto& c : node.children) d = std::max(d, c.depth());
    node.depth = d + 1;
  }
  node.hash = h;
  return Term(std::make_shared<const Node>(std::move(node)));
}

Term Term::var(std::string name) {
  return make(Node{Kind::Var, std::move(name), Grade{}, false, {}});
}

Term Term::coerce(Grade target, Term body) {
  std::vector<Term> children;
  children.push_back(std::move(body));
  return make(Node{Kind::Coerce, "c", std::move(target), true, std::move(children)});
}

Term Term::app(std::string op, std::vector<Term> children, std::optional<Grade> ambient) {
  Node n{Kind::App, std::move(op), Grade{}, false, std::move(children)};
  if (ambient) {
    if (!n.children.empty()) throw StructuralError("ambient grade on a non-nullary application");
    n.grade = std::move(*ambient);
    n.has_grade = true;
  }
  return make(std::move(n));
}

std::optional<Grade> Term::ambient() const {
  if (kind() == Kind::App && node_->has_grade) return node_->grade;
  return std::nullopt;
}

bool operator==(const Term& a, const Term& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash() || a.size() != b.size()) return false;
  const auto& x = *a.node_;
  const auto& y = *b.node_;
  return x.kind == y.kind && x.name == y.name && x.has_grade == y.has_grade &&
         (!x.has_grade || x.grade == y.grade) && x.children == y.children;
}

namespace {

// Nullary application with the unit ambient dropped.
Term canonical_constant(const Signature& sig, const std::string& op, const Grade& ambient) {
  if (ambient == sig.monoid().unit()) return Term::app(op);
  return Term::app(op, {}, ambient);
}

}  // namespace

Grade infer_grade(const Signature& sig, const Term& t) {
  const GradeMonoid& gm = sig.monoid();
  switch (t.kind()) {
    case Term::Kind::Var: return gm.unit();
    case Term::Kind::Coerce: {
      if (!gm.contains(t.target())) {
        throw StructuralError("coercion target is not in monoid " + gm.describe());
      }
      Grade inner = infer_grade(sig, t.body());
      if (!gm.leq(inner, t.target())) {
        throw StructuralError("coercion from " + gm.format(inner) + " to " +
                              gm.format(t.target()) + " is not an order relation");
      }
      return t.target();
    }
    case Term::Kind::App: {
      const Operation& op = sig.at(t.name());
      if (t.children().size() != op.arity) {
        throw StructuralError("operation '" + op.name + "' expects " +
                              std::to_string(op.arity) + " arguments, got " +
                              std::to_string(t.children().size()));
      }
      if (op.arity == 0) {
        Grade a = t.ambient().value_or(gm.unit());
        if (!gm.contains(a)) throw StructuralError("ambient grade is not in the monoid");
        return gm.tensor(op.grade, a);
      }
      Grade common = infer_grade(sig, t.children().front());
      for (std::size_t i = 1; i < t.children().size(); ++i) {
        Grade g = infer_grade(sig, t.children()[i]);
        if (!(g == common)) {
          throw StructuralError("arguments of '" + op.name + "' have unequal grades " +
                                gm.format(common) + " and " + gm.format(g));
        }
      }
      return gm.tensor(op.grade, common);
    }
  }
  return gm.unit();
}

std::vector<std::string> free_variables(const Term& t) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  auto walk = [&](auto&& self, const Term& u) -> void {
    if (u.is_var()) {
      if (seen.insert(u.name()).second) out.push_back(u.name());
      return;
    }
    for (const auto& c : u.children()) self(self, c);
  };
  walk(walk, t);
  return out;
}

Equation make_equation(const Signature& sig, std::vector<std::string> context, Term lhs,
                       Term rhs, std::string label) {
  std::set<std::string> ctx(context.begin(), context.end());
  if (ctx.size() != context.size()) throw StructuralError("repeated variable in context");
  for (const Term* side : {&lhs, &rhs}) {
    for (const auto& v : free_variables(*side)) {
      if (!ctx.count(v)) throw StructuralError("variable '" + v + "' is not in the context");
    }
  }
  Grade gl = infer_grade(sig, lhs);
  Grade gr = infer_grade(sig, rhs);
  if (!(gl == gr)) {
    throw StructuralError("equation sides have grades " + sig.monoid().format(gl) + " and " +
                          sig.monoid().format(gr));
  }
  return Equation{std::move(context), std::move(lhs), std::move(rhs), std::move(gl),
                  std::move(label)};
}

void validate_theory(const Theory& theory) {
  for (std::size_t i = 0; i < theory.axioms.size(); ++i) {
    const Equation& e = theory.axioms[i];
    try {
      Equation checked = make_equation(theory.signature, e.context, e.lhs, e.rhs, e.label);
      if (!(checked.grade == e.grade)) throw StructuralError("recorded grade is wrong");
    } catch (const StructuralError& err) {
      throw StructuralError("axiom " + std::to_string(i + 1) + " of theory '" + theory.name +
                            "': " + err.what());
    }
  }
}

namespace {

Term substitute_at(const Signature& sig, const Term& s, const Binding& binding,
                   const Grade& mprime) {
  const GradeMonoid& gm = sig.monoid();
  switch (s.kind()) {
    case Term::Kind::Var: {
      auto it = binding.find(s.name());
      if (it == binding.end()) {
        throw StructuralError("variable '" + s.name() + "' is not bound by the substitution");
      }
      return it->second;
    }
    case Term::Kind::Coerce:
      return Term::coerce(gm.tensor(s.target(), mprime),
                          substitute_at(sig, s.body(), binding, mprime));
    case Term::Kind::App: {
      if (s.children().empty()) {
        Grade a = s.ambient().value_or(gm.unit());
        return canonical_constant(sig, s.name(), gm.tensor(a, mprime));
      }
      std::vector<Term> kids;
      kids.reserve(s.children().size());
      for (const auto& c : s.children()) kids.push_back(substitute_at(sig, c, binding, mprime));
      return Term::app(s.name(), std::move(kids));
    }
  }
  return s;
}

}  // namespace

Term substitute(const Signature& sig, const Term& s, const Binding& binding,
                std::optional<Grade> binding_grade) {
  std::optional<Grade> common;
  for (const auto& [name, term] : binding) {
    Grade g = infer_grade(sig, term);
    if (common && !(*common == g)) {
      throw StructuralError("substitution binds terms of unequal grades " +
                            sig.monoid().format(*common) + " and " + sig.monoid().format(g));
    }
    common = std::move(g);
  }
  if (binding_grade) {
    if (!sig.monoid().contains(*binding_grade)) {
      throw StructuralError("binding grade is not in the monoid");
    }
    if (common && !(*common == *binding_grade)) {
      throw StructuralError("binding grade disagrees with the bound terms");
    }
    common = binding_grade;
  }
  if (!common) {
    // Nothing bound: s must be closed, and the binding grade defaults to I.
    common = sig.monoid().unit();
  }
  return substitute_at(sig, s, binding, *common);
}

Term normalize_coercions(const Signature& sig, const Term& t) {
  const GradeMonoid& gm = sig.monoid();
  switch (t.kind()) {
    case Term::Kind::Var: return t;
    case Term::Kind::Coerce: {
      Term body = normalize_coercions(sig, t.body());
      if (body.is_coerce()) body = body.body();
      if (infer_grade(sig, body) == t.target()) return body;
      return Term::coerce(t.target(), std::move(body));
    }
    case Term::Kind::App: {
      if (t.children().empty()) {
        auto a = t.ambient();
        if (a && *a == gm.unit()) return Term::app(t.name());
        return t;
      }
      std::vector<Term> kids;
      kids.reserve(t.children().size());
      for (const auto& c : t.children()) kids.push_back(normalize_coercions(sig, c));
      bool hoist = std::all_of(kids.begin(), kids.end(), [](const Term& k) {
        return k.is_coerce();
      });
      if (hoist) {
        const Grade& target = kids.front().target();
        Grade inner = infer_grade(sig, kids.front().body());
        for (const auto& k : kids) {
          if (!(k.target() == target) || !(infer_grade(sig, k.body()) == inner)) {
            hoist = false;
            break;
          }
        }
        if (hoist) {
          std::vector<Term> inners;
          inners.reserve(kids.size());
          for (const auto& k : kids) inners.push_back(k.body());
          Term bare = Term::app(t.name(), std::move(inners));
          Grade outer = gm.tensor(sig.at(t.name()).grade, target);
          if (infer_grade(sig, bare) == outer) return bare;
          return Term::coerce(std::move(outer), std::move(bare));
        }
      }
      return Term::app(t.name(), std::move(kids));
    }
  }
  return t;
}

Term rename(const Term& t, const std::map<std::string, std::string>& sigma) {
  switch (t.kind()) {
    case Term::Kind::Var: {
      auto it = sigma.find(t.name());
      if (it == sigma.end()) {
        throw StructuralError("renaming does not cover variable '" + t.name() + "'");
      }
      return Term::var(it->second);
    }
    case Term::Kind::Coerce: return Term::coerce(t.target(), rename(t.body(), sigma));
    case Term::Kind::App: {
      if (t.children().empty()) return t;
      std::vector<Term> kids;
      kids.reserve(t.children().size());
      for (const auto& c : t.children()) kids.push_back(rename(c, sigma));
      return Term::app(t.name(), std::move(kids));
    }
  }
  return t;
}

namespace {

void format_into(const Signature& sig, const Term& t, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::Var: out += t.name(); return;
    case Term::Kind::Coerce:
      out += "c[";
      out += sig.monoid().format(t.target());
      out += "](";
      format_into(sig, t.body(), out);
      out += ')';
      return;
    case Term::Kind::App: {
      out += t.name();
      auto a = t.ambient();
      if (a && !(*a == sig.monoid().unit())) {
        out += '@';
        out += sig.monoid().format(*a);
      }
      out += '(';
      for (std::size_t i = 0; i < t.children().size(); ++i) {
        if (i) out += ',';
        format_into(sig, t.children()[i], out);
      }
      out += ')';
      return;
    }
  }
}

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

class TermParser {
 public:
  TermParser(const Signature& sig, std::string_view text, std::size_t& pos, std::size_t line,
             std::size_t offset)
      : sig_(sig), text_(text), pos_(pos), line_(line), offset_(offset) {}

  Term parse() {
    skip();
    if (pos_ >= text_.size() || !ident_start(text_[pos_])) fail("expected a term");
    std::size_t start = pos_;
    std::string id = ident();
    skip();
    if (id == "c" && peek('[')) {
      ++pos_;
      Grade g = grade();
      skip();
      expect(']');
      expect('(');
      Term body = parse();
      skip();
      expect(')');
      return Term::coerce(std::move(g), std::move(body));
    }
    if (peek('(') || peek('@')) {
      const Operation* op = sig_.find(id);
      if (!op) fail_at(start, "unknown operation '" + id + "'");
      std::optional<Grade> ambient;
      if (peek('@')) {
        ++pos_;
        ambient = grade();
        skip();
        if (op->arity != 0) fail_at(start, "ambient grade on non-nullary operation '" + id + "'");
      }
      expect('(');
      std::vector<Term> kids;
      skip();
      if (peek(')')) {
        ++pos_;
      } else {
        while (true) {
          kids.push_back(parse());
          skip();
          if (peek(',')) {
            ++pos_;
            continue;
          }
          expect(')');
          break;
        }
      }
      if (kids.size() != op->arity) {
        fail_at(start, "operation '" + id + "' expects " + std::to_string(op->arity) +
                           " arguments, got " + std::to_string(kids.size()));
      }
      if (ambient && *ambient == sig_.monoid().unit()) ambient.reset();
      return Term::app(id, std::move(kids), std::move(ambient));
    }
    if (sig_.find(id)) fail_at(start, "operation '" + id + "' needs an argument list");
    return Term::var(id);
  }

 private:
  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool peek(char c) const { return pos_ < text_.size() && text_[pos_] == c; }
  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }
  Grade grade() {
    std::size_t start = pos_;
    try {
      return sig_.monoid().parse_prefix(text_, pos_);
    } catch (const StructuralError& e) {
      fail_at(start, e.what());
    }
  }
  void expect(char c) {
    skip();
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) { fail_at(pos_, msg); }
  [[noreturn]] void fail_at(std::size_t at, const std::string& msg) {
    throw ParseError(line_, offset_ + at + 1, msg);
  }

  const Signature& sig_;
  std::string_view text_;
  std::size_t& pos_;
  std::size_t line_;
  std::size_t offset_;
};

}  // namespace

std::string format_term(const Signature& sig, const Term& t) {
  std::string out;
  format_into(sig, t, out);
  return out;
}

Term parse_term_prefix(const Signature& sig, std::string_view text, std::size_t& pos,
                       std::size_t line, std::size_t column_offset) {
  return TermParser(sig, text, pos, line, column_offset).parse();
}

Term parse_term(const Signature& sig, std::string_view text) {
  std::size_t pos = 0;
  Term t = parse_term_prefix(sig, text, pos);
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos != text.size()) throw ParseError(1, pos + 1, "unexpected trailing input");
  return t;
}

}  // namespace gradalg
