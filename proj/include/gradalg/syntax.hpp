#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gradalg/grade.hpp"

namespace gradalg {

struct Operation {
  std::string name;
  std::size_t arity = 0;
  Grade grade;

  friend bool operator==(const Operation&, const Operation&) = default;
};

class Signature {
 public:
  Signature() = default;
  explicit Signature(GradeMonoid monoid) : monoid_(std::move(monoid)) {}

  const GradeMonoid& monoid() const { return monoid_; }
  const std::vector<Operation>& operations() const { return ops_; }

  // Throws StructuralError on a duplicate name or a grade outside the monoid.
  void add(Operation op);
  const Operation* find(std::string_view name) const;
  const Operation& at(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

 private:
  GradeMonoid monoid_;
  std::vector<Operation> ops_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Immutable graded term: a variable, a coercion c[target](body), or an
/// operation application. Nullary applications carry an ambient grade; an
/// absent ambient stands for the unit.
class Term {
 public:
  enum class Kind : unsigned char { Var, Coerce, App };

  static Term var(std::string name);
  static Term coerce(Grade target, Term body);
  static Term app(std::string op, std::vector<Term> children = {},
                  std::optional<Grade> ambient = std::nullopt);

  Kind kind() const { return node_->kind; }
  bool is_var() const { return kind() == Kind::Var; }
  bool is_coerce() const { return kind() == Kind::Coerce; }
  bool is_app() const { return kind() == Kind::App; }

  // Variable name or operation name.
  const std::string& name() const { return node_->name; }
  const Grade& target() const { return node_->grade; }
  const Term& body() const { return node_->children.front(); }
  const std::vector<Term>& children() const { return node_->children; }
  std::optional<Grade> ambient() const;

  std::size_t size() const { return node_->size; }
  // Leaves have height 0; coercions and non-nullary applications add one.
  std::size_t depth() const { return node_->depth; }
  std::size_t hash() const { return node_->hash; }

  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node {
    Kind kind;
    std::string name;
    Grade grade;
    bool has_grade = false;
    std::vector<Term> children;
    std::size_t size = 1;
    std::size_t depth = 0;
    std::size_t hash = 0;
  };
  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Term make(Node node);

  std::shared_ptr<const Node> node_;
};

struct TermHash {
  std::size_t operator()(const Term& t) const { return t.hash(); }
};

struct Equation {
  std::vector<std::string> context;
  Term lhs = Term::var("x");
  Term rhs = Term::var("x");
  Grade grade;
  // Optional family name; several instances may share one label.
  std::string label;
};

struct Theory {
  std::string name;
  Signature signature;
  std::vector<Equation> axioms;
  // Catalog normalizer tag ("exception", "state", "lift") or empty.
  std::string normalizer;

  const GradeMonoid& monoid() const { return signature.monoid(); }
};

Grade infer_grade(const Signature& sig, const Term& t);

// Builds an equation, checking the context covers both sides and the grades agree.
Equation make_equation(const Signature& sig, std::vector<std::string> context, Term lhs,
                       Term rhs, std::string label = {});

// Throws StructuralError describing the first ill-formed axiom.
void validate_theory(const Theory& theory);

using Binding = std::map<std::string, Term>;

/// s[binding] at grade infer_grade(s) (x) m', where m' is the common grade of
/// the bound terms. `binding_grade` supplies m' when the binding is empty and
/// must agree with it otherwise.
Term substitute(const Signature& sig, const Term& s, const Binding& binding,
                std::optional<Grade> binding_grade = std::nullopt);

Term normalize_coercions(const Signature& sig, const Term& t);

Term rename(const Term& t, const std::map<std::string, std::string>& sigma);

// Distinct variables in order of first occurrence.
std::vector<std::string> free_variables(const Term& t);

// Concrete syntax: `x`, `f(t1,...,tn)`, `c[g](t)`, `f()` or `f@g()`.
std::string format_term(const Signature& sig, const Term& t);
// Parses one term; throws ParseError (line 1, 1-based column) on failure.
Term parse_term(const Signature& sig, std::string_view text);
// Parses a term starting at `pos`, advancing it; `line` is used in errors.
Term parse_term_prefix(const Signature& sig, std::string_view text, std::size_t& pos,
                       std::size_t line = 1, std::size_t column_offset = 0);

}  // namespace gradalg
