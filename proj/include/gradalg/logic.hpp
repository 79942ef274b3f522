#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gradalg/syntax.hpp"

namespace gradalg {

struct ClosureConfig {
  std::size_t depth = 3;
  // Maximum number of terms in the universe; exceeding it throws ResourceError.
  std::size_t universe_cap = 1'000'000;
  // DiscreteNat components range over 0..nat_bound.
  std::uint64_t nat_bound = 2;
  // Extra terms (with their subterms) added to the universe regardless of depth.
  std::vector<Term> seeds;
  bool substitution_rule = true;
};

/// Bounded universe of terms over a context, partitioned by derivable equality.
class ClosureUniverse {
 public:
  const Theory& theory() const { return theory_; }
  const std::vector<std::string>& context() const { return context_; }
  std::size_t depth() const { return depth_; }

  std::size_t size() const { return terms_.size(); }
  const Term& term(std::size_t id) const { return terms_[id]; }
  const Grade& grade(std::size_t id) const { return grades_[grade_ids_[id]]; }
  std::optional<std::size_t> find(const Term& t) const;

  std::size_t class_count() const { return members_.size(); }
  std::size_t class_of(std::size_t id) const { return class_[id]; }
  const std::vector<std::size_t>& members(std::size_t cls) const { return members_[cls]; }
  // Shortlex least member (size, then printed form).
  const Term& representative(std::size_t cls) const { return terms_[rep_[cls]]; }
  const Grade& class_grade(std::size_t cls) const { return grade(rep_[cls]); }
  std::vector<std::size_t> classes_of_grade(const Grade& g) const;

  // Throws StructuralError when either term is outside the universe.
  bool equivalent(const Term& s, const Term& t) const;

 private:
  friend class ClosureBuilder;
  ClosureUniverse() = default;

  Theory theory_;
  std::vector<std::string> context_;
  std::size_t depth_ = 0;
  std::vector<Term> terms_;
  std::vector<Grade> grades_;
  std::vector<std::uint32_t> grade_ids_;
  std::unordered_map<Term, std::size_t, TermHash> index_;
  std::vector<std::size_t> class_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<std::size_t> rep_;
};

ClosureUniverse derive_closure(const Theory& theory, std::vector<std::string> context,
                               std::size_t depth);
ClosureUniverse derive_closure(const Theory& theory, std::vector<std::string> context,
                               const ClosureConfig& config);

enum class Verdict { Proved, Unknown };

std::string to_string(Verdict v);

/// Semi-decision of T |- s = t by the bounded closure over the free variables
/// of s and t (s and t are always included in the universe).
Verdict entails(const Theory& theory, const Term& s, const Term& t, std::size_t depth);
Verdict entails(const Theory& theory, const Term& s, const Term& t, const ClosureConfig& config);

/// Reuses one closure per context; queries whose terms are outside the
/// cached universe fall back to a fresh seeded closure.
class EntailmentOracle {
 public:
  EntailmentOracle(Theory theory, ClosureConfig config);
  Verdict entails(const Term& s, const Term& t);
  const Theory& theory() const { return theory_; }

 private:
  Theory theory_;
  ClosureConfig config_;
  std::map<std::vector<std::string>, std::shared_ptr<ClosureUniverse>> cache_;
};

/// Rewrites terms of a catalog theory to canonical representatives.
class Normalizer {
 public:
  explicit Normalizer(Theory theory) : theory_(std::move(theory)) {}
  virtual ~Normalizer() = default;

  const Theory& theory() const { return theory_; }
  virtual std::string kind() const = 0;
  virtual Term normalize(const Term& t) const = 0;
  // Canonical elements of the free model over `vars` at grade g, in a fixed order.
  virtual std::vector<Term> elements(const Grade& g,
                                     const std::vector<std::string>& vars) const = 0;
  // Size of elements(g, vars) and its idx-th entry, without materializing the list
  // where the normal forms allow it.
  virtual std::size_t count(const Grade& g, std::size_t nvars) const;
  virtual Term element_at(const Grade& g, const std::vector<std::string>& vars,
                          std::size_t idx) const;

 private:
  Theory theory_;
};

// Normalizer selected by theory.normalizer; nullptr when the tag is empty.
// Throws StructuralError if the theory does not have the expected shape.
std::unique_ptr<Normalizer> make_normalizer(const Theory& theory);

Term normalize(const Normalizer& nz, const Term& t);

struct DeciderConfig {
  std::size_t depth = 3;
  std::size_t universe_cap = 400'000;
  std::uint64_t nat_bound = 2;
};

/// Canonical representatives of provable-equality classes over a fixed
/// variable set: exact through a normalizer, otherwise the closure
/// representative at the configured depth.
class Decider {
 public:
  Decider(const Theory& theory, std::vector<std::string> vars, DeciderConfig config = {});

  const Theory& theory() const { return theory_; }
  const std::vector<std::string>& variables() const { return vars_; }
  bool exact() const { return normalizer_ != nullptr; }

  Term canonical(const Term& t) const;
  std::vector<Term> elements(const Grade& g) const;
  std::size_t count(const Grade& g) const;
  Term element_at(const Grade& g, std::size_t idx) const;
  // Makes sure the closure (if any) contains these terms, rebuilding once.
  void prepare(const std::vector<Term>& terms) const;

 private:
  void rebuild(std::vector<Term> extra) const;

  Theory theory_;
  std::vector<std::string> vars_;
  DeciderConfig config_;
  std::shared_ptr<const Normalizer> normalizer_;
  mutable std::shared_ptr<ClosureUniverse> closure_;
  mutable std::vector<Term> seeds_;
};

}  // namespace gradalg
