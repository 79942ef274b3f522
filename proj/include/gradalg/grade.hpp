#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace gradalg {

enum class MonoidKind { Trivial, DiscreteNat, PowersetJoin, Exception, Product };

/// Canonical element of a GradeMonoid.
///
/// `value` holds the natural number for DiscreteNat and the atom bitmask for
/// the set kinds (bit i is the i-th atom of the owning monoid). Products keep
/// their two components in `parts`. Canonical forms are unique, so structural
/// equality is grade equality.
struct Grade {
  MonoidKind kind = MonoidKind::Trivial;
  std::uint64_t value = 0;
  std::vector<Grade> parts;

  friend bool operator==(const Grade&, const Grade&) = default;
  friend std::strong_ordering operator<=>(const Grade& a, const Grade& b);
};

std::size_t hash_value(const Grade& g);

struct GradeHash {
  std::size_t operator()(const Grade& g) const { return hash_value(g); }
};

/// A preordered monoid (thin strict monoidal category) used as grading.
class GradeMonoid {
 public:
  // The trivial monoid.
  GradeMonoid() = default;

  static constexpr std::size_t kMaxAtoms = 62;
  static constexpr std::string_view kOk = "Ok";

  static GradeMonoid trivial();
  static GradeMonoid discrete_nat();
  static GradeMonoid powerset(std::vector<std::string> locations);
  static GradeMonoid exception(std::vector<std::string> exceptions);
  static GradeMonoid product(GradeMonoid left, GradeMonoid right);

  MonoidKind kind() const { return kind_; }
  // Set kinds only. For Exception the last atom is always "Ok".
  const std::vector<std::string>& atoms() const { return atoms_; }
  const GradeMonoid& left() const;
  const GradeMonoid& right() const;
  bool is_finite() const;

  Grade unit() const;
  Grade tensor(const Grade& a, const Grade& b) const;
  bool leq(const Grade& a, const Grade& b) const;
  bool contains(const Grade& g) const;

  /// All elements of finite kinds; 0..bound for DiscreteNat.
  std::vector<Grade> enumerate(std::uint64_t bound) const;

  Grade nat(std::uint64_t n) const;
  Grade set(const std::vector<std::string>& members) const;
  Grade pair(Grade a, Grade b) const;
  // Set kinds: every atom / no atom.
  Grade top() const;
  Grade bottom() const;

  std::string format(const Grade& g) const;
  Grade parse(std::string_view literal) const;
  // Parses one literal starting at `pos` and advances it; throws StructuralError
  // naming the literal on failure.
  Grade parse_prefix(std::string_view text, std::size_t& pos) const;

  /// Declaration text, e.g. `exception {e1,e2}` or `product(powerset {*}, nat)`.
  std::string describe() const;

  friend bool operator==(const GradeMonoid& a, const GradeMonoid& b);

 private:
  void require(const Grade& g) const;
  std::uint64_t atom_mask() const;
  std::uint64_t ok_bit() const;

  MonoidKind kind_ = MonoidKind::Trivial;
  std::vector<std::string> atoms_;
  std::shared_ptr<const GradeMonoid> left_;
  std::shared_ptr<const GradeMonoid> right_;
};

/// A lax monoidal functor between thin monoidal categories: a monotone map G
/// with I' <= G(I) and G(a) (x) G(b) <= G(a (x) b).
class LaxMonoidalMap {
 public:
  LaxMonoidalMap(GradeMonoid source, GradeMonoid target,
                 std::function<Grade(const Grade&)> map, std::string name);

  static LaxMonoidalMap identity(const GradeMonoid& m);
  // m |-> (m, I) and m |-> (I, m).
  static LaxMonoidalMap left_embedding(const GradeMonoid& m1, const GradeMonoid& m2);
  static LaxMonoidalMap right_embedding(const GradeMonoid& m1, const GradeMonoid& m2);
  // The unique strict map from the trivial monoid.
  static LaxMonoidalMap from_trivial(const GradeMonoid& target);
  // Product of two powersets onto the powerset of the disjoint union of
  // locations. Single-atom factors are renamed to their position ("1", "2").
  static LaxMonoidalMap product_to_powerset(const GradeMonoid& product);
  // Finite source given by an explicit table.
  static LaxMonoidalMap from_table(const GradeMonoid& source, const GradeMonoid& target,
                                   std::vector<std::pair<Grade, Grade>> table,
                                   std::string name = "table");

  const GradeMonoid& source() const { return source_; }
  const GradeMonoid& target() const { return target_; }
  const std::string& name() const { return name_; }
  Grade operator()(const Grade& g) const;

  /// Violations of monotonicity and the lax unit/tensor inequalities over the
  /// enumerated source elements; empty iff valid.
  std::vector<std::string> validate(std::uint64_t bound = 4) const;

 private:
  GradeMonoid source_;
  GradeMonoid target_;
  std::function<Grade(const Grade&)> map_;
  std::string name_;
};

}  // namespace gradalg
