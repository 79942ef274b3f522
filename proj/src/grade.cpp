#include "gradalg/grade.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "gradalg/errors.hpp"

namespace gradalg {

std::strong_ordering operator<=>(const Grade& a, const Grade& b) {
  if (auto c = a.kind <=> b.kind; c != 0) return c;
  if (auto c = a.value <=> b.value; c != 0) return c;
  return std::lexicographical_compare_three_way(a.parts.begin(), a.parts.end(),
                                                b.parts.begin(), b.parts.end());
}

std::size_t hash_value(const Grade& g) {
  std::size_t h = static_cast<std::size_t>(g.kind) * 0x9e3779b97f4a7c15ULL;
  h ^= std::hash<std::uint64_t>{}(g.value) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  for (const auto& p : g.parts) {
    h ^= hash_value(p) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

namespace {

bool is_atom_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '*' ||
         c == '\'' || c == '.';
}

void skip_ws(std::string_view text, std::size_t& pos) {
  while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
}

std::string literal_excerpt(std::string_view text, std::size_t pos) {
  std::size_t end = pos;
  int depth = 0;
  while (end < text.size()) {
    char c = text[end];
    if (c == '{' || c == '(' || c == '[') ++depth;
    if (c == '}' || c == ')' || c == ']') {
      if (depth == 0) break;
      --depth;
      if (depth == 0) {
        ++end;
        break;
      }
    }
    if (depth == 0 && (std::isspace(static_cast<unsigned char>(c)) || c == ',')) break;
    ++end;
  }
  if (end == pos && end < text.size()) ++end;
  return std::string(text.substr(pos, end - pos));
}

const char* kind_name(MonoidKind k) {
  switch (k) {
    case MonoidKind::Trivial: return "trivial";
    case MonoidKind::DiscreteNat: return "nat";
    case MonoidKind::PowersetJoin: return "powerset";
    case MonoidKind::Exception: return "exception";
    case MonoidKind::Product: return "product";
  }
  return "?";
}

}  // namespace

GradeMonoid GradeMonoid::trivial() { return GradeMonoid{}; }

GradeMonoid GradeMonoid::discrete_nat() {
  GradeMonoid m;
  m.kind_ = MonoidKind::DiscreteNat;
  return m;
}

GradeMonoid GradeMonoid::powerset(std::vector<std::string> locations) {
  std::set<std::string> seen;
  for (const auto& a : locations) {
    if (a.empty() || !std::all_of(a.begin(), a.end(), is_atom_char)) {
      throw StructuralError("invalid location name '" + a + "'");
    }
    if (!seen.insert(a).second) throw StructuralError("duplicate location '" + a + "'");
  }
  if (locations.size() > kMaxAtoms) throw StructuralError("too many locations");
  GradeMonoid m;
  m.kind_ = MonoidKind::PowersetJoin;
  m.atoms_ = std::move(locations);
  return m;
}

GradeMonoid GradeMonoid::exception(std::vector<std::string> exceptions) {
  std::set<std::string> seen;
  for (const auto& a : exceptions) {
    if (a.empty() || !std::all_of(a.begin(), a.end(), is_atom_char)) {
      throw StructuralError("invalid exception name '" + a + "'");
    }
    if (a == kOk) throw StructuralError("'Ok' is reserved in exception monoids");
    if (!seen.insert(a).second) throw StructuralError("duplicate exception '" + a + "'");
  }
  if (exceptions.size() + 1 > kMaxAtoms) throw StructuralError("too many exceptions");
  GradeMonoid m;
  m.kind_ = MonoidKind::Exception;
  m.atoms_ = std::move(exceptions);
  m.atoms_.emplace_back(kOk);
  return m;
}

GradeMonoid GradeMonoid::product(GradeMonoid left, GradeMonoid right) {
  GradeMonoid m;
  m.kind_ = MonoidKind::Product;
  m.left_ = std::make_shared<const GradeMonoid>(std::move(left));
  m.right_ = std::make_shared<const GradeMonoid>(std::move(right));
  return m;
}

const GradeMonoid& GradeMonoid::left() const {
  if (kind_ != MonoidKind::Product) throw StructuralError("not a product monoid");
  return *left_;
}

const GradeMonoid& GradeMonoid::right() const {
  if (kind_ != MonoidKind::Product) throw StructuralError("not a product monoid");
  return *right_;
}

bool GradeMonoid::is_finite() const {
  switch (kind_) {
    case MonoidKind::DiscreteNat: return false;
    case MonoidKind::Product: return left_->is_finite() && right_->is_finite();
    default: return true;
  }
}

std::uint64_t GradeMonoid::atom_mask() const {
  return atoms_.empty() ? 0 : ((std::uint64_t{1} << atoms_.size()) - 1);
}

std::uint64_t GradeMonoid::ok_bit() const { return std::uint64_t{1} << (atoms_.size() - 1); }

bool GradeMonoid::contains(const Grade& g) const {
  if (g.kind != kind_) return false;
  switch (kind_) {
    case MonoidKind::Trivial: return g.value == 0 && g.parts.empty();
    case MonoidKind::DiscreteNat: return g.parts.empty();
    case MonoidKind::PowersetJoin: return g.parts.empty() && (g.value & ~atom_mask()) == 0;
    case MonoidKind::Exception:
      return g.parts.empty() && g.value != 0 && (g.value & ~atom_mask()) == 0;
    case MonoidKind::Product:
      return g.value == 0 && g.parts.size() == 2 && left_->contains(g.parts[0]) &&
             right_->contains(g.parts[1]);
  }
  return false;
}

void GradeMonoid::require(const Grade& g) const {
  if (!contains(g)) {
    throw StructuralError("grade does not belong to monoid " + describe());
  }
}

Grade GradeMonoid::unit() const {
  switch (kind_) {
    case MonoidKind::Trivial: return Grade{};
    case MonoidKind::DiscreteNat: return Grade{MonoidKind::DiscreteNat, 0, {}};
    case MonoidKind::PowersetJoin: return Grade{MonoidKind::PowersetJoin, 0, {}};
    case MonoidKind::Exception: return Grade{MonoidKind::Exception, ok_bit(), {}};
    case MonoidKind::Product:
      return Grade{MonoidKind::Product, 0, {left_->unit(), right_->unit()}};
  }
  return Grade{};
}

Grade GradeMonoid::tensor(const Grade& a, const Grade& b) const {
  require(a);
  require(b);
  switch (kind_) {
    case MonoidKind::Trivial: return a;
    case MonoidKind::DiscreteNat: return Grade{kind_, a.value + b.value, {}};
    case MonoidKind::PowersetJoin: return Grade{kind_, a.value | b.value, {}};
    case MonoidKind::Exception:
      // (m \ {Ok}) u m' when Ok in m, otherwise m.
      if (a.value & ok_bit()) return Grade{kind_, (a.value & ~ok_bit()) | b.value, {}};
      return a;
    case MonoidKind::Product:
      return Grade{kind_, 0,
                   {left_->tensor(a.parts[0], b.parts[0]),
                    right_->tensor(a.parts[1], b.parts[1])}};
  }
  return a;
}

bool GradeMonoid::leq(const Grade& a, const Grade& b) const {
  require(a);
  require(b);
  switch (kind_) {
    case MonoidKind::Trivial: return true;
    case MonoidKind::DiscreteNat: return a.value == b.value;
    case MonoidKind::PowersetJoin:
    case MonoidKind::Exception: return (a.value & ~b.value) == 0;
    case MonoidKind::Product:
      return left_->leq(a.parts[0], b.parts[0]) && right_->leq(a.parts[1], b.parts[1]);
  }
  return false;
}

std::vector<Grade> GradeMonoid::enumerate(std::uint64_t bound) const {
  std::vector<Grade> out;
  switch (kind_) {
    case MonoidKind::Trivial: out.push_back(Grade{}); break;
    case MonoidKind::DiscreteNat:
      for (std::uint64_t n = 0; n <= bound; ++n) out.push_back(Grade{kind_, n, {}});
      break;
    case MonoidKind::PowersetJoin:
      for (std::uint64_t m = 0; m <= atom_mask(); ++m) out.push_back(Grade{kind_, m, {}});
      break;
    case MonoidKind::Exception:
      for (std::uint64_t m = 1; m <= atom_mask(); ++m) out.push_back(Grade{kind_, m, {}});
      break;
    case MonoidKind::Product:
      for (const auto& l : left_->enumerate(bound)) {
        for (const auto& r : right_->enumerate(bound)) {
          out.push_back(Grade{kind_, 0, {l, r}});
        }
      }
      break;
  }
  return out;
}

Grade GradeMonoid::nat(std::uint64_t n) const {
  if (kind_ != MonoidKind::DiscreteNat) throw StructuralError("nat grade in " + describe());
  return Grade{kind_, n, {}};
}

Grade GradeMonoid::set(const std::vector<std::string>& members) const {
  if (kind_ != MonoidKind::PowersetJoin && kind_ != MonoidKind::Exception) {
    throw StructuralError("set grade in " + describe());
  }
  std::uint64_t mask = 0;
  for (const auto& a : members) {
    auto it = std::find(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end()) {
      throw StructuralError("unknown atom '" + a + "' in monoid " + describe());
    }
    mask |= std::uint64_t{1} << static_cast<std::size_t>(it - atoms_.begin());
  }
  Grade g{kind_, mask, {}};
  require(g);
  return g;
}

Grade GradeMonoid::pair(Grade a, Grade b) const {
  Grade g{MonoidKind::Product, 0, {std::move(a), std::move(b)}};
  require(g);
  return g;
}

Grade GradeMonoid::top() const {
  if (kind_ != MonoidKind::PowersetJoin && kind_ != MonoidKind::Exception) {
    throw StructuralError("top grade in " + describe());
  }
  return Grade{kind_, atom_mask(), {}};
}

Grade GradeMonoid::bottom() const {
  if (kind_ != MonoidKind::PowersetJoin) throw StructuralError("bottom grade in " + describe());
  return Grade{kind_, 0, {}};
}

std::string GradeMonoid::format(const Grade& g) const {
  require(g);
  switch (kind_) {
    case MonoidKind::Trivial: return "I";
    case MonoidKind::DiscreteNat: return "nat:" + std::to_string(g.value);
    case MonoidKind::PowersetJoin:
    case MonoidKind::Exception: {
      std::string out = "{";
      bool first = true;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (g.value & (std::uint64_t{1} << i)) {
          if (!first) out += ',';
          out += atoms_[i];
          first = false;
        }
      }
      return out + "}";
    }
    case MonoidKind::Product:
      return "(" + left_->format(g.parts[0]) + "," + right_->format(g.parts[1]) + ")";
  }
  return "?";
}

Grade GradeMonoid::parse(std::string_view literal) const {
  std::size_t pos = 0;
  Grade g = parse_prefix(literal, pos);
  skip_ws(literal, pos);
  if (pos != literal.size()) {
    throw StructuralError("malformed grade literal '" + std::string(literal) + "'");
  }
  return g;
}

Grade GradeMonoid::parse_prefix(std::string_view text, std::size_t& pos) const {
  skip_ws(text, pos);
  const std::size_t start = pos;
  auto fail = [&](const std::string& why) -> StructuralError {
    return StructuralError("malformed grade literal '" + literal_excerpt(text, start) +
                           "' for monoid " + describe() + ": " + why);
  };
  auto word = [&]() {
    std::size_t end = pos;
    while (end < text.size() && is_atom_char(text[end])) ++end;
    return text.substr(pos, end - pos);
  };

  std::string_view w = word();
  if (w == "I") {
    pos += 1;
    return unit();
  }
  switch (kind_) {
    case MonoidKind::Trivial: throw fail("expected I");
    case MonoidKind::DiscreteNat: {
      if (text.substr(pos, 4) == "nat:") pos += 4;
      std::size_t end = pos;
      while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
      if (end == pos || (end < text.size() && is_atom_char(text[end]))) {
        throw fail("expected nat:K");
      }
      std::uint64_t n = std::stoull(std::string(text.substr(pos, end - pos)));
      pos = end;
      return nat(n);
    }
    case MonoidKind::PowersetJoin:
    case MonoidKind::Exception: {
      if (kind_ == MonoidKind::PowersetJoin && (w == "top" || w == "bot")) {
        pos += w.size();
        return w == "top" ? top() : bottom();
      }
      if (pos >= text.size() || text[pos] != '{') throw fail("expected '{'");
      ++pos;
      std::vector<std::string> members;
      skip_ws(text, pos);
      if (pos < text.size() && text[pos] == '}') {
        ++pos;
      } else {
        while (true) {
          skip_ws(text, pos);
          std::string_view a = word();
          if (a.empty()) throw fail("expected atom");
          members.emplace_back(a);
          pos += a.size();
          skip_ws(text, pos);
          if (pos < text.size() && text[pos] == ',') {
            ++pos;
            continue;
          }
          if (pos < text.size() && text[pos] == '}') {
            ++pos;
            break;
          }
          throw fail("expected ',' or '}'");
        }
      }
      for (const auto& a : members) {
        if (std::find(atoms_.begin(), atoms_.end(), a) == atoms_.end()) {
          throw fail("unknown atom '" + a + "'");
        }
      }
      if (kind_ == MonoidKind::Exception && members.empty()) {
        throw fail("exception grades are nonempty");
      }
      return set(members);
    }
    case MonoidKind::Product: {
      if (pos >= text.size() || text[pos] != '(') throw fail("expected '('");
      ++pos;
      Grade l = left_->parse_prefix(text, pos);
      skip_ws(text, pos);
      if (pos >= text.size() || text[pos] != ',') throw fail("expected ','");
      ++pos;
      Grade r = right_->parse_prefix(text, pos);
      skip_ws(text, pos);
      if (pos >= text.size() || text[pos] != ')') throw fail("expected ')'");
      ++pos;
      return pair(std::move(l), std::move(r));
    }
  }
  throw fail("unsupported");
}

std::string GradeMonoid::describe() const {
  switch (kind_) {
    case MonoidKind::Trivial:
    case MonoidKind::DiscreteNat: return kind_name(kind_);
    case MonoidKind::PowersetJoin:
    case MonoidKind::Exception: {
      std::string out = std::string(kind_name(kind_)) + " {";
      std::size_t n = kind_ == MonoidKind::Exception ? atoms_.size() - 1 : atoms_.size();
      for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ',';
        out += atoms_[i];
      }
      return out + "}";
    }
    case MonoidKind::Product:
      return "product(" + left_->describe() + ", " + right_->describe() + ")";
  }
  return "?";
}

bool operator==(const GradeMonoid& a, const GradeMonoid& b) {
  if (a.kind_ != b.kind_ || a.atoms_ != b.atoms_) return false;
  if (a.kind_ == MonoidKind::Product) {
    return *a.left_ == *b.left_ && *a.right_ == *b.right_;
  }
  return true;
}

LaxMonoidalMap::LaxMonoidalMap(GradeMonoid source, GradeMonoid target,
                               std::function<Grade(const Grade&)> map, std::string name)
    : source_(std::move(source)),
      target_(std::move(target)),
      map_(std::move(map)),
      name_(std::move(name)) {}

LaxMonoidalMap LaxMonoidalMap::identity(const GradeMonoid& m) {
  return LaxMonoidalMap(m, m, [](const Grade& g) { return g; }, "identity");
}

LaxMonoidalMap LaxMonoidalMap::left_embedding(const GradeMonoid& m1, const GradeMonoid& m2) {
  GradeMonoid prod = GradeMonoid::product(m1, m2);
  Grade unit2 = m2.unit();
  return LaxMonoidalMap(
      m1, prod, [unit2](const Grade& g) { return Grade{MonoidKind::Product, 0, {g, unit2}}; },
      "left");
}

LaxMonoidalMap LaxMonoidalMap::right_embedding(const GradeMonoid& m1, const GradeMonoid& m2) {
  GradeMonoid prod = GradeMonoid::product(m1, m2);
  Grade unit1 = m1.unit();
  return LaxMonoidalMap(
      m2, prod, [unit1](const Grade& g) { return Grade{MonoidKind::Product, 0, {unit1, g}}; },
      "right");
}

LaxMonoidalMap LaxMonoidalMap::from_trivial(const GradeMonoid& target) {
  Grade unit = target.unit();
  return LaxMonoidalMap(GradeMonoid::trivial(), target,
                        [unit](const Grade&) { return unit; }, "unit");
}

LaxMonoidalMap LaxMonoidalMap::product_to_powerset(const GradeMonoid& product) {
  if (product.kind() != MonoidKind::Product ||
      product.left().kind() != MonoidKind::PowersetJoin ||
      product.right().kind() != MonoidKind::PowersetJoin) {
    throw StructuralError("product_to_powerset needs a product of two powersets");
  }
  std::vector<std::string> atoms;
  auto add = [&](const GradeMonoid& factor, std::size_t index) {
    for (const auto& a : factor.atoms()) {
      atoms.push_back(factor.atoms().size() == 1 ? std::to_string(index)
                                                 : std::to_string(index) + "." + a);
    }
  };
  add(product.left(), 1);
  add(product.right(), 2);
  const std::size_t shift = product.left().atoms().size();
  GradeMonoid target = GradeMonoid::powerset(std::move(atoms));
  return LaxMonoidalMap(
      product, target,
      [shift](const Grade& g) {
        return Grade{MonoidKind::PowersetJoin, g.parts[0].value | (g.parts[1].value << shift), {}};
      },
      "join");
}

LaxMonoidalMap LaxMonoidalMap::from_table(const GradeMonoid& source, const GradeMonoid& target,
                                          std::vector<std::pair<Grade, Grade>> table,
                                          std::string name) {
  for (const auto& [from, to] : table) {
    if (!source.contains(from) || !target.contains(to)) {
      throw StructuralError("map table entry outside its monoids");
    }
  }
  if (source.is_finite()) {
    for (const auto& g : source.enumerate(0)) {
      bool found = std::any_of(table.begin(), table.end(),
                               [&](const auto& e) { return e.first == g; });
      if (!found) {
        throw StructuralError("map table has no entry for " + source.format(g));
      }
    }
  }
  return LaxMonoidalMap(
      source, target,
      [table = std::move(table)](const Grade& g) {
        for (const auto& [from, to] : table) {
          if (from == g) return to;
        }
        throw StructuralError("map table has no entry for grade");
      },
      std::move(name));
}

Grade LaxMonoidalMap::operator()(const Grade& g) const {
  if (!source_.contains(g)) throw StructuralError("grade outside the source of " + name_);
  Grade out = map_(g);
  if (!target_.contains(out)) throw StructuralError(name_ + " produced a grade outside its target");
  return out;
}

std::vector<std::string> LaxMonoidalMap::validate(std::uint64_t bound) const {
  std::vector<std::string> out;
  const auto elems = source_.enumerate(bound);
  std::vector<Grade> images;
  images.reserve(elems.size());
  for (const auto& g : elems) {
    try {
      images.push_back((*this)(g));
    } catch (const StructuralError& e) {
      out.push_back(std::string("map: ") + e.what());
      return out;
    }
  }
  if (!target_.leq(target_.unit(), (*this)(source_.unit()))) {
    out.push_back("lax unit: I' <= G(I) fails");
  }
  for (std::size_t i = 0; i < elems.size(); ++i) {
    for (std::size_t j = 0; j < elems.size(); ++j) {
      const auto& a = elems[i];
      const auto& b = elems[j];
      if (source_.leq(a, b) && !target_.leq(images[i], images[j])) {
        out.push_back("monotone: " + source_.format(a) + " <= " + source_.format(b));
      }
      Grade ab = source_.tensor(a, b);
      if (source_.kind() == MonoidKind::DiscreteNat && ab.value > bound) continue;
      if (!target_.leq(target_.tensor(images[i], images[j]), (*this)(ab))) {
        out.push_back("lax tensor: G(" + source_.format(a) + ") (x) G(" + source_.format(b) +
                      ") <= G(" + source_.format(ab) + ")");
      }
    }
  }
  return out;
}

}  // namespace gradalg
