#include "gradalg/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include "gradalg/errors.hpp"
#include "gradalg/logic.hpp"

namespace gradalg {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '*' ||
         c == '\'' || c == '.';
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Cursor over one line; columns are 1-based.
struct Cursor {
  std::string_view text;
  std::size_t pos = 0;
  std::size_t line = 1;

  void skip() {
    while (pos < text.size() && is_space(text[pos])) ++pos;
  }
  bool done() {
    skip();
    return pos >= text.size();
  }
  std::size_t column() const { return pos + 1; }
  ParseError error(const std::string& msg) const { return ParseError(line, column(), msg); }
  ParseError error_at(std::size_t at, const std::string& msg) const {
    return ParseError(line, at + 1, msg);
  }

  std::string word() {
    skip();
    std::size_t end = pos;
    while (end < text.size() && is_word_char(text[end])) ++end;
    std::string w(text.substr(pos, end - pos));
    pos = end;
    return w;
  }
  // Next whitespace-delimited token.
  std::string token() {
    skip();
    std::size_t end = pos;
    while (end < text.size() && !is_space(text[end])) ++end;
    std::string w(text.substr(pos, end - pos));
    pos = end;
    return w;
  }
  bool accept(char c) {
    skip();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  bool accept(std::string_view s) {
    skip();
    if (text.substr(pos, s.size()) == s) {
      pos += s.size();
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw error(std::string("expected '") + c + "'");
  }
  std::string rest() {
    skip();
    std::string r(text.substr(pos));
    while (!r.empty() && is_space(r.back())) r.pop_back();
    pos = text.size();
    return r;
  }
  void finish() {
    if (!done()) throw error("unexpected '" + std::string(text.substr(pos)) + "'");
  }

  Grade grade(const GradeMonoid& gm) {
    skip();
    std::size_t start = pos;
    try {
      return gm.parse_prefix(text, pos);
    } catch (const StructuralError& e) {
      throw error_at(start, e.what());
    }
  }

  GradeMonoid monoid() {
    skip();
    std::size_t start = pos;
    std::string w = word();
    if (w == "trivial") return GradeMonoid::trivial();
    if (w == "nat") return GradeMonoid::discrete_nat();
    if (w == "powerset" || w == "exception") {
      expect('{');
      std::vector<std::string> atoms;
      if (!accept('}')) {
        do {
          std::size_t at = (skip(), pos);
          std::string a = word();
          if (a.empty()) throw error_at(at, "expected atom in " + w + " declaration");
          atoms.push_back(a);
        } while (accept(','));
        expect('}');
      }
      try {
        return w == "powerset" ? GradeMonoid::powerset(atoms) : GradeMonoid::exception(atoms);
      } catch (const StructuralError& e) {
        throw error_at(start, e.what());
      }
    }
    if (w == "product") {
      expect('(');
      GradeMonoid l = monoid();
      expect(',');
      GradeMonoid r = monoid();
      expect(')');
      return GradeMonoid::product(std::move(l), std::move(r));
    }
    throw error_at(start, "unknown monoid '" + (w.empty() ? std::string(text.substr(start, 1)) : w) +
                              "'");
  }
};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view l = text.substr(start, end - start);
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    std::size_t hash = l.find('#');
    if (hash != std::string_view::npos) l = l.substr(0, hash);
    out.push_back(l);
    start = end + 1;
  }
  return out;
}

}  // namespace

GradeMonoid parse_monoid(std::string_view text) {
  Cursor c{text, 0, 1};
  try {
    GradeMonoid gm = c.monoid();
    c.finish();
    return gm;
  } catch (const ParseError& e) {
    throw StructuralError("malformed monoid '" + std::string(text) + "': " + e.what());
  }
}

Theory parse_theory(std::string_view text) {
  Theory th;
  bool named = false;
  bool has_monoid = false;
  std::size_t lineno = 0;
  std::size_t normalizer_line = 0;
  for (std::string_view line : split_lines(text)) {
    ++lineno;
    Cursor c{line, 0, lineno};
    if (c.done()) continue;
    std::size_t kw_at = c.pos;
    std::string kw = c.word();
    if (kw == "theory") {
      if (named) throw c.error_at(kw_at, "duplicate theory declaration");
      th.name = c.rest();
      if (th.name.empty()) throw c.error("expected theory name");
      named = true;
    } else if (kw == "monoid") {
      if (has_monoid) throw c.error_at(kw_at, "duplicate monoid declaration");
      GradeMonoid gm = c.monoid();
      c.finish();
      th.signature = Signature(std::move(gm));
      has_monoid = true;
    } else if (kw == "normalizer") {
      th.normalizer = c.word();
      if (th.normalizer.empty()) throw c.error("expected normalizer tag");
      normalizer_line = lineno;
      c.finish();
    } else if (kw == "op" || kw == "eq") {
      if (!has_monoid) throw c.error_at(kw_at, "'" + kw + "' before the monoid declaration");
      if (kw == "op") {
        std::size_t name_at = (c.skip(), c.pos);
        std::string name = c.word();
        if (name.empty()) throw c.error("expected operation name");
        c.expect(':');
        std::size_t ar_at = (c.skip(), c.pos);
        std::string ar = c.word();
        if (ar.empty() || !std::all_of(ar.begin(), ar.end(),
                                       [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
          throw c.error_at(ar_at, "expected arity, got '" + ar + "'");
        }
        c.expect('@');
        Grade g = c.grade(th.monoid());
        c.finish();
        try {
          th.signature.add({name, std::stoul(ar), g});
        } catch (const StructuralError& e) {
          throw c.error_at(name_at, e.what());
        }
      } else {
        std::string label;
        std::size_t save = c.pos;
        std::string w = c.word();
        if (w != "forall") {
          if (w.empty() || !c.accept(':')) {
            c.pos = save;
            throw c.error("expected 'forall' or a label");
          }
          label = w;
          std::size_t at = (c.skip(), c.pos);
          if (c.word() != "forall") throw c.error_at(at, "expected 'forall'");
        }
        std::vector<std::string> ctx;
        while (true) {
          c.skip();
          if (c.accept(':')) break;
          std::size_t at = c.pos;
          std::string v = c.word();
          if (v.empty()) throw c.error_at(at, "expected variable or ':'");
          ctx.push_back(v);
        }
        c.skip();
        Term lhs = parse_term_prefix(th.signature, line, c.pos, lineno);
        if (!c.accept('=')) throw c.error("expected '='");
        c.skip();
        Term rhs = parse_term_prefix(th.signature, line, c.pos, lineno);
        c.finish();
        try {
          th.axioms.push_back(make_equation(th.signature, ctx, lhs, rhs, label));
        } catch (const StructuralError& e) {
          throw c.error_at(kw_at, e.what());
        }
      }
    } else {
      throw c.error_at(kw_at, "unknown declaration '" + kw + "'");
    }
  }
  if (!named) throw ParseError(lineno, 1, "missing 'theory' declaration");
  if (!has_monoid) throw ParseError(lineno, 1, "missing 'monoid' declaration");
  if (!th.normalizer.empty()) {
    try {
      (void)make_normalizer(th);
    } catch (const StructuralError& e) {
      throw ParseError(normalizer_line, 1, std::string("normalizer: ") + e.what());
    }
  }
  return th;
}

std::string print_theory(const Theory& theory) {
  std::ostringstream out;
  const GradeMonoid& gm = theory.monoid();
  out << "theory " << theory.name << "\n";
  out << "monoid " << gm.describe() << "\n";
  if (!theory.normalizer.empty()) out << "normalizer " << theory.normalizer << "\n";
  for (const auto& op : theory.signature.operations()) {
    out << "op " << op.name << " : " << op.arity << " @ " << gm.format(op.grade) << "\n";
  }
  for (const auto& ax : theory.axioms) {
    out << "eq ";
    if (!ax.label.empty()) out << ax.label << ": ";
    out << "forall";
    for (const auto& v : ax.context) out << " " << v;
    out << " : " << format_term(theory.signature, ax.lhs) << " = "
        << format_term(theory.signature, ax.rhs) << "\n";
  }
  return out.str();
}

FiniteModel parse_model(const Theory& theory, std::string_view text) {
  const GradeMonoid& gm = theory.monoid();
  std::string name;
  std::optional<FiniteModel> model;
  std::size_t lineno = 0;
  auto labels = [](Cursor& c) {
    std::vector<std::string> out;
    while (!c.done()) out.push_back(c.token());
    return out;
  };
  auto need_model = [&](Cursor& c, std::size_t at) -> FiniteModel& {
    if (!model) throw c.error_at(at, "declaration before 'support'");
    return *model;
  };
  auto lookup = [&](Cursor& c, std::size_t gi, const std::string& label, std::size_t at) {
    try {
      return model->element(gi, label);
    } catch (const std::exception&) {
      throw c.error_at(at, "unknown element '" + label + "' of " + gm.format(model->support()[gi]));
    }
  };
  auto grade_index = [&](Cursor& c, const Grade& g, std::size_t at) {
    auto gi = model->find_grade(g);
    if (!gi) throw c.error_at(at, "grade " + gm.format(g) + " is not in the support");
    return *gi;
  };
  // Result labels with their columns.
  auto table = [&](Cursor& c, std::size_t gi, std::size_t expected) {
    std::vector<std::size_t> out;
    while (!c.done()) {
      std::size_t at = c.pos;
      out.push_back(lookup(c, gi, c.token(), at));
    }
    if (out.size() != expected) {
      throw c.error("expected " + std::to_string(expected) + " entries, got " +
                    std::to_string(out.size()));
    }
    return out;
  };

  for (std::string_view line : split_lines(text)) {
    ++lineno;
    Cursor c{line, 0, lineno};
    if (c.done()) continue;
    std::size_t kw_at = c.pos;
    std::string kw = c.word();
    if (kw == "model") {
      name = c.rest();
      if (name.empty()) throw c.error("expected model name");
    } else if (kw == "support") {
      if (model) throw c.error_at(kw_at, "duplicate support declaration");
      std::vector<Grade> support;
      while (!c.done()) support.push_back(c.grade(gm));
      if (support.empty()) throw c.error("empty support");
      try {
        model.emplace(theory, support, name.empty() ? "model" : name);
      } catch (const std::exception& e) {
        throw c.error_at(kw_at, e.what());
      }
    } else if (kw == "carrier") {
      FiniteModel& m = need_model(c, kw_at);
      std::size_t at = (c.skip(), c.pos);
      Grade g = c.grade(gm);
      grade_index(c, g, at);
      c.expect('=');
      m.set_carrier(g, labels(c));
    } else if (kw == "action") {
      FiniteModel& m = need_model(c, kw_at);
      std::size_t at = (c.skip(), c.pos);
      Grade from = c.grade(gm);
      std::size_t fi = grade_index(c, from, at);
      if (!c.accept("<=")) throw c.error("expected '<='");
      at = (c.skip(), c.pos);
      Grade to = c.grade(gm);
      std::size_t ti = grade_index(c, to, at);
      if (!gm.leq(from, to)) throw c.error_at(at, gm.format(from) + " is not below " + gm.format(to));
      c.expect('=');
      m.set_action(from, to, table(c, ti, m.carrier_size(fi)));
    } else if (kw == "op") {
      FiniteModel& m = need_model(c, kw_at);
      std::size_t at = (c.skip(), c.pos);
      std::string op = c.word();
      const Operation* o = theory.signature.find(op);
      if (!o) throw c.error_at(at, "unknown operation '" + op + "'");
      c.expect('@');
      at = (c.skip(), c.pos);
      Grade stage = c.grade(gm);
      std::size_t si = grade_index(c, stage, at);
      std::size_t ri = grade_index(c, gm.tensor(o->grade, stage), at);
      c.expect('=');
      std::size_t expected;
      try {
        expected = m.tuple_count(si, o->arity);
      } catch (const std::exception& e) {
        throw c.error_at(kw_at, e.what());
      }
      m.set_operation(op, stage, table(c, ri, expected));
    } else {
      throw c.error_at(kw_at, "unknown declaration '" + kw + "'");
    }
  }
  if (!model) throw ParseError(lineno, 1, "missing 'support' declaration");
  return *model;
}

std::string print_model(const FiniteModel& model) {
  const Theory& th = model.theory();
  const GradeMonoid& gm = th.monoid();
  const auto& support = model.support();
  std::ostringstream out;
  out << "model " << model.name() << "\n";
  out << "support";
  for (const auto& g : support) out << " " << gm.format(g);
  out << "\n";
  for (std::size_t gi = 0; gi < support.size(); ++gi) {
    out << "carrier " << gm.format(support[gi]) << " =";
    for (const auto& l : model.carrier(gi)) out << " " << l;
    out << "\n";
  }
  for (std::size_t a = 0; a < support.size(); ++a) {
    for (std::size_t b = 0; b < support.size(); ++b) {
      if (a == b) continue;
      const auto* t = model.action(a, b);
      if (!t) continue;
      out << "action " << gm.format(support[a]) << " <= " << gm.format(support[b]) << " =";
      for (auto v : *t) out << " " << model.carrier(b)[v];
      out << "\n";
    }
  }
  const auto& ops = th.signature.operations();
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t s : model.stages(i)) {
      const auto* t = model.operation(i, s);
      if (!t) continue;
      std::size_t ri = model.grade_index(gm.tensor(ops[i].grade, support[s]));
      out << "op " << ops[i].name << " @ " << gm.format(support[s]) << " =";
      for (auto v : *t) out << " " << model.carrier(ri)[v];
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace gradalg
