#include "gradalg/cli.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "CLI11.hpp"
#include "gradalg/combine.hpp"
#include "gradalg/dsl.hpp"
#include "gradalg/errors.hpp"
#include "gradalg/freemonad.hpp"
#include "gradalg/lawvere.hpp"

namespace gradalg {

namespace {

// Input problems that map to exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Theory load_theory(const std::string& path) {
  try {
    return parse_theory(read_file(path));
  } catch (const ParseError& e) {
    throw UsageError(path + ":" + e.what());
  }
}

Term read_term(const Theory& th, const std::string& text, const std::string& what) {
  try {
    return parse_term(th.signature, text);
  } catch (const ParseError& e) {
    throw UsageError(what + ": " + e.what());
  }
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string grade_text(const GradeMonoid& gm, const Grade& g) {
  std::string s = gm.format(g);
  if (gm.kind() == MonoidKind::PowersetJoin && !gm.atoms().empty()) {
    if (g == gm.top()) return s + " (top)";
    if (g == gm.bottom()) return s + " (bottom)";
  }
  return s;
}

// `op=term;op=term` with terms over x1..xn in the target signature.
TheoryMorphism read_morphism(const Theory& source, const Theory& target, const std::string& spec,
                             const std::string& what) {
  TheoryMorphism alpha{source, target, {}};
  for (const auto& item : split(spec, ';')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError(what + ": expected op=term, got '" + item + "'");
    std::string op = item.substr(0, eq);
    if (!source.signature.find(op)) throw UsageError(what + ": unknown source operation '" + op + "'");
    alpha.assignment.insert_or_assign(op, read_term(target, item.substr(eq + 1), what));
  }
  for (const auto& op : source.signature.operations()) {
    if (!alpha.assignment.count(op.name)) {
      throw UsageError(what + ": no image for '" + op.name + "'");
    }
  }
  return alpha;
}

LaxMonoidalMap read_map(const std::string& along, const GradeMonoid& source, const std::string& to,
                        const std::string& table) {
  auto target = [&]() {
    if (to.empty()) throw UsageError("--along " + along + " needs --to");
    try {
      return parse_monoid(to);
    } catch (const StructuralError& e) {
      throw UsageError(e.what());
    }
  };
  if (along == "identity") return LaxMonoidalMap::identity(source);
  if (along == "lift") return LaxMonoidalMap::from_trivial(target());
  if (along == "left") return LaxMonoidalMap::left_embedding(source, target());
  if (along == "right") return LaxMonoidalMap::right_embedding(target(), source);
  if (along == "powerset") return LaxMonoidalMap::product_to_powerset(source);
  if (along == "table") {
    GradeMonoid tgt = target();
    std::vector<std::pair<Grade, Grade>> rows;
    for (const auto& item : split(table, ';')) {
      if (item.empty()) continue;
      auto arrow = item.find("=>");
      if (arrow == std::string::npos) throw UsageError("--map: expected g=>g', got '" + item + "'");
      try {
        rows.emplace_back(source.parse(item.substr(0, arrow)), tgt.parse(item.substr(arrow + 2)));
      } catch (const StructuralError& e) {
        throw UsageError(std::string("--map: ") + e.what());
      }
    }
    return LaxMonoidalMap::from_table(source, tgt, std::move(rows));
  }
  throw UsageError("unknown --along '" + along + "'");
}

std::string set_text(const std::vector<std::string>& xs) {
  std::string out = "{";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? "," : "") + xs[i];
  return out + "}";
}

struct Options {
  std::string file;
  std::string file2;
  std::vector<std::string> models;
  std::string expr;
  std::string lhs;
  std::string rhs;
  std::size_t depth = 3;
  std::size_t universe_cap = 1'000'000;
  std::string grade;
  std::size_t vars = 1;
  std::vector<std::size_t> sizes{1, 2};
  std::size_t budget = 20'000;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  std::uint64_t nat_bound = 2;
  std::size_t arity_bound = 2;
  std::size_t combo_budget = 4096;
  std::size_t samples = 200;
  std::string left_prefix = "l_";
  std::string right_prefix = "r_";
  std::string along;
  std::string to;
  std::string map;
  std::string source;
  std::string alpha;
  std::string beta;
  std::string name;
  std::string locations = "1,2";
  std::string values = "0,1";
  std::string xs = "a";
  std::vector<std::string> subsets;
};

int cmd_check(const Options& o, std::ostream& out) {
  Theory th = load_theory(o.file);
  validate_theory(th);
  out << "theory " << th.name << ": " << th.signature.operations().size() << " operations, "
      << th.axioms.size() << " axioms\n";
  if (!th.normalizer.empty()) out << "normalizer " << th.normalizer << "\n";
  int status = kExitOk;
  for (const auto& path : o.models) {
    FiniteModel m = [&] {
      try {
        return parse_model(th, read_file(path));
      } catch (const ParseError& e) {
        throw UsageError(path + ":" + e.what());
      }
    }();
    std::vector<std::string> report = check_model(m);
    out << "model " << m.name() << ": " << (report.empty() ? "ok" : std::to_string(report.size()) + " problems") << "\n";
    for (const auto& line : report) out << "  " << line << "\n";
    if (!report.empty()) status = kExitCheckFailed;
  }
  return status;
}

int cmd_grade(const Options& o, std::ostream& out) {
  Theory th = load_theory(o.file);
  Term t = read_term(th, o.expr, "-e");
  Grade g = [&] {
    try {
      return infer_grade(th.signature, t);
    } catch (const StructuralError& e) {
      throw UsageError(std::string("-e: ") + e.what());
    }
  }();
  out << grade_text(th.monoid(), g) << "\n";
  return kExitOk;
}

int cmd_entail(const Options& o, std::ostream& out) {
  Theory th = load_theory(o.file);
  Term s = read_term(th, o.lhs, "-l");
  Term t = read_term(th, o.rhs, "-r");
  ClosureConfig config;
  config.depth = o.depth;
  config.universe_cap = o.universe_cap;
  config.nat_bound = o.nat_bound;
  Verdict v = entails(th, s, t, config);
  out << to_string(v) << "\n";
  return v == Verdict::Proved ? kExitOk : kExitCheckFailed;
}

int cmd_free(const Options& o, std::ostream& out) {
  Theory th = load_theory(o.file);
  Grade g;
  try {
    g = th.monoid().parse(o.grade);
  } catch (const StructuralError& e) {
    throw UsageError(std::string("--grade: ") + e.what());
  }
  DeciderConfig config;
  config.depth = o.depth;
  config.nat_bound = o.nat_bound;
  std::vector<std::string> vars = standard_variables(o.vars);
  FreeModel free(th, vars, {g}, config);
  const auto& elems = free.elements(g);
  out << elems.size() << " classes at " << th.monoid().format(g) << " over " << set_text(vars);
  if (!free.exact()) out << " (closure depth " << o.depth << ")";
  out << "\n";
  for (const auto& e : elems) out << format_term(th.signature, e) << "\n";
  return kExitOk;
}

int cmd_laws(const Options& o, std::ostream& out) {
  Theory th = load_theory(o.file);
  FreeMonadConfig mc;
  mc.decider.depth = o.depth;
  mc.decider.nat_bound = o.nat_bound;
  FreeMonad monad(th, default_support(th.monoid(), o.nat_bound), mc);
  LawConfig config;
  config.set_sizes = o.sizes;
  config.exhaustive_budget = o.budget;
  config.trials = o.trials;
  config.seed = o.seed;
  LawReport r = check_monad_laws(monad, config);
  for (const auto& line : r.failures) out << line << "\n";
  out << "laws of " << th.name << ": " << r.checked << " checks, " << r.failure_count
      << " failures, " << (r.exhaustive ? "exhaustive" : "sampled") << "\n";
  return r.ok() ? kExitOk : kExitCheckFailed;
}

int cmd_lawvere(const Options& o, std::ostream& out) {
  Theory th = load_theory(o.file);
  DeciderConfig dc;
  dc.depth = o.depth;
  dc.nat_bound = o.nat_bound;
  GradedLawvere law = th_of(th, o.arity_bound, default_support(th.monoid(), o.nat_bound), dc);
  LawvereConfig config;
  config.exhaustive_budget = o.budget;
  config.combo_budget = o.combo_budget;
  config.samples = o.samples;
  config.seed = o.seed;
  LawvereReport a = check_lawvere(law, config);
  LawvereReport b = roundtrip_check(law, config);
  for (const auto& line : a.lines) out << line << "\n";
  for (const auto& line : b.lines) out << line << "\n";
  auto summary = [&](const char* what, const LawvereReport& r) {
    out << what << " " << law.name() << ": " << r.checked << " checks, " << r.failure_count
        << " failures, " << r.sampled << " sampled\n";
  };
  summary("check_lawvere", a);
  summary("roundtrip", b);
  return a.ok() && b.ok() ? kExitOk : kExitCheckFailed;
}

int cmd_sum(const Options& o, std::ostream& out) {
  SumResult s = sum(load_theory(o.file), load_theory(o.file2), o.left_prefix, o.right_prefix);
  out << print_theory(s.theory);
  return kExitOk;
}

int cmd_tensor(const Options& o, std::ostream& out) {
  out << print_theory(tensor(load_theory(o.file), load_theory(o.file2), o.left_prefix,
                             o.right_prefix));
  return kExitOk;
}

int cmd_extend(const Options& o, std::ostream& out, std::ostream& err) {
  Theory th = load_theory(o.file);
  LaxMonoidalMap g = read_map(o.along, th.monoid(), o.to, o.map);
  std::vector<std::string> problems = g.validate(o.nat_bound);
  if (!problems.empty()) {
    for (const auto& p : problems) err << "not lax monoidal: " << p << "\n";
    return kExitCheckFailed;
  }
  out << print_theory(extend(g, th));
  return kExitOk;
}

int cmd_coeq(const Options& o, std::ostream& out, std::ostream& err) {
  Theory target = load_theory(o.file);
  Theory source = load_theory(o.source);
  TheoryMorphism alpha = read_morphism(source, target, o.alpha, "--alpha");
  TheoryMorphism beta = read_morphism(source, target, o.beta, "--beta");
  bool bad = false;
  for (const auto* m : {&alpha, &beta}) {
    for (const auto& p : check_morphism(*m)) {
      err << (m == &alpha ? "--alpha: " : "--beta: ") << p << "\n";
      bad = true;
    }
  }
  if (bad) return kExitCheckFailed;
  out << print_theory(coequalize(alpha, beta));
  return kExitOk;
}

int cmd_oracle_state(const Options& o, std::ostream& out) {
  std::vector<std::string> locs = split(o.locations, ',');
  std::vector<std::string> vals = split(o.values, ',');
  std::vector<std::string> xs = split(o.xs, ',');
  std::vector<std::vector<std::string>> subsets;
  if (o.subsets.empty()) {
    if (locs.size() > 16) throw UsageError("too many locations to list every subset");
    for (std::size_t mask = 0; mask < (std::size_t{1} << locs.size()); ++mask) {
      std::vector<std::string> s;
      for (std::size_t i = 0; i < locs.size(); ++i) {
        if (mask & (std::size_t{1} << i)) s.push_back(locs[i]);
      }
      subsets.push_back(s);
    }
  } else {
    for (const auto& s : o.subsets) subsets.push_back(split(s, ','));
  }
  for (const auto& s : subsets) {
    for (const auto& l : s) {
      if (std::find(locs.begin(), locs.end(), l) == locs.end()) {
        throw UsageError("--subset: unknown location '" + l + "'");
      }
    }
    out << set_text(s) << " " << lfold_state_oracle(locs, vals, xs, s).size() << "\n";
  }
  return kExitOk;
}

int cmd_catalog(const Options& o, std::ostream& out) {
  std::vector<Theory> all = catalog();
  if (o.name.empty()) {
    for (const auto& th : all) out << th.name << "\n";
    return kExitOk;
  }
  for (const auto& th : all) {
    if (th.name == o.name) {
      out << print_theory(th);
      return kExitOk;
    }
  }
  throw UsageError("no catalog theory named '" + o.name + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graded algebraic theories: checks, free models and combinators", "gat"};
  app.require_subcommand(1);
  Options o;
  std::function<int(std::ostream&, std::ostream&)> action;
  auto on = [&](CLI::App* sub, std::function<int(std::ostream&, std::ostream&)> f) {
    sub->callback([&action, f] { action = f; });
  };
  auto depth = [&](CLI::App* sub) {
    sub->add_option("--depth", o.depth, "closure depth")->capture_default_str();
    sub->add_option("--nat-bound", o.nat_bound, "largest nat grade considered")
        ->capture_default_str();
  };

  auto* check = app.add_subcommand("check", "well-formedness and model checks");
  check->add_option("theory", o.file)->required();
  check->add_option("--model", o.models, "model file (repeatable)");
  on(check, [&](std::ostream& os, std::ostream&) { return cmd_check(o, os); });

  auto* grade = app.add_subcommand("grade", "infer the grade of a term");
  grade->add_option("theory", o.file)->required();
  grade->add_option("-e,--expr", o.expr, "term")->required();
  on(grade, [&](std::ostream& os, std::ostream&) { return cmd_grade(o, os); });

  auto* entail = app.add_subcommand("entail", "bounded entailment; exit 1 when not proved");
  entail->add_option("theory", o.file)->required();
  entail->add_option("-l,--lhs", o.lhs)->required();
  entail->add_option("-r,--rhs", o.rhs)->required();
  entail->add_option("--cap", o.universe_cap, "universe size cap")->capture_default_str();
  depth(entail);
  on(entail, [&](std::ostream& os, std::ostream&) { return cmd_entail(o, os); });

  auto* free = app.add_subcommand("free", "list free-model classes");
  free->add_option("theory", o.file)->required();
  free->add_option("--grade", o.grade)->required();
  free->add_option("--vars", o.vars)->capture_default_str();
  depth(free);
  on(free, [&](std::ostream& os, std::ostream&) { return cmd_free(o, os); });

  auto* laws = app.add_subcommand("laws", "graded monad laws of the free monad");
  laws->add_option("theory", o.file)->required();
  laws->add_option("--sizes", o.sizes, "base set sizes")->delimiter(',')->capture_default_str();
  laws->add_option("--budget", o.budget, "exhaustive budget per grade triple")
      ->capture_default_str();
  laws->add_option("--trials", o.trials)->capture_default_str();
  laws->add_option("--seed", o.seed)->capture_default_str();
  depth(laws);
  on(laws, [&](std::ostream& os, std::ostream&) { return cmd_laws(o, os); });

  auto* lawvere = app.add_subcommand("lawvere", "graded Lawvere theory checks");
  lawvere->add_option("theory", o.file)->required();
  lawvere->add_option("--arity-bound", o.arity_bound)->capture_default_str();
  lawvere->add_option("--budget", o.budget, "exhaustive budget per cell")
      ->default_val(100'000);
  lawvere->add_option("--combo-budget", o.combo_budget)->capture_default_str();
  lawvere->add_option("--samples", o.samples)->capture_default_str();
  lawvere->add_option("--seed", o.seed)->capture_default_str();
  depth(lawvere);
  on(lawvere, [&](std::ostream& os, std::ostream&) { return cmd_lawvere(o, os); });

  for (const char* name : {"sum", "tensor"}) {
    auto* sub = app.add_subcommand(name, std::string(name) + " of two theories");
    sub->add_option("left", o.file)->required();
    sub->add_option("right", o.file2)->required();
    sub->add_option("--left-prefix", o.left_prefix)->capture_default_str();
    sub->add_option("--right-prefix", o.right_prefix)->capture_default_str();
    if (std::string(name) == "sum") {
      on(sub, [&](std::ostream& os, std::ostream&) { return cmd_sum(o, os); });
    } else {
      on(sub, [&](std::ostream& os, std::ostream&) { return cmd_tensor(o, os); });
    }
  }

  auto* ext = app.add_subcommand("extend", "extend a theory along a lax monoidal map");
  ext->add_option("theory", o.file)->required();
  ext->add_option("--along", o.along, "identity, lift, left, right, powerset or table")
      ->required()
      ->check(CLI::IsMember({"identity", "lift", "left", "right", "powerset", "table"}));
  ext->add_option("--to", o.to, "target or other factor monoid");
  ext->add_option("--map", o.map, "table rows g=>g' separated by ';'");
  ext->add_option("--nat-bound", o.nat_bound, "validation bound for nat")->capture_default_str();
  on(ext, [&](std::ostream& os, std::ostream& es) { return cmd_extend(o, os, es); });

  auto* coeq = app.add_subcommand("coeq", "coequalizer of two morphisms into a theory");
  coeq->add_option("theory", o.file, "target theory")->required();
  coeq->add_option("--source", o.source)->required();
  coeq->add_option("--alpha", o.alpha, "op=term;... over x1..xn")->required();
  coeq->add_option("--beta", o.beta, "op=term;... over x1..xn")->required();
  on(coeq, [&](std::ostream& os, std::ostream& es) { return cmd_coeq(o, os, es); });

  auto* oracle = app.add_subcommand("oracle-state", "count L-fold state normal forms");
  oracle->add_option("--locations", o.locations)->capture_default_str();
  oracle->add_option("--values", o.values)->capture_default_str();
  oracle->add_option("--vars", o.xs)->capture_default_str();
  oracle->add_option("--subset", o.subsets, "locations read and written (repeatable)");
  on(oracle, [&](std::ostream& os, std::ostream&) { return cmd_oracle_state(o, os); });

  auto* cat = app.add_subcommand("catalog", "list or print catalog theories");
  cat->add_option("name", o.name);
  on(cat, [&](std::ostream& os, std::ostream&) { return cmd_catalog(o, os); });

  std::vector<std::string> argv_store{"gat"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  std::ostringstream report;
  try {
    int status = action(report, err);
    out << report.str();
    return status;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ResourceError& e) {
    out << report.str();
    err << "resource limit: " << e.what() << "\n";
    return kExitCheckFailed;
  } catch (const SupportError& e) {
    out << report.str();
    err << "support: " << e.what() << "\n";
    return kExitCheckFailed;
  }
}

}  // namespace gradalg
