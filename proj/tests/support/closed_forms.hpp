#pragma once

// Hand-written models and element sets used as independent oracles.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "gradalg/combine.hpp"
#include "gradalg/model.hpp"

namespace closed {

using gradalg::FiniteModel;
using gradalg::Grade;
using gradalg::GradeMonoid;
using gradalg::Operation;
using gradalg::Theory;

// { Er(e) | e in m \ {Ok} } u { Ok(x) | x in X, Ok in m }
inline std::vector<std::string> exception_elements(const GradeMonoid& gm, const Grade& m,
                                                   const std::vector<std::string>& xs) {
  std::vector<std::string> out;
  const auto& atoms = gm.atoms();
  bool ok = false;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(m.value & (std::uint64_t{1} << i))) continue;
    if (atoms[i] == "Ok") {
      ok = true;
    } else {
      out.push_back("Er(" + atoms[i] + ")");
    }
  }
  if (ok) {
    for (const auto& x : xs) out.push_back("Ok(" + x + ")");
  }
  return out;
}

inline std::size_t index_of(const std::vector<std::string>& v, const std::string& s) {
  return static_cast<std::size_t>(std::find(v.begin(), v.end(), s) - v.begin());
}

// Free exception model over X with inclusions as actions. When `collapse`
// is set every Er(e) is replaced by a single Err.
inline FiniteModel exception_model(const Theory& th, const std::vector<std::string>& xs,
                                   bool collapse = false) {
  const GradeMonoid& gm = th.monoid();
  auto elems = [&](const Grade& m) {
    auto e = exception_elements(gm, m, xs);
    if (!collapse) return e;
    std::vector<std::string> out;
    bool err = false;
    for (const auto& s : e) {
      if (s.rfind("Er(", 0) == 0) {
        err = true;
      } else {
        out.push_back(s);
      }
    }
    if (err) out.insert(out.begin(), "Err");
    return out;
  };
  return gradalg::build_model(
      th, gm.enumerate(0), collapse ? "collapsed" : "free", elems,
      [&](const Grade& a, const Grade& b, std::size_t i) {
        return index_of(elems(b), elems(a)[i]);
      },
      [&](const Operation& op, const Grade& stage, const std::vector<std::size_t>&) {
        auto target = elems(gm.tensor(op.grade, stage));
        return index_of(target, collapse ? "Err" : "Er(" + op.name.substr(6) + ")");
      });
}

// State over one location with values 0..V-1: A(bot) = X and A(top) = (V x X)^V.
struct StateFn {
  std::vector<std::pair<std::size_t, std::size_t>> map;  // v -> (v', x)
};

inline std::vector<StateFn> all_state_functions(std::size_t values, std::size_t outputs) {
  std::vector<StateFn> out;
  const std::size_t choices = values * outputs;
  std::size_t total = 1;
  for (std::size_t i = 0; i < values; ++i) total *= choices;
  for (std::size_t code = 0; code < total; ++code) {
    StateFn f;
    std::size_t c = code;
    for (std::size_t v = 0; v < values; ++v) {
      f.map.emplace_back((c % choices) % values, (c % choices) / values);
      c /= choices;
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline std::size_t state_code(const StateFn& f, std::size_t values, std::size_t outputs) {
  std::size_t code = 0;
  for (std::size_t v = f.map.size(); v-- > 0;) {
    code = code * values * outputs + f.map[v].first + values * f.map[v].second;
  }
  return code;
}

inline std::string state_label(const StateFn& f, const std::vector<std::string>& xs) {
  std::string out = "[";
  for (std::size_t v = 0; v < f.map.size(); ++v) {
    if (v) out += ",";
    out += std::to_string(v) + ">" + std::to_string(f.map[v].first) + xs[f.map[v].second];
  }
  return out + "]";
}

inline FiniteModel state_model(const Theory& th, std::size_t values,
                               const std::vector<std::string>& xs) {
  const GradeMonoid& gm = th.monoid();
  const Grade bot = gm.bottom();
  const std::size_t nx = xs.size();
  auto fns = all_state_functions(values, nx);
  auto as_fn = [&](const Grade& g, std::size_t i) {
    if (g == bot) {
      StateFn f;
      for (std::size_t v = 0; v < values; ++v) f.map.emplace_back(v, i);
      return f;
    }
    return fns[i];
  };
  return gradalg::build_model(
      th, {bot, gm.top()}, "state",
      [&](const Grade& g) {
        std::vector<std::string> labels;
        if (g == bot) return xs;
        for (const auto& f : fns) labels.push_back(state_label(f, xs));
        return labels;
      },
      [&](const Grade& a, const Grade&, std::size_t i) {
        return state_code(as_fn(a, i), values, nx);
      },
      [&](const Operation& op, const Grade& stage, const std::vector<std::size_t>& args) {
        StateFn r;
        if (op.name == "lookup") {
          for (std::size_t v = 0; v < values; ++v) r.map.push_back(as_fn(stage, args[v]).map[v]);
        } else {
          std::size_t w = std::stoul(op.name.substr(7));
          StateFn f = as_fn(stage, args[0]);
          for (std::size_t v = 0; v < values; ++v) r.map.push_back(f.map[w]);
        }
        return state_code(r, values, nx);
      });
}

// The truncated ring F2[t]/(t^3) as a module over itself.
inline FiniteModel ring_model() {
  Theory mod = gradalg::module_theory();
  const GradeMonoid& gm = mod.monoid();
  return gradalg::build_model(
      mod, {gm.nat(0), gm.nat(1), gm.nat(2)}, "ring",
      [](const Grade& g) {
        const char* gen[] = {"1", "t", "t2"};
        return std::vector<std::string>{"0", gen[g.value]};
      },
      [](const Grade&, const Grade&, std::size_t a) { return a; },
      [](const Operation& op, const Grade&, const std::vector<std::size_t>& xs) -> std::size_t {
        if (op.name == "add") return xs[0] ^ xs[1];
        if (op.name == "zero") return 0;
        return xs[0];  // neg, s_1 and multiplication by t send the generator to the generator
      });
}

}  // namespace closed
