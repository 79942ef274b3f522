#pragma once

// Golden CLI cases: tests/golden/cases.txt lists invocations and exit
// statuses, tests/golden/expected/<name>.out the exact stdout.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gradalg/cli.hpp"

namespace golden {

struct Case {
  std::string name;
  std::vector<std::string> args;
  int exit = 0;
};

struct Outcome {
  std::string name;
  bool ok = false;
  std::string detail;
};

// Whitespace splitting with double quotes.
inline std::vector<std::string> split_args(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  bool have = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      have = true;
    } else if (!quoted && (c == ' ' || c == '\t')) {
      if (have) out.push_back(cur);
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (quoted) throw std::runtime_error("unterminated quote in: " + line);
  if (have) out.push_back(cur);
  return out;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::vector<Case> load_cases(const std::filesystem::path& file) {
  std::vector<Case> cases;
  std::istringstream in(slurp(file));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos) throw std::runtime_error("bad golden line: " + line);
    std::string key = line.substr(0, colon);
    std::string value = line.substr(colon + 1);
    if (!value.empty() && value[0] == ' ') value.erase(0, 1);
    if (key == "name") {
      cases.push_back({value, {}, 0});
    } else if (cases.empty()) {
      throw std::runtime_error("golden field before name: " + line);
    } else if (key == "args") {
      cases.back().args = split_args(value);
    } else if (key == "exit") {
      cases.back().exit = std::stoi(value);
    } else {
      throw std::runtime_error("unknown golden field: " + key);
    }
  }
  return cases;
}

// Runs every case with the working directory set to `theories`. With
// `update`, rewrites the expected files instead of comparing.
inline std::vector<Outcome> run_all(const std::filesystem::path& golden_dir,
                                    const std::filesystem::path& theories, bool update = false) {
  std::vector<Case> cases = load_cases(golden_dir / "cases.txt");
  std::vector<Outcome> results;
  auto saved = std::filesystem::current_path();
  std::filesystem::current_path(theories);
  for (const auto& c : cases) {
    std::ostringstream out;
    std::ostringstream err;
    int status = gradalg::run(c.args, out, err);
    auto expected_path = golden_dir / "expected" / (c.name + ".out");
    Outcome r{c.name, true, {}};
    if (update) {
      std::ofstream(expected_path, std::ios::binary) << out.str();
    } else if (!std::filesystem::exists(expected_path)) {
      r = {c.name, false, "missing " + expected_path.string()};
    } else if (slurp(expected_path) != out.str()) {
      r = {c.name, false, "stdout differs:\n" + out.str()};
    }
    if (status != c.exit) {
      r.ok = false;
      r.detail += "exit " + std::to_string(status) + ", expected " + std::to_string(c.exit) +
                  "; stderr: " + err.str();
    }
    results.push_back(r);
  }
  std::filesystem::current_path(saved);
  return results;
}

}  // namespace golden
