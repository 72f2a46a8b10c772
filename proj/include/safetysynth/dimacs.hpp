#pragma once

// DIMACS CNF reader/writer.  Variable-group metadata is carried in comment
// lines of the form "c group <id> <State|Input|...>"; arbitrary extra comment
// lines (e.g. the latch/var mapping of region files) are preserved.

#include <optional>
#include <sstream>
#include <string>

#include "formula.hpp"

namespace safetysynth {

struct DimacsFile {
  Cnf formula;
  int declared_vars = 0;
  std::vector<std::pair<int, VarGroup>> groups;
  std::vector<std::string> comments;  // other comment lines, without "c "
};

inline std::optional<VarGroup> var_group_from_string(const std::string& s) {
  for (VarGroup g : {VarGroup::state, VarGroup::input, VarGroup::control, VarGroup::next_state,
                     VarGroup::temp, VarGroup::prev_state, VarGroup::prev_input,
                     VarGroup::prev_control, VarGroup::template_param})
    if (s == to_string(g)) return g;
  return std::nullopt;
}

inline std::string write_dimacs(const Cnf& f, const std::vector<std::pair<int, VarGroup>>& groups = {},
                                const std::vector<std::string>& comments = {}) {
  std::ostringstream out;
  for (const std::string& c : comments) out << "c " << c << "\n";
  for (auto [var, g] : groups) out << "c group " << var << " " << to_string(g) << "\n";
  out << "p cnf " << f.max_var() << " " << f.size() << "\n";
  for (const Clause& c : f) {
    for (Lit l : c) out << l << " ";
    out << "0\n";
  }
  return out.str();
}

inline DimacsFile read_dimacs(const std::string& text) {
  DimacsFile result;
  std::istringstream in(text);
  std::string line;
  int expected_clauses = -1;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == 'c') {
      std::istringstream ls(line);
      std::string c, kind;
      ls >> c >> kind;
      if (kind == "group") {
        int var;
        std::string name;
        if (ls >> var >> name) {
          auto g = var_group_from_string(name);
          if (!g) throw std::runtime_error("dimacs line " + std::to_string(line_no) + ": unknown group " + name);
          result.groups.emplace_back(var, *g);
          continue;
        }
      }
      result.comments.push_back(line.size() > 2 ? line.substr(2) : "");
      continue;
    }
    if (line[0] == 'p') {
      std::istringstream ls(line);
      std::string p, cnf;
      ls >> p >> cnf >> result.declared_vars >> expected_clauses;
      if (cnf != "cnf")
        throw std::runtime_error("dimacs line " + std::to_string(line_no) + ": expected 'p cnf'");
      continue;
    }
    std::istringstream ls(line);
    std::vector<Lit> lits;
    Lit l;
    bool terminated = false;
    while (ls >> l) {
      if (l == 0) { terminated = true; break; }
      lits.push_back(l);
    }
    if (!terminated)
      throw std::runtime_error("dimacs line " + std::to_string(line_no) + ": clause not zero-terminated");
    result.formula.add(Clause(std::move(lits)));
  }
  if (expected_clauses >= 0 && static_cast<int>(result.formula.size()) != expected_clauses)
    throw std::runtime_error("dimacs: header declares " + std::to_string(expected_clauses) + " clauses, found " +
                             std::to_string(result.formula.size()));
  return result;
}

}  // namespace safetysynth
