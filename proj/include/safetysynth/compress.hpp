#pragma once

// Clause-set compression: drop clauses implied by the others, one incremental
// satisfiability query per clause.  Newly learned clauses often render older
// ones redundant, so learning loops run this periodically on the region CNF.

#include <algorithm>
#include <numeric>

#include "formula.hpp"
#include "solver.hpp"

namespace safetysynth {

struct CompressOptions {
  size_t budget = SIZE_MAX;   // max implication queries
  size_t keep_prefix = 0;     // clauses [0, keep_prefix) are never dropped
  // When set, a clause may only be dropped if it is implied by the *earlier*
  // surviving clauses.  This keeps every prefix of the result semantically
  // equal to the corresponding prefix of the input, which the region
  // verifier's per-clause certificate reconstruction relies on.
  bool prefix_implication_only = false;
};

// Returns a subset of f's clauses, in original order, semantically equivalent
// to f.  Each removed clause is implied by the kept ones (established by a
// solver query on the negated clause under per-clause activation literals).
inline Cnf compress(const Cnf& f, const CompressOptions& opts = {}) {
  const size_t n = f.size();
  if (n <= 1) return f;

  SolverSession s;
  int act_base = f.max_var();
  std::vector<Lit> act(n);
  for (size_t j = 0; j < n; ++j) {
    act[j] = act_base + 1 + static_cast<int>(j);
    std::vector<Lit> cl(f[j].lits());
    cl.push_back(-act[j]);
    s.add_clause_lits(cl);
  }

  std::vector<char> alive(n, 1);
  // longer clauses are more likely implied; try them first
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return f[a].size() > f[b].size(); });

  size_t queries = 0;
  for (size_t j : order) {
    if (j < opts.keep_prefix || f[j].empty()) continue;
    if (queries >= opts.budget) break;
    ++queries;
    std::vector<Lit> assume;
    for (size_t k = 0; k < n; ++k) {
      if (!alive[k] || k == j) continue;
      if (opts.prefix_implication_only && k > j) continue;
      assume.push_back(act[k]);
    }
    for (Lit l : f[j]) assume.push_back(-l);  // rest ∧ ¬clause
    if (s.solve_assume(Cube(std::move(assume)), {}).is_unsat()) alive[j] = 0;
  }

  std::vector<Clause> kept;
  kept.reserve(n);
  for (size_t j = 0; j < n; ++j)
    if (alive[j]) kept.push_back(f[j]);
  return Cnf(std::move(kept));
}

}  // namespace safetysynth
