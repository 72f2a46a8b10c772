#pragma once

// Shared test utilities: exhaustive enumeration oracles for small formulas
// and a deterministic RNG for randomized corpora.

#include <cstdint>
#include <set>
#include <vector>

#include "safetysynth/formula.hpp"

namespace sstest {

using namespace safetysynth;

struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed * 2654435769ULL + 1) {}
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  // uniform in [0, n)
  uint64_t below(uint64_t n) { return next() % n; }
  bool flip() { return next() & 1; }
};

// all assignments over the given variables satisfying f, as sets of true vars
inline std::set<std::set<int>> models_of(const Cnf& f, const std::vector<int>& vars) {
  std::set<std::set<int>> out;
  size_t n = vars.size();
  for (uint64_t bits = 0; bits < (1ULL << n); ++bits) {
    Assignment a;
    std::set<int> truevars;
    for (size_t i = 0; i < n; ++i) {
      bool v = (bits >> i) & 1;
      a[vars[i]] = v;
      if (v) truevars.insert(vars[i]);
    }
    if (eval_cnf(f, a)) out.insert(truevars);
  }
  return out;
}

// models of f projected onto proj_vars (f may mention more variables)
inline std::set<std::set<int>> models_projected(const Cnf& f, const std::vector<int>& all_vars,
                                                const std::vector<int>& proj_vars) {
  std::set<std::set<int>> out;
  size_t n = all_vars.size();
  for (uint64_t bits = 0; bits < (1ULL << n); ++bits) {
    Assignment a;
    for (size_t i = 0; i < n; ++i) a[all_vars[i]] = (bits >> i) & 1;
    if (!eval_cnf(f, a)) continue;
    std::set<int> truevars;
    for (int v : proj_vars)
      if (a.at(v)) truevars.insert(v);
    out.insert(truevars);
  }
  return out;
}

inline Cnf random_cnf(Rng& rng, int num_vars, int num_clauses, int max_len = 4) {
  Cnf f;
  for (int i = 0; i < num_clauses; ++i) {
    int len = 1 + static_cast<int>(rng.below(max_len));
    std::vector<Lit> lits;
    std::set<int> used;
    for (int k = 0; k < len; ++k) {
      int v = 1 + static_cast<int>(rng.below(num_vars));
      if (used.count(v)) continue;
      used.insert(v);
      lits.push_back(rng.flip() ? v : -v);
    }
    f.add(Clause(std::move(lits)));
  }
  return f;
}

}  // namespace sstest
