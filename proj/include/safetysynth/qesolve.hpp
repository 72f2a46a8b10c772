#pragma once

// CEGAR engine for the quantified checks: ∃∀-shaped problems (plus one inner
// existential block) discharged with competing SAT sessions instead of a
// QBF solver.
//
// A problem is  Q1 v̄1. Q2 v̄2. ... ∃rest.  defs ∧ pos ∧ ⋀_j ¬neg_j  where
//   defs   is a functional block (AND gates evaluated deterministically
//          from the quantified variables),
//   pos    is a plain CNF that must hold, and
//   neg_j  are plain CNFs that must be violated.
//
// Every variable of pos/negs that is not quantified must be defs-defined.
// This discipline is what keeps the loop sound: refuting a candidate checks
// the matrix at a *determined* point, so one-sided negations only ever
// appear in satisfiability (existential) contexts.
//
// The recursion carries the candidate fixings of outer levels in a separate
// context that is asserted at every level and never negated; the matrix
// itself flips between (pos, negs) and (∅, [pos] ∨ negs) as the turn passes
// between the players.  Candidates for the outermost block come from a
// session that accumulates instantiations of the matrix at refuting
// opponent moves; refuting moves are shrunk with unsat cores first.
//
// Supported prefixes: up to ∃∀∃ (deeper games are expanded by callers).

#include <span>
#include <sstream>
#include <string>

#include "defs.hpp"
#include "formula.hpp"
#include "solver.hpp"

namespace safetysynth {

struct QBlock {
  enum class Q { exists, forall };
  Q q;
  std::vector<int> vars;
};

struct QProblem {
  std::vector<QBlock> prefix;  // outermost first, strictly alternating
  FunctionalDefs defs;
  Cnf pos;
  std::vector<Cnf> negs;
  std::string tag;  // provenance, for diagnostics
};

enum class QStatus { sat, unsat, budget_exceeded };

struct QResult {
  QStatus status = QStatus::unsat;
  Cube witness;  // over the outermost existential block (sat only)
  uint64_t rounds = 0;
};

struct QLimits {
  uint64_t max_rounds = 1'000'000;  // CEGAR refinement rounds, all levels
  int64_t conflict_budget = -1;     // per SAT call; negative = unlimited
  uint64_t seed = 0;
};

namespace qdetail {

struct Ctx {
  QLimits limits;
  uint64_t rounds = 0;
  int next_free = 0;
  const Cnf* defs_cnf = nullptr;

  int fresh() { return ++next_free; }
};

using Subst = std::unordered_map<int, GLit>;

inline bool instantiate_clause(const Clause& c, const Subst& map, std::vector<Lit>& out) {
  out.clear();
  for (Lit l : c) {
    auto it = map.find(lit_var(l));
    GLit g = it == map.end() ? glit(lit_var(l)) : it->second;
    if (!lit_pos(l)) g = gneg(g);
    if (g == 1) return false;  // clause satisfied
    if (g == 0) continue;      // literal falsified
    out.push_back(lit_of_glit(g));
  }
  return true;
}

inline void add_unit_cube(Cnf& f, const Cube& c) {
  for (Lit l : c) f.add_unit(l);
}

// semantics at one level, outermost block existential:
//   blocks[0] ∃, blocks[1] ∀, ... :  defs ∧ context ∧ pos ∧ ⋀ ¬neg_j
inline QResult solve_level(std::span<const std::vector<int>> blocks, const Cnf& context, const Cnf& pos,
                           const std::vector<Cnf>& negs, Ctx& ctx) {
  // model-side matrix, also the instantiation source
  Cnf ms;
  ms.append(*ctx.defs_cnf);
  ms.append(context);
  ms.append(pos);
  for (const Cnf& n : negs) ms.append(negate_cnf_with(n, ctx.next_free));

  if (blocks.size() == 1) {
    SolverSession s(ctx.limits.seed);
    s.set_conflict_budget(ctx.limits.conflict_budget);
    s.add_cnf(ms);
    auto r = s.solve(blocks[0]);
    if (r.status == SolveStatus::budget_exceeded) return {QStatus::budget_exceeded, {}, ctx.rounds};
    if (r.is_unsat()) return {QStatus::unsat, {}, ctx.rounds};
    return {QStatus::sat, r.model, ctx.rounds};
  }
  if (blocks.size() > 2 && !negs.empty())
    throw std::invalid_argument("∃∀∃ problems must carry their matrix in positive form");

  std::vector<int> matrix_vars = ms.vars();

  SolverSession candidates(ctx.limits.seed);
  candidates.set_conflict_budget(ctx.limits.conflict_budget);
  SolverSession models(ctx.limits.seed);
  models.set_conflict_budget(ctx.limits.conflict_budget);
  models.add_cnf(ms);

  const std::vector<int>& evars = blocks[0];
  const std::vector<int>& avars = blocks[1];

  while (true) {
    if (++ctx.rounds > ctx.limits.max_rounds) return {QStatus::budget_exceeded, {}, ctx.rounds};

    auto cand = candidates.solve(evars);
    if (cand.status == SolveStatus::budget_exceeded) return {QStatus::budget_exceeded, {}, ctx.rounds};
    if (cand.is_unsat()) return {QStatus::unsat, {}, ctx.rounds};
    Cube e = cand.model;

    // the opponent's refutation problem: ∃A (∀C):  ¬pos ∨ neg_1 ∨ ... ∨ neg_m
    QResult r;
    if (blocks.size() == 2) {
      // leaf refutation, one SAT call: selector-guarded disjunction
      SolverSession leaf(ctx.limits.seed);
      leaf.set_conflict_budget(ctx.limits.conflict_budget);
      leaf.add_cnf(*ctx.defs_cnf);
      leaf.add_cnf(context);
      for (Lit l : e) leaf.add_unit(l);
      std::vector<Lit> some_disjunct;
      if (!pos.empty()) {
        int u = ctx.fresh();
        some_disjunct.push_back(u);
        for (const Clause& c : negate_cnf_with(pos, ctx.next_free)) {
          std::vector<Lit> cl(c.lits());
          cl.push_back(-u);
          leaf.add_clause_lits(cl);
        }
      }
      for (const Cnf& n : negs) {
        int u = ctx.fresh();
        some_disjunct.push_back(u);
        for (const Clause& c : n) {
          std::vector<Lit> cl(c.lits());
          cl.push_back(-u);
          leaf.add_clause_lits(cl);
        }
      }
      if (some_disjunct.empty()) return {QStatus::sat, e, ctx.rounds};  // matrix is 'true'
      leaf.add_clause_lits(some_disjunct);
      auto lr = leaf.solve(avars);
      if (lr.status == SolveStatus::budget_exceeded) return {QStatus::budget_exceeded, {}, ctx.rounds};
      r.status = lr.is_sat() ? QStatus::sat : QStatus::unsat;
      r.witness = lr.model;
    } else {
      Cnf sub_context = context;
      add_unit_cube(sub_context, e);
      std::vector<Cnf> sub_negs{pos};
      r = solve_level(blocks.subspan(1), sub_context, Cnf{}, sub_negs, ctx);
    }
    if (r.status == QStatus::budget_exceeded) return r;
    if (r.status == QStatus::unsat) return {QStatus::sat, e, ctx.rounds};

    Cube a = r.witness;
    {
#ifndef NDEBUG
      std::vector<Lit> all(e.lits());
      for (Lit l : a) all.push_back(l);
      if (!models.solve_assume(Cube(std::move(all)), {}).is_unsat())
        throw std::logic_error("refutation witness does not refute the candidate (" +
                               std::to_string(blocks.size()) + " blocks)");
#endif
      a = shrink_core(models, a, e);
    }

    // refine: instantiate the matrix at the refuting move; a's literals
    // become constants, every other non-candidate variable a fresh copy
    Subst map;
    for (int v : avars) {
      if (a.contains(v)) map[v] = 1;
      else if (a.contains(-v)) map[v] = 0;
    }
    for (int v : matrix_vars) {
      if (map.count(v)) continue;
      bool is_candidate = false;
      for (int ev : evars) is_candidate = is_candidate || ev == v;
      if (!is_candidate) map[v] = glit(ctx.fresh());
    }
    std::vector<Lit> buf;
    for (const Clause& c : ms)
      if (instantiate_clause(c, map, buf)) candidates.add_clause_lits(buf);
  }
}

}  // namespace qdetail

// Validates and normalizes the prefix, then runs the recursive loop.
inline QResult solve_q(const QProblem& p, const QLimits& limits = {}) {
  std::vector<std::vector<int>> blocks;
  for (const QBlock& b : p.prefix) {
    bool is_exists = b.q == QBlock::Q::exists;
    if (blocks.empty() && !is_exists) blocks.push_back({});  // leading ∀
    if (is_exists != (blocks.size() % 2 == 0))
      throw std::invalid_argument("quantifier prefix must strictly alternate");
    blocks.push_back(b.vars);
  }
  if (blocks.empty()) blocks.push_back({});
  if (blocks.size() > 3)
    throw std::invalid_argument("quantifier prefixes deeper than ∃∀∃ are not supported");

  Cnf defs_cnf = p.defs.to_cnf();

  qdetail::Ctx ctx;
  ctx.limits = limits;
  ctx.defs_cnf = &defs_cnf;
  int max_var = std::max(p.pos.max_var(), defs_cnf.max_var());
  for (const Cnf& n : p.negs) max_var = std::max(max_var, n.max_var());
  for (const auto& b : blocks)
    for (int v : b) max_var = std::max(max_var, v);
  ctx.next_free = max_var;

  return qdetail::solve_level(blocks, Cnf{}, p.pos, p.negs, ctx);
}

// The ∃∀ face used throughout: E existential, A universal, optional inner
// existential block C, functional block D via defs.
struct EAProblem {
  std::vector<int> exist_vars;
  std::vector<int> univ_vars;
  std::vector<int> inner_exist_vars;
  FunctionalDefs defs;
  Cnf matrix;                     // positive part
  std::vector<Cnf> neg_matrices;  // parts required to be violated
  std::string tag;
};

inline QResult solve_ea(const EAProblem& p, const QLimits& limits = {}) {
  QProblem q;
  q.prefix.push_back({QBlock::Q::exists, p.exist_vars});
  if (!p.univ_vars.empty() || !p.inner_exist_vars.empty())
    q.prefix.push_back({QBlock::Q::forall, p.univ_vars});
  if (!p.inner_exist_vars.empty()) q.prefix.push_back({QBlock::Q::exists, p.inner_exist_vars});
  q.defs = p.defs;
  q.pos = p.matrix;
  q.negs = p.neg_matrices;
  q.tag = p.tag;
  return solve_q(q, limits);
}

// QDIMACS export: the adapter surface for external QBF solvers.  One-sided
// negation temporaries join the innermost existential block.
inline std::string write_qdimacs(const QProblem& p) {
  Cnf defs_cnf = p.defs.to_cnf();
  int next_free = std::max(p.pos.max_var(), defs_cnf.max_var());
  for (const Cnf& n : p.negs) next_free = std::max(next_free, n.max_var());
  for (const QBlock& b : p.prefix)
    for (int v : b.vars) next_free = std::max(next_free, v);

  Cnf matrix;
  matrix.append(defs_cnf);
  matrix.append(p.pos);
  for (const Cnf& n : p.negs) matrix.append(negate_cnf_with(n, next_free));

  int max_var = std::max(matrix.max_var(), next_free);
  std::vector<char> quantified(static_cast<size_t>(max_var) + 1, 0);
  for (const QBlock& b : p.prefix)
    for (int v : b.vars) quantified[v] = 1;

  std::ostringstream out;
  out << "p cnf " << max_var << " " << matrix.size() << "\n";
  for (const QBlock& b : p.prefix) {
    if (b.vars.empty()) continue;
    out << (b.q == QBlock::Q::exists ? "e" : "a");
    for (int v : b.vars) out << " " << v;
    out << " 0\n";
  }
  std::vector<int> inner;
  for (int v = 1; v <= max_var; ++v)
    if (!quantified[v]) inner.push_back(v);
  if (!inner.empty()) {
    out << "e";
    for (int v : inner) out << " " << v;
    out << " 0\n";
  }
  for (const Clause& c : matrix) {
    for (Lit l : c) out << l << " ";
    out << "0\n";
  }
  return out.str();
}

}  // namespace safetysynth
