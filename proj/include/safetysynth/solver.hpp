#pragma once

// Bundled incremental SAT solver: conflict-driven clause learning with
// two-watched-literal propagation, VSIDS-style decision heap, phase saving,
// Luby restarts and assumption handling with unsatisfiable-core extraction.
// Self-contained so that the whole test suite runs hermetically.
//
// A session is add-only: clauses accumulate, solving under assumptions gives
// incrementality.  Cores returned by solve_assume are the raw
// assumption-failure set; shrink_core below is the explicit minimization step.

#include <cassert>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "formula.hpp"

namespace safetysynth {

enum class SolveStatus { sat, unsat, budget_exceeded };

struct SolveOutcome {
  SolveStatus status = SolveStatus::unsat;
  Cube model;  // over the requested model vars (sat only)
  Cube core;   // sub-cube of the assumptions (unsat only)

  bool is_sat() const { return status == SolveStatus::sat; }
  bool is_unsat() const { return status == SolveStatus::unsat; }
};

struct SolverStats {
  uint64_t queries = 0;
  uint64_t conflicts = 0;
  uint64_t decisions = 0;
  uint64_t propagations = 0;
  uint64_t clauses_added = 0;
  uint64_t restarts = 0;
};

class SolverSession {
  // literal -> index: 2v for +v, 2v+1 for -v
  static size_t lidx(Lit l) { return 2 * static_cast<size_t>(lit_var(l)) + (l < 0 ? 1 : 0); }

  enum : int8_t { kUndef = -1, kFalse = 0, kTrue = 1 };

  struct ClauseRec {
    std::vector<Lit> lits;
    double activity = 0.0;
    bool learnt = false;
    bool deleted = false;
  };

  struct Watcher {
    int cref;
    Lit blocker;
  };

 public:
  explicit SolverSession(uint64_t seed = 0) : rng_(seed * 6364136223846793005ULL + 1442695040888963407ULL) {}

  void set_conflict_budget(int64_t budget) { conflict_budget_ = budget; }  // negative = unlimited
  const SolverStats& stats() const { return stats_; }

  void close() { open_ = false; }
  bool is_open() const { return open_; }

  void add_clause(const Clause& c) { add_clause_lits(c.lits()); }

  void add_cnf(const Cnf& f) {
    for (const Clause& c : f) add_clause(c);
  }

  void add_unit(Lit l) { add_clause_lits(std::vector<Lit>{l}); }

  void add_clause_lits(const std::vector<Lit>& lits) {
    if (!open_) throw std::logic_error("add_clause on consumed session");
    ++stats_.clauses_added;
    if (!ok_) return;
    cancel_until(0);
    std::vector<Lit> c;
    c.reserve(lits.size());
    for (Lit l : lits) {
      ensure_var(lit_var(l));
      if (value(l) == kTrue && level_[lit_var(l)] == 0) return;          // satisfied at root
      if (value(l) == kFalse && level_[lit_var(l)] == 0) continue;       // falsified at root
      bool dup = false;
      for (Lit x : c) {
        if (x == l) dup = true;
        if (x == -l) return;  // tautology
      }
      if (!dup) c.push_back(l);
    }
    if (c.empty()) {
      ok_ = false;
      return;
    }
    if (c.size() == 1) {
      if (!enqueue(c[0], -1)) { ok_ = false; return; }
      if (propagate() != -1) ok_ = false;
      return;
    }
    attach_new(std::move(c), false);
  }

  // Solves theory ∧ assumptions.  On sat, the model covers model_vars (vars
  // never mentioned in any clause default to false).  On unsat, core is the
  // subset of assumptions used to derive the contradiction.
  SolveOutcome solve_assume(const Cube& assumptions, std::span<const int> model_vars) {
    if (!open_) throw std::logic_error("solve on consumed session");
    ++stats_.queries;
    SolveOutcome out;
    if (!ok_) {
      out.status = SolveStatus::unsat;
      out.core = Cube{};
      return out;
    }
    for (Lit l : assumptions) ensure_var(lit_var(l));
    assumptions_ = assumptions.lits();
    conflicts_at_start_ = stats_.conflicts;
    out.status = search();
    if (out.status == SolveStatus::sat) {
      std::vector<Lit> m;
      m.reserve(model_vars.size());
      for (int v : model_vars) {
        int8_t val = v < static_cast<int>(assigns_.size()) ? assigns_[v] : kUndef;
        m.push_back(val == kTrue ? v : -v);
      }
      out.model = Cube(std::move(m));
#ifndef NDEBUG
      verify_model();
#endif
    } else if (out.status == SolveStatus::unsat) {
      out.core = Cube(conflict_core_);
    }
    cancel_until(0);
    assumptions_.clear();
    return out;
  }

  SolveOutcome solve(std::span<const int> model_vars) { return solve_assume(Cube{}, model_vars); }

  bool is_sat(const Cube& assumptions) {
    return solve_assume(assumptions, {}).status == SolveStatus::sat;
  }

 private:
  void ensure_var(int v) {
    if (v <= 0) throw std::invalid_argument("variable ids are positive");
    while (static_cast<int>(assigns_.size()) <= v) {
      assigns_.push_back(kUndef);
      level_.push_back(0);
      reason_.push_back(-1);
      activity_.push_back(0.0);
      phase_.push_back(false);
      heap_pos_.push_back(-1);
      seen_.push_back(0);
      int nv = static_cast<int>(assigns_.size()) - 1;
      watches_.resize(2 * assigns_.size());
      if (nv > 0) heap_insert(nv);  // index 0 is a reserved dummy slot
    }
  }

  int8_t value(Lit l) const {
    int8_t a = assigns_[lit_var(l)];
    if (a == kUndef) return kUndef;
    return (a == kTrue) == lit_pos(l) ? kTrue : kFalse;
  }

  bool enqueue(Lit l, int reason_cref) {
    if (value(l) == kFalse) return false;
    if (value(l) == kTrue) return true;
    int v = lit_var(l);
    assigns_[v] = lit_pos(l) ? kTrue : kFalse;
    level_[v] = decision_level();
    reason_[v] = reason_cref;
    trail_.push_back(l);
    return true;
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  void new_decision_level() { trail_lim_.push_back(static_cast<int>(trail_.size())); }

  void cancel_until(int lvl) {
    if (decision_level() <= lvl) return;
    for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[lvl]; --i) {
      int v = lit_var(trail_[i]);
      phase_[v] = assigns_[v] == kTrue;
      assigns_[v] = kUndef;
      reason_[v] = -1;
      if (heap_pos_[v] < 0) heap_insert(v);
    }
    trail_.resize(trail_lim_[lvl]);
    trail_lim_.resize(lvl);
    qhead_ = std::min(qhead_, trail_.size());
  }

  // two-watched-literal unit propagation; returns conflicting clause or -1
  int propagate() {
    while (qhead_ < trail_.size()) {
      Lit p = trail_[qhead_++];  // p just became true, so -p is falsified
      ++stats_.propagations;
      auto& ws = watches_[lidx(p)];
      size_t keep = 0;
      for (size_t i = 0; i < ws.size(); ++i) {
        Watcher w = ws[i];
        if (value(w.blocker) == kTrue) {
          ws[keep++] = w;
          continue;
        }
        ClauseRec& c = clauses_[w.cref];
        if (c.deleted) continue;
        if (c.lits[0] == -p) std::swap(c.lits[0], c.lits[1]);
        if (value(c.lits[0]) == kTrue) {
          ws[keep++] = {w.cref, c.lits[0]};
          continue;
        }
        bool moved = false;
        for (size_t k = 2; k < c.lits.size(); ++k) {
          if (value(c.lits[k]) != kFalse) {
            std::swap(c.lits[1], c.lits[k]);
            watches_[lidx(-c.lits[1])].push_back({w.cref, c.lits[0]});
            moved = true;
            break;
          }
        }
        if (moved) continue;
        // unit or conflicting
        ws[keep++] = {w.cref, c.lits[0]};
        if (value(c.lits[0]) == kFalse) {
          for (size_t j = i + 1; j < ws.size(); ++j) ws[keep++] = ws[j];
          ws.resize(keep);
          qhead_ = trail_.size();
          return w.cref;
        }
        enqueue(c.lits[0], w.cref);
      }
      ws.resize(keep);
    }
    return -1;
  }

  // first-UIP conflict analysis
  void analyze(int confl, std::vector<Lit>& learnt, int& backtrack_level) {
    learnt.clear();
    learnt.push_back(0);  // slot for the asserting literal
    int counter = 0;
    Lit p = 0;
    size_t idx = trail_.size();
    std::vector<int> to_clear;
    do {
      ClauseRec& c = clauses_[confl];
      if (c.learnt) bump_clause(c);
      for (size_t k = (p == 0 ? 0 : 1); k < c.lits.size(); ++k) {
        Lit q = c.lits[k];
        int v = lit_var(q);
        if (!seen_[v] && level_[v] > 0) {
          seen_[v] = 1;
          to_clear.push_back(v);
          bump_var(v);
          if (level_[v] >= decision_level())
            ++counter;
          else
            learnt.push_back(q);
        }
      }
      while (!seen_[lit_var(trail_[--idx])]) {}
      p = trail_[idx];
      confl = reason_[lit_var(p)];
      seen_[lit_var(p)] = 0;
      --counter;
    } while (counter > 0);
    learnt[0] = -p;

    // cheap self-subsumption: drop literals implied by the rest
    size_t keep = 1;
    for (size_t i = 1; i < learnt.size(); ++i) {
      int v = lit_var(learnt[i]);
      int r = reason_[v];
      bool redundant = false;
      if (r != -1) {
        redundant = true;
        for (size_t k = 1; k < clauses_[r].lits.size(); ++k) {
          int u = lit_var(clauses_[r].lits[k]);
          if (!seen_[u] && level_[u] > 0) { redundant = false; break; }
        }
      }
      if (!redundant) learnt[keep++] = learnt[i];
    }
    learnt.resize(keep);
    for (int v : to_clear) seen_[v] = 0;

    backtrack_level = 0;
    if (learnt.size() > 1) {
      size_t max_i = 1;
      for (size_t i = 2; i < learnt.size(); ++i)
        if (level_[lit_var(learnt[i])] > level_[lit_var(learnt[max_i])]) max_i = i;
      std::swap(learnt[1], learnt[max_i]);
      backtrack_level = level_[lit_var(learnt[1])];
    }
    var_inc_ *= 1.0 / 0.95;
    cla_inc_ *= 1.0 / 0.999;
  }

  // Why did assumption `a` come out false?  Chase reasons down to assumption
  // decisions; those form the core.  Level-0 facts never enter it.
  void analyze_final(Lit a) {
    conflict_core_.clear();
    conflict_core_.push_back(a);
    if (decision_level() == 0 || level_[lit_var(a)] == 0) return;
    seen_[lit_var(a)] = 1;
    for (int i = static_cast<int>(trail_.size()) - 1; i >= trail_lim_[0]; --i) {
      int v = lit_var(trail_[i]);
      if (!seen_[v]) continue;
      if (reason_[v] == -1) {
        if (trail_[i] != -a) conflict_core_.push_back(trail_[i]);
      } else {
        const ClauseRec& c = clauses_[reason_[v]];
        for (size_t k = 1; k < c.lits.size(); ++k)
          if (level_[lit_var(c.lits[k])] > 0) seen_[lit_var(c.lits[k])] = 1;
      }
      seen_[v] = 0;
    }
    seen_[lit_var(a)] = 0;
  }

  SolveStatus search() {
    cancel_until(0);
    num_assumption_levels_ = 0;
    if (propagate() != -1) {
      ok_ = false;
      conflict_core_.clear();
      return SolveStatus::unsat;
    }
    uint64_t restart_threshold = luby_base_ * luby(restart_count_ + 1);
    uint64_t conflicts_this_restart = 0;

    while (true) {
      int confl = propagate();
      if (confl != -1) {
        ++stats_.conflicts;
        ++conflicts_this_restart;
        if (decision_level() == 0) {
          ok_ = false;
          conflict_core_.clear();
          return SolveStatus::unsat;
        }
        std::vector<Lit> learnt;
        int back_level;
        analyze(confl, learnt, back_level);
        cancel_until(back_level);
        num_assumption_levels_ = std::min(num_assumption_levels_, static_cast<size_t>(back_level));
        if (learnt.size() == 1) {
          if (!enqueue(learnt[0], -1)) { ok_ = false; conflict_core_.clear(); return SolveStatus::unsat; }
        } else {
          int cref = attach_new(std::move(learnt), true);
          enqueue(clauses_[cref].lits[0], cref);
        }
        if (conflict_budget_ >= 0 &&
            stats_.conflicts - conflicts_at_start_ > static_cast<uint64_t>(conflict_budget_))
          return SolveStatus::budget_exceeded;
        continue;
      }

      if (conflicts_this_restart >= restart_threshold &&
          decision_level() > static_cast<int>(num_assumption_levels_)) {
        ++stats_.restarts;
        ++restart_count_;
        conflicts_this_restart = 0;
        restart_threshold = luby_base_ * luby(restart_count_ + 1);
        cancel_until(static_cast<int>(num_assumption_levels_));
      }
      if (learnt_count_ > learnt_limit_) reduce_db();

      // place pending assumptions before real decisions; level k holds
      // assumption k-1 (as a decision, or as a dummy level if already true)
      if (static_cast<size_t>(decision_level()) < assumptions_.size()) {
        Lit a = assumptions_[decision_level()];
        if (value(a) == kFalse) {
          analyze_final(a);
          return SolveStatus::unsat;
        }
        bool already_true = value(a) == kTrue;
        new_decision_level();
        num_assumption_levels_ = decision_level();
        if (!already_true) enqueue(a, -1);
        continue;
      }

      // regular decision
      int v = pick_branch_var();
      if (v == 0) return SolveStatus::sat;
      ++stats_.decisions;
      new_decision_level();
      bool pol = phase_[v];
      if ((rng_next() & 0xff) < random_phase_chance_) pol = rng_next() & 1;
      enqueue(pol ? v : -v, -1);
    }
  }

  int pick_branch_var() {
    while (!heap_.empty()) {
      int v = heap_[0];
      heap_remove_top();
      if (assigns_[v] == kUndef) return v;
    }
    return 0;
  }

  int attach_new(std::vector<Lit> lits, bool learnt) {
    assert(lits.size() >= 2);
    int cref = static_cast<int>(clauses_.size());
    clauses_.push_back({std::move(lits), cla_inc_, learnt, false});
    ClauseRec& c = clauses_.back();
    watches_[lidx(-c.lits[0])].push_back({cref, c.lits[1]});
    watches_[lidx(-c.lits[1])].push_back({cref, c.lits[0]});
    if (learnt) ++learnt_count_;
    return cref;
  }

  void bump_var(int v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
      for (double& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    if (heap_pos_[v] >= 0) heap_sift_up(heap_pos_[v]);
  }

  void bump_clause(ClauseRec& c) {
    c.activity += cla_inc_;
    if (c.activity > 1e20) {
      for (ClauseRec& d : clauses_)
        if (d.learnt) d.activity *= 1e-20;
      cla_inc_ *= 1e-20;
    }
  }

  void reduce_db() {
    // drop the less active half of the learnt clauses, keeping reasons
    std::vector<double> acts;
    acts.reserve(learnt_count_);
    for (const ClauseRec& c : clauses_)
      if (c.learnt && !c.deleted) acts.push_back(c.activity);
    if (acts.size() < 16) { learnt_limit_ *= 2; return; }
    std::nth_element(acts.begin(), acts.begin() + acts.size() / 2, acts.end());
    double median = acts[acts.size() / 2];
    std::vector<char> is_reason(clauses_.size(), 0);
    for (Lit l : trail_) {
      int r = reason_[lit_var(l)];
      if (r >= 0) is_reason[r] = 1;
    }
    for (size_t i = 0; i < clauses_.size(); ++i) {
      ClauseRec& c = clauses_[i];
      if (c.learnt && !c.deleted && !is_reason[i] && c.lits.size() > 2 && c.activity < median) {
        c.deleted = true;
        --learnt_count_;
        detach(static_cast<int>(i));
      }
    }
    learnt_limit_ = learnt_limit_ + learnt_limit_ / 2;
  }

  void detach(int cref) {
    for (Lit l : {clauses_[cref].lits[0], clauses_[cref].lits[1]}) {
      auto& ws = watches_[lidx(-l)];
      for (size_t i = 0; i < ws.size(); ++i)
        if (ws[i].cref == cref) {
          ws[i] = ws.back();
          ws.pop_back();
          break;
        }
    }
  }

  void verify_model() const {
    for (const ClauseRec& c : clauses_) {
      if (c.deleted || c.learnt) continue;
      bool satisfied = false;
      for (Lit l : c.lits)
        if (value(l) == kTrue) { satisfied = true; break; }
      if (!satisfied) {
#ifdef SS_DEBUG_VERIFY
        fprintf(stderr, "violated clause:");
        for (Lit l : c.lits) fprintf(stderr, " %d(v=%d)", l, (int)value(l));
        fprintf(stderr, "\n");
#endif
        throw std::logic_error("solver produced a non-model");
      }
    }
    for (Lit a : assumptions_)
      if (value(a) != kTrue) throw std::logic_error("solver model violates assumption");
  }

  // --- activity heap (max-heap on activity_)
  void heap_insert(int v) {
    heap_pos_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    heap_sift_up(heap_pos_[v]);
  }
  void heap_remove_top() {
    int last = heap_.back();
    heap_pos_[heap_[0]] = -1;
    heap_.pop_back();
    if (!heap_.empty()) {
      heap_[0] = last;
      heap_pos_[last] = 0;
      heap_sift_down(0);
    }
  }
  void heap_sift_up(int i) {
    int v = heap_[i];
    while (i > 0) {
      int p = (i - 1) / 2;
      if (activity_[heap_[p]] >= activity_[v]) break;
      heap_[i] = heap_[p];
      heap_pos_[heap_[i]] = i;
      i = p;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }
  void heap_sift_down(int i) {
    int v = heap_[i];
    int n = static_cast<int>(heap_.size());
    while (2 * i + 1 < n) {
      int c = 2 * i + 1;
      if (c + 1 < n && activity_[heap_[c + 1]] > activity_[heap_[c]]) ++c;
      if (activity_[heap_[c]] <= activity_[v]) break;
      heap_[i] = heap_[c];
      heap_pos_[heap_[i]] = i;
      i = c;
    }
    heap_[i] = v;
    heap_pos_[v] = i;
  }

  static uint64_t luby(uint64_t i) {
    uint64_t k = 1;
    while ((1ULL << (k + 1)) <= i + 1) ++k;
    while ((1ULL << k) - 1 != i) {
      i = i - ((1ULL << (k - 1)) - 1) - 1;
      k = 1;
      while ((1ULL << (k + 1)) <= i + 1) ++k;
    }
    return 1ULL << (k - 1);
  }

  uint64_t rng_next() {
    rng_ ^= rng_ << 13;
    rng_ ^= rng_ >> 7;
    rng_ ^= rng_ << 17;
    return rng_;
  }

  std::vector<ClauseRec> clauses_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<int8_t> assigns_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<double> activity_;
  std::vector<char> phase_;
  std::vector<char> seen_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::vector<int> heap_;
  std::vector<int> heap_pos_;
  std::vector<Lit> assumptions_;
  std::vector<Lit> conflict_core_;
  size_t qhead_ = 0;
  size_t num_assumption_levels_ = 0;
  size_t learnt_count_ = 0;
  size_t learnt_limit_ = 4000;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  uint64_t restart_count_ = 0;
  uint64_t luby_base_ = 64;
  uint64_t conflicts_at_start_ = 0;
  int64_t conflict_budget_ = -1;
  int random_phase_chance_ = 4;  // out of 256
  uint64_t rng_ = 88172645463325252ULL;
  bool ok_ = true;
  bool open_ = true;
  SolverStats stats_;
};

// Shrinks an unsatisfiable assumption core to a locally minimal one: dropping
// any single literal makes theory ∧ pinned ∧ core satisfiable.  Literals are
// tried in ascending variable order.
inline Cube shrink_core(SolverSession& s, Cube core, const Cube& pinned = Cube{}) {
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<Lit> lits(core.lits());
    for (Lit drop : lits) {
      if (!core.contains(drop)) continue;
      Cube candidate = Cube(core.without(drop));
      std::vector<Lit> assume(pinned.lits());
      for (Lit l : candidate) assume.push_back(l);
      SolveOutcome r = s.solve_assume(Cube(assume), {});
      if (r.is_unsat()) {
        // keep only literals the solver actually used
        std::vector<Lit> kept;
        for (Lit l : candidate)
          if (r.core.contains(l)) kept.push_back(l);
        core = Cube(std::move(kept));
        changed = true;
      }
    }
  }
  return core;
}

}  // namespace safetysynth
