#pragma once

// The two learning-based synthesis backends plus the generalization toolbox.
//
// learn_sat runs the incremental two-solver loop: session s∃ holds
// F ∧ U ∧ T ∧ ¬F̂′ and searches for a state-input pair from which some
// control value leaves F̂; session s∀ holds F ∧ T ∧ F′ and checks for a
// protagonist response.  Losing states are generalized through unsat cores
// (optionally strengthened with the RG reachability side condition), useless
// state-input pairs are generalized and excluded through U.  F̂ is a lazy
// snapshot of F: s∃ stays incremental until the loop query goes
// unsatisfiable with a stale snapshot, at which point U is reset, F̂ := F
// and s∃ restarts.
//
// learn_qbf is the query-per-iteration variant: counterexamples come from
// the ∃∀ engine on F ∧ T ∧ ¬F′, and the inner loop drops literals while the
// candidate sub-cube passes the generalization check.
//
// all_min_generalizations enumerates every locally minimal losing sub-cube
// of a counterexample with a hitting-set tree over unsat cores.

#include <deque>
#include <functional>
#include <set>

#include "compress.hpp"
#include "formula.hpp"
#include "game.hpp"
#include "qesolve.hpp"
#include "reachopt.hpp"
#include "solver.hpp"

namespace safetysynth {

struct LearnOptions {
  bool optimize = true;           // lazy F̂ / G-strengthening
  bool use_rg = false;            // reachability during generalization
  bool use_rc = false;            // reachability during counterexample computation
  bool all_generalizations = false;
  int compress_every = 50;        // clause additions between compression runs
  uint64_t seed = 0;
  uint64_t max_iterations = 50'000'000;
  int64_t conflict_budget = -1;   // per solver query; negative = unlimited
  int hitting_set_node_limit = 512;
};

enum class SynthStatus { realizable, unrealizable, budget_exceeded };

struct SynthesisStats {
  std::string backend;
  uint64_t iterations = 0;
  uint64_t clauses_learned = 0;
  uint64_t restarts = 0;
  uint64_t solver_queries = 0;
  uint64_t u_clauses = 0;
  uint64_t counterexamples = 0;
  uint64_t literals_in_learned_clauses = 0;
};

struct SynthesisVerdict {
  SynthStatus status = SynthStatus::budget_exceeded;
  Cnf region;  // meaningful for realizable only
  SynthesisStats stats;

  bool realizable() const { return status == SynthStatus::realizable; }
};

struct ProgressEvent {
  enum class Kind { clause_added, u_clause_added, restart, verdict };
  Kind kind;
  uint64_t iteration = 0;
  size_t clause_size = 0;
};

using EventSink = std::function<void(const ProgressEvent&)>;

// Working data of a learning run; exposed for the parallel orchestration.
struct LearnState {
  Cnf F;     // current winning-region over-approximation (safe prefix first)
  Cnf Fhat;  // lazy snapshot of F
  Cnf U;     // excluded state-input pairs, current epoch only
  bool precise = true;
  std::vector<std::pair<Cube, Cube>> cex_db;  // pre-generalization (state, input)
  SynthesisStats stats;
};

namespace learndetail {

inline Cube part_of(const Cube& model, const VarManager& vm, VarGroup g) {
  std::vector<Lit> lits;
  for (Lit l : model)
    if (vm.group(lit_var(l)) == g) lits.push_back(l);
  return Cube(std::move(lits));
}

// Incremental RG helper session following the activation-variable scheme:
// theory F(x̄) ∧ T ∧ F(x̄′) ∧ F(x̄*) ∧ (T*-step ∨ init) ∧ (init → x̄ = I)
// ∧ (Σ position-falsified ∨ init), with per-position mode variables chosen
// through assumptions so one session serves every candidate cube.
struct RgSession {
  SolverSession solver;
  PrevBlock prev;
  int is_init = 0;
  std::vector<int> px_unused, px_neg, px_act;
  const SafetySpec& spec;
  VarManager& vm;

  RgSession(const SafetySpec& s, VarManager& vm_, const Cnf& f, uint64_t seed, int64_t conflict_budget)
      : solver(seed), spec(s), vm(vm_) {
    solver.set_conflict_budget(conflict_budget);
    prev = make_prev_block(spec, vm);
    solver.add_cnf(spec.trans_cnf);
    solver.add_cnf(prev.prev_trans.to_cnf());
    is_init = vm.fresh(VarGroup::temp);
    for (Lit l : spec.initial) solver.add_clause(Clause{-is_init, l});
    // starred step feeds the current state unless the state is initial
    for (size_t k = 0; k < spec.state_vars.size(); ++k) {
      solver.add_clause(Clause{is_init, -spec.state_vars[k], prev.prev_next[k]});
      solver.add_clause(Clause{is_init, spec.state_vars[k], -prev.prev_next[k]});
    }
    std::vector<Lit> some_falsified;
    for (size_t k = 0; k < spec.state_vars.size(); ++k) {
      int pu = vm.fresh(VarGroup::temp);
      int pn = vm.fresh(VarGroup::temp);
      int pa = vm.fresh(VarGroup::temp);
      px_unused.push_back(pu);
      px_neg.push_back(pn);
      px_act.push_back(pa);
      int ps = prev.prev_state[k];
      solver.add_clause(Clause{-pu, -pa});
      solver.add_clause(Clause{pu, pn, ps, -pa});
      solver.add_clause(Clause{pu, pn, -ps, pa});
      solver.add_clause(Clause{pu, -pn, ps, pa});
      solver.add_clause(Clause{pu, -pn, -ps, -pa});
    }
    some_falsified.reserve(px_act.size() + 1);
    for (int pa : px_act) some_falsified.push_back(pa);
    some_falsified.push_back(is_init);
    solver.add_clause(Clause(std::move(some_falsified)));
    for (const Clause& c : f) add_region_clause(c);
  }

  void add_region_clause(const Clause& c) {
    solver.add_clause(c);
    solver.add_clause(prime_clause(c, spec.vm));
    solver.add_clause(to_prev(Cnf{c}, spec, prev)[0]);
  }

  // assumptions encoding ¬cube(x̄*) for the candidate cube
  void push_modes(const Cube& cube, std::vector<Lit>& assume) const {
    for (size_t k = 0; k < spec.state_vars.size(); ++k) {
      int v = spec.state_vars[k];
      if (cube.contains(v)) assume.push_back(px_neg[k]);
      else if (cube.contains(-v)) assume.push_back(-px_neg[k]);
      else assume.push_back(px_unused[k]);
    }
  }

  // true iff the relaxed removal condition certifies the candidate cube
  bool removal_certified(const Cube& cube, const Cube& input) {
    std::vector<Lit> assume(input.lits());
    for (Lit l : cube) assume.push_back(l);
    push_modes(cube, assume);
    return solver.solve_assume(Cube(std::move(assume)), {}).is_unsat();
  }
};

// RC side condition clauses for the counterexample session; re-emitted on
// every session restart, region clauses join incrementally via add_region.
struct RcEncoding {
  PrevBlock prev;
  int sel_init = 0;
  std::vector<int> diff;

  static RcEncoding make(const SafetySpec& spec, VarManager& vm) {
    RcEncoding enc;
    enc.prev = make_prev_block(spec, vm);
    enc.sel_init = vm.fresh(VarGroup::temp);
    for (size_t k = 0; k < spec.state_vars.size(); ++k) enc.diff.push_back(vm.fresh(VarGroup::temp));
    return enc;
  }

  void emit_fixed(SolverSession& s, const SafetySpec& spec) const {
    s.add_cnf(prev.prev_trans.to_cnf());
    for (Lit l : spec.initial) s.add_clause(Clause{-sel_init, l});
    for (size_t k = 0; k < spec.state_vars.size(); ++k) {
      s.add_clause(Clause{sel_init, -spec.state_vars[k], prev.prev_next[k]});
      s.add_clause(Clause{sel_init, spec.state_vars[k], -prev.prev_next[k]});
      s.add_clause(Clause{-diff[k], spec.state_vars[k], prev.prev_state[k]});
      s.add_clause(Clause{-diff[k], -spec.state_vars[k], -prev.prev_state[k]});
    }
    std::vector<Lit> some_diff;
    for (int d : diff) some_diff.push_back(d);
    some_diff.push_back(sel_init);
    s.add_clause(Clause(std::move(some_diff)));
  }

  void add_region(SolverSession& s, const SafetySpec& spec, const Clause& c) const {
    std::vector<Lit> starred(to_prev(Cnf{c}, spec, prev)[0].lits());
    starred.push_back(sel_init);
    s.add_clause_lits(starred);
  }
};

inline bool initial_state_safe(const SafetySpec& spec) {
  Assignment a;
  for (Lit l : spec.initial) a[lit_var(l)] = lit_pos(l);
  return eval_cnf(spec.safe, a);
}

inline void emit(const EventSink& sink, ProgressEvent::Kind kind, uint64_t iter, size_t size = 0) {
  if (sink) sink({kind, iter, size});
}

}  // namespace learndetail

// Every locally minimal losing sub-cube of (state, input) against F, via a
// hitting-set tree over unsat cores: each found cube branches on dropping
// one of its literals, which reaches every other minimal cube.  Complete up
// to the node limit.
inline std::vector<Cube> all_min_generalizations(const Cube& cex_state, const Cube& cex_input, const Cnf& f,
                                                 const SafetySpec& spec, int node_limit = 512,
                                                 uint64_t seed = 0) {
  SolverSession s(seed);
  s.add_cnf(f);
  s.add_cnf(spec.trans_cnf);
  s.add_cnf(prime(f, spec.vm));

  auto losing = [&](const Cube& sub) {
    std::vector<Lit> assume(cex_input.lits());
    for (Lit l : sub) assume.push_back(l);
    return s.solve_assume(Cube(std::move(assume)), {});
  };

  std::vector<Cube> found;
  if (!losing(cex_state).is_unsat()) return found;

  std::set<std::vector<Lit>> visited;
  std::set<std::vector<Lit>> recorded;
  std::deque<Cube> worklist;  // banned literal sets
  worklist.push_back(Cube{});
  int nodes = 0;
  while (!worklist.empty() && nodes < node_limit) {
    ++nodes;
    Cube banned = worklist.front();
    worklist.pop_front();
    std::vector<Lit> keep;
    for (Lit l : cex_state)
      if (!banned.contains(l)) keep.push_back(l);
    Cube candidate(keep);
    auto r = losing(candidate);
    if (!r.is_unsat()) continue;  // no losing cube avoids this banned set
    std::vector<Lit> core_lits;
    for (Lit l : candidate)
      if (r.core.contains(l)) core_lits.push_back(l);
    Cube mus = shrink_core(s, Cube(std::move(core_lits)), cex_input);
    if (recorded.insert(mus.lits()).second) found.push_back(mus);
    for (Lit l : mus) {
      std::vector<Lit> child(banned.lits());
      child.push_back(l);
      Cube child_cube(child);
      if (visited.insert(child_cube.lits()).second) worklist.push_back(child_cube);
    }
  }
  return found;
}

// ------------------------------------------------------------- learn_sat

inline SynthesisVerdict learn_sat(const SafetySpec& spec, const LearnOptions& opts = {},
                                  const EventSink& sink = {}) {
  using namespace learndetail;
  SynthesisVerdict out;
  out.stats.backend = "learnsat";

  if (!initial_state_safe(spec)) {
    out.status = SynthStatus::unrealizable;
    emit(sink, ProgressEvent::Kind::verdict, 0);
    return out;
  }

  VarManager vm = spec.vm;  // run-local temporaries live here
  LearnState st;
  st.F = spec.safe;
  st.Fhat = st.F;

  std::vector<int> model_vars = spec.state_and_inputs();

  SolverSession s_forall(opts.seed);
  s_forall.set_conflict_budget(opts.conflict_budget);
  s_forall.add_cnf(st.F);
  s_forall.add_cnf(spec.trans_cnf);
  s_forall.add_cnf(prime(st.F, spec.vm));

  std::optional<RgSession> rg;
  if (opts.use_rg) rg.emplace(spec, vm, st.F, opts.seed, opts.conflict_budget);
  std::optional<RcEncoding> rc;
  if (opts.use_rc) rc = RcEncoding::make(spec, vm);

  std::unique_ptr<SolverSession> s_exists;
  auto restart_exists = [&]() {
    if (s_exists) s_exists->close();
    s_exists = std::make_unique<SolverSession>(opts.seed);
    s_exists->set_conflict_budget(opts.conflict_budget);
    s_exists->add_cnf(st.F);
    s_exists->add_cnf(spec.trans_cnf);
    s_exists->add_cnf(cnf_negate(prime(st.Fhat, spec.vm), vm));
    if (rc) {
      rc->emit_fixed(*s_exists, spec);
      for (const Clause& c : st.F) rc->add_region(*s_exists, spec, c);
    }
  };
  restart_exists();

  uint64_t additions_since_compress = 0;
  auto maybe_compress = [&]() {
    if (opts.compress_every <= 0 || additions_since_compress < static_cast<uint64_t>(opts.compress_every))
      return;
    CompressOptions copts;
    copts.keep_prefix = spec.safe.size();
    copts.prefix_implication_only = opts.use_rg;
    st.F = compress(st.F, copts);
    additions_since_compress = 0;
  };

  auto add_region_clause = [&](const Clause& c) {
    st.F.add(c);
    ++st.stats.clauses_learned;
    st.stats.literals_in_learned_clauses += c.size();
    ++additions_since_compress;
    s_exists->add_clause(c);
    s_forall.add_clause(c);
    s_forall.add_clause(prime_clause(c, spec.vm));
    if (rg) rg->add_region_clause(c);
    if (rc) rc->add_region(*s_exists, spec, c);
    emit(sink, ProgressEvent::Kind::clause_added, st.stats.iterations, c.size());
  };

  // losing-state generalization: minimal core over the state literals with
  // the input asserted; under RG the query additionally carries the
  // reachability side condition
  auto generalize_losing = [&](const Cube& x, const Cube& i, const Cube& raw_core) -> Cube {
    Cube core = raw_core;
    if (!rg) return shrink_core(s_forall, core, i);
    bool changed = true;
    while (changed) {
      changed = false;
      for (Lit l : std::vector<Lit>(core.lits())) {
        Cube candidate = Cube(core.without(l));
        if (rg->removal_certified(candidate, i)) {
          core = candidate;
          changed = true;
        }
      }
    }
    (void)x;
    return core;
  };

  while (true) {
    if (++st.stats.iterations > opts.max_iterations) {
      out.status = SynthStatus::budget_exceeded;
      out.stats = st.stats;
      return out;
    }

    auto escape = s_exists->solve(model_vars);
    ++st.stats.solver_queries;
    if (escape.status == SolveStatus::budget_exceeded) {
      out.status = SynthStatus::budget_exceeded;
      out.stats = st.stats;
      return out;
    }
    if (escape.is_unsat()) {
      if (st.precise) {
        out.status = SynthStatus::realizable;
        out.region = st.F;
        out.stats = st.stats;
        emit(sink, ProgressEvent::Kind::verdict, st.stats.iterations);
        return out;
      }
      ++st.stats.restarts;
      st.U = Cnf{};
      maybe_compress();
      st.Fhat = st.F;
      st.precise = true;
      restart_exists();
      emit(sink, ProgressEvent::Kind::restart, st.stats.iterations);
      continue;
    }

    Cube x = part_of(escape.model, spec.vm, VarGroup::state);
    Cube i = part_of(escape.model, spec.vm, VarGroup::input);

    std::vector<Lit> xi(x.lits());
    for (Lit l : i) xi.push_back(l);
    auto response = s_forall.solve_assume(Cube(xi), spec.control_vars);
    ++st.stats.solver_queries;
    if (response.status == SolveStatus::budget_exceeded) {
      out.status = SynthStatus::budget_exceeded;
      out.stats = st.stats;
      return out;
    }

    if (response.is_unsat()) {
      // no protagonist response: generalize and remove the losing states
      ++st.stats.counterexamples;
      st.cex_db.emplace_back(x, i);
      Cube raw = Cube(learndetail::part_of(response.core, spec.vm, VarGroup::state));
      Cube xg = generalize_losing(x, i, raw);
      if (cubes_compatible(xg, spec.initial)) {
        out.status = SynthStatus::unrealizable;
        out.stats = st.stats;
        emit(sink, ProgressEvent::Kind::verdict, st.stats.iterations);
        return out;
      }
      add_region_clause(negate_cube(xg));

      if (opts.all_generalizations) {
        for (const Cube& extra : all_min_generalizations(x, i, st.F, spec, opts.hitting_set_node_limit, opts.seed)) {
          if (extra == xg) continue;
          if (cubes_compatible(extra, spec.initial)) {
            out.status = SynthStatus::unrealizable;
            out.stats = st.stats;
            return out;
          }
          add_region_clause(negate_cube(extra));
        }
      }

      if (opts.optimize) {
        st.precise = false;
      } else {
        st.U = Cnf{};
        maybe_compress();
        st.Fhat = st.F;
        st.precise = true;
        ++st.stats.restarts;
        restart_exists();
      }
    } else {
      // the pair is useless for the antagonist: generalize it against the
      // escape session with the response asserted, then exclude it
      Cube c = part_of(response.model, spec.vm, VarGroup::control);
      std::vector<Lit> xic(xi);
      for (Lit l : c) xic.push_back(l);
      auto confirm = s_exists->solve_assume(Cube(xic), {});
      ++st.stats.solver_queries;
      if (!confirm.is_unsat()) throw std::logic_error("useless pair still escapes with the response asserted");
      std::vector<Lit> raw;
      for (Lit l : confirm.core)
        if (spec.vm.group(lit_var(l)) != VarGroup::control) raw.push_back(l);
      Cube pair = shrink_core(*s_exists, Cube(std::move(raw)), c);
      Clause u = negate_cube(pair);
      st.U.add(u);
      s_exists->add_clause(u);
      ++st.stats.u_clauses;
      emit(sink, ProgressEvent::Kind::u_clause_added, st.stats.iterations, u.size());
    }
  }
}

// ------------------------------------------------------------- learn_qbf

inline SynthesisVerdict learn_qbf(const SafetySpec& spec, const LearnOptions& opts = {},
                                  const EventSink& sink = {}) {
  using namespace learndetail;
  SynthesisVerdict out;
  out.stats.backend = "learnqbf";

  if (!initial_state_safe(spec)) {
    out.status = SynthStatus::unrealizable;
    emit(sink, ProgressEvent::Kind::verdict, 0);
    return out;
  }

  Cnf f = spec.safe;
  QLimits limits;
  limits.conflict_budget = opts.conflict_budget;
  limits.seed = opts.seed;

  uint64_t additions_since_compress = 0;
  auto maybe_compress = [&]() {
    if (opts.compress_every <= 0 || additions_since_compress < static_cast<uint64_t>(opts.compress_every))
      return;
    CompressOptions copts;
    copts.keep_prefix = spec.safe.size();
    copts.prefix_implication_only = opts.use_rg;
    f = compress(f, copts);
    additions_since_compress = 0;
  };

  auto counterexample = [&]() -> QResult {
    if (opts.use_rc) return solve_q(rc_counterexample_query(f, spec), limits);
    QProblem q;
    q.prefix.push_back({QBlock::Q::exists, spec.state_and_inputs()});
    q.prefix.push_back({QBlock::Q::forall, spec.control_vars});
    q.defs = spec.trans;
    q.pos = f;
    q.negs.push_back(prime(f, spec.vm));
    q.tag = "counterexample";
    return solve_q(q, limits);
  };

  // the generalization check: candidate removable iff no state of the
  // candidate (within G) lets the protagonist stay inside G
  auto removable = [&](const Cube& candidate, const Cube& xg_so_far) -> bool {
    if (opts.use_rg) return solve_q(rg_generalization_query(f, candidate, spec), limits).status == QStatus::unsat;
    Cnf g = f;
    if (opts.optimize) g.add(negate_cube(xg_so_far));
    QProblem q;
    q.prefix.push_back({QBlock::Q::exists, spec.state_vars});
    q.prefix.push_back({QBlock::Q::forall, spec.input_vars});
    q.prefix.push_back({QBlock::Q::exists, spec.control_vars});
    q.defs = spec.trans;
    Cnf pos;
    for (Lit l : candidate) pos.add_unit(l);
    pos.append(g);
    pos.append(prime(g, spec.vm));
    q.pos = std::move(pos);
    q.tag = "generalization";
    return solve_q(q, limits).status == QStatus::unsat;
  };

  while (true) {
    if (++out.stats.iterations > opts.max_iterations) {
      out.status = SynthStatus::budget_exceeded;
      return out;
    }
    QResult cex = counterexample();
    ++out.stats.solver_queries;
    if (cex.status == QStatus::budget_exceeded) {
      out.status = SynthStatus::budget_exceeded;
      return out;
    }
    if (cex.status == QStatus::unsat) {
      out.status = SynthStatus::realizable;
      out.region = f;
      emit(sink, ProgressEvent::Kind::verdict, out.stats.iterations);
      return out;
    }

    Cube x = part_of(cex.witness, spec.vm, VarGroup::state);
    Cube i = part_of(cex.witness, spec.vm, VarGroup::input);
    ++out.stats.counterexamples;

    Cube xg = x;
    for (Lit l : std::vector<Lit>(x.lits())) {
      if (!xg.contains(l) || xg.size() == 1) continue;
      Cube candidate = Cube(xg.without(l));
      ++out.stats.solver_queries;
      if (removable(candidate, xg)) xg = candidate;
    }

    if (cubes_compatible(xg, spec.initial)) {
      out.status = SynthStatus::unrealizable;
      emit(sink, ProgressEvent::Kind::verdict, out.stats.iterations);
      return out;
    }
    f.add(negate_cube(xg));
    ++out.stats.clauses_learned;
    out.stats.literals_in_learned_clauses += xg.size();
    ++additions_since_compress;
    emit(sink, ProgressEvent::Kind::clause_added, out.stats.iterations, xg.size());

    if (opts.all_generalizations) {
      for (const Cube& extra : all_min_generalizations(x, i, f, spec, opts.hitting_set_node_limit, opts.seed)) {
        if (extra == xg) continue;
        if (cubes_compatible(extra, spec.initial)) {
          out.status = SynthStatus::unrealizable;
          return out;
        }
        f.add(negate_cube(extra));
        ++out.stats.clauses_learned;
        ++additions_since_compress;
      }
    }
    maybe_compress();
  }
}

}  // namespace safetysynth
