#pragma once

// SafetySpec: the controllable transition system (x̄, ī, c̄, I, T) plus the
// safe-state set P, lowered from an AIGER circuit.  T is kept both as
// functional gate definitions (for evaluation and for turning quantified
// queries into plain SAT) and as CNF.  Also houses the one-step mixed
// pre-image query skeletons every backend instantiates.

#include <string>

#include "aiger.hpp"
#include "defs.hpp"
#include "formula.hpp"
#include "qesolve.hpp"

namespace safetysynth {

struct SafetySpec {
  VarManager vm;  // callers clone before allocating run-local temporaries
  std::vector<int> state_vars;
  std::vector<int> input_vars;    // uncontrollable
  std::vector<int> control_vars;  // controllable
  std::vector<int> next_vars;     // next_vars[k] pairs state_vars[k]
  Cube initial;                   // full minterm: all latches false
  Cnf safe;                       // P, mentions only state_vars
  FunctionalDefs trans;           // gates + next-state definitions
  Cnf trans_cnf;                  // cached trans.to_cnf()
  std::vector<AigLit> latch_lits; // aiger literal backing each state var
  std::string name;

  std::vector<int> state_and_inputs() const {
    std::vector<int> vs(state_vars);
    vs.insert(vs.end(), input_vars.begin(), input_vars.end());
    return vs;
  }

  // deterministic one-step evaluation of T
  Cube step(const Cube& state, const Cube& input, const Cube& control) const {
    Assignment a;
    for (Lit l : state) a[lit_var(l)] = lit_pos(l);
    for (Lit l : input) a[lit_var(l)] = lit_pos(l);
    for (Lit l : control) a[lit_var(l)] = lit_pos(l);
    trans.eval(a);
    std::vector<Lit> next;
    next.reserve(next_vars.size());
    for (size_t k = 0; k < next_vars.size(); ++k) {
      bool v = a.at(next_vars[k]);
      next.push_back(v ? state_vars[k] : -state_vars[k]);
    }
    return Cube(std::move(next));
  }

  bool state_safe(const Cube& state) const {
    Assignment a;
    for (Lit l : state) a[lit_var(l)] = lit_pos(l);
    return eval_cnf(safe, a);
  }
};

// Lowers a parsed circuit with exactly one (error) output.  If the error
// signal is anything but a plain latch literal or constant, a fresh sticky
// error latch err' = err ∨ error_signal is introduced so that P stays a pure
// state predicate.
inline SafetySpec to_safety_spec(const AigerCircuit& circuit, std::string name = "") {
  if (circuit.outputs.size() != 1)
    throw std::invalid_argument("safety specs need exactly one output, got " +
                                std::to_string(circuit.outputs.size()));
  detail::validate(circuit);

  SafetySpec spec;
  spec.name = std::move(name);
  InputPartition part = partition_inputs(circuit);

  // aiger literal -> GLit over solver variables
  std::vector<GLit> lower(2 * (circuit.max_index + 1), 0);
  lower[0] = 0;
  lower[1] = 1;
  auto map_var = [&](AigLit even, int var) {
    lower[even] = glit(var);
    lower[aig_neg(even)] = glit(var, true);
  };

  for (auto [latch, next] : circuit.latches) {
    (void)next;
    auto [s, n] = spec.vm.fresh_state_pair();
    spec.state_vars.push_back(s);
    spec.next_vars.push_back(n);
    spec.latch_lits.push_back(latch);
    map_var(latch, s);
  }
  for (AigLit in : part.uncontrollable) {
    int v = spec.vm.fresh(VarGroup::input);
    spec.input_vars.push_back(v);
    map_var(in, v);
  }
  for (AigLit in : part.controllable) {
    int v = spec.vm.fresh(VarGroup::control);
    spec.control_vars.push_back(v);
    map_var(in, v);
  }
  for (const AigerAnd& g : circuit.ands) {
    int t = spec.vm.fresh(VarGroup::temp);
    spec.trans.add_gate(t, lower[g.rhs0], lower[g.rhs1]);
    map_var(g.lhs, t);
  }

  // latch updates: next ≡ lowered next-function
  for (size_t k = 0; k < circuit.latches.size(); ++k) {
    GLit def = lower[circuit.latches[k].second];
    spec.trans.add_gate(spec.next_vars[k], def, def);
  }

  GLit err = lower[circuit.outputs[0]];
  bool err_is_state_literal =
      err > 1 && spec.vm.group(gvar(err)) == VarGroup::state;
  if (err == 0) {
    spec.safe = cnf_true();
  } else if (err == 1) {
    spec.safe = cnf_false();
  } else if (err_is_state_literal) {
    spec.safe = Cnf{Clause{-lit_of_glit(err)}};
  } else {
    // error cone reads inputs or gates: latch it, err' = err ∨ error_signal
    auto [e, en] = spec.vm.fresh_state_pair();
    spec.state_vars.push_back(e);
    spec.next_vars.push_back(en);
    spec.latch_lits.push_back(2 * (circuit.max_index + 1));
    int still_ok = spec.vm.fresh(VarGroup::temp);
    spec.trans.add_gate(still_ok, glit(e, true), gneg(err));  // ¬e ∧ ¬err
    spec.trans.add_gate(en, glit(still_ok, true), glit(still_ok, true));
    spec.safe = Cnf{Clause{-e}};
  }

  std::vector<Lit> init;
  init.reserve(spec.state_vars.size());
  for (int s : spec.state_vars) init.push_back(-s);
  spec.initial = Cube(std::move(init));
  spec.trans_cnf = spec.trans.to_cnf();
  return spec;
}

// ----- one-step mixed pre-image skeletons, parameterized by a free state

// states from which the protagonist can enforce reaching F in one step:
// ∀ī ∃c̄, x̄′: T ∧ F′  (x̄ free; x̄′ functional via T)
inline QProblem force1_protagonist(const SafetySpec& spec, const Cnf& f_over_states) {
  QProblem q;
  q.prefix.push_back({QBlock::Q::forall, spec.input_vars});
  q.prefix.push_back({QBlock::Q::exists, spec.control_vars});
  q.defs = spec.trans;
  q.pos = prime(f_over_states, spec.vm);
  q.tag = "force1-protagonist";
  return q;
}

// states from which the antagonist can enforce visiting F in one step:
// ∃ī ∀c̄ ∃x̄′: T ∧ F′
inline QProblem force1_antagonist(const SafetySpec& spec, const Cnf& f_over_states) {
  QProblem q;
  q.prefix.push_back({QBlock::Q::exists, spec.input_vars});
  q.prefix.push_back({QBlock::Q::forall, spec.control_vars});
  q.defs = spec.trans;
  q.pos = prime(f_over_states, spec.vm);
  q.tag = "force1-antagonist";
  return q;
}

// membership test of a concrete state in a pre-image skeleton
inline bool force1_contains(const QProblem& skeleton, const Cube& state, const QLimits& limits = {}) {
  QProblem q = skeleton;
  for (Lit l : state) q.pos.add_unit(l);
  return solve_q(q, limits).status == QStatus::sat;
}

}  // namespace safetysynth
