#pragma once

// Reachability-based query strengthenings, built from previous-state copies
// x̄*, ī*, c̄* of the variable blocks:
//
//   RG strengthens the cube-generalization check: a cube may also be removed
//   when none of its states is initial or has a predecessor inside
//   G ∧ ¬cube, even if the protagonist could hold on from it.
//
//   RC strengthens the counterexample check: only escape states that are
//   initial or have a distinct predecessor in F are considered.
//
// The side condition is a single defined signal (gates over the starred and
// current blocks), so the resulting skeletons stay within the quantified
// engine's positive-matrix discipline.  The learning loop additionally keeps
// an incremental session with the same structure (see learning.hpp).

#include "defs.hpp"
#include "formula.hpp"
#include "game.hpp"
#include "qesolve.hpp"

namespace safetysynth {

// previous-state copies of x̄, ī, c̄ plus the lowered copy of T feeding the
// current state; allocated against a caller-owned VarManager clone
struct PrevBlock {
  std::vector<int> prev_state;    // x̄*
  std::vector<int> prev_input;    // ī*
  std::vector<int> prev_control;  // c̄*
  FunctionalDefs prev_trans;      // starred gate copies
  std::vector<int> prev_next;     // latch k's value after the starred step

  std::vector<int> all_vars() const {
    std::vector<int> vs(prev_state);
    vs.insert(vs.end(), prev_input.begin(), prev_input.end());
    vs.insert(vs.end(), prev_control.begin(), prev_control.end());
    return vs;
  }
};

inline PrevBlock make_prev_block(const SafetySpec& spec, VarManager& vm) {
  PrevBlock p;
  std::unordered_map<int, int> to_prev;
  for (int v : spec.state_vars) {
    int pv = vm.prev_of(v);
    p.prev_state.push_back(pv);
    to_prev[v] = pv;
  }
  for (int v : spec.input_vars) {
    int pv = vm.prev_of(v);
    p.prev_input.push_back(pv);
    to_prev[v] = pv;
  }
  for (int v : spec.control_vars) {
    int pv = vm.prev_of(v);
    p.prev_control.push_back(pv);
    to_prev[v] = pv;
  }
  std::unordered_map<int, int> gate_copy;
  auto remap = [&](GLit g) -> GLit {
    if (g <= 1) return g;
    int v = gvar(g);
    int nv;
    if (auto it = to_prev.find(v); it != to_prev.end()) nv = it->second;
    else if (auto gi = gate_copy.find(v); gi != gate_copy.end()) nv = gi->second;
    else throw std::logic_error("prev-block remap hit an undefined variable");
    return glit(nv, gnegated(g));
  };
  std::unordered_map<int, size_t> next_index;
  for (size_t k = 0; k < spec.next_vars.size(); ++k) next_index[spec.next_vars[k]] = k;
  p.prev_next.resize(spec.next_vars.size(), 0);
  for (const DefGate& g : spec.trans.gates) {
    int out_copy = vm.fresh(VarGroup::temp);
    p.prev_trans.add_gate(out_copy, remap(g.in0), remap(g.in1));
    gate_copy[g.out] = out_copy;
    if (auto it = next_index.find(g.out); it != next_index.end()) p.prev_next[it->second] = out_copy;
  }
  return p;
}

// substitute state vars by their starred copies
inline Cnf to_prev(const Cnf& f, const SafetySpec& spec, const PrevBlock& p) {
  std::unordered_map<int, int> m;
  for (size_t k = 0; k < spec.state_vars.size(); ++k) m[spec.state_vars[k]] = p.prev_state[k];
  std::vector<Clause> out;
  for (const Clause& c : f) {
    std::vector<Lit> lits;
    for (Lit l : c) {
      auto it = m.find(lit_var(l));
      if (it == m.end()) throw std::invalid_argument("to_prev: formula mentions a non-state variable");
      lits.push_back(lit_pos(l) ? it->second : -it->second);
    }
    out.push_back(Clause(std::move(lits)));
  }
  return Cnf(std::move(out));
}

namespace reachdetail {

// reachable-here signal: I(x̄) ∨ extra ∧ F*(x̄*) ∧ (x̄ = next(x̄*, ī*, c̄*))
inline GLit reach_signal(DefsBuilder& b, const SafetySpec& spec, const PrevBlock& p,
                         const Cnf& f_star, GLit extra) {
  std::vector<GLit> init_lits;
  for (Lit l : spec.initial) init_lits.push_back(glit_of_lit(l));
  GLit is_init = b.mk_and_all(init_lits);
  std::vector<GLit> conj;
  conj.push_back(extra);
  conj.push_back(b.mk_cnf(f_star, {}));
  for (size_t k = 0; k < spec.state_vars.size(); ++k)
    conj.push_back(b.mk_eq(glit(spec.state_vars[k]), glit(p.prev_next[k])));
  return b.mk_or(is_init, b.mk_and_all(conj));
}

inline void add_glit_unit(Cnf& pos, GLit g) {
  if (g == 1) return;
  if (g == 0) {
    pos.add(Clause{});
    return;
  }
  pos.add_unit(lit_of_glit(g));
}

}  // namespace reachdetail

// Generalization query with reachability:
//   ∃x̄*,ī*,c̄*,x̄ ∀ī ∃c̄:  (I(x̄) ∨ G(x̄*) ∧ ¬xg(x̄*) ∧ T(x̄*,ī*,c̄*,x̄))
//                         ∧ xg(x̄) ∧ G(x̄) ∧ T ∧ G(x̄′)
// Unsatisfiability permits removing xg from G.
inline QProblem rg_generalization_query(const Cnf& g, const Cube& xg, const SafetySpec& spec) {
  auto vm = std::make_shared<VarManager>(spec.vm);
  PrevBlock p = make_prev_block(spec, *vm);
  DefsBuilder b([vm] { return vm->fresh(VarGroup::temp); });
  b.defs() = spec.trans;
  b.defs().append(p.prev_trans);

  Cnf not_xg_star = to_prev(Cnf{negate_cube(xg)}, spec, p);
  GLit extra = b.mk_cnf(not_xg_star, {});
  GLit reach = reachdetail::reach_signal(b, spec, p, to_prev(g, spec, p), extra);

  QProblem q;
  Cnf pos;
  reachdetail::add_glit_unit(pos, reach);
  for (Lit l : xg) pos.add_unit(l);
  pos.append(g);
  pos.append(prime(g, spec.vm));
  q.pos = std::move(pos);
  q.defs = std::move(b.defs());

  std::vector<int> outer = p.all_vars();
  outer.insert(outer.end(), spec.state_vars.begin(), spec.state_vars.end());
  q.prefix.push_back({QBlock::Q::exists, outer});
  q.prefix.push_back({QBlock::Q::forall, spec.input_vars});
  q.prefix.push_back({QBlock::Q::exists, spec.control_vars});
  q.tag = "rg-generalization";
  return q;
}

// Reachability-restricted counterexample query:
//   ∃x̄*,ī*,c̄*,x̄,ī ∀c̄:  (I(x̄) ∨ (x̄* ≠ x̄) ∧ F(x̄*) ∧ T(x̄*,ī*,c̄*,x̄))
//                        ∧ F(x̄) ∧ T ∧ ¬F(x̄′)
inline QProblem rc_counterexample_query(const Cnf& f, const SafetySpec& spec) {
  auto vm = std::make_shared<VarManager>(spec.vm);
  PrevBlock p = make_prev_block(spec, *vm);
  DefsBuilder b([vm] { return vm->fresh(VarGroup::temp); });
  b.defs() = spec.trans;
  b.defs().append(p.prev_trans);

  std::vector<GLit> diffs;
  for (size_t k = 0; k < spec.state_vars.size(); ++k)
    diffs.push_back(b.mk_xor(glit(spec.state_vars[k]), glit(p.prev_state[k])));
  GLit any_diff = b.mk_or_all(diffs);
  GLit reach = reachdetail::reach_signal(b, spec, p, to_prev(f, spec, p), any_diff);

  QProblem q;
  Cnf pos;
  reachdetail::add_glit_unit(pos, reach);
  pos.append(f);
  q.pos = std::move(pos);
  q.negs.push_back(prime(f, spec.vm));
  q.defs = std::move(b.defs());

  std::vector<int> outer = p.all_vars();
  outer.insert(outer.end(), spec.state_vars.begin(), spec.state_vars.end());
  outer.insert(outer.end(), spec.input_vars.begin(), spec.input_vars.end());
  q.prefix.push_back({QBlock::Q::exists, outer});
  q.prefix.push_back({QBlock::Q::forall, spec.control_vars});
  q.tag = "rc-counterexample";
  return q;
}

}  // namespace safetysynth
