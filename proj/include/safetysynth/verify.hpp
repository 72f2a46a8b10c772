#pragma once

// Independent checking.  The explicit-state attractor enumerates states as
// bit-vectors and evaluates the functional transition definitions directly,
// so no solver is trusted in the ground truth.  check_winning_region
// re-validates a region CNF against the winning-region conditions in one of
// three modes:
//   strict:  I ⇒ W,  W ⇒ P,  no state of W lets the antagonist force out
//   rg:      conditions I and II plus, per learned clause, unsatisfiability
//            of the reachability-relaxed generalization query; the region
//            file's clause order is the certificate (safe-set prefix first,
//            then learned clauses in addition order)
//   rc:      conditions I and II plus unsatisfiability of the
//            reachability-restricted counterexample query for the region

#include <optional>
#include <string>

#include "formula.hpp"
#include "game.hpp"
#include "qesolve.hpp"
#include "reachopt.hpp"
#include "solver.hpp"

namespace safetysynth {

enum class CheckMode { strict, rg, rc };

inline const char* to_string(CheckMode m) {
  switch (m) {
    case CheckMode::strict: return "strict";
    case CheckMode::rg: return "rg";
    case CheckMode::rc: return "rc";
  }
  return "?";
}

struct ConditionResult {
  bool pass = true;
  Cube witness;           // a violating assignment, when available
  std::string detail;
};

struct RegionReport {
  CheckMode mode = CheckMode::strict;
  ConditionResult initial_in_region;  // (I)
  ConditionResult region_safe;        // (II)
  ConditionResult step;               // (III) or its per-mode relaxation

  bool all_pass() const { return initial_in_region.pass && region_safe.pass && step.pass; }
};

// ---------------------------------------------------------------- oracle

struct ExactVerdict {
  bool realizable = false;
  size_t num_states = 0;
  std::vector<uint8_t> region;  // indexed by state bits, 1 = winning
  uint64_t iterations = 0;

  bool contains(uint64_t state_bits) const { return region[state_bits] != 0; }
};

namespace vdetail {

// flat evaluator for the functional definitions
struct Evaluator {
  const SafetySpec& spec;
  std::vector<uint8_t> val;

  explicit Evaluator(const SafetySpec& s) : spec(s), val(static_cast<size_t>(s.vm.max_var()) + 1, 0) {}

  uint8_t glit_val(GLit g) const {
    if (g == 0) return 0;
    if (g == 1) return 1;
    uint8_t v = val[static_cast<size_t>(gvar(g))];
    return gnegated(g) ? !v : v;
  }

  // state/input/control encoded as bit masks over the spec's variable orders
  uint64_t next_state(uint64_t state, uint64_t input, uint64_t control) {
    for (size_t k = 0; k < spec.state_vars.size(); ++k) val[spec.state_vars[k]] = (state >> k) & 1;
    for (size_t k = 0; k < spec.input_vars.size(); ++k) val[spec.input_vars[k]] = (input >> k) & 1;
    for (size_t k = 0; k < spec.control_vars.size(); ++k) val[spec.control_vars[k]] = (control >> k) & 1;
    for (const DefGate& g : spec.trans.gates) val[g.out] = glit_val(g.in0) & glit_val(g.in1);
    uint64_t next = 0;
    for (size_t k = 0; k < spec.next_vars.size(); ++k)
      next |= static_cast<uint64_t>(val[spec.next_vars[k]]) << k;
    return next;
  }

  bool state_satisfies(const Cnf& f, uint64_t state) {
    for (size_t k = 0; k < spec.state_vars.size(); ++k) val[spec.state_vars[k]] = (state >> k) & 1;
    for (const Clause& c : f) {
      bool sat = false;
      for (Lit l : c) {
        uint8_t v = val[static_cast<size_t>(lit_var(l))];
        if (lit_pos(l) ? v : !v) { sat = true; break; }
      }
      if (!sat) return false;
    }
    return true;
  }
};

}  // namespace vdetail

// νF. P ∧ Force1_protagonist(F) by explicit enumeration; returns as soon as
// the initial state drops out.
inline ExactVerdict explicit_attractor(const SafetySpec& spec, int limit = 20) {
  size_t total_bits = spec.state_vars.size() + spec.input_vars.size() + spec.control_vars.size();
  if (static_cast<int>(total_bits) > limit)
    throw std::invalid_argument("explicit_attractor: " + std::to_string(total_bits) + " bits exceed the limit of " +
                                std::to_string(limit));

  size_t nx = spec.state_vars.size();
  size_t ni = spec.input_vars.size();
  size_t nc = spec.control_vars.size();
  uint64_t num_states = 1ULL << nx;
  uint64_t num_inputs = 1ULL << ni;
  uint64_t num_controls = 1ULL << nc;

  ExactVerdict v;
  v.num_states = num_states;
  v.region.assign(num_states, 0);

  vdetail::Evaluator ev(spec);
  for (uint64_t s = 0; s < num_states; ++s) v.region[s] = ev.state_satisfies(spec.safe, s);

  const uint64_t init = 0;  // latches start at zero
  if (!v.region[init]) {
    v.realizable = false;
    return v;
  }

  bool changed = true;
  while (changed) {
    changed = false;
    ++v.iterations;
    for (uint64_t s = 0; s < num_states; ++s) {
      if (!v.region[s]) continue;
      bool can_stay = true;
      for (uint64_t i = 0; i < num_inputs && can_stay; ++i) {
        bool some_control = false;
        for (uint64_t c = 0; c < num_controls && !some_control; ++c)
          some_control = v.region[ev.next_state(s, i, c)] != 0;
        can_stay = some_control;
      }
      if (!can_stay) {
        v.region[s] = 0;
        changed = true;
        if (s == init) {
          v.realizable = false;
          return v;
        }
      }
    }
  }
  v.realizable = true;
  return v;
}

// losing states as blocked minterms, in state-bit order
inline Cnf oracle_region_cnf(const SafetySpec& spec, const ExactVerdict& v) {
  Cnf f;
  for (uint64_t s = 0; s < v.num_states; ++s) {
    if (v.region[s]) continue;
    std::vector<Lit> clause;
    clause.reserve(spec.state_vars.size());
    for (size_t k = 0; k < spec.state_vars.size(); ++k)
      clause.push_back(((s >> k) & 1) ? -spec.state_vars[k] : spec.state_vars[k]);
    f.add(Clause(std::move(clause)));
  }
  return f;
}

// ----------------------------------------------------- region conditions

struct RegionCompare {
  bool equivalent = true;
  Cube witness;  // satisfies one region and not the other
  std::string direction;
};

inline RegionCompare compare_regions(const Cnf& a, const Cnf& b, const std::vector<int>& state_vars) {
  auto one_side = [&](const Cnf& x, const Cnf& y) -> std::optional<Cube> {
    SolverSession s;
    s.add_cnf(x);
    int next_free = std::max(x.max_var(), y.max_var());
    for (int v : state_vars) next_free = std::max(next_free, v);
    s.add_cnf(negate_cnf_with(y, next_free));
    auto r = s.solve(state_vars);
    if (r.is_sat()) return r.model;
    return std::nullopt;
  };
  RegionCompare out;
  if (auto w = one_side(a, b)) {
    out.equivalent = false;
    out.witness = *w;
    out.direction = "in first, not second";
    return out;
  }
  if (auto w = one_side(b, a)) {
    out.equivalent = false;
    out.witness = *w;
    out.direction = "in second, not first";
  }
  return out;
}

inline RegionReport check_winning_region(const SafetySpec& spec, const Cnf& region, CheckMode mode,
                                         const QLimits& limits = {}) {
  RegionReport report;
  report.mode = mode;

  // (I) I ∧ ¬W unsatisfiable
  {
    SolverSession s;
    int next_free = std::max(region.max_var(), spec.vm.max_var());
    s.add_cnf(negate_cnf_with(region, next_free));
    for (Lit l : spec.initial) s.add_unit(l);
    auto r = s.solve(spec.state_vars);
    if (r.is_sat()) {
      report.initial_in_region.pass = false;
      report.initial_in_region.witness = r.model;
      report.initial_in_region.detail = "initial state outside the region";
    }
  }

  // (II) W ∧ ¬P unsatisfiable
  {
    SolverSession s;
    s.add_cnf(region);
    int next_free = std::max(region.max_var(), spec.vm.max_var());
    s.add_cnf(negate_cnf_with(spec.safe, next_free));
    auto r = s.solve(spec.state_vars);
    if (r.is_sat()) {
      report.region_safe.pass = false;
      report.region_safe.witness = r.model;
      report.region_safe.detail = "region contains an unsafe state";
    }
  }

  switch (mode) {
    case CheckMode::strict: {
      // no state of W lets the antagonist force out: ∃x̄,ī ∀c̄: W ∧ T ∧ ¬W′
      QProblem q;
      q.prefix.push_back({QBlock::Q::exists, spec.state_and_inputs()});
      q.prefix.push_back({QBlock::Q::forall, spec.control_vars});
      q.defs = spec.trans;
      q.pos = region;
      q.negs.push_back(prime(region, spec.vm));
      q.tag = "strict-step-check";
      QResult r = solve_q(q, limits);
      if (r.status == QStatus::sat) {
        report.step.pass = false;
        report.step.witness = r.witness;
        report.step.detail = "antagonist can force out of the region";
      } else if (r.status == QStatus::budget_exceeded) {
        report.step.pass = false;
        report.step.detail = "step check exceeded its budget";
      }
      break;
    }
    case CheckMode::rg: {
      // region file = P-prefix then learned clauses; re-validate each
      // clause's removal certificate against the relaxed query
      size_t prefix = spec.safe.size();
      bool prefix_ok = region.size() >= prefix;
      for (size_t j = 0; prefix_ok && j < prefix; ++j) prefix_ok = region[j] == spec.safe[j];
      if (!prefix_ok) {
        report.step.pass = false;
        report.step.detail = "region does not start with the safe-set clauses; certificates not reconstructible";
        break;
      }
      for (size_t j = prefix; j < region.size(); ++j) {
        Cnf g(std::vector<Clause>(region.clauses().begin(),
                                  region.clauses().begin() + static_cast<long>(j)));
        Cube removed = negate_clause(region[j]);
        QProblem q = rg_generalization_query(g, removed, spec);
        QResult r = solve_q(q, limits);
        if (r.status != QStatus::unsat) {
          report.step.pass = false;
          report.step.witness = r.witness;
          report.step.detail = "clause " + std::to_string(j) + " removal certificate failed";
          break;
        }
      }
      break;
    }
    case CheckMode::rc: {
      QProblem q = rc_counterexample_query(region, spec);
      QResult r = solve_q(q, limits);
      if (r.status != QStatus::unsat) {
        report.step.pass = false;
        report.step.witness = r.witness;
        report.step.detail = "reachable escape state exists";
      }
      break;
    }
  }
  return report;
}

}  // namespace safetysynth
