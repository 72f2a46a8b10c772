#pragma once

// Propositional core: variables partitioned into semantic groups, literals,
// cubes, clauses and CNF formulas.
//
// Literals are encoded as nonzero signed integers, DIMACS style: +v is the
// unnegated variable v, -v its negation.  Variable ids are positive and
// allocated by a VarManager, which also maintains the pairing between a
// state variable and its next-state copy, and between current and
// previous-state copies.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace safetysynth {

using Lit = int;

inline int lit_var(Lit l) { return l < 0 ? -l : l; }
inline bool lit_pos(Lit l) { return l > 0; }
inline Lit lit_neg(Lit l) { return -l; }

enum class VarGroup : uint8_t {
  state,
  input,
  control,
  next_state,
  temp,
  prev_state,
  prev_input,
  prev_control,
  template_param,
};

inline const char* to_string(VarGroup g) {
  switch (g) {
    case VarGroup::state: return "State";
    case VarGroup::input: return "Input";
    case VarGroup::control: return "Control";
    case VarGroup::next_state: return "NextState";
    case VarGroup::temp: return "Temp";
    case VarGroup::prev_state: return "PrevState";
    case VarGroup::prev_input: return "PrevInput";
    case VarGroup::prev_control: return "PrevControl";
    case VarGroup::template_param: return "TemplateParam";
  }
  return "?";
}

// Sorted literal set with at most one occurrence per variable. Shared
// representation of cubes and clauses; the semantic reading (conjunction
// vs. disjunction) lives in the wrapper types below.
class LitSet {
 public:
  LitSet() = default;
  explicit LitSet(std::vector<Lit> lits) : lits_(std::move(lits)) { normalize(); }
  LitSet(std::initializer_list<Lit> lits) : lits_(lits) { normalize(); }

  const std::vector<Lit>& lits() const { return lits_; }
  bool empty() const { return lits_.empty(); }
  size_t size() const { return lits_.size(); }
  auto begin() const { return lits_.begin(); }
  auto end() const { return lits_.end(); }

  bool contains(Lit l) const {
    auto it = std::lower_bound(lits_.begin(), lits_.end(), l, by_var_then_sign);
    return it != lits_.end() && *it == l;
  }
  bool mentions(int var) const { return contains(var) || contains(-var); }

  // true iff every literal of this set occurs in other
  bool subset_of(const LitSet& other) const {
    size_t j = 0;
    for (Lit l : lits_) {
      while (j < other.lits_.size() && by_var_then_sign(other.lits_[j], l)) ++j;
      if (j == other.lits_.size() || other.lits_[j] != l) return false;
    }
    return true;
  }

  void add(Lit l) {
    if (l == 0) throw std::invalid_argument("literal 0");
    if (mentions(lit_var(l))) {
      if (!contains(l)) throw std::logic_error("opposite literal already present");
      return;
    }
    lits_.insert(std::upper_bound(lits_.begin(), lits_.end(), l, by_var_then_sign), l);
  }

  LitSet without(Lit l) const {
    std::vector<Lit> out;
    out.reserve(lits_.size());
    for (Lit x : lits_)
      if (x != l) out.push_back(x);
    return LitSet(std::move(out));
  }

  bool operator==(const LitSet& other) const { return lits_ == other.lits_; }

 private:
  static bool by_var_then_sign(Lit a, Lit b) {
    if (lit_var(a) != lit_var(b)) return lit_var(a) < lit_var(b);
    return a > b;  // positive before negative
  }

  void normalize() {
    std::sort(lits_.begin(), lits_.end(), by_var_then_sign);
    lits_.erase(std::unique(lits_.begin(), lits_.end()), lits_.end());
    for (size_t i = 1; i < lits_.size(); ++i)
      if (lit_var(lits_[i]) == lit_var(lits_[i - 1]))
        throw std::invalid_argument("variable occurs with both signs");
  }

  std::vector<Lit> lits_;
};

// Conjunction of literals; the empty cube is true.
struct Cube : LitSet {
  using LitSet::LitSet;
  Cube() = default;
  explicit Cube(const LitSet& s) : LitSet(s) {}
};

// Disjunction of literals; the empty clause is false.
struct Clause : LitSet {
  using LitSet::LitSet;
  Clause() = default;
  explicit Clause(const LitSet& s) : LitSet(s) {}
};

inline bool is_subcube(const Cube& a, const Cube& b) { return a.subset_of(b); }

inline Clause negate_cube(const Cube& c) {
  std::vector<Lit> out;
  out.reserve(c.size());
  for (Lit l : c) out.push_back(-l);
  return Clause(std::move(out));
}

inline Cube negate_clause(const Clause& c) {
  std::vector<Lit> out;
  out.reserve(c.size());
  for (Lit l : c) out.push_back(-l);
  return Cube(std::move(out));
}

// Conjunction of clauses, order-preserving. Clause order never affects
// semantics but is kept stable: learned-region files rely on it.
class Cnf {
 public:
  Cnf() = default;
  explicit Cnf(std::vector<Clause> clauses) : clauses_(std::move(clauses)) {}
  Cnf(std::initializer_list<Clause> clauses) : clauses_(clauses) {}

  const std::vector<Clause>& clauses() const { return clauses_; }
  size_t size() const { return clauses_.size(); }
  bool empty() const { return clauses_.empty(); }
  auto begin() const { return clauses_.begin(); }
  auto end() const { return clauses_.end(); }
  const Clause& operator[](size_t i) const { return clauses_[i]; }

  void add(Clause c) { clauses_.push_back(std::move(c)); }
  void add_unit(Lit l) { clauses_.push_back(Clause{l}); }
  void append(const Cnf& other) {
    clauses_.insert(clauses_.end(), other.clauses_.begin(), other.clauses_.end());
  }

  bool has_empty_clause() const {
    for (const Clause& c : clauses_)
      if (c.empty()) return true;
    return false;
  }

  // duplicate clauses are permitted; this pass drops them
  Cnf deduplicated() const {
    std::vector<Clause> out;
    for (const Clause& c : clauses_) {
      bool seen = false;
      for (const Clause& d : out)
        if (d == c) { seen = true; break; }
      if (!seen) out.push_back(c);
    }
    return Cnf(std::move(out));
  }

  int max_var() const {
    int m = 0;
    for (const Clause& c : clauses_)
      for (Lit l : c) m = std::max(m, lit_var(l));
    return m;
  }

  std::vector<int> vars() const {
    std::vector<int> vs;
    for (const Clause& c : clauses_)
      for (Lit l : c) vs.push_back(lit_var(l));
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
  }

  bool operator==(const Cnf& other) const { return clauses_ == other.clauses_; }

 private:
  std::vector<Clause> clauses_;
};

inline Cnf cnf_true() { return Cnf{}; }
inline Cnf cnf_false() { return Cnf{Clause{}}; }

// Registry of variables by group plus the pairing maps used for priming and
// previous-state copies. Fresh ids strictly increase.
class VarManager {
 public:
  int fresh(VarGroup g) {
    group_.push_back(g);
    return static_cast<int>(group_.size());  // ids are 1-based
  }

  VarGroup group(int var) const {
    check(var);
    return group_[static_cast<size_t>(var) - 1];
  }
  int max_var() const { return static_cast<int>(group_.size()); }

  // allocates a state variable together with its next-state partner
  std::pair<int, int> fresh_state_pair() {
    int s = fresh(VarGroup::state);
    int n = fresh(VarGroup::next_state);
    next_of_[s] = n;
    state_of_[n] = s;
    return {s, n};
  }

  int next_of(int state_var) const {
    auto it = next_of_.find(state_var);
    if (it == next_of_.end()) throw std::out_of_range("variable has no next-state partner");
    return it->second;
  }
  int state_of(int next_var) const {
    auto it = state_of_.find(next_var);
    if (it == state_of_.end()) throw std::out_of_range("variable has no state partner");
    return it->second;
  }
  bool has_next(int var) const { return next_of_.count(var) != 0; }

  // previous-state copies for the reachability optimizations; allocated lazily
  int prev_of(int var) {
    auto it = prev_of_.find(var);
    if (it != prev_of_.end()) return it->second;
    VarGroup g = group(var);
    VarGroup pg;
    switch (g) {
      case VarGroup::state: pg = VarGroup::prev_state; break;
      case VarGroup::input: pg = VarGroup::prev_input; break;
      case VarGroup::control: pg = VarGroup::prev_control; break;
      default: throw std::logic_error("only state/input/control variables have previous copies");
    }
    int p = fresh(pg);
    prev_of_[var] = p;
    unprev_of_[p] = var;
    return p;
  }
  int unprev_of(int prev_var) const {
    auto it = unprev_of_.find(prev_var);
    if (it == unprev_of_.end()) throw std::out_of_range("variable has no unprimed partner");
    return it->second;
  }

 private:
  void check(int var) const {
    if (var < 1 || var > max_var()) throw std::out_of_range("unknown variable " + std::to_string(var));
  }

  std::vector<VarGroup> group_;
  std::unordered_map<int, int> next_of_, state_of_, prev_of_, unprev_of_;
};

// Replaces every state variable by its next-state partner. Rejects formulas
// that mention anything without a partner.
inline Cnf prime(const Cnf& f, const VarManager& vm) {
  std::vector<Clause> out;
  out.reserve(f.size());
  for (const Clause& c : f) {
    std::vector<Lit> lits;
    lits.reserve(c.size());
    for (Lit l : c) {
      int v = lit_var(l);
      if (vm.group(v) != VarGroup::state || !vm.has_next(v))
        throw std::invalid_argument("prime: variable " + std::to_string(v) + " has no next-state partner");
      int n = vm.next_of(v);
      lits.push_back(lit_pos(l) ? n : -n);
    }
    out.push_back(Clause(std::move(lits)));
  }
  return Cnf(std::move(out));
}

inline Cnf unprime(const Cnf& f, const VarManager& vm) {
  std::vector<Clause> out;
  out.reserve(f.size());
  for (const Clause& c : f) {
    std::vector<Lit> lits;
    lits.reserve(c.size());
    for (Lit l : c) {
      int s = vm.state_of(lit_var(l));
      lits.push_back(lit_pos(l) ? s : -s);
    }
    out.push_back(Clause(std::move(lits)));
  }
  return Cnf(std::move(out));
}

inline Clause prime_clause(const Clause& c, const VarManager& vm) {
  Cnf f{c};
  return prime(f, vm)[0];
}

// One-sided negation (Plaisted-Greenbaum style).  The result G satisfies:
// every model of G projected to f's variables falsifies f, and every
// assignment falsifying f extends to a model of G.  Linear blow-up: one
// selector per clause.  Fresh variables come from next_free_id.
inline Cnf negate_cnf_with(const Cnf& f, int& next_free_id) {
  if (f.empty()) return cnf_false();           // not(true)
  if (f.has_empty_clause()) return cnf_true(); // not(false)
  if (f.size() == 1) {
    Cnf g;
    for (Lit l : f[0]) g.add_unit(-l);
    return g;
  }
  Cnf g;
  std::vector<Lit> some_clause_falsified;
  some_clause_falsified.reserve(f.size());
  for (const Clause& c : f) {
    int sel = next_free_id++;
    some_clause_falsified.push_back(sel);
    for (Lit l : c) g.add(Clause{-sel, -l});
  }
  g.add(Clause(std::move(some_clause_falsified)));
  return g;
}

// Same, with selectors registered as Temp variables. A fresh block per call:
// selectors are never reused across invocations.
inline Cnf cnf_negate(const Cnf& f, VarManager& vm) {
  if (f.empty()) return cnf_false();
  if (f.has_empty_clause()) return cnf_true();
  if (f.size() == 1) {
    Cnf g;
    for (Lit l : f[0]) g.add_unit(-l);
    return g;
  }
  Cnf g;
  std::vector<Lit> some_clause_falsified;
  some_clause_falsified.reserve(f.size());
  for (const Clause& c : f) {
    int sel = vm.fresh(VarGroup::temp);
    some_clause_falsified.push_back(sel);
    for (Lit l : c) g.add(Clause{-sel, -l});
  }
  g.add(Clause(std::move(some_clause_falsified)));
  return g;
}

// ----- plain-assignment evaluation, used by tests and the explicit oracle

using Assignment = std::unordered_map<int, bool>;

inline bool eval_lit(Lit l, const Assignment& a) {
  auto it = a.find(lit_var(l));
  bool v = it != a.end() && it->second;
  return lit_pos(l) ? v : !v;
}

inline bool eval_clause(const Clause& c, const Assignment& a) {
  for (Lit l : c)
    if (eval_lit(l, a)) return true;
  return false;
}

inline bool eval_cube(const Cube& c, const Assignment& a) {
  for (Lit l : c)
    if (!eval_lit(l, a)) return false;
  return true;
}

inline bool eval_cnf(const Cnf& f, const Assignment& a) {
  for (const Clause& c : f)
    if (!eval_clause(c, a)) return false;
  return true;
}

// true iff the two cubes agree on every shared variable
inline bool cubes_compatible(const Cube& a, const Cube& b) {
  for (Lit l : a)
    if (b.contains(-l)) return false;
  return true;
}

}  // namespace safetysynth
