#pragma once

// Functional definitions: AND gates over solver variables, with constant
// folding, CNF emission and direct evaluation.  The transition relation, the
// template circuitry and every "inner deterministic block" of a quantified
// query are expressed this way, which is what turns the quantified checks
// into plain SAT problems.

#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "formula.hpp"

namespace safetysynth {

// gate literal: 0 = false, 1 = true, 2v = var v, 2v+1 = negation of var v
using GLit = unsigned;

inline GLit glit(int var, bool negated = false) { return 2 * static_cast<unsigned>(var) + (negated ? 1 : 0); }
inline GLit glit_of_lit(Lit l) { return glit(lit_var(l), !lit_pos(l)); }
inline GLit gneg(GLit l) { return l ^ 1u; }
inline int gvar(GLit l) { return static_cast<int>(l >> 1); }
inline bool gnegated(GLit l) { return l & 1u; }
inline Lit lit_of_glit(GLit l) { return gnegated(l) ? -gvar(l) : gvar(l); }

struct DefGate {
  int out;  // defined variable
  GLit in0;
  GLit in1;
};

struct FunctionalDefs {
  std::vector<DefGate> gates;  // topological: inputs defined earlier or free

  void add_gate(int out, GLit a, GLit b) { gates.push_back({out, a, b}); }

  std::vector<int> defined_vars() const {
    std::vector<int> vs;
    vs.reserve(gates.size());
    for (const DefGate& g : gates) vs.push_back(g.out);
    return vs;
  }

  // out <-> in0 & in1 as three clauses per gate
  Cnf to_cnf() const {
    Cnf f;
    for (const DefGate& g : gates) {
      Lit o = g.out;
      if (g.in0 == 0 || g.in1 == 0 || g.in0 == gneg(g.in1)) {
        f.add_unit(-o);
        continue;
      }
      auto side = [&](GLit in) -> std::optional<Lit> {
        if (in == 1) return std::nullopt;  // constant true contributes nothing
        return lit_of_glit(in);
      };
      std::optional<Lit> a = side(g.in0), b = side(g.in1);
      if (!a && !b) {
        f.add_unit(o);
      } else if (!a || !b) {
        Lit x = a ? *a : *b;
        f.add(Clause{-o, x});
        f.add(Clause{o, -x});
      } else if (*a == *b) {
        f.add(Clause{-o, *a});
        f.add(Clause{o, -*a});
      } else {
        f.add(Clause{-o, *a});
        f.add(Clause{-o, *b});
        f.add(Clause{o, -*a, -*b});
      }
    }
    return f;
  }

  void eval(Assignment& a) const {
    for (const DefGate& g : gates) a[g.out] = eval_glit(g.in0, a) && eval_glit(g.in1, a);
  }

  static bool eval_glit(GLit l, const Assignment& a) {
    if (l == 0) return false;
    if (l == 1) return true;
    auto it = a.find(gvar(l));
    bool v = it != a.end() && it->second;
    return gnegated(l) ? !v : v;
  }

  void append(const FunctionalDefs& other) {
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
  }
};

// Gate builder with constant folding and structural hashing, allocating
// output variables through a fresh-id callback.
class DefsBuilder {
 public:
  explicit DefsBuilder(std::function<int()> fresh_var) : fresh_(std::move(fresh_var)) {}

  FunctionalDefs& defs() { return defs_; }
  const FunctionalDefs& defs() const { return defs_; }

  GLit mk_and(GLit a, GLit b) {
    if (a > b) std::swap(a, b);
    if (a == 0 || a == gneg(b)) return 0;
    if (a == 1 || a == b) return b;
    auto key = std::make_pair(a, b);
    if (auto it = hash_.find(key); it != hash_.end()) return it->second;
    int out = fresh_();
    defs_.add_gate(out, a, b);
    GLit l = glit(out);
    hash_[key] = l;
    return l;
  }
  GLit mk_or(GLit a, GLit b) { return gneg(mk_and(gneg(a), gneg(b))); }
  GLit mk_xor(GLit a, GLit b) { return mk_or(mk_and(a, gneg(b)), mk_and(gneg(a), b)); }
  GLit mk_eq(GLit a, GLit b) { return gneg(mk_xor(a, b)); }
  GLit mk_mux(GLit sel, GLit t, GLit e) { return mk_or(mk_and(sel, t), mk_and(gneg(sel), e)); }
  GLit mk_and_all(const std::vector<GLit>& ls) {
    GLit acc = 1;
    for (GLit l : ls) acc = mk_and(acc, l);
    return acc;
  }
  GLit mk_or_all(const std::vector<GLit>& ls) {
    GLit acc = 0;
    for (GLit l : ls) acc = mk_or(acc, l);
    return acc;
  }

  // literal of a CNF formula: conjunction of clause disjunctions
  GLit mk_cnf(const Cnf& f, const std::unordered_map<int, GLit>& env) {
    GLit acc = 1;
    for (const Clause& c : f) {
      GLit cl = 0;
      for (Lit l : c) {
        GLit base = env.count(lit_var(l)) ? env.at(lit_var(l)) : glit(lit_var(l));
        cl = mk_or(cl, lit_pos(l) ? base : gneg(base));
      }
      acc = mk_and(acc, cl);
    }
    return acc;
  }

 private:
  struct PairHash {
    size_t operator()(const std::pair<GLit, GLit>& p) const {
      return std::hash<uint64_t>()((static_cast<uint64_t>(p.first) << 32) | p.second);
    }
  };
  std::function<int()> fresh_;
  FunctionalDefs defs_;
  std::unordered_map<std::pair<GLit, GLit>, GLit, PairHash> hash_;
};

}  // namespace safetysynth
