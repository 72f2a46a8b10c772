#pragma once

// AIGER circuits in ASCII (aag) form, with the synthesis-competition
// convention that inputs named with the prefix "controllable_" belong to the
// protagonist.  Only the published aag v1 format is accepted: binary aig
// files and AIGER 1.9 extensions are rejected with a clear message.

#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "formula.hpp"

namespace safetysynth {

// aiger literals: 0 = false, 1 = true, 2v = variable v, 2v+1 = its negation
using AigLit = unsigned;

inline AigLit aig_neg(AigLit l) { return l ^ 1u; }
inline unsigned aig_var(AigLit l) { return l >> 1; }
inline bool aig_negated(AigLit l) { return l & 1u; }

struct AigerParseError : std::runtime_error {
  int line;
  AigerParseError(int line_, const std::string& msg)
      : std::runtime_error("aag line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct AigerAnd {
  AigLit lhs;   // even, defined
  AigLit rhs0;
  AigLit rhs1;
};

struct AigerCircuit {
  unsigned max_index = 0;
  std::vector<AigLit> inputs;                      // even literals
  std::vector<std::pair<AigLit, AigLit>> latches;  // (latch literal, next literal)
  std::vector<AigLit> outputs;
  std::vector<AigerAnd> ands;                      // topological: lhs > both rhs
  std::map<unsigned, std::string> input_names;     // position -> symbol
  std::map<unsigned, std::string> latch_names;
  std::map<unsigned, std::string> output_names;
  std::vector<std::string> comments;

  const std::string* input_name(unsigned pos) const {
    auto it = input_names.find(pos);
    return it == input_names.end() ? nullptr : &it->second;
  }
};

inline constexpr const char* kControllablePrefix = "controllable_";

struct InputPartition {
  std::vector<AigLit> controllable;
  std::vector<AigLit> uncontrollable;
};

// Controllability is decided solely by the case-sensitive symbol prefix;
// unnamed inputs default to uncontrollable.
inline InputPartition partition_inputs(const AigerCircuit& c) {
  InputPartition p;
  for (unsigned pos = 0; pos < c.inputs.size(); ++pos) {
    const std::string* name = c.input_name(pos);
    if (name && name->rfind(kControllablePrefix, 0) == 0)
      p.controllable.push_back(c.inputs[pos]);
    else
      p.uncontrollable.push_back(c.inputs[pos]);
  }
  return p;
}

namespace detail {

inline void validate(const AigerCircuit& c, int header_line = 1) {
  std::vector<char> defined(c.max_index + 1, 0);
  defined[0] = 1;  // constant
  auto define = [&](AigLit l, const char* what) {
    if (aig_negated(l)) throw AigerParseError(header_line, std::string(what) + " literal must be even");
    if (aig_var(l) > c.max_index) throw AigerParseError(header_line, std::string(what) + " literal exceeds maximum index");
    if (l == 0) throw AigerParseError(header_line, std::string(what) + " literal must be nonzero");
    if (defined[aig_var(l)]) throw AigerParseError(header_line, "literal defined twice");
    defined[aig_var(l)] = 1;
  };
  for (AigLit in : c.inputs) define(in, "input");
  for (auto [l, next] : c.latches) { define(l, "latch"); (void)next; }
  for (const AigerAnd& a : c.ands) {
    define(a.lhs, "and");
    if (a.lhs <= a.rhs0 || a.lhs <= a.rhs1)
      throw AigerParseError(header_line, "and gate is not topologically ordered");
  }
  auto used = [&](AigLit l, const char* what) {
    if (aig_var(l) > c.max_index) throw AigerParseError(header_line, std::string(what) + " exceeds maximum index");
    if (aig_var(l) != 0 && !defined[aig_var(l)])
      throw AigerParseError(header_line, std::string(what) + " references an undefined literal");
  };
  for (auto [l, next] : c.latches) { (void)l; used(next, "latch next-state"); }
  for (AigLit o : c.outputs) used(o, "output");
  for (const AigerAnd& a : c.ands) {
    used(a.rhs0, "and operand");
    used(a.rhs1, "and operand");
  }
}

}  // namespace detail

inline AigerCircuit parse_aag(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next_line()) throw AigerParseError(1, "empty file");
  if (line.rfind("aig ", 0) == 0)
    throw AigerParseError(1, "binary aig format not supported, convert to ASCII aag");
  std::istringstream header(line);
  std::string magic;
  unsigned m = 0, i = 0, l = 0, o = 0, a = 0;
  header >> magic >> m >> i >> l >> o >> a;
  if (magic != "aag" || header.fail())
    throw AigerParseError(1, "malformed header, expected 'aag M I L O A'");
  std::string extra;
  if (header >> extra)
    throw AigerParseError(1, "AIGER 1.9 extensions (justice/fairness) are not supported");

  AigerCircuit c;
  c.max_index = m;

  auto parse_lit = [&](const std::string& tok) -> AigLit {
    for (char ch : tok)
      if (!isdigit(static_cast<unsigned char>(ch))) throw AigerParseError(line_no, "expected a literal, got '" + tok + "'");
    if (tok.empty()) throw AigerParseError(line_no, "expected a literal");
    return static_cast<AigLit>(std::stoul(tok));
  };

  for (unsigned k = 0; k < i; ++k) {
    if (!next_line()) throw AigerParseError(line_no + 1, "missing input definition");
    c.inputs.push_back(parse_lit(line));
  }
  for (unsigned k = 0; k < l; ++k) {
    if (!next_line()) throw AigerParseError(line_no + 1, "missing latch definition");
    std::istringstream ls(line);
    std::string lt, nt;
    if (!(ls >> lt >> nt)) throw AigerParseError(line_no, "latch line needs '<lit> <next>'");
    c.latches.emplace_back(parse_lit(lt), parse_lit(nt));
  }
  for (unsigned k = 0; k < o; ++k) {
    if (!next_line()) throw AigerParseError(line_no + 1, "missing output definition");
    c.outputs.push_back(parse_lit(line));
  }
  for (unsigned k = 0; k < a; ++k) {
    if (!next_line()) throw AigerParseError(line_no + 1, "missing and-gate definition");
    std::istringstream ls(line);
    std::string lt, r0, r1;
    if (!(ls >> lt >> r0 >> r1)) throw AigerParseError(line_no, "and line needs '<lhs> <rhs0> <rhs1>'");
    c.ands.push_back({parse_lit(lt), parse_lit(r0), parse_lit(r1)});
  }

  // symbol table and comments
  bool in_comments = false;
  while (next_line()) {
    if (line.empty()) continue;
    if (in_comments) {
      c.comments.push_back(line);
      continue;
    }
    if (line == "c") {
      in_comments = true;
      continue;
    }
    char kind = line[0];
    size_t space = line.find(' ');
    if (space == std::string::npos || (kind != 'i' && kind != 'l' && kind != 'o'))
      throw AigerParseError(line_no, "malformed symbol line");
    unsigned pos = 0;
    try {
      pos = static_cast<unsigned>(std::stoul(line.substr(1, space - 1)));
    } catch (...) {
      throw AigerParseError(line_no, "malformed symbol position");
    }
    std::string name = line.substr(space + 1);
    auto put = [&](std::map<unsigned, std::string>& table, size_t limit, const char* what) {
      if (pos >= limit) throw AigerParseError(line_no, std::string(what) + " symbol position out of range");
      table[pos] = name;
    };
    if (kind == 'i') put(c.input_names, c.inputs.size(), "input");
    else if (kind == 'l') put(c.latch_names, c.latches.size(), "latch");
    else put(c.output_names, c.outputs.size(), "output");
  }

  detail::validate(c);
  return c;
}

inline std::string write_aag(const AigerCircuit& c) {
  std::ostringstream out;
  out << "aag " << c.max_index << " " << c.inputs.size() << " " << c.latches.size() << " "
      << c.outputs.size() << " " << c.ands.size() << "\n";
  for (AigLit in : c.inputs) out << in << "\n";
  for (auto [l, next] : c.latches) out << l << " " << next << "\n";
  for (AigLit o : c.outputs) out << o << "\n";
  for (const AigerAnd& a : c.ands) out << a.lhs << " " << a.rhs0 << " " << a.rhs1 << "\n";
  for (auto& [pos, name] : c.input_names) out << "i" << pos << " " << name << "\n";
  for (auto& [pos, name] : c.latch_names) out << "l" << pos << " " << name << "\n";
  for (auto& [pos, name] : c.output_names) out << "o" << pos << " " << name << "\n";
  if (!c.comments.empty()) {
    out << "c\n";
    for (const std::string& line : c.comments) out << line << "\n";
  }
  return out.str();
}

// Local AND-gate simplification: constant propagation plus structural
// hashing.  Mirrors running an external optimizer over a generated circuit;
// the result references only live gates and renumbers them densely.
inline AigerCircuit simplify(const AigerCircuit& c) {
  std::vector<AigLit> rewrite(2 * (c.max_index + 1));
  for (AigLit l = 0; l < rewrite.size(); ++l) rewrite[l] = l;

  std::map<std::pair<AigLit, AigLit>, AigLit> hashed;
  std::vector<AigerAnd> gates;
  std::vector<char> keep(c.ands.size(), 0);

  auto rw = [&](AigLit l) { return rewrite[l]; };

  for (size_t gi = 0; gi < c.ands.size(); ++gi) {
    const AigerAnd& g = c.ands[gi];
    AigLit a = rw(g.rhs0), b = rw(g.rhs1);
    if (a > b) std::swap(a, b);
    AigLit result;
    if (a == 0 || b == 0 || a == aig_neg(b)) result = 0;
    else if (a == 1) result = b;
    else if (b == 1 || a == b) result = a;
    else if (auto it = hashed.find({a, b}); it != hashed.end()) result = it->second;
    else {
      hashed[{a, b}] = g.lhs;
      keep[gi] = 1;
      gates.push_back({g.lhs, a, b});
      result = g.lhs;
    }
    rewrite[g.lhs] = result;
    rewrite[aig_neg(g.lhs)] = aig_neg(result);
  }

  // drop gates not reachable from latches/outputs
  std::vector<char> used(c.max_index + 1, 0);
  std::vector<unsigned> stack;
  auto mark = [&](AigLit l) {
    if (aig_var(l) != 0 && !used[aig_var(l)]) {
      used[aig_var(l)] = 1;
      stack.push_back(aig_var(l));
    }
  };
  for (auto [l, next] : c.latches) { (void)l; mark(rw(next)); }
  for (AigLit o : c.outputs) mark(rw(o));
  std::map<unsigned, const AigerAnd*> by_var;
  for (const AigerAnd& g : gates) by_var[aig_var(g.lhs)] = &g;
  while (!stack.empty()) {
    unsigned v = stack.back();
    stack.pop_back();
    auto it = by_var.find(v);
    if (it != by_var.end()) {
      mark(it->second->rhs0);
      mark(it->second->rhs1);
    }
  }

  // renumber: inputs and latches keep their relative order
  AigerCircuit out;
  std::vector<AigLit> remap(2 * (c.max_index + 1), 0);
  remap[1] = 1;
  unsigned next_var = 1;
  auto assign = [&](AigLit old_even) {
    remap[old_even] = 2 * next_var;
    remap[aig_neg(old_even)] = 2 * next_var + 1;
    ++next_var;
  };
  for (AigLit in : c.inputs) assign(in);
  for (auto [l, next] : c.latches) { (void)next; assign(l); }
  for (const AigerAnd& g : gates)
    if (used[aig_var(g.lhs)]) assign(g.lhs);

  auto final_lit = [&](AigLit l) { return remap[rw(l)]; };

  for (AigLit in : c.inputs) out.inputs.push_back(remap[in]);
  for (auto [l, next] : c.latches) out.latches.emplace_back(remap[l], final_lit(next));
  for (AigLit o : c.outputs) out.outputs.push_back(final_lit(o));
  for (const AigerAnd& g : gates)
    if (used[aig_var(g.lhs)]) out.ands.push_back({remap[g.lhs], final_lit(g.rhs0), final_lit(g.rhs1)});
  out.max_index = next_var - 1;
  out.input_names = c.input_names;
  out.latch_names = c.latch_names;
  out.output_names = c.output_names;
  out.comments = c.comments;
  detail::validate(out);
  return out;
}

// Convenience builder used by the benchmark generators.
class AigBuilder {
 public:
  AigLit add_input(const std::string& name) {
    AigLit l = fresh();
    circuit_.inputs.push_back(l);
    circuit_.input_names[circuit_.inputs.size() - 1] = name;
    return l;
  }

  // latch next-functions are set later; returns the latch literal
  AigLit add_latch(const std::string& name) {
    AigLit l = fresh();
    circuit_.latches.emplace_back(l, 0);
    circuit_.latch_names[circuit_.latches.size() - 1] = name;
    return l;
  }

  void set_next(AigLit latch, AigLit next) {
    for (auto& [l, n] : circuit_.latches)
      if (l == latch) { n = next; return; }
    throw std::logic_error("set_next: unknown latch");
  }

  void set_output(AigLit err, const std::string& name = "error") {
    circuit_.outputs.push_back(err);
    circuit_.output_names[circuit_.outputs.size() - 1] = name;
  }

  AigLit mk_and(AigLit a, AigLit b) {
    if (a > b) std::swap(a, b);
    if (a == 0 || a == aig_neg(b)) return 0;
    if (a == 1 || a == b) return b;
    if (auto it = hash_.find({a, b}); it != hash_.end()) return it->second;
    AigLit l = fresh();
    circuit_.ands.push_back({l, b, a});
    hash_[{a, b}] = l;
    return l;
  }
  AigLit mk_or(AigLit a, AigLit b) { return aig_neg(mk_and(aig_neg(a), aig_neg(b))); }
  AigLit mk_xor(AigLit a, AigLit b) { return mk_or(mk_and(a, aig_neg(b)), mk_and(aig_neg(a), b)); }
  AigLit mk_eq(AigLit a, AigLit b) { return aig_neg(mk_xor(a, b)); }
  AigLit mk_mux(AigLit sel, AigLit then_lit, AigLit else_lit) {
    return mk_or(mk_and(sel, then_lit), mk_and(aig_neg(sel), else_lit));
  }
  AigLit mk_and_all(const std::vector<AigLit>& ls) {
    AigLit acc = 1;
    for (AigLit l : ls) acc = mk_and(acc, l);
    return acc;
  }
  AigLit mk_or_all(const std::vector<AigLit>& ls) {
    AigLit acc = 0;
    for (AigLit l : ls) acc = mk_or(acc, l);
    return acc;
  }

  AigerCircuit finish(std::vector<std::string> comments = {}) {
    circuit_.comments = std::move(comments);
    for (auto [l, n] : circuit_.latches) {
      (void)l;
      (void)n;
    }
    detail::validate(circuit_);
    return circuit_;
  }

 private:
  AigLit fresh() {
    ++circuit_.max_index;
    return 2 * circuit_.max_index;
  }

  AigerCircuit circuit_;
  std::map<std::pair<AigLit, AigLit>, AigLit> hash_;
};

}  // namespace safetysynth
