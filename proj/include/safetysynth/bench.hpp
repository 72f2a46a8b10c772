#pragma once

// Parametrized benchmark generators, all emitted as AIGER circuits with the
// controllable_ naming convention:
//
//   cnt    an up-counter that must not reach its maximum value; one
//          controllable input holds the counter at the all-zeros value
//   bs     a rotating register (barrel shifter) whose rotation amount mixes
//          uncontrollable select lines with one controllable line; a
//          designated forbidden pattern must never be latched
//   add    a combinational adder whose controllable outputs must match the
//          operand sum, with a small latch pipeline tracking mismatches
//   mult   a combinational multiplier, fully stateless; the error output is
//          latched by the game lowering
//   unreal a cnt variant with the hold control disconnected, used as the
//          negative-test family
//
// Output is deterministic for fixed parameters.

#include <string>

#include "aiger.hpp"

namespace safetysynth {
namespace bench {

enum class CntVariant { plain, optimized };

namespace gendetail {

struct Counter {
  std::vector<AigLit> bits;
  AigLit at_max;
};

// next = bits + inc (ripple), wrap-around ignored on purpose: once the
// maximum was visited the sticky error has fired anyway
inline std::vector<AigLit> ripple_inc(AigBuilder& b, const std::vector<AigLit>& bits, AigLit inc) {
  std::vector<AigLit> next(bits.size());
  AigLit carry = inc;
  for (size_t j = 0; j < bits.size(); ++j) {
    next[j] = b.mk_xor(bits[j], carry);
    carry = b.mk_and(bits[j], carry);
  }
  return next;
}

inline std::vector<AigLit> ripple_add(AigBuilder& b, const std::vector<AigLit>& x,
                                      const std::vector<AigLit>& y) {
  std::vector<AigLit> sum(x.size());
  AigLit carry = 0;
  for (size_t j = 0; j < x.size(); ++j) {
    AigLit axb = b.mk_xor(x[j], y[j]);
    sum[j] = b.mk_xor(axb, carry);
    carry = b.mk_or(b.mk_and(x[j], y[j]), b.mk_and(axb, carry));
  }
  return sum;
}

inline AigerCircuit cnt_like(int bits, bool with_hold, CntVariant variant) {
  if (bits < 1 || bits > 30) throw std::invalid_argument("cnt: bits must be in 1..30");
  AigBuilder b;
  AigLit enable = b.add_input("enable");
  AigLit hold_ctrl = b.add_input("controllable_hold");
  std::vector<AigLit> cnt(bits);
  for (int j = 0; j < bits; ++j) cnt[j] = b.add_latch("cnt" + std::to_string(j));
  AigLit err = b.add_latch("err");

  std::vector<AigLit> cnt_neg(cnt);
  for (AigLit& l : cnt_neg) l = aig_neg(l);
  AigLit at_zero = b.mk_and_all(cnt_neg);
  AigLit hold = with_hold ? b.mk_and(hold_ctrl, at_zero) : 0;
  AigLit inc = b.mk_and(enable, aig_neg(hold));
  std::vector<AigLit> next = ripple_inc(b, cnt, inc);
  for (int j = 0; j < bits; ++j) b.set_next(cnt[j], next[j]);

  AigLit at_max = b.mk_and_all(cnt);
  b.set_next(err, b.mk_or(err, at_max));
  b.set_output(err);

  AigerCircuit c = b.finish({std::string(with_hold ? "cnt" : "unreal") + " " + std::to_string(bits)});
  return variant == CntVariant::optimized ? simplify(c) : c;
}

}  // namespace gendetail

inline AigerCircuit gen_cnt(int bits, CntVariant variant = CntVariant::plain) {
  return gendetail::cnt_like(bits, true, variant);
}

inline AigerCircuit gen_unreal(int bits) {
  return gendetail::cnt_like(bits, false, CntVariant::plain);
}

// bits must be a power of two; the published family uses {8,16,32,64,128}
// but smaller powers are accepted so the explicit oracle can cover them.
inline AigerCircuit gen_bs(int bits, bool controllable = true) {
  if (bits < 2 || (bits & (bits - 1)) != 0) throw std::invalid_argument("bs: bits must be a power of two >= 2");
  int stages = 0;
  while ((1 << stages) < bits) ++stages;

  AigBuilder b;
  std::vector<AigLit> rot(stages);
  rot[0] = controllable ? b.add_input("controllable_rot0") : b.add_input("rot0");
  for (int s = 1; s < stages; ++s) rot[s] = b.add_input("rot" + std::to_string(s));
  AigLit inject = controllable ? 0 : b.add_input("inject");

  std::vector<AigLit> reg(bits);
  for (int j = 0; j < bits; ++j) reg[j] = b.add_latch("r" + std::to_string(j));
  AigLit err = b.add_latch("err");

  // barrel rotate-left by the selected amount
  std::vector<AigLit> cur(reg);
  for (int s = 0; s < stages; ++s) {
    int shift = 1 << s;
    std::vector<AigLit> nxt(bits);
    for (int j = 0; j < bits; ++j) nxt[j] = b.mk_mux(rot[s], cur[(j + bits - shift) % bits], cur[j]);
    cur = nxt;
  }
  if (!controllable) cur[0] = b.mk_or(cur[0], inject);
  for (int j = 0; j < bits; ++j) b.set_next(reg[j], cur[j]);

  // forbidden pattern 0...01 is not rotation-invariant, so the controllable
  // rotation bit can always dodge it
  std::vector<AigLit> match(bits);
  for (int j = 0; j < bits; ++j) match[j] = j == 0 ? cur[j] : aig_neg(cur[j]);
  AigLit hit = b.mk_and_all(match);
  b.set_next(err, b.mk_or(err, hit));
  b.set_output(err);
  return b.finish({std::string("bs ") + std::to_string(bits) + (controllable ? "" : " uncontrolled")});
}

inline AigerCircuit gen_add(int bits) {
  if (bits < 1) throw std::invalid_argument("add: bits must be positive");
  AigBuilder b;
  std::vector<AigLit> a(bits), y(bits), claimed(bits);
  for (int j = 0; j < bits; ++j) a[j] = b.add_input("a" + std::to_string(j));
  for (int j = 0; j < bits; ++j) y[j] = b.add_input("b" + std::to_string(j));
  for (int j = 0; j < bits; ++j) claimed[j] = b.add_input("controllable_sum" + std::to_string(j));
  AigLit stage = b.add_latch("mismatch_seen");
  AigLit err = b.add_latch("err");

  std::vector<AigLit> sum = gendetail::ripple_add(b, a, y);
  std::vector<AigLit> diffs(bits);
  for (int j = 0; j < bits; ++j) diffs[j] = b.mk_xor(sum[j], claimed[j]);
  AigLit mismatch = b.mk_or_all(diffs);
  b.set_next(stage, mismatch);
  b.set_next(err, b.mk_or(err, stage));
  b.set_output(err);
  return b.finish({std::string("add ") + std::to_string(bits)});
}

inline AigerCircuit gen_mult(int bits) {
  if (bits < 1) throw std::invalid_argument("mult: bits must be positive");
  AigBuilder b;
  std::vector<AigLit> a(bits), y(bits);
  for (int j = 0; j < bits; ++j) a[j] = b.add_input("a" + std::to_string(j));
  for (int j = 0; j < bits; ++j) y[j] = b.add_input("b" + std::to_string(j));
  std::vector<AigLit> claimed(2 * bits);
  for (int j = 0; j < 2 * bits; ++j) claimed[j] = b.add_input("controllable_prod" + std::to_string(j));

  // shift-add array multiplier into a 2·bits accumulator
  std::vector<AigLit> acc(2 * bits, 0);
  for (int j = 0; j < bits; ++j) {
    std::vector<AigLit> addend(2 * bits, 0);
    for (int k = 0; k < bits; ++k) addend[j + k] = b.mk_and(a[k], y[j]);
    acc = gendetail::ripple_add(b, acc, addend);
  }
  std::vector<AigLit> diffs(2 * bits);
  for (int j = 0; j < 2 * bits; ++j) diffs[j] = b.mk_xor(acc[j], claimed[j]);
  b.set_output(b.mk_or_all(diffs));
  return b.finish({std::string("mult ") + std::to_string(bits)});
}

}  // namespace bench
}  // namespace safetysynth
