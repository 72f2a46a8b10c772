#include <catch2/catch_amalgamated.hpp>

#include "safetysynth/solver.hpp"
#include "test_helpers.hpp"

using namespace safetysynth;
using sstest::Rng;

namespace {

bool brute_force_sat(const Cnf& f, int num_vars) {
  for (uint64_t bits = 0; bits < (1ULL << num_vars); ++bits) {
    Assignment a;
    for (int v = 1; v <= num_vars; ++v) a[v] = (bits >> (v - 1)) & 1;
    if (eval_cnf(f, a)) return true;
  }
  return f.empty();
}

}  // namespace

TEST_CASE("empty theory is satisfiable with empty model") {
  SolverSession s;
  auto r = s.solve({});
  CHECK(r.is_sat());
  CHECK(r.model.empty());
}

TEST_CASE("contradictory units are unsat") {
  SolverSession s;
  s.add_unit(1);
  s.add_unit(-1);
  CHECK(s.solve({}).is_unsat());
}

TEST_CASE("unit propagation under assumptions") {
  SolverSession s;
  s.add_clause(Clause{1, 2});
  std::vector<int> mv{1, 2};
  auto r = s.solve_assume(Cube{-1}, mv);
  REQUIRE(r.is_sat());
  CHECK(r.model.contains(-1));
  CHECK(r.model.contains(2));
}

TEST_CASE("implication chain model") {
  SolverSession s;
  s.add_clause(Clause{-1, 2});
  std::vector<int> mv{1, 2};
  auto r = s.solve_assume(Cube{1}, mv);
  REQUIRE(r.is_sat());
  CHECK(r.model.contains(1));
  CHECK(r.model.contains(2));
}

TEST_CASE("unsat core is a failing sub-cube of the assumptions") {
  SolverSession s;
  s.add_unit(-1);
  auto r = s.solve_assume(Cube{1}, {});
  REQUIRE(r.is_unsat());
  CHECK(r.core == Cube{1});

  SolverSession s2;
  s2.add_clause(Clause{-1, -2});
  auto r2 = s2.solve_assume(Cube{1, 2, 3}, {});
  REQUIRE(r2.is_unsat());
  CHECK(is_subcube(r2.core, Cube{1, 2}));
  // re-solving theory ∧ core stays unsat
  CHECK(s2.solve_assume(r2.core, {}).is_unsat());
}

TEST_CASE("adding the empty clause poisons the session with an empty core") {
  SolverSession s;
  s.add_clause(Clause{});
  auto r = s.solve_assume(Cube{5}, {});
  REQUIRE(r.is_unsat());
  CHECK(r.core.empty());
  CHECK(s.solve_assume(Cube{}, {}).is_unsat());
}

TEST_CASE("idempotent clause addition") {
  SolverSession s;
  s.add_clause(Clause{1, 2});
  s.add_clause(Clause{1, 2});
  auto r = s.solve_assume(Cube{-1}, std::vector<int>{2});
  REQUIRE(r.is_sat());
  CHECK(r.model.contains(2));
}

TEST_CASE("consumed sessions reject use") {
  SolverSession s;
  s.close();
  CHECK_THROWS_AS(s.add_unit(1), std::logic_error);
  CHECK_THROWS_AS(s.solve({}), std::logic_error);
}

TEST_CASE("conflict budget reported distinctly from unsat") {
  // a small pigeonhole-ish hard instance: x_i choose values, parity forced
  SolverSession s;
  s.set_conflict_budget(0);
  // force at least one conflict: (1 2)(1 -2)(-1 2)(-1 -2)
  s.add_clause(Clause{1, 2});
  s.add_clause(Clause{1, -2});
  s.add_clause(Clause{-1, 2});
  s.add_clause(Clause{-1, -2});
  auto r = s.solve({});
  CHECK(r.status == SolveStatus::budget_exceeded);
  s.set_conflict_budget(-1);
  CHECK(s.solve({}).is_unsat());
}

TEST_CASE("randomized agreement with brute force") {
  Rng rng(1234);
  for (int round = 0; round < 400; ++round) {
    int nv = 1 + static_cast<int>(rng.below(10));
    Cnf f = sstest::random_cnf(rng, nv, 1 + static_cast<int>(rng.below(18)), 3);
    SolverSession s(round);
    s.add_cnf(f);
    std::vector<int> mv;
    for (int v = 1; v <= nv; ++v) mv.push_back(v);
    auto r = s.solve(mv);
    bool expect = brute_force_sat(f, nv);
    REQUIRE(r.is_sat() == expect);
    if (r.is_sat()) {
      Assignment a;
      for (Lit l : r.model) a[lit_var(l)] = lit_pos(l);
      REQUIRE(eval_cnf(f, a));
    }
  }
}

TEST_CASE("randomized incremental assumption solving agrees with brute force") {
  Rng rng(99);
  for (int round = 0; round < 120; ++round) {
    int nv = 2 + static_cast<int>(rng.below(8));
    Cnf f = sstest::random_cnf(rng, nv, 1 + static_cast<int>(rng.below(10)), 3);
    SolverSession s(round);
    s.add_cnf(f);
    for (int q = 0; q < 8; ++q) {
      std::vector<Lit> assume;
      for (int v = 1; v <= nv; ++v)
        if (rng.below(3) == 0) assume.push_back(rng.flip() ? v : -v);
      Cube a(assume);
      Cnf with_assumed = f;
      for (Lit l : a) with_assumed.add_unit(l);
      bool expect = brute_force_sat(with_assumed, nv);
      auto r = s.solve_assume(a, {});
      REQUIRE(r.is_sat() == expect);
      if (r.is_unsat()) {
        REQUIRE(is_subcube(r.core, a));
        Cnf with_core = f;
        for (Lit l : r.core) with_core.add_unit(l);
        REQUIRE_FALSE(brute_force_sat(with_core, nv));
      }
      // growing the theory mid-session keeps the session usable
      if (q == 3) {
        Cnf extra = sstest::random_cnf(rng, nv, 2, 3);
        s.add_cnf(extra);
        for (const Clause& c : extra) f.add(c);
      }
    }
  }
}

TEST_CASE("shrink_core yields locally minimal cores") {
  SECTION("single-literal reason") {
    SolverSession s;
    s.add_unit(-1);
    Cube core = shrink_core(s, Cube{1, 2});
    CHECK(core == Cube{1});
  }
  SECTION("already minimal pair") {
    SolverSession s;
    s.add_clause(Clause{-1, -2});
    Cube core = shrink_core(s, Cube{1, 2});
    CHECK(core == Cube{1, 2});
  }
  SECTION("enumerated local minimality") {
    SolverSession s;
    s.add_clause(Clause{-1, -2});
    s.add_unit(-3);
    Cube start{1, 2, 3};
    Cube core = shrink_core(s, start);
    REQUIRE(s.solve_assume(core, {}).is_unsat());
    // dropping any single literal makes it satisfiable
    for (Lit l : core) {
      Cube smaller = Cube(core.without(l));
      CHECK(s.solve_assume(smaller, {}).is_sat());
    }
    CHECK((core == Cube{3} || core == Cube{1, 2}));
  }
  SECTION("pinned literals stay asserted but never enter the core") {
    SolverSession s;
    s.add_clause(Clause{-1, -2});
    Cube core = shrink_core(s, Cube{1}, Cube{2});
    CHECK(core == Cube{1});
  }
}

TEST_CASE("model soundness is checked internally on every query") {
  Rng rng(5);
  for (int round = 0; round < 50; ++round) {
    Cnf f = sstest::random_cnf(rng, 6, 8, 3);
    SolverSession s(round);
    s.add_cnf(f);
    std::vector<int> mv{1, 2, 3, 4, 5, 6};
    CHECK_NOTHROW(s.solve(mv));
  }
}
