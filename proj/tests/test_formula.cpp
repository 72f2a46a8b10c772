#include <catch2/catch_amalgamated.hpp>

#include "safetysynth/compress.hpp"
#include "safetysynth/dimacs.hpp"
#include "safetysynth/formula.hpp"
#include "test_helpers.hpp"

using namespace safetysynth;
using sstest::models_of;
using sstest::models_projected;
using sstest::Rng;

TEST_CASE("negate_cube flips all signs") {
  CHECK(negate_cube(Cube{1, -2}) == Clause{-1, 2});
  CHECK(negate_cube(Cube{}) == Clause{});
  CHECK(negate_cube(Cube{-3}) == Clause{3});
}

TEST_CASE("is_subcube is literal-set inclusion") {
  CHECK(is_subcube(Cube{1}, Cube{1, -2}));
  CHECK_FALSE(is_subcube(Cube{-1}, Cube{1, -2}));
  CHECK(is_subcube(Cube{}, Cube{1, -2}));
  CHECK(is_subcube(Cube{}, Cube{}));
}

TEST_CASE("subcube implies entailment on enumerated assignments") {
  Rng rng(7);
  for (int round = 0; round < 200; ++round) {
    std::vector<Lit> big;
    for (int v = 1; v <= 6; ++v)
      if (rng.flip()) big.push_back(rng.flip() ? v : -v);
    Cube b(big);
    std::vector<Lit> small;
    for (Lit l : b)
      if (rng.flip()) small.push_back(l);
    Cube a(small);
    REQUIRE(is_subcube(a, b));
    // every assignment satisfying b satisfies a
    for (uint64_t bits = 0; bits < (1u << 6); ++bits) {
      Assignment asg;
      for (int v = 1; v <= 6; ++v) asg[v] = (bits >> (v - 1)) & 1;
      if (eval_cube(b, asg)) CHECK(eval_cube(a, asg));
    }
  }
}

TEST_CASE("literal sets reject opposite literals") {
  CHECK_THROWS(Cube{1, -1});
  Cube c{1};
  CHECK_THROWS(c.add(-1));
  c.add(1);  // idempotent
  CHECK(c.size() == 1);
}

TEST_CASE("prime substitutes next-state partners") {
  VarManager vm;
  auto [x1, n1] = vm.fresh_state_pair();
  auto [x2, n2] = vm.fresh_state_pair();
  Cnf f{Clause{x1, -x2}};
  Cnf fp = prime(f, vm);
  CHECK(fp == Cnf{Clause{n1, -n2}});
  CHECK(prime(Cnf{}, vm).empty());
  Cnf g{Clause{x1}, Clause{-x1, x2}};
  CHECK(prime(g, vm) == Cnf{Clause{n1}, Clause{-n1, n2}});
  CHECK(unprime(prime(g, vm), vm) == g);

  int input = vm.fresh(VarGroup::input);
  CHECK_THROWS(prime(Cnf{Clause{input}}, vm));
}

TEST_CASE("cnf_negate: models project to exact complement") {
  SECTION("single unit") {
    VarManager vm;
    int x1 = vm.fresh(VarGroup::state);
    Cnf f{Clause{x1}};
    Cnf g = cnf_negate(f, vm);
    auto neg_models = models_projected(g, g.vars(), {x1});
    CHECK(neg_models == std::set<std::set<int>>{{}});
  }
  SECTION("true becomes unsatisfiable") {
    VarManager vm;
    Cnf g = cnf_negate(Cnf{}, vm);
    CHECK(g.has_empty_clause());
  }
  SECTION("two units") {
    VarManager vm;
    int x1 = vm.fresh(VarGroup::state);
    int x2 = vm.fresh(VarGroup::state);
    Cnf f{Clause{x1}, Clause{x2}};
    Cnf g = cnf_negate(f, vm);
    std::vector<int> all = g.vars();
    auto got = models_projected(g, all, {x1, x2});
    std::set<std::set<int>> want{{}, {x1}, {x2}};
    CHECK(got == want);
  }
  SECTION("randomized complement equivalence up to 10 vars") {
    Rng rng(42);
    for (int round = 0; round < 150; ++round) {
      int nv = 2 + static_cast<int>(rng.below(6));
      Cnf f = sstest::random_cnf(rng, nv, 1 + static_cast<int>(rng.below(5)));
      std::vector<int> base;
      for (int v = 1; v <= nv; ++v) base.push_back(v);
      int next_id = nv + 1;
      Cnf g = negate_cnf_with(f, next_id);
      std::vector<int> all;
      for (int v = 1; v < next_id; ++v) all.push_back(v);
      auto f_models = models_of(f, base);
      auto g_models = models_projected(g, all, base);
      std::set<std::set<int>> complement;
      for (uint64_t bits = 0; bits < (1ULL << nv); ++bits) {
        std::set<int> tv;
        for (int i = 0; i < nv; ++i)
          if ((bits >> i) & 1) tv.insert(base[i]);
        if (!f_models.count(tv)) complement.insert(tv);
      }
      REQUIRE(g_models == complement);
    }
  }
}

TEST_CASE("compress removes implied clauses only") {
  SECTION("subsumption") {
    Cnf f{Clause{1}, Clause{1, 2}};
    Cnf g = compress(f);
    CHECK(g == Cnf{Clause{1}});
  }
  SECTION("resolution-implied clause") {
    Cnf f{Clause{1, 2}, Clause{-1, 2}, Clause{2}};
    Cnf g = compress(f);
    CHECK(g == Cnf{Clause{2}});
  }
  SECTION("independent clauses stay") {
    Cnf f{Clause{1}, Clause{2}};
    CHECK(compress(f) == f);
  }
  SECTION("budget limits queries") {
    Cnf f{Clause{1}, Clause{1, 2}, Clause{1, 2, 3}};
    CompressOptions opts;
    opts.budget = 0;
    CHECK(compress(f, opts) == f);
  }
  SECTION("semantics preserved on random formulas up to 12 vars") {
    Rng rng(11);
    for (int round = 0; round < 120; ++round) {
      int nv = 2 + static_cast<int>(rng.below(10));
      Cnf f = sstest::random_cnf(rng, nv, 2 + static_cast<int>(rng.below(8)));
      Cnf g = compress(f);
      std::vector<int> vars;
      for (int v = 1; v <= nv; ++v) vars.push_back(v);
      REQUIRE(models_of(f, vars) == models_of(g, vars));
      // kept clauses are a subset in original order
      size_t pos = 0;
      for (const Clause& c : g) {
        while (pos < f.size() && !(f[pos] == c)) ++pos;
        REQUIRE(pos < f.size());
        ++pos;
      }
    }
  }
  SECTION("prefix-implication mode only uses earlier clauses") {
    // (2) is implied by (1) ∧ (-1 2) which come *after* it; prefix mode keeps it
    Cnf f{Clause{2, 3}, Clause{1}, Clause{-1, 2}};
    CompressOptions opts;
    opts.prefix_implication_only = true;
    CHECK(compress(f, opts) == f);
    CHECK(compress(f).size() < f.size());
  }
}

TEST_CASE("dimacs round-trip with group comments") {
  Cnf f{Clause{1, -2}, Clause{3}};
  std::vector<std::pair<int, VarGroup>> groups{{1, VarGroup::state}, {2, VarGroup::input}, {3, VarGroup::control}};
  std::string text = write_dimacs(f, groups, {"latch 2 var 1"});
  DimacsFile parsed = read_dimacs(text);
  CHECK(parsed.formula == f);
  CHECK(parsed.groups == groups);
  REQUIRE(parsed.comments.size() == 1);
  CHECK(parsed.comments[0] == "latch 2 var 1");
  CHECK(parsed.declared_vars == 3);
  CHECK_THROWS(read_dimacs("p cnf 2 1\n1 2\n"));   // missing terminator
  CHECK_THROWS(read_dimacs("p cnf 2 2\n1 0\n"));   // clause count mismatch
}
