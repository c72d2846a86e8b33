#include <gtest/gtest.h>

#include "mlncpi/grounding.hpp"
#include "mlncpi/mws.hpp"
#include "mlncpi/oracle.hpp"
#include "support/random_mln.hpp"
#include "support/toy.hpp"

using namespace mlncpi;
using mlncpi::testing::hidden;
using mlncpi::testing::toy;

namespace {

constexpr std::string_view kAb =
    "type t = {k}\n"
    "predicate a(t)\n"
    "predicate b(t)\n";

WeightedClause soft(std::initializer_list<Literal> lits, double w) { return WeightedClause{GroundClause(lits), w, false}; }

}  // namespace

TEST(Clausify, EvidenceSimplification) {
  Problem p = toy("left(n1)\n");
  WeightedClauseSet cs = clausify(p, PartialGrounding::full(p));
  // phi_1(n1) is true under left(n1); phi_1(n2) is the unit clause !agent(n2);
  // phi_2 with v1 = v2 is constant.
  ASSERT_EQ(cs.clauses.size(), 3U);
  EXPECT_EQ(cs.clauses[0].literals, (GroundClause{Literal{hidden(p, "agent", {"n2"}), false}}));
  EXPECT_DOUBLE_EQ(cs.clauses[0].weight, 2.5);
  EXPECT_EQ(cs.clauses[1].literals.size(), 2U);
  EXPECT_DOUBLE_EQ(cs.clauses[1].weight, 1.2);
}

TEST(Clausify, NegativeWeightSplitsAcrossClauses) {
  Problem p = Problem::from_text(std::string(kAb) + "-1.0 a(v1) | b(v1)\n", "");
  WeightedClauseSet cs = clausify(p, PartialGrounding::full(p));
  ASSERT_EQ(cs.clauses.size(), 2U);
  for (const WeightedClause& c : cs.clauses) {
    EXPECT_DOUBLE_EQ(c.weight, 0.5);
    EXPECT_FALSE(c.hard);
    ASSERT_EQ(c.literals.size(), 1U);
    EXPECT_FALSE(c.literals[0].positive);
  }
}

TEST(Clausify, HardAndZeroWeight) {
  Problem p = Problem::from_text(std::string(kAb) + "a(v1) => b(v1).\n0 a(v1)\n", "");
  WeightedClauseSet cs = clausify(p, PartialGrounding::full(p));
  ASSERT_EQ(cs.clauses.size(), 1U);
  EXPECT_TRUE(cs.clauses[0].hard);
}

TEST(Mws, UnitClause) {
  WeightedClauseSet cs{{soft({Literal{0, true}}, 1.0)}};
  MwsParams params;
  params.flips = 10;
  MwsResult r = mws_solve(cs, params, World(1));
  EXPECT_TRUE(r.world.get(0));
  EXPECT_EQ(r.cost.soft, 0.0);
}

TEST(Mws, TwoClauseExample) {
  // (a | b) w=1, (!a) w=2: best is {b} with all weight 3 satisfied.
  WeightedClauseSet cs{{soft({Literal{0, true}, Literal{1, true}}, 1.0), soft({Literal{0, false}}, 2.0)}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    MwsParams params;
    params.flips = 4;
    params.seed = seed;
    MwsResult r = mws_solve(cs, params, World(2));
    EXPECT_FALSE(r.world.get(0));
    EXPECT_TRUE(r.world.get(1));
    EXPECT_EQ(r.cost.soft, 0.0);
  }
}

TEST(Mws, EmptyClauseSetKeepsStart) {
  World start(3);
  start.set(1, true);
  MwsResult r = mws_solve(WeightedClauseSet{}, MwsParams{}, start, MwsStart::Random);
  EXPECT_EQ(r.world, start);
  EXPECT_EQ(r.flips, 0U);
}

TEST(Mws, ZeroFlipsReturnsStart) {
  WeightedClauseSet cs{{soft({Literal{0, true}}, 1.0), soft({Literal{1, true}}, 1.0)}};
  MwsParams params;
  params.flips = 0;
  World start(2);
  for (MwsStart mode : {MwsStart::Given, MwsStart::Random}) {
    MwsResult r = mws_solve(cs, params, start, mode);
    EXPECT_EQ(r.world, start);
    EXPECT_EQ(r.cost.soft, 2.0);
  }
}

TEST(Mws, RejectsBadParameters) {
  MwsParams params;
  params.q = 1.5;
  EXPECT_THROW(MaxWalkSat(WeightedClauseSet{}, params), std::invalid_argument);
  params.q = -0.1;
  EXPECT_THROW(MaxWalkSat(WeightedClauseSet{}, params), std::invalid_argument);
  WeightedClauseSet empty_clause{{soft({}, 1.0)}};
  EXPECT_THROW(MaxWalkSat(empty_clause, MwsParams{}), std::invalid_argument);
}

TEST(Mws, HardClausesFirst) {
  // A heavy soft clause wants a, a hard one forbids it.
  WeightedClauseSet cs{{soft({Literal{0, true}}, 100.0), WeightedClause{{Literal{0, false}}, 0.0, true}}};
  MwsParams params;
  params.flips = 50;
  MwsResult r = mws_solve(cs, params, World(1));
  EXPECT_FALSE(r.world.get(0));
  EXPECT_EQ(r.cost.hard, 0);
}

TEST(Mws, DeterministicFlipSequence) {
  mlncpi::testing::RandomMlnOptions opts;
  opts.max_constants = 4;
  opts.max_formulas = 6;
  mlncpi::testing::RandomMlnGenerator gen(42, opts);
  Problem p = gen.instance().problem();
  WeightedClauseSet cs = clausify(p, PartialGrounding::full(p));
  ASSERT_FALSE(cs.clauses.empty());
  MwsParams params;
  params.flips = 2000;
  params.restarts = 2;
  params.seed = 77;
  auto trace = [&] {
    std::vector<AtomId> flips;
    MaxWalkSat s(cs, params);
    s.set_observer([&](const MwsStep& st) { flips.push_back(st.flipped); });
    MwsResult r = s.solve(p.empty_world(), MwsStart::Random);
    return std::make_pair(flips, r.world);
  };
  auto a = trace(), b = trace();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Mws, CachesStayConsistentAndBestIsMonotone) {
  for (std::uint64_t s = 0; s < 30; ++s) {
    mlncpi::testing::RandomMlnOptions opts;
    opts.max_constants = 3;
    opts.max_formulas = 5;
    mlncpi::testing::RandomMlnGenerator gen(s, opts);
    Problem p = gen.instance().problem();
    WeightedClauseSet cs = clausify(p, PartialGrounding::full(p));
    MwsParams params;
    params.flips = 500;
    params.seed = s;
    params.verify = true;
    MaxWalkSat solver(cs, params);
    std::uint64_t last_step = 0;
    ClauseCost best;
    bool first = true;
    solver.set_observer([&](const MwsStep& st) {
      EXPECT_EQ(st.step, last_step + 1);
      last_step = st.step;
      if (!first) EXPECT_FALSE(best.better_than(st.best));
      first = false;
      best = st.best;
    });
    EXPECT_NO_THROW(solver.solve(p.empty_world(), MwsStart::Random));
  }
}

// Statistical regression bound on tiny instances.
TEST(Mws, UsuallyFindsTheOracleOptimum) {
  int matches = 0, total = 0;
  for (std::uint64_t s = 0; total < 100; ++s) {
    mlncpi::testing::RandomMlnOptions opts;
    opts.min_constants = 2;
    opts.max_constants = 2;
    mlncpi::testing::RandomMlnGenerator gen(1000 + s, opts);
    Problem p = gen.instance().problem();
    ASSERT_LE(p.atoms().hidden_count(), 10);
    WeightedClauseSet cs = clausify(p, PartialGrounding::full(p));
    if (cs.clauses.empty()) continue;
    MwsParams params;
    params.flips = 10000;
    params.seed = s;
    MwsResult r = mws_solve(cs, params, p.empty_world(), MwsStart::Random);
    OracleResult o = brute_force_map(p);
    Score got = score(p, r.world);
    ++total;
    if (got.ties(o.score)) ++matches;
  }
  EXPECT_GE(matches, 90) << matches << " of " << total;
}
