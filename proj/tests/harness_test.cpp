#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "mlncpi/harness.hpp"
#include "support/toy.hpp"

using namespace mlncpi;

namespace {

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

RunConfig config(SolverKind k, std::uint64_t seed = 1) {
  RunConfig c;
  c.solver = k;
  c.seed = seed;
  c.timing = false;
  c.mws.flips = 5000;
  return c;
}

// Pins the y variables away from x: at least one of them must differ.
LinearConstraint exclude(const Encoding& enc, const std::vector<std::uint8_t>& x) {
  LinearConstraint c;
  c.rhs = 1.0;
  for (std::size_t v = 0; v < enc.var_atom.size(); ++v) {
    if (enc.var_atom[v] == kNoAtom) continue;
    if (x[v] != 0) {
      c.terms.push_back(LinearTerm{static_cast<int>(v), -1.0});
      c.rhs -= 1.0;
    } else {
      c.terms.push_back(LinearTerm{static_cast<int>(v), 1.0});
    }
  }
  return c;
}

World gold_world(const ErInstance& inst, const Problem& p) {
  World w = p.empty_world();
  const int n = static_cast<int>(inst.entity.size());
  const PredicateId same = p.signature().find_predicate("sameBib").value();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (inst.gold_match(i, j)) {
        std::vector<ConstantId> args{p.signature().find_constant(inst.record_name(i)).value(),
                                     p.signature().find_constant(inst.record_name(j)).value()};
        w.set(p.atoms().id(same, args), true);
      }
  return w;
}

}  // namespace

TEST(SolverNames, RoundTrip) {
  for (SolverKind k : {SolverKind::Mws, SolverKind::Ilp, SolverKind::CpiMws, SolverKind::CpiIlp, SolverKind::Oracle})
    EXPECT_EQ(parse_solver(solver_name(k)), k);
  EXPECT_FALSE(parse_solver("gurobi").has_value());
}

TEST(GenEr, Shape) {
  ErParams ep;
  ep.n_records = 4;
  ep.n_entities = 2;
  ep.noise = 0.0;
  ep.seed = 3;
  ErInstance inst = gen_er(ep);
  EXPECT_EQ(inst.entity.size(), 4U);
  EXPECT_EQ(inst.entity[0], 0);
  EXPECT_EQ(inst.entity[1], 1);
  EXPECT_EQ(count_lines(inst.db), 12U);  // both orders of the 6 pairs
  Problem p = inst.problem();
  EXPECT_EQ(p.atoms().hidden_count(), 16);
  EXPECT_EQ(p.formula_count(), 4U);
  EXPECT_TRUE(p.formula(3).weight.hard);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      std::string pair = "(" + inst.record_name(i) + ", " + inst.record_name(j) + ")";
      EXPECT_NE(inst.db.find((inst.gold_match(i, j) ? "simHigh" : "simLow") + pair), std::string::npos);
    }
}

TEST(GenEr, TransitivityGroundingCount) {
  ErParams ep;
  ep.n_records = 30;
  ep.n_entities = 8;
  Problem p = gen_er(ep).problem();
  EXPECT_EQ(varying_groundings(p, 3, PartialGrounding::full(p)), 24360U);
}

TEST(GenEr, RecordNamesSortNumerically) {
  EXPECT_EQ(ErInstance::name(7, 30), "r07");
  EXPECT_EQ(ErInstance::name(7, 101), "r007");
  EXPECT_EQ(ErInstance::name(100, 101), "r100");
}

TEST(GenEr, RejectsInvalidParameters) {
  ErParams ep;
  ep.n_records = 3;
  ep.n_entities = 4;
  EXPECT_THROW(gen_er(ep), std::invalid_argument);
  ep.n_entities = 0;
  EXPECT_THROW(gen_er(ep), std::invalid_argument);
  ep.n_entities = 1;
  ep.noise = 1.5;
  EXPECT_THROW(gen_er(ep), std::invalid_argument);
  ep.noise = -0.1;
  EXPECT_THROW(gen_er(ep), std::invalid_argument);
  ep.noise = 0.0;
  ep.n_records = 0;
  EXPECT_THROW(gen_er(ep), std::invalid_argument);
}

TEST(GenEr, Deterministic) {
  ErParams ep;
  ep.n_records = 12;
  ep.n_entities = 3;
  ep.seed = 99;
  ErInstance a = gen_er(ep), b = gen_er(ep);
  EXPECT_EQ(a.mln, b.mln);
  EXPECT_EQ(a.db, b.db);
  ep.seed = 100;
  EXPECT_NE(gen_er(ep).db, a.db);
}

TEST(GenEr, NoiseFreeRecoversPlantedPartition) {
  ErParams ep;
  ep.n_records = 4;
  ep.n_entities = 2;
  ep.noise = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    ep.seed = s;
    ErInstance inst = gen_er(ep);
    Problem p = inst.problem();
    RunOutcome r = run(p, config(SolverKind::CpiIlp));
    EXPECT_DOUBLE_EQ(er_f1(inst, p, r.world).f1(), 1.0);
  }
}

// noise = 0: the gold partition is the only MAP state (over atoms that
// occur in some non-constant grounding).
TEST(GenEr, NoiseFreeMapIsUniqueAndGold) {
  for (int n = 2; n <= 8; ++n) {
    ErParams ep;
    ep.n_records = n;
    ep.n_entities = std::max(1, n / 3);
    ep.noise = 0.0;
    ep.seed = static_cast<std::uint64_t>(n);
    ErInstance inst = gen_er(ep);
    Problem p = inst.problem();
    World gold = gold_world(inst, p);
    if (n <= 4) {
      OracleResult o = brute_force_map(p);
      EXPECT_EQ(o.world, gold) << n;
    }
    Encoding enc = encode(p, PartialGrounding::full(p));
    IlpSolution best = solve_ilp(enc.model);
    ASSERT_EQ(best.status, IlpStatus::Optimal);
    EXPECT_EQ(enc.decode(best.values, p.empty_world()), gold) << n;
    enc.model.constraints.push_back(exclude(enc, best.values));
    IlpSolution second = solve_ilp(enc.model);
    if (second.status == IlpStatus::Optimal) EXPECT_LT(second.objective, best.objective - 1e-9) << n;
  }
}

TEST(GenEr, FullNoiseStillTerminates) {
  ErParams ep;
  ep.n_records = 10;
  ep.n_entities = 3;
  ep.noise = 1.0;
  ErInstance inst = gen_er(ep);
  Problem p = inst.problem();
  RunOutcome r = run(p, config(SolverKind::CpiIlp));
  EXPECT_TRUE(r.stats.converged);
  EXPECT_EQ(r.stats.score.hard_violations, 0);
}

TEST(Run, CpiIlpOnToyMatchesOracle) {
  Problem p = mlncpi::testing::toy();
  RunConfig c = config(SolverKind::CpiIlp);
  c.compare_with_oracle = true;
  RunOutcome r = run(p, c);
  EXPECT_TRUE(r.stats.converged);
  ASSERT_TRUE(r.metrics.delta_s_soft.has_value());
  EXPECT_EQ(*r.metrics.delta_s_soft, 0.0);
  EXPECT_EQ(r.metrics.oracle_violations, 0);
}

TEST(Run, OracleRefusesOversizedModel) {
  ErParams ep;
  ep.n_records = 10;
  Problem p = gen_er(ep).problem();
  EXPECT_THROW(run(p, config(SolverKind::Oracle)), OracleSizeError);
}

TEST(Run, AllSolversAgreeOnSmallErInstance) {
  ErParams ep;
  ep.n_records = 4;
  ep.n_entities = 2;
  ep.noise = 0.3;
  ep.seed = 8;
  Problem p = gen_er(ep).problem();
  Score oracle = run(p, config(SolverKind::Oracle)).stats.score;
  for (SolverKind k : {SolverKind::Ilp, SolverKind::CpiIlp, SolverKind::Mws, SolverKind::CpiMws}) {
    RunOutcome r = run(p, config(k));
    EXPECT_TRUE(r.stats.score.ties(oracle)) << solver_name(k);
    EXPECT_EQ(r.stats.solver, solver_name(k));
  }
}

TEST(Run, DeterministicOutput) {
  ErParams ep;
  ep.n_records = 10;
  ep.n_entities = 3;
  ep.noise = 0.2;
  ep.seed = 4;
  Problem p = gen_er(ep).problem();
  for (SolverKind k : {SolverKind::Mws, SolverKind::CpiMws, SolverKind::CpiIlp, SolverKind::Ilp}) {
    RunOutcome a = run(p, config(k, 11)), b = run(p, config(k, 11));
    EXPECT_EQ(emit_solution(p, a.world, a.stats), emit_solution(p, b.world, b.stats)) << solver_name(k);
  }
}

TEST(Run, ReportedScoreMatchesEmittedSolution) {
  ErParams ep;
  ep.n_records = 9;
  ep.n_entities = 3;
  ep.noise = 0.3;
  Problem p = gen_er(ep).problem();
  for (SolverKind k : {SolverKind::Mws, SolverKind::CpiMws, SolverKind::CpiIlp}) {
    RunOutcome r = run(p, config(k));
    std::string text = emit_solution(p, r.world, r.stats);
    Score again = score(p, parse_solution(text, p.signature(), p.atoms()));
    EXPECT_TRUE(again.ties(r.stats.score, 0.0)) << solver_name(k);
  }
}

TEST(Run, StatsFields) {
  Problem p = mlncpi::testing::toy();
  RunOutcome r = run(p, config(SolverKind::CpiIlp, 5));
  EXPECT_EQ(r.stats.wall_time_ms, 0.0);
  EXPECT_EQ(r.stats.iterations, r.result.trace.iterations.size());
  EXPECT_EQ(r.stats.bound_b_per_iteration.size(), r.stats.iterations);
  EXPECT_EQ(r.stats.groundings_per_formula.size(), 2U);
  ASSERT_FALSE(r.stats.extra.empty());
  EXPECT_EQ(r.stats.extra[0], (std::pair<std::string, std::string>{"seed", "5"}));
  RunOutcome plain = run(p, config(SolverKind::Ilp));
  EXPECT_TRUE(plain.stats.bound_b_per_iteration.empty());
  EXPECT_EQ(plain.stats.groundings_per_formula, (std::vector<std::size_t>{2, 4}));
}

TEST(Sweep, EmptyAndSingleSize) {
  SweepParams sp;
  sp.run = config(SolverKind::CpiIlp);
  EXPECT_TRUE(sweep(sp).empty());
  sp.sizes = {8};
  sp.seeds = 2;
  auto rows = sweep(sp);
  ASSERT_EQ(rows.size(), 1U);
  EXPECT_EQ(rows[0].size, 8);
  EXPECT_EQ(rows[0].runs, 2);
  EXPECT_GT(rows[0].mean_groundings, 0.0);
  EXPECT_GE(rows[0].mean_f1, 0.0);
  EXPECT_LE(rows[0].mean_f1, 1.0);
}

TEST(Sweep, RejectsDecreasingSizesAndNoSeeds) {
  SweepParams sp;
  sp.sizes = {10, 8};
  EXPECT_THROW(sweep(sp), std::invalid_argument);
  sp.sizes = {8};
  sp.seeds = 0;
  EXPECT_THROW(sweep(sp), std::invalid_argument);
}

TEST(Sweep, GroundingsGrowWithSize) {
  SweepParams sp;
  sp.run = config(SolverKind::CpiIlp);
  sp.sizes = {8, 16, 24};
  sp.seeds = 2;
  auto rows = sweep(sp);
  ASSERT_EQ(rows.size(), 3U);
  EXPECT_LT(rows[0].mean_groundings, rows[1].mean_groundings);
  EXPECT_LT(rows[1].mean_groundings, rows[2].mean_groundings);
}
