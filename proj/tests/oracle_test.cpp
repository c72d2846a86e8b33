#include <gtest/gtest.h>

#include <regex>

#include "mlncpi/grounding.hpp"
#include "mlncpi/oracle.hpp"
#include "support/random_mln.hpp"
#include "support/toy.hpp"

using namespace mlncpi;
using mlncpi::testing::hidden;
using mlncpi::testing::toy;
using mlncpi::testing::tuple;

namespace {

// Renames the generator's constants A, B, C, D (reversing their order) and
// its predicates.
std::string rename(std::string text) {
  static const std::vector<std::pair<std::regex, std::string>> rules{
      {std::regex("\\bA\\b"), "Zed"}, {std::regex("\\bB\\b"), "Yak"}, {std::regex("\\bC\\b"), "Xen"},
      {std::regex("\\bD\\b"), "Wu"},  {std::regex("\\bp\\("), "zp("}, {std::regex("\\bq\\("), "aq("},
      {std::regex("\\bo\\("), "mo("}, {std::regex("\\br\\("), "br("}};
  for (const auto& [re, to] : rules) text = std::regex_replace(text, re, to);
  return text;
}

}  // namespace

TEST(Oracle, ToyOptimum) {
  Problem p = toy();
  OracleResult r = brute_force_map(p);
  EXPECT_NEAR(r.score.soft, 9.8, 1e-12);
  EXPECT_EQ(r.score.hard_violations, 0);
  // {agent(n1)} ties with the all-false world, which comes first
  EXPECT_EQ(r.world, p.empty_world());
  EXPECT_NEAR(score(p, mlncpi::testing::world_of(p, {hidden(p, "agent", {"n1"})})).soft, 9.8, 1e-12);
}

TEST(Oracle, TiesGoToTheFirstCanonicalWorld) {
  Problem q = Problem::from_text("type t = {a, b}\npredicate p(t)\n1 p(v1)\n2 v1 != v2 ^ p(v1) => !p(v2)\n", "");
  OracleResult r = brute_force_map(q);
  // {p(a)} and {p(b)} both score 1 + 4 * 2 = 9; p(b) is the low bit.
  EXPECT_DOUBLE_EQ(r.score.soft, 9.0);
  EXPECT_TRUE(r.world.get(hidden(q, "p", {"b"})));
  EXPECT_FALSE(r.world.get(hidden(q, "p", {"a"})));
}

TEST(Oracle, EmptyHiddenSet) {
  Problem p = Problem::from_text("type t = {a, b}\nobserved o(t)\n1.5 o(v1)\n-1 !o(v1)\n", "o(a)\n");
  OracleResult r = brute_force_map(p);
  EXPECT_EQ(r.world.size(), 0);
  EXPECT_EQ(r.relevant_atoms, 0U);
  EXPECT_DOUBLE_EQ(r.score.soft, 1.5 - 1.0);
}

TEST(Oracle, UnsatisfiableHardConstraints) {
  Problem p = Problem::from_text(
      "type t = {a}\npredicate p(t)\npredicate q(t)\np(v1) | q(v1).\n!p(v1).\n!q(v1).\n", "");
  OracleResult r = brute_force_map(p);
  EXPECT_EQ(r.score.hard_violations, 1);
  EXPECT_EQ(score(p, r.world).hard_violations, 1);
}

TEST(Oracle, RefusesLargeInstances) {
  Problem p = Problem::from_text("type t = {a, b, c, d, e}\npredicate p(t, t)\n1 p(v1, v2)\n", "");
  EXPECT_THROW(brute_force_map(p), OracleSizeError);
  // 25 atoms exist, but only 5 matter here
  Problem diag = Problem::from_text("type t = {a, b, c, d, e}\npredicate p(t, t)\n1 p(v1, v1)\n", "");
  EXPECT_EQ(brute_force_map(diag).relevant_atoms, 5U);
  Problem wide = Problem::from_text(
      "type t = {a, b, c, d, e, f, g, h, i, j, k}\npredicate p(t)\n1 p(v1) ^ v2 = v2 ^ v3 = v3 ^ v4 = v4 ^ v5 = v5 ^ v6 = v6\n",
      "");
  EXPECT_THROW(brute_force_separate(wide, 0, wide.empty_world()), OracleSizeError);
}

TEST(Oracle, Deterministic) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    mlncpi::testing::RandomMlnGenerator gen(s);
    Problem p = gen.instance().problem();
    OracleResult a = brute_force_map(p), b = brute_force_map(p);
    EXPECT_EQ(a.world, b.world);
    EXPECT_TRUE(a.score.ties(b.score, 0.0));
  }
}

TEST(Oracle, RenamingInvariance) {
  for (std::uint64_t s = 0; s < 60; ++s) {
    mlncpi::testing::RandomMlnGenerator gen(300 + s);
    auto inst = gen.instance();
    Problem p = inst.problem();
    Problem q = Problem::from_text(rename(inst.mln), rename(inst.db));
    ASSERT_EQ(p.atoms().hidden_count(), q.atoms().hidden_count());
    OracleResult a = brute_force_map(p), b = brute_force_map(q);
    EXPECT_EQ(a.score.hard_violations, b.score.hard_violations) << inst.mln;
    EXPECT_NEAR(a.score.soft, b.score.soft, 1e-9) << inst.mln;
    // a's optimum, carried over, is optimal for q too
    std::string carried;
    for (AtomId id = 0; id < a.world.size(); ++id)
      if (a.world.get(id)) carried += rename(p.hidden_atom_name(id)) + "\n";
    World w = parse_solution(carried, q.signature(), q.atoms());
    EXPECT_TRUE(score(q, w).ties(b.score)) << inst.mln;
  }
}

TEST(OracleSeparate, Examples) {
  Problem p = toy();
  World both = mlncpi::testing::world_of(p, {hidden(p, "agent", {"n1"}), hidden(p, "agent", {"n2"})});
  EXPECT_EQ(brute_force_separate(p, 0, both), (std::vector<Tuple>{tuple(p, {"n2"})}));
  EXPECT_EQ(brute_force_separate(p, 1, both), (std::vector<Tuple>{tuple(p, {"n1", "n2"}), tuple(p, {"n2", "n1"})}));
  EXPECT_TRUE(brute_force_separate(p, 0, p.empty_world()).empty());
}

TEST(OracleSeparate, ZeroWeightAndHard) {
  Problem p = Problem::from_text("type t = {a, b}\npredicate p(t)\n0 p(v1)\np(v1).\n", "");
  World w = mlncpi::testing::world_of(p, {hidden(p, "p", {"a"})});
  EXPECT_TRUE(brute_force_separate(p, 0, p.empty_world()).empty());
  EXPECT_EQ(brute_force_separate(p, 1, w), (std::vector<Tuple>{tuple(p, {"b"})}));
}

TEST(OraclePartial, RestrictedToGrounding) {
  Problem p = toy("");
  PartialGrounding g(p.formula_count());
  g.add(1, tuple(p, {"n1", "n2"}));
  OracleResult r = brute_force_partial_map(p, g);
  EXPECT_DOUBLE_EQ(r.score.soft, 1.2);
  EXPECT_EQ(r.relevant_atoms, 2U);
}
