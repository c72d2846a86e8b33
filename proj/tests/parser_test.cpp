#include <gtest/gtest.h>

#include <random>
#include <string>

#include "mlncpi/problem.hpp"
#include "support/random_mln.hpp"
#include "support/toy.hpp"

using namespace mlncpi;

namespace {

constexpr std::string_view kDecls =
    "type node = {n1, n2}\n"
    "predicate agent(node)\n"
    "observed left(node)\n";

MlnDocument parse_with_decls(std::string_view line) { return parse_mln(std::string(kDecls) + std::string(line) + "\n"); }

ParseError parse_error(std::string_view mln) {
  try {
    parse_mln(mln);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no parse error for: " << mln;
  return ParseError("", {});
}

ParseError evidence_error(std::string_view db) {
  MlnDocument doc = parse_mln(kDecls);
  try {
    parse_evidence(db, doc.signature);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no evidence error for: " << db;
  return ParseError("", {});
}

std::string printed(const MlnDocument& d, std::size_t i = 0) {
  const WeightedFormula& wf = d.formulas.at(i);
  return to_string(wf.formula, d.signature, wf.variable_names);
}

}  // namespace

TEST(ParseMln, WeightedFormula) {
  MlnDocument d = parse_with_decls("2.5 agent(v1) => left(v1)");
  ASSERT_EQ(d.formulas.size(), 1U);
  EXPECT_EQ(d.formulas[0].weight, Weight::soft(2.5));
  EXPECT_EQ(d.formulas[0].free_count, 1);
  EXPECT_EQ(d.formulas[0].line, 4);
  EXPECT_EQ(printed(d), "(agent(v1) => left(v1))");
  EXPECT_EQ(d.formulas[0].source, "2.5 agent(v1) => left(v1)");
}

TEST(ParseMln, HardTransitivity) {
  MlnDocument d = parse_mln(
      "type bib = {b1, b2, b3}\n"
      "predicate sameBib(bib, bib)\n"
      "sameBib(v1,v2) ^ sameBib(v2,v3) => sameBib(v1,v3).\n");
  ASSERT_EQ(d.formulas.size(), 1U);
  EXPECT_TRUE(d.formulas[0].weight.hard);
  EXPECT_EQ(d.formulas[0].free_count, 3);
  EXPECT_EQ(printed(d), "((sameBib(v1,v2) ^ sameBib(v2,v3)) => sameBib(v1,v3))");
}

TEST(ParseMln, ToyModel) {
  Problem p = mlncpi::testing::toy();
  ASSERT_EQ(p.formula_count(), 2U);
  EXPECT_EQ(p.formula(1).weight, Weight::soft(1.2));
  EXPECT_EQ(p.formula(1).free_count, 2);
  EXPECT_EQ(p.atoms().hidden_count(), 2);
  EXPECT_EQ(p.atoms().observed_count(), 2);
}

TEST(ParseMln, UnclosedParenthesisLocated) {
  ParseError e = parse_error("type node = {n1}\npredicate agent(node)\n2.5 agent(v1\n");
  EXPECT_EQ(e.location().line, 3);
  EXPECT_EQ(e.location().column, 13);
}

TEST(ParseMln, UndeclaredPredicate) {
  ParseError e = parse_error(std::string(kDecls) + "1 foo(v1)\n");
  EXPECT_NE(e.message().find("undeclared predicate"), std::string::npos);
  EXPECT_EQ(e.location().line, 4);
  EXPECT_EQ(e.location().column, 3);
}

TEST(ParseMln, ArityMismatch) {
  ParseError e = parse_error(std::string(kDecls) + "1 agent(v1, v2)\n");
  EXPECT_NE(e.message().find("arity mismatch"), std::string::npos);
}

TEST(ParseMln, DuplicatePredicate) {
  ParseError e = parse_error(std::string(kDecls) + "predicate agent(node)\n");
  EXPECT_NE(e.message().find("duplicate predicate"), std::string::npos);
  EXPECT_EQ(e.location().line, 4);
}

TEST(ParseMln, WeightAndPeriodRejected) {
  ParseError e = parse_error(std::string(kDecls) + "2.5 agent(v1) => left(v1).\n");
  EXPECT_NE(e.message().find("cannot carry a weight"), std::string::npos);
}

TEST(ParseMln, NeitherWeightNorPeriodRejected) {
  ParseError e = parse_error(std::string(kDecls) + "agent(v1)\n");
  EXPECT_EQ(e.location().column, 1);
}

TEST(ParseMln, TrailingOperatorAndStrayCharacters) {
  EXPECT_EQ(parse_error(std::string(kDecls) + "1 agent(v1) ^\n").location().column, 14);
  EXPECT_EQ(parse_error(std::string(kDecls) + "1 agent(v1) @\n").location().column, 13);
  EXPECT_EQ(parse_error(std::string(kDecls) + "1 )\n").location().column, 3);
}

TEST(ParseMln, NonFiniteWeightRejected) { parse_error(std::string(kDecls) + "inf agent(v1)\n"); }

TEST(ParseMln, Precedence) {
  EXPECT_EQ(printed(parse_with_decls("1 agent(v1) | left(v1) ^ !agent(v1)")), "(agent(v1) | (left(v1) ^ !agent(v1)))");
  EXPECT_EQ(printed(parse_with_decls("1 agent(v1) <=> left(v1) | agent(v1)")), "(agent(v1) <=> (left(v1) | agent(v1)))");
  EXPECT_EQ(printed(parse_with_decls("1 !agent(v1) ^ left(v1) => agent(v1) | left(v1)")),
            "((!agent(v1) ^ left(v1)) => (agent(v1) | left(v1)))");
}

TEST(ParseMln, ImplicationIsRightAssociative) {
  EXPECT_EQ(printed(parse_with_decls("1 agent(v1) => left(v1) => agent(v1)")), "(agent(v1) => (left(v1) => agent(v1)))");
}

TEST(ParseMln, QuantifiersAlphaRenamed) {
  MlnDocument d = parse_with_decls("1 (exists x agent(x)) ^ (forall x left(x)) ^ agent(v1)");
  const WeightedFormula& wf = d.formulas[0];
  EXPECT_EQ(wf.free_count, 1);
  ASSERT_EQ(wf.variable_names.size(), 3U);
  // two distinct slots for the two bound x's
  const Formula& f = wf.formula;
  ASSERT_EQ(f.kind, FormulaKind::And);
  ASSERT_EQ(f.children.size(), 3U);
  EXPECT_NE(f.children[0].variable, f.children[1].variable);
  EXPECT_EQ(f.children[0].variable_type, d.signature.find_type("node").value());
}

TEST(ParseMln, VariableComparisons) {
  MlnDocument d = parse_with_decls("1.2 v1 != v2 ^ agent(v1) => !agent(v2)");
  EXPECT_EQ(d.formulas[0].free_count, 2);
  EXPECT_EQ(printed(d), "((v1 != v2 ^ agent(v1)) => !agent(v2))");
}

TEST(ParseMln, CommentsAndBlankLines) {
  MlnDocument d = parse_mln(
      "// a model\n"
      "type node = {n1, n2}   // two nodes\n"
      "\n"
      "predicate agent(node)\n"
      "-0.5 agent(v1)   // prefer false\n");
  ASSERT_EQ(d.formulas.size(), 1U);
  EXPECT_EQ(d.formulas[0].weight, Weight::soft(-0.5));
  EXPECT_EQ(d.formulas[0].line, 5);
  EXPECT_EQ(d.formulas[0].source, "-0.5 agent(v1)");
}

TEST(ParseMln, ZeroWeightAllowed) {
  MlnDocument d = parse_with_decls("0 agent(v1)");
  EXPECT_EQ(d.formulas[0].weight.sign(), 0);
}

TEST(ParseEvidence, PositiveAndNegative) {
  MlnDocument doc = parse_mln(kDecls);
  EvidenceSet ev = parse_evidence("left(n1)\n!left(n2)\n", doc.signature);
  ASSERT_EQ(ev.atoms.size(), 2U);
  EXPECT_TRUE(ev.atoms[0].truth);
  EXPECT_FALSE(ev.atoms[1].truth);
  EXPECT_EQ(ev.atoms[1].args, std::vector<ConstantId>{doc.signature.find_constant("n2").value()});
}

TEST(ParseEvidence, HiddenPredicateRejected) {
  ParseError e = evidence_error("agent(n1)\n");
  EXPECT_NE(e.message().find("evidence for hidden predicate"), std::string::npos);
  EXPECT_EQ(e.location().line, 1);
}

TEST(ParseEvidence, ArityMismatch) {
  EXPECT_NE(evidence_error("left(n1, n2)\n").message().find("arity mismatch"), std::string::npos);
  EXPECT_NE(evidence_error("left\n").message().find("arity mismatch"), std::string::npos);
}

TEST(ParseEvidence, Contradiction) {
  ParseError e = evidence_error("left(n1)\n!left(n1)\n");
  EXPECT_NE(e.message().find("contradictory"), std::string::npos);
  EXPECT_EQ(e.location().line, 2);
}

TEST(ParseEvidence, RepeatedAssertionIsHarmless) {
  MlnDocument doc = parse_mln(kDecls);
  EXPECT_EQ(parse_evidence("left(n1)\nleft(n1)\n", doc.signature).atoms.size(), 1U);
}

TEST(ParseEvidence, UndeclaredPredicate) {
  EXPECT_NE(evidence_error("right(n1)\n").message().find("undeclared"), std::string::npos);
}

TEST(ParseEvidence, NewConstantsExtendTheirType) {
  Problem p = Problem::from_text(kDecls, "left(n3)\n");
  const Signature& sig = p.signature();
  auto n3 = sig.find_constant("n3");
  ASSERT_TRUE(n3.has_value());
  EXPECT_TRUE(sig.in_type(sig.find_type("node").value(), *n3));
  EXPECT_EQ(p.atoms().hidden_count(), 3);
  EXPECT_EQ(p.hidden_atom_name(2), "agent(n3)");
}

TEST(ParseSolution, RoundTripsEmittedAtoms) {
  Problem p = mlncpi::testing::toy();
  World w = p.empty_world();
  w.set(1, true);
  std::string text;
  for (AtomId a = 0; a < w.size(); ++a)
    if (w.get(a)) text += p.hidden_atom_name(a) + "\n";
  text += "---\nscore\t1\n";
  EXPECT_EQ(parse_solution(text, p.signature(), p.atoms()), w);
  EXPECT_THROW(parse_solution("left(n1)\n", p.signature(), p.atoms()), ParseError);
  EXPECT_THROW(parse_solution("agent(n9)\n", p.signature(), p.atoms()), ParseError);
}

TEST(ParseMln, RandomModelsParse) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    mlncpi::testing::RandomMlnGenerator gen(s);
    auto inst = gen.instance();
    EXPECT_NO_THROW(inst.problem()) << inst.mln << "\n--\n" << inst.db;
  }
}

// Mutated inputs either parse or fail with a located ParseError.
TEST(ParseMln, FuzzedInputIsTotal) {
  std::mt19937_64 rng(2024);
  const std::string alphabet = "()!^|=><,.{}-+ 0123456789abcxyzvAB\"/\t#@";
  int errors = 0;
  for (std::uint64_t s = 0; s < 2000; ++s) {
    mlncpi::testing::RandomMlnGenerator gen(s);
    std::string text = gen.instance().mln;
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < edits && !text.empty(); ++k) {
      std::size_t pos = rng() % text.size();
      switch (rng() % 3) {
        case 0: text[pos] = alphabet[rng() % alphabet.size()]; break;
        case 1: text.erase(pos, 1); break;
        default: text.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
      }
    }
    try {
      MlnDocument d = parse_mln(text);
      parse_evidence("o(A)\n", d.signature);
    } catch (const ParseError& e) {
      ++errors;
      EXPECT_GE(e.location().line, 1) << text;
      EXPECT_GE(e.location().column, 1) << text;
    }
  }
  EXPECT_GT(errors, 100);
}
