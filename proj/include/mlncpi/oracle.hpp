#pragma once

// Exhaustive reference implementations. Slow on purpose; they share as
// little code with the engine as is practical (no instantiation, no
// DPLL, no query evaluation).

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "mlncpi/error.hpp"
#include "mlncpi/logic.hpp"
#include "mlncpi/problem.hpp"

namespace mlncpi {

inline constexpr std::size_t kOracleMaxAtoms = 24;
inline constexpr std::uint64_t kOracleMaxTuples = 1000000;

struct OracleResult {
  World world;
  Score score;
  std::size_t relevant_atoms = 0;
};

namespace oracle_detail {

inline void collect_hidden(const Formula& f, const AtomIndex& atoms, std::vector<AtomId>& out) {
  if (f.kind == FormulaKind::Atom) {
    if (atoms.observed(f.predicate)) return;
    std::vector<ConstantId> args;
    for (const Term& t : f.args) args.push_back(t.id);
    AtomId id = atoms.id(f.predicate, args);
    if (id != kNoAtom) out.push_back(id);
    return;
  }
  for (const Formula& c : f.children) collect_hidden(c, atoms, out);
}

// A fully ground, quantifier-free copy of grounding `tuple` of formula fi.
inline Formula ground(const Problem& problem, std::size_t fi, std::span<const ConstantId> tuple) {
  return expand_quantifiers(substitute(problem.formula(fi).formula, tuple), problem.signature());
}

inline std::vector<AtomId> atoms_of(const Problem& problem, const Formula& g) {
  std::vector<AtomId> out;
  collect_hidden(g, problem.atoms(), out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Truth values of g over all assignments to its own hidden atoms, the rest
// of the world held at `world`. Bit 0 = some assignment makes g false,
// bit 1 = some assignment makes it true.
inline int reachable(const Problem& problem, const Formula& g, const std::vector<AtomId>& atoms, World world) {
  if (atoms.size() > kOracleMaxAtoms) throw OracleSizeError("grounding mentions too many hidden atoms");
  int seen = 0;
  const std::uint64_t n = std::uint64_t{1} << atoms.size();
  for (std::uint64_t m = 0; m < n && seen != 3; ++m) {
    for (std::size_t j = 0; j < atoms.size(); ++j) world.set(atoms[j], ((m >> j) & 1U) != 0);
    seen |= evaluate(g, problem.interpretation(world)) ? 2 : 1;
  }
  return seen;
}

struct GroundTerm {
  Formula formula;
  Weight weight;
  std::vector<AtomId> atoms;
};

inline OracleResult map_over(const Problem& problem, const PartialGrounding& g) {
  std::vector<GroundTerm> terms;
  std::vector<AtomId> relevant;
  for (std::size_t fi = 0; fi < g.formula_count(); ++fi) {
    for (const Tuple& t : g.tuples(fi)) {
      Formula f = ground(problem, fi, t);
      std::vector<AtomId> atoms = atoms_of(problem, f);
      relevant.insert(relevant.end(), atoms.begin(), atoms.end());
      terms.push_back(GroundTerm{std::move(f), problem.formula(fi).weight, std::move(atoms)});
    }
  }
  std::sort(relevant.begin(), relevant.end());
  relevant.erase(std::unique(relevant.begin(), relevant.end()), relevant.end());
  if (relevant.size() > kOracleMaxAtoms)
    throw OracleSizeError("oracle refuses: " + std::to_string(relevant.size()) + " relevant hidden atoms (limit " +
                          std::to_string(kOracleMaxAtoms) + ")");

  // Hard groundings no world satisfies never count as violations.
  std::vector<bool> counts(terms.size(), true);
  World zero = problem.empty_world();
  for (std::size_t i = 0; i < terms.size(); ++i)
    if (terms[i].weight.hard) counts[i] = (reachable(problem, terms[i].formula, terms[i].atoms, zero) & 2) != 0;

  OracleResult best;
  bool have = false;
  const std::size_t k = relevant.size();
  const std::uint64_t n = std::uint64_t{1} << k;
  World w = problem.empty_world();
  // relevant[0] is the most significant bit, so increasing m walks the
  // worlds in canonical (lexicographic) order.
  for (std::uint64_t m = 0; m < n; ++m) {
    for (std::size_t j = 0; j < k; ++j) w.set(relevant[j], ((m >> (k - 1 - j)) & 1U) != 0);
    Interpretation in = problem.interpretation(w);
    Score s;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      bool holds = evaluate(terms[i].formula, in);
      if (terms[i].weight.hard) {
        if (!holds && counts[i]) ++s.hard_violations;
      } else if (holds) {
        s.soft += terms[i].weight.value;
      }
    }
    if (!have || s.better_than(best.score, 0.0)) {
      have = true;
      best.world = w;
      best.score = s;
    }
  }
  best.relevant_atoms = k;
  return best;
}

}  // namespace oracle_detail

// Exact MAP by enumerating every assignment to the hidden atoms that occur
// in some grounding (the others are left false). Ties go to the first
// world in canonical order.
inline OracleResult brute_force_map(const Problem& problem) {
  for (std::size_t fi = 0; fi < problem.formula_count(); ++fi)
    if (problem.grounding_count(fi) > kOracleMaxTuples)
      throw OracleSizeError("oracle refuses: formula " + std::to_string(fi) + " has too many groundings");
  return oracle_detail::map_over(problem, PartialGrounding::full(problem));
}

// Exact maximiser of the partial score s_G.
inline OracleResult brute_force_partial_map(const Problem& problem, const PartialGrounding& g) {
  return oracle_detail::map_over(problem, g);
}

// Separation by definition: tuples c with w * f_c(world) < max_y w * f_c(y),
// maximising over the grounding's own hidden atoms. HARD counts as w > 0.
inline std::vector<Tuple> brute_force_separate(const Problem& problem, std::size_t fi, const World& world) {
  const WeightedFormula& wf = problem.formula(fi);
  const int sign = wf.weight.sign();
  if (sign == 0) return {};
  if (problem.grounding_count(fi) > kOracleMaxTuples)
    throw OracleSizeError("oracle refuses: more than 10^6 tuples to enumerate");
  std::vector<Tuple> out;
  auto domains = problem.free_domains(fi);
  for_each_tuple(domains, [&](const Tuple& t) {
    Formula g = oracle_detail::ground(problem, fi, t);
    bool holds = evaluate(g, problem.interpretation(world));
    if (holds == (sign > 0)) return;
    int seen = oracle_detail::reachable(problem, g, oracle_detail::atoms_of(problem, g), world);
    bool better_exists = sign > 0 ? (seen & 2) != 0 : (seen & 1) != 0;
    if (better_exists) out.push_back(t);
  });
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mlncpi
