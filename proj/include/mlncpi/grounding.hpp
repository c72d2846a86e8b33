#pragma once

// Feature functions, full and partial scores, initial grounding and
// separation.

#include <cstdint>
#include <span>
#include <vector>

#include "mlncpi/logic.hpp"
#include "mlncpi/problem.hpp"
#include "mlncpi/query.hpp"

namespace mlncpi {

enum class GroundingStatus { AlwaysTrue, AlwaysFalse, Varies };

// Whether an instantiated grounding depends on the hidden atoms at all.
inline GroundingStatus classify(const Formula& instantiated) {
  if (instantiated.kind == FormulaKind::True) return GroundingStatus::AlwaysTrue;
  if (instantiated.kind == FormulaKind::False) return GroundingStatus::AlwaysFalse;
  if (!satisfiable(instantiated)) return GroundingStatus::AlwaysFalse;
  if (!falsifiable(instantiated)) return GroundingStatus::AlwaysTrue;
  return GroundingStatus::Varies;
}

// f_c^phi(y, x): 1 iff grounding `tuple` of formula fi holds.
inline int feature(const Problem& problem, std::size_t fi, std::span<const ConstantId> tuple, const World& world) {
  const WeightedFormula& wf = problem.formula(fi);
  if (tuple.size() != static_cast<std::size_t>(wf.free_count))
    throw LogicError("tuple length mismatch: formula has " + std::to_string(wf.free_count) + " free variable(s), got " +
                     std::to_string(tuple.size()));
  return evaluate_bound(wf.formula, tuple, problem.interpretation(world)) ? 1 : 0;
}

namespace detail {

// Adds the contribution of one grounding whose truth value is known.
inline void accumulate(const Problem& problem, std::size_t fi, const Tuple& tuple, bool holds, Score& s) {
  const WeightedFormula& wf = problem.formula(fi);
  if (!wf.weight.hard) {
    if (holds) s.soft += wf.weight.value;
    return;
  }
  // A hard grounding counts as violated only if some world satisfies it.
  if (!holds && satisfiable(problem.instantiate(fi, tuple))) ++s.hard_violations;
}

}  // namespace detail

// s(y, x) over the full grounding C^{n_phi} of every formula. Soft weights
// sum into Score::soft; false hard groundings are counted, except those no
// world can satisfy.
inline Score score(const Problem& problem, const World& world) {
  Score s;
  Interpretation in = problem.interpretation(world);
  for (std::size_t fi = 0; fi < problem.formula_count(); ++fi) {
    const WeightedFormula& wf = problem.formula(fi);
    BoundEvaluator eval(wf.formula, in);
    auto domains = problem.free_domains(fi);
    for_each_tuple(domains, [&](const Tuple& t) { detail::accumulate(problem, fi, t, eval(t), s); });
  }
  return s;
}

// s_G(y, x): the same sum restricted to the tuples of G.
inline Score partial_score(const Problem& problem, const PartialGrounding& g, const World& world) {
  Score s;
  Interpretation in = problem.interpretation(world);
  for (std::size_t fi = 0; fi < g.formula_count(); ++fi) {
    const WeightedFormula& wf = problem.formula(fi);
    BoundEvaluator eval(wf.formula, in);
    for (const Tuple& t : g.tuples(fi)) detail::accumulate(problem, fi, t, eval(t), s);
  }
  return s;
}

// G^0: every grounding that depends on exactly one hidden atom after
// evidence substitution. Groundings that are constant are left out.
inline PartialGrounding initial_grounding(const Problem& problem) {
  PartialGrounding g(problem.formula_count());
  Instantiator inst(problem.signature(), problem.atoms(), problem.evidence());
  for (std::size_t fi = 0; fi < problem.formula_count(); ++fi) {
    const Formula& f = problem.formula(fi).formula;
    auto domains = problem.free_domains(fi);
    for_each_tuple(domains, [&](const Tuple& t) {
      Formula ground = inst(f, t);
      if (ground.is_constant()) return;
      if (hidden_atoms(ground).size() > 1) return;
      if (classify(ground) != GroundingStatus::Varies) return;
      g.add(fi, t);
    });
  }
  return g;
}

// Tuples of formula fi whose grounding is not maximally satisfied in world:
// false groundings of positive-weight and hard formulae, true groundings of
// negative-weight ones, in both cases only where some other world would do
// better. Candidates come from a relational query over store (which must
// mirror world); the result is sorted.
inline std::vector<Tuple> separate(const Problem& problem, const AtomStore& store, std::size_t fi, const World& world) {
  const WeightedFormula& wf = problem.formula(fi);
  const int sign = wf.weight.sign();
  if (sign == 0) return {};
  Formula query = sign > 0 ? Formula::negation(wf.formula) : wf.formula;
  std::span<const TypeId> free_types(wf.variable_types.data(), static_cast<std::size_t>(wf.free_count));
  std::vector<Tuple> candidates = evaluate_query(problem, store, world, query, free_types);
  std::vector<Tuple> out;
  Instantiator inst(problem.signature(), problem.atoms(), problem.evidence());
  for (Tuple& t : candidates) {
    Formula ground = inst(wf.formula, t);
    if (ground.is_constant()) continue;
    bool improvable = sign > 0 ? satisfiable(ground) : falsifiable(ground);
    if (improvable) out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<Tuple> separate(const Problem& problem, std::size_t fi, const World& world) {
  AtomStore store(problem, world);
  return separate(problem, store, fi, world);
}

// Number of tuples of fi whose grounding is not constant under the evidence.
inline std::size_t varying_groundings(const Problem& problem, std::size_t fi, const PartialGrounding& g) {
  std::size_t n = 0;
  Instantiator inst(problem.signature(), problem.atoms(), problem.evidence());
  for (const Tuple& t : g.tuples(fi))
    if (classify(inst(problem.formula(fi).formula, t)) == GroundingStatus::Varies) ++n;
  return n;
}

}  // namespace mlncpi
