#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "mlncpi/logic.hpp"
#include "mlncpi/parser.hpp"

namespace mlncpi {

using Tuple = std::vector<ConstantId>;

struct TupleHash {
  std::size_t operator()(const Tuple& t) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (ConstantId c : t) {
      h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c));
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

// A loaded model with its evidence: frozen signature, ground-atom index and
// closed-world evidence.
class Problem {
 public:
  Problem(MlnDocument doc, const EvidenceSet& evidence) : sig_(std::move(doc.signature)), formulas_(std::move(doc.formulas)) {
    atoms_ = AtomIndex(sig_);
    evidence_ = Evidence(atoms_.observed_count());
    for (const EvidenceAtom& a : evidence.atoms) {
      AtomId id = atoms_.id(a.predicate, a.args);
      if (id != kNoAtom) evidence_.set(id, a.truth);
    }
  }

  static Problem from_text(std::string_view mln, std::string_view db) {
    MlnDocument doc = parse_mln(mln);
    EvidenceSet ev = parse_evidence(db, doc.signature);
    return Problem(std::move(doc), ev);
  }

  const Signature& signature() const { return sig_; }
  const std::vector<WeightedFormula>& formulas() const { return formulas_; }
  const WeightedFormula& formula(std::size_t i) const { return formulas_.at(i); }
  std::size_t formula_count() const { return formulas_.size(); }
  const AtomIndex& atoms() const { return atoms_; }
  const Evidence& evidence() const { return evidence_; }

  Interpretation interpretation(const World& world) const { return Interpretation{sig_, atoms_, evidence_, world}; }
  World empty_world() const { return World(atoms_.hidden_count()); }

  // Domains of formula fi's free variables, in variable order.
  std::vector<const std::vector<ConstantId>*> free_domains(std::size_t fi) const {
    const WeightedFormula& wf = formulas_.at(fi);
    std::vector<const std::vector<ConstantId>*> out;
    for (int v = 0; v < wf.free_count; ++v) out.push_back(&sig_.domain(wf.variable_types[static_cast<std::size_t>(v)]));
    return out;
  }

  // |C^{n_phi}| restricted to the variables' types.
  std::uint64_t grounding_count(std::size_t fi) const {
    std::uint64_t n = 1;
    for (const auto* d : free_domains(fi)) n *= d->size();
    return n;
  }

  std::string hidden_atom_name(AtomId id) const { return atom_to_string(sig_, atoms_.hidden_atom(id)); }

  Formula instantiate(std::size_t fi, std::span<const ConstantId> tuple) const {
    Instantiator inst(sig_, atoms_, evidence_);
    return inst(formulas_.at(fi).formula, tuple);
  }

 private:
  Signature sig_;
  std::vector<WeightedFormula> formulas_;
  AtomIndex atoms_;
  Evidence evidence_;
};

// Calls fn(tuple) for every tuple of the cartesian product, last position
// varying fastest. An empty domain list yields the single empty tuple.
template <typename Fn>
void for_each_tuple(std::span<const std::vector<ConstantId>* const> domains, Fn&& fn) {
  for (const auto* d : domains)
    if (d->empty()) return;
  Tuple tuple(domains.size());
  std::vector<std::size_t> pos(domains.size(), 0);
  for (std::size_t i = 0; i < domains.size(); ++i) tuple[i] = (*domains[i])[0];
  while (true) {
    fn(static_cast<const Tuple&>(tuple));
    std::size_t i = domains.size();
    while (i > 0) {
      --i;
      if (++pos[i] < domains[i]->size()) {
        tuple[i] = (*domains[i])[pos[i]];
        break;
      }
      pos[i] = 0;
      tuple[i] = (*domains[i])[0];
      if (i == 0) return;
    }
    if (domains.empty()) return;
  }
}

// Per-formula sets of grounding tuples. Sets only grow; iteration follows
// insertion order.
class PartialGrounding {
 public:
  PartialGrounding() = default;
  explicit PartialGrounding(std::size_t formula_count) : tuples_(formula_count), members_(formula_count) {}

  // Every tuple of every formula.
  static PartialGrounding full(const Problem& problem) {
    PartialGrounding g(problem.formula_count());
    for (std::size_t fi = 0; fi < problem.formula_count(); ++fi) {
      auto domains = problem.free_domains(fi);
      for_each_tuple(domains, [&](const Tuple& t) { g.add(fi, t); });
    }
    return g;
  }

  bool add(std::size_t fi, const Tuple& t) {
    if (!members_.at(fi).insert(t).second) return false;
    tuples_[fi].push_back(t);
    return true;
  }
  bool contains(std::size_t fi, const Tuple& t) const { return members_.at(fi).count(t) != 0; }
  const std::vector<Tuple>& tuples(std::size_t fi) const { return tuples_.at(fi); }
  std::size_t size(std::size_t fi) const { return tuples_.at(fi).size(); }
  std::size_t formula_count() const { return tuples_.size(); }
  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& t : tuples_) n += t.size();
    return n;
  }

 private:
  std::vector<std::vector<Tuple>> tuples_;
  std::vector<std::unordered_set<Tuple, TupleHash>> members_;
};

// Score of a world: hard violations and the soft part of the weighted
// feature sum. Worlds compare lexicographically: fewer violations first,
// then higher soft score.
struct Score {
  std::int64_t hard_violations = 0;
  double soft = 0.0;

  bool better_than(const Score& other, double eps = 1e-9) const {
    if (hard_violations != other.hard_violations) return hard_violations < other.hard_violations;
    return soft > other.soft + eps;
  }
  bool ties(const Score& other, double eps = 1e-9) const {
    return hard_violations == other.hard_violations && std::fabs(soft - other.soft) <= eps;
  }
};

}  // namespace mlncpi
