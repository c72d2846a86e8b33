#pragma once

// MaxWalkSAT over weighted ground clauses.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "mlncpi/grounding.hpp"
#include "mlncpi/logic.hpp"
#include "mlncpi/problem.hpp"

namespace mlncpi {

struct WeightedClause {
  GroundClause literals;
  double weight = 0.0;  // > 0, unused for hard clauses
  bool hard = false;
};

struct WeightedClauseSet {
  std::vector<WeightedClause> clauses;
};

// Ground every tuple of G, simplify against evidence and convert to
// clauses. Negative weights negate the formula; a grounding whose CNF has k
// clauses gives each clause weight |w|/k.
inline WeightedClauseSet clausify(const Problem& problem, const PartialGrounding& g) {
  WeightedClauseSet out;
  Instantiator inst(problem.signature(), problem.atoms(), problem.evidence());
  for (std::size_t fi = 0; fi < g.formula_count(); ++fi) {
    const WeightedFormula& wf = problem.formula(fi);
    if (wf.weight.sign() == 0) continue;
    for (const Tuple& t : g.tuples(fi)) {
      Formula ground = inst(wf.formula, t);
      if (ground.is_constant()) continue;
      if (wf.weight.sign() < 0) ground = fold_constants(Formula::negation(std::move(ground)));
      auto clauses = to_cnf(ground, problem.atoms());
      if (clauses.empty()) continue;
      double w = wf.weight.hard ? 0.0 : std::fabs(wf.weight.value) / static_cast<double>(clauses.size());
      for (GroundClause& c : clauses) out.clauses.push_back(WeightedClause{std::move(c), w, wf.weight.hard});
    }
  }
  return out;
}

struct MwsParams {
  double q = 0.5;              // probability of a random (non-greedy) flip
  std::uint64_t flips = 100000;
  int restarts = 0;            // extra tries, each from a fresh random world
  std::uint64_t seed = 0;
  bool verify = false;         // recount caches after every flip
};

// Cost of an assignment: unsatisfied hard clauses, then unsatisfied soft
// weight. Lower is better.
struct ClauseCost {
  std::int64_t hard = 0;
  double soft = 0.0;

  bool better_than(const ClauseCost& o) const {
    if (hard != o.hard) return hard < o.hard;
    return soft < o.soft - 1e-12;
  }
};

struct MwsStep {
  std::uint64_t step = 0;  // flip number within the try, from 1
  int attempt = 0;
  AtomId flipped = kNoAtom;
  ClauseCost current;
  ClauseCost best;
};

struct MwsResult {
  World world;
  ClauseCost cost;
  std::uint64_t flips = 0;  // flips performed over all tries
};

enum class MwsStart { Given, Random };

class MaxWalkSat {
 public:
  using Observer = std::function<void(const MwsStep&)>;

  MaxWalkSat(const WeightedClauseSet& clauses, MwsParams params) : clauses_(clauses.clauses), params_(params) {
    if (params_.q < 0.0 || params_.q > 1.0) throw std::invalid_argument("MaxWalkSAT q must lie in [0, 1]");
    for (const WeightedClause& c : clauses_) {
      if (c.literals.empty()) throw std::invalid_argument("MaxWalkSAT cannot take an empty clause");
      for (const Literal& l : c.literals) atom_ids_.push_back(l.atom);
    }
    std::sort(atom_ids_.begin(), atom_ids_.end());
    atom_ids_.erase(std::unique(atom_ids_.begin(), atom_ids_.end()), atom_ids_.end());
    lits_.resize(clauses_.size());
    occurs_.resize(atom_ids_.size());
    for (std::size_t c = 0; c < clauses_.size(); ++c) {
      for (const Literal& l : clauses_[c].literals) {
        auto v = static_cast<std::uint32_t>(std::lower_bound(atom_ids_.begin(), atom_ids_.end(), l.atom) - atom_ids_.begin());
        lits_[c].push_back(LocalLit{v, l.positive});
        occurs_[v].push_back(static_cast<std::uint32_t>(c));
      }
    }
  }

  void set_observer(Observer obs) { observer_ = std::move(obs); }

  // Atoms not mentioned by any clause keep their value from start.
  MwsResult solve(const World& start, MwsStart mode) {
    std::mt19937_64 rng(params_.seed);
    MwsResult result;
    result.world = start;
    bool have_best = false;
    std::vector<std::uint8_t> best_values;
    for (int attempt = 0; attempt <= params_.restarts; ++attempt) {
      values_.assign(atom_ids_.size(), 0);
      // with no flip budget the start world comes back untouched
      bool random = (mode == MwsStart::Random || attempt > 0) && params_.flips > 0;
      for (std::size_t v = 0; v < atom_ids_.size(); ++v) {
        values_[v] = random ? static_cast<std::uint8_t>(rng() & 1U) : static_cast<std::uint8_t>(start.get(atom_ids_[v]));
      }
      initialise();
      ClauseCost try_best = cost_;
      std::vector<std::uint8_t> try_best_values = values_;
      for (std::uint64_t step = 1; step <= params_.flips; ++step) {
        if (unsat_hard_.empty() && unsat_soft_.empty()) break;
        std::uint32_t v = choose(rng);
        flip(v);
        ++result.flips;
        if (params_.verify) verify();
        if (cost_.better_than(try_best)) {
          try_best = cost_;
          try_best_values = values_;
        }
        if (observer_) observer_(MwsStep{step, attempt, atom_ids_[v], cost_, try_best});
      }
      if (!have_best || try_best.better_than(result.cost)) {
        have_best = true;
        result.cost = try_best;
        best_values = std::move(try_best_values);
      }
    }
    for (std::size_t v = 0; v < atom_ids_.size(); ++v) result.world.set(atom_ids_[v], best_values[v] != 0);
    return result;
  }

 private:
  struct LocalLit {
    std::uint32_t var;
    bool positive;
  };

  bool lit_true(const LocalLit& l) const { return (values_[l.var] != 0) == l.positive; }

  void initialise() {
    true_count_.assign(clauses_.size(), 0);
    pos_.assign(clauses_.size(), kAbsent);
    unsat_hard_.clear();
    unsat_soft_.clear();
    cost_ = ClauseCost{};
    for (std::size_t c = 0; c < clauses_.size(); ++c) {
      for (const LocalLit& l : lits_[c])
        if (lit_true(l)) ++true_count_[c];
      if (true_count_[c] == 0) mark_unsat(static_cast<std::uint32_t>(c));
    }
  }

  void mark_unsat(std::uint32_t c) {
    auto& list = clauses_[c].hard ? unsat_hard_ : unsat_soft_;
    pos_[c] = static_cast<std::uint32_t>(list.size());
    list.push_back(c);
    if (clauses_[c].hard) {
      ++cost_.hard;
    } else {
      cost_.soft += clauses_[c].weight;
    }
  }

  void mark_sat(std::uint32_t c) {
    auto& list = clauses_[c].hard ? unsat_hard_ : unsat_soft_;
    std::uint32_t p = pos_[c];
    std::uint32_t moved = list.back();
    list[p] = moved;
    pos_[moved] = p;
    list.pop_back();
    pos_[c] = kAbsent;
    if (clauses_[c].hard) {
      --cost_.hard;
    } else {
      cost_.soft -= clauses_[c].weight;
    }
  }

  // Change in (hard, soft) cost if v were flipped; negative is better.
  ClauseCost delta(std::uint32_t v) const {
    ClauseCost d;
    for (std::uint32_t c : occurs_[v]) {
      bool makes_true = false;
      for (const LocalLit& l : lits_[c])
        if (l.var == v) makes_true = !lit_true(l);
      int change = 0;
      if (true_count_[c] == 0 && makes_true) change = -1;
      if (true_count_[c] == 1 && !makes_true) change = 1;
      if (change == 0) continue;
      if (clauses_[c].hard) {
        d.hard += change;
      } else {
        d.soft += change * clauses_[c].weight;
      }
    }
    return d;
  }

  std::uint32_t choose(std::mt19937_64& rng) {
    const auto& pool = unsat_hard_.empty() ? unsat_soft_ : unsat_hard_;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const auto& lits = lits_[pool[pick(rng)]];
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    if (coin(rng) < params_.q) {
      std::uniform_int_distribution<std::size_t> which(0, lits.size() - 1);
      return lits[which(rng)].var;
    }
    std::uint32_t best = lits[0].var;
    ClauseCost best_delta = delta(best);
    for (std::size_t i = 1; i < lits.size(); ++i) {
      std::uint32_t v = lits[i].var;
      ClauseCost d = delta(v);
      // Literals are sorted by atom id, so strict improvement keeps the
      // lowest index on ties.
      if (d.better_than(best_delta)) {
        best = v;
        best_delta = d;
      }
    }
    return best;
  }

  void flip(std::uint32_t v) {
    values_[v] ^= 1;
    for (std::uint32_t c : occurs_[v]) {
      bool now_true = false;
      for (const LocalLit& l : lits_[c])
        if (l.var == v) now_true = lit_true(l);
      if (now_true) {
        if (true_count_[c]++ == 0) mark_sat(c);
      } else {
        if (--true_count_[c] == 0) mark_unsat(c);
      }
    }
  }

  void verify() const {
    ClauseCost recount;
    for (std::size_t c = 0; c < clauses_.size(); ++c) {
      std::uint32_t n = 0;
      for (const LocalLit& l : lits_[c])
        if (lit_true(l)) ++n;
      if (n != true_count_[c]) throw std::logic_error("MaxWalkSAT true-literal cache out of sync");
      if ((n == 0) != (pos_[c] != kAbsent)) throw std::logic_error("MaxWalkSAT unsatisfied-clause list out of sync");
      if (n == 0) {
        if (clauses_[c].hard) {
          ++recount.hard;
        } else {
          recount.soft += clauses_[c].weight;
        }
      }
    }
    if (recount.hard != cost_.hard || std::fabs(recount.soft - cost_.soft) > 1e-6)
      throw std::logic_error("MaxWalkSAT cost cache out of sync");
  }

  static constexpr std::uint32_t kAbsent = 0xffffffffU;

  const std::vector<WeightedClause>& clauses_;
  MwsParams params_;
  std::vector<AtomId> atom_ids_;
  std::vector<std::vector<LocalLit>> lits_;
  std::vector<std::vector<std::uint32_t>> occurs_;
  std::vector<std::uint8_t> values_;
  std::vector<std::uint32_t> true_count_;
  std::vector<std::uint32_t> pos_;
  std::vector<std::uint32_t> unsat_hard_;
  std::vector<std::uint32_t> unsat_soft_;
  ClauseCost cost_;
  Observer observer_;
};

inline MwsResult mws_solve(const WeightedClauseSet& clauses, const MwsParams& params, const World& start,
                           MwsStart mode = MwsStart::Given) {
  MaxWalkSat solver(clauses, params);
  return solver.solve(start, mode);
}

}  // namespace mlncpi
