#pragma once

// Relational evaluation of quantifier-free-at-top formulae over tables of
// true atoms. Positive atoms among the top-level conjuncts drive an index
// nested-loop join (smallest candidate set first); every other conjunct is
// a filter applied once its variables are bound; top-level disjunctions
// are answered as a union.

#include <algorithm>
#include <cstdint>
#include <set>
#include <unordered_map>
#include <vector>

#include "mlncpi/logic.hpp"
#include "mlncpi/problem.hpp"

namespace mlncpi {

// Per-predicate tables of true ground atoms with one hash index per
// column. Evidence tables are loaded once; hidden tables mirror a world.
class AtomStore {
 public:
  struct Table {
    std::vector<Tuple> rows;
    std::vector<std::unordered_map<ConstantId, std::vector<std::uint32_t>>> columns;
  };

  explicit AtomStore(const Problem& problem) : problem_(problem), tables_(problem.signature().predicate_count()) {
    const AtomIndex& atoms = problem.atoms();
    for (std::size_t p = 0; p < tables_.size(); ++p) {
      auto pid = static_cast<PredicateId>(p);
      tables_[p].columns.resize(static_cast<std::size_t>(problem.signature().predicate(pid).arity()));
      if (!atoms.observed(pid)) continue;
      AtomId begin = atoms.predicate_offset(pid);
      AtomId end = begin + atoms.predicate_size(pid);
      for (AtomId id = begin; id < end; ++id)
        if (problem.evidence().get(id)) insert(atoms.observed_atom(id));
    }
  }

  AtomStore(const Problem& problem, const World& world) : AtomStore(problem) { load_world(world); }

  // Replace the hidden tables with the true atoms of world.
  void load_world(const World& world) {
    const Signature& sig = problem_.signature();
    for (std::size_t p = 0; p < tables_.size(); ++p) {
      if (sig.predicate(static_cast<PredicateId>(p)).observed) continue;
      Table& t = tables_[p];
      t.rows.clear();
      for (auto& col : t.columns) col.clear();
    }
    for (AtomId id = 0; id < world.size(); ++id)
      if (world.get(id)) insert(problem_.atoms().hidden_atom(id));
  }

  const Table& table(PredicateId p) const { return tables_.at(static_cast<std::size_t>(p)); }

  // Upper bound on the rows matching the bound argument positions.
  std::size_t estimate(PredicateId p, std::span<const ConstantId> pattern) const {
    const Table& t = table(p);
    std::size_t best = t.rows.size();
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (pattern[i] == kUnbound) continue;
      auto it = t.columns[i].find(pattern[i]);
      best = std::min(best, it == t.columns[i].end() ? std::size_t{0} : it->second.size());
    }
    return best;
  }

  // Rows whose bound positions (entries != kUnbound) match pattern.
  std::vector<std::uint32_t> lookup(PredicateId p, std::span<const ConstantId> pattern) const {
    const Table& t = table(p);
    const std::vector<std::uint32_t>* bucket = nullptr;
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      if (pattern[i] == kUnbound) continue;
      auto it = t.columns[i].find(pattern[i]);
      if (it == t.columns[i].end()) return {};
      if (!bucket || it->second.size() < bucket->size()) bucket = &it->second;
    }
    std::vector<std::uint32_t> out;
    auto matches = [&](std::uint32_t r) {
      const Tuple& row = t.rows[r];
      for (std::size_t i = 0; i < pattern.size(); ++i)
        if (pattern[i] != kUnbound && row[i] != pattern[i]) return false;
      return true;
    };
    if (bucket) {
      for (std::uint32_t r : *bucket)
        if (matches(r)) out.push_back(r);
    } else {
      out.resize(t.rows.size());
      for (std::uint32_t r = 0; r < t.rows.size(); ++r) out[r] = r;
    }
    return out;
  }

 private:
  void insert(const GroundAtom& a) {
    Table& t = tables_[static_cast<std::size_t>(a.predicate)];
    auto r = static_cast<std::uint32_t>(t.rows.size());
    for (std::size_t i = 0; i < a.args.size(); ++i) t.columns[i][a.args[i]].push_back(r);
    t.rows.push_back(a.args);
  }

  const Problem& problem_;
  std::vector<Table> tables_;
};

namespace detail {

class JoinEvaluator {
 public:
  JoinEvaluator(const Problem& problem, const AtomStore& store, const World& world, const Formula& conjunction,
                std::span<const TypeId> free_types)
      : problem_(problem),
        store_(store),
        interp_(problem.interpretation(world)),
        free_types_(free_types.begin(), free_types.end()),
        binding_(std::max(variable_slots(conjunction), free_types.size()), kUnbound) {
    const auto free_count = static_cast<VariableId>(free_types.size());
    std::vector<const Formula*> parts;
    if (conjunction.kind == FormulaKind::And) {
      for (const Formula& c : conjunction.children) parts.push_back(&c);
    } else {
      parts.push_back(&conjunction);
    }
    for (const Formula* c : parts) {
      if (c->kind == FormulaKind::False) {
        empty_ = true;
        continue;
      }
      if (c->kind == FormulaKind::True) continue;
      bool generator = c->kind == FormulaKind::Atom;
      if (generator)
        for (const Term& t : c->args)
          if (t.is_variable && t.id >= free_count) generator = false;
      if (generator) {
        generators_.push_back(c);
      } else {
        filters_.push_back(Filter{c, free_variables(*c)});
      }
    }
    used_.assign(generators_.size(), false);
  }

  void run(std::set<Tuple>& out) {
    if (empty_) return;
    join(out);
  }

 private:
  struct Filter {
    const Formula* formula;
    std::vector<VariableId> vars;
  };

  bool bound(VariableId v) const { return binding_[static_cast<std::size_t>(v)] != kUnbound; }

  bool filters_hold(bool require_all) {
    for (const Filter& f : filters_) {
      bool ready = std::all_of(f.vars.begin(), f.vars.end(), [&](VariableId v) { return bound(v); });
      if (!ready) {
        if (require_all) throw LogicError("query filter left unbound");
        continue;
      }
      if (!evaluate_rec(*f.formula, binding_, interp_, scratch_)) return false;
    }
    return true;
  }

  void emit_products(std::size_t v, std::set<Tuple>& out) {
    if (v == free_types_.size()) {
      if (!filters_hold(true)) return;
      out.insert(Tuple(binding_.begin(), binding_.begin() + static_cast<std::ptrdiff_t>(free_types_.size())));
      return;
    }
    if (bound(static_cast<VariableId>(v))) {
      emit_products(v + 1, out);
      return;
    }
    for (ConstantId c : problem_.signature().domain(free_types_[v])) {
      binding_[v] = c;
      emit_products(v + 1, out);
    }
    binding_[v] = kUnbound;
  }

  void join(std::set<Tuple>& out) {
    if (!filters_hold(false)) return;
    std::size_t pick = generators_.size();
    std::size_t best = 0;
    std::vector<ConstantId> pattern;
    for (std::size_t g = 0; g < generators_.size(); ++g) {
      if (used_[g]) continue;
      make_pattern(*generators_[g], pattern);
      std::size_t est = store_.estimate(generators_[g]->predicate, pattern);
      if (pick == generators_.size() || est < best) {
        pick = g;
        best = est;
      }
    }
    if (pick == generators_.size()) {
      emit_products(0, out);
      return;
    }
    const Formula& atom = *generators_[pick];
    make_pattern(atom, pattern);
    used_[pick] = true;
    const auto& rows = store_.table(atom.predicate).rows;
    for (std::uint32_t r : store_.lookup(atom.predicate, pattern)) {
      const Tuple& row = rows[r];
      std::vector<VariableId> newly;
      bool ok = true;
      for (std::size_t i = 0; i < atom.args.size() && ok; ++i) {
        const Term& t = atom.args[i];
        if (!t.is_variable) continue;
        auto slot = static_cast<std::size_t>(t.id);
        if (binding_[slot] == kUnbound) {
          if (!problem_.signature().in_type(free_types_[slot], row[i])) {
            ok = false;
            break;
          }
          binding_[slot] = row[i];
          newly.push_back(t.id);
        } else if (binding_[slot] != row[i]) {
          ok = false;
        }
      }
      if (ok) join(out);
      for (VariableId v : newly) binding_[static_cast<std::size_t>(v)] = kUnbound;
    }
    used_[pick] = false;
  }

  void make_pattern(const Formula& atom, std::vector<ConstantId>& pattern) const {
    pattern.assign(atom.args.size(), kUnbound);
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
      const Term& t = atom.args[i];
      pattern[i] = t.is_variable ? binding_[static_cast<std::size_t>(t.id)] : t.id;
    }
  }

  const Problem& problem_;
  const AtomStore& store_;
  Interpretation interp_;
  std::vector<TypeId> free_types_;
  std::vector<ConstantId> binding_;
  std::vector<ConstantId> scratch_;
  std::vector<const Formula*> generators_;
  std::vector<Filter> filters_;
  std::vector<bool> used_;
  bool empty_ = false;
};

}  // namespace detail

// All tuples over the first free_types.size() variables for which query
// holds in (world, evidence), sorted. store must mirror world.
inline std::vector<Tuple> evaluate_query(const Problem& problem, const AtomStore& store, const World& world,
                                         const Formula& query, std::span<const TypeId> free_types) {
  Formula q = fold_constants(to_nnf(query));
  std::set<Tuple> out;
  std::vector<const Formula*> disjuncts;
  if (q.kind == FormulaKind::Or) {
    for (const Formula& c : q.children) disjuncts.push_back(&c);
  } else {
    disjuncts.push_back(&q);
  }
  for (const Formula* d : disjuncts) {
    detail::JoinEvaluator join(problem, store, world, *d, free_types);
    join.run(out);
  }
  return {out.begin(), out.end()};
}

}  // namespace mlncpi
