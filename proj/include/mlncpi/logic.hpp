#pragma once

// First-order vocabulary, formula AST, ground atoms, worlds and the
// propositional transforms (quantifier expansion, folding, NNF/CNF) used
// by every solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mlncpi/error.hpp"

namespace mlncpi {

using TypeId = int;
using ConstantId = int;
using PredicateId = int;
using VariableId = int;
using AtomId = std::int64_t;

inline constexpr TypeId kAnyType = -1;
inline constexpr ConstantId kUnbound = -1;
inline constexpr AtomId kNoAtom = -1;

// Formula weight. Hard formulae carry an infinite-weight marker instead of
// a large float; scores keep hard violations and soft weight apart.
struct Weight {
  double value = 0.0;
  bool hard = false;

  static Weight soft(double v) { return Weight{v, false}; }
  static Weight infinite() { return Weight{0.0, true}; }

  // +1 for hard and positive weights, -1 for negative, 0 for zero.
  int sign() const {
    if (hard) return 1;
    return value > 0.0 ? 1 : (value < 0.0 ? -1 : 0);
  }
  double magnitude() const { return hard ? std::numeric_limits<double>::infinity() : std::fabs(value); }

  friend bool operator==(const Weight&, const Weight&) = default;
};

struct Predicate {
  std::string name;
  std::vector<TypeId> arg_types;
  bool observed = false;

  int arity() const { return static_cast<int>(arg_types.size()); }
};

// Types, constants and predicates. Every type keeps its constants sorted by
// name, which fixes the canonical ground-atom order.
class Signature {
 public:
  TypeId add_type(const std::string& name) {
    if (auto t = find_type(name)) return *t;
    type_names_.push_back(name);
    domains_.emplace_back();
    type_ids_.emplace(name, static_cast<TypeId>(type_names_.size() - 1));
    return static_cast<TypeId>(type_names_.size() - 1);
  }

  std::optional<TypeId> find_type(std::string_view name) const {
    auto it = type_ids_.find(std::string(name));
    if (it == type_ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& type_name(TypeId t) const { return type_names_.at(static_cast<std::size_t>(t)); }
  std::size_t type_count() const { return type_names_.size(); }

  ConstantId intern_constant(const std::string& name) {
    if (auto c = find_constant(name)) return *c;
    auto id = static_cast<ConstantId>(constant_names_.size());
    constant_names_.push_back(name);
    constant_ids_.emplace(name, id);
    insert_sorted(universe_, id);
    return id;
  }

  std::optional<ConstantId> find_constant(std::string_view name) const {
    auto it = constant_ids_.find(std::string(name));
    if (it == constant_ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& constant_name(ConstantId c) const { return constant_names_.at(static_cast<std::size_t>(c)); }
  std::size_t constant_count() const { return constant_names_.size(); }

  void add_to_type(TypeId t, ConstantId c) {
    if (t == kAnyType) return;
    auto& dom = domains_.at(static_cast<std::size_t>(t));
    if (!contains(dom, c)) insert_sorted(dom, c);
  }

  bool in_type(TypeId t, ConstantId c) const {
    if (t == kAnyType) return c >= 0 && static_cast<std::size_t>(c) < constant_names_.size();
    return contains(domains_.at(static_cast<std::size_t>(t)), c);
  }

  // Constants of a type sorted by name; kAnyType yields every constant.
  const std::vector<ConstantId>& domain(TypeId t) const {
    if (t == kAnyType) return universe_;
    return domains_.at(static_cast<std::size_t>(t));
  }

  PredicateId add_predicate(Predicate p) {
    if (find_predicate(p.name)) throw LogicError("duplicate predicate declaration '" + p.name + "'");
    auto id = static_cast<PredicateId>(predicates_.size());
    predicate_ids_.emplace(p.name, id);
    predicates_.push_back(std::move(p));
    return id;
  }

  std::optional<PredicateId> find_predicate(std::string_view name) const {
    auto it = predicate_ids_.find(std::string(name));
    if (it == predicate_ids_.end()) return std::nullopt;
    return it->second;
  }

  const Predicate& predicate(PredicateId p) const { return predicates_.at(static_cast<std::size_t>(p)); }
  std::size_t predicate_count() const { return predicates_.size(); }

 private:
  bool contains(const std::vector<ConstantId>& dom, ConstantId c) const {
    auto it = std::lower_bound(dom.begin(), dom.end(), c, [&](ConstantId a, ConstantId b) {
      return constant_names_[static_cast<std::size_t>(a)] < constant_names_[static_cast<std::size_t>(b)];
    });
    return it != dom.end() && *it == c;
  }

  void insert_sorted(std::vector<ConstantId>& dom, ConstantId c) {
    auto it = std::lower_bound(dom.begin(), dom.end(), c, [&](ConstantId a, ConstantId b) {
      return constant_names_[static_cast<std::size_t>(a)] < constant_names_[static_cast<std::size_t>(b)];
    });
    dom.insert(it, c);
  }

  std::vector<std::string> type_names_;
  std::unordered_map<std::string, TypeId> type_ids_;
  std::vector<std::vector<ConstantId>> domains_;
  std::vector<std::string> constant_names_;
  std::unordered_map<std::string, ConstantId> constant_ids_;
  std::vector<ConstantId> universe_;
  std::vector<Predicate> predicates_;
  std::unordered_map<std::string, PredicateId> predicate_ids_;
};

struct Term {
  bool is_variable = false;
  int id = 0;  // VariableId or ConstantId

  static Term variable(VariableId v) { return Term{true, v}; }
  static Term constant(ConstantId c) { return Term{false, c}; }

  friend bool operator==(const Term&, const Term&) = default;
};

enum class FormulaKind : std::uint8_t {
  True,
  False,
  Atom,
  Not,
  And,
  Or,
  Implies,
  Iff,
  Forall,
  Exists,
  Equal,
  NotEqual,
};

struct Formula {
  FormulaKind kind = FormulaKind::True;
  PredicateId predicate = -1;      // Atom
  std::vector<Term> args;          // Atom arguments, or the two sides of Equal/NotEqual
  VariableId variable = -1;        // Forall/Exists
  TypeId variable_type = kAnyType;  // Forall/Exists
  AtomId atom = kNoAtom;           // hidden-atom id once an Atom is ground and resolved
  std::vector<Formula> children;
  SourceLocation loc;

  static Formula constant(bool value) {
    Formula f;
    f.kind = value ? FormulaKind::True : FormulaKind::False;
    return f;
  }
  static Formula make_atom(PredicateId p, std::vector<Term> terms) {
    Formula f;
    f.kind = FormulaKind::Atom;
    f.predicate = p;
    f.args = std::move(terms);
    return f;
  }
  static Formula negation(Formula body) {
    Formula f;
    f.kind = FormulaKind::Not;
    f.children.push_back(std::move(body));
    return f;
  }
  static Formula nary(FormulaKind kind, std::vector<Formula> parts) {
    Formula f;
    f.kind = kind;
    f.children = std::move(parts);
    return f;
  }
  static Formula binary(FormulaKind kind, Formula lhs, Formula rhs) {
    Formula f;
    f.kind = kind;
    f.children.push_back(std::move(lhs));
    f.children.push_back(std::move(rhs));
    return f;
  }
  static Formula quantifier(FormulaKind kind, VariableId v, TypeId type, Formula body) {
    Formula f;
    f.kind = kind;
    f.variable = v;
    f.variable_type = type;
    f.children.push_back(std::move(body));
    return f;
  }
  static Formula comparison(FormulaKind kind, Term lhs, Term rhs) {
    Formula f;
    f.kind = kind;
    f.args = {lhs, rhs};
    return f;
  }

  bool is_constant() const { return kind == FormulaKind::True || kind == FormulaKind::False; }
};

// A formula of the network with its weight and variable table. Free
// variables are ids [0, free_count) in first-occurrence order; quantified
// variables follow.
struct WeightedFormula {
  Formula formula;
  Weight weight;
  std::vector<std::string> variable_names;
  std::vector<TypeId> variable_types;
  int free_count = 0;
  std::string source;
  int line = 0;
};

struct GroundAtom {
  PredicateId predicate = -1;
  std::vector<ConstantId> args;

  friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

// Dense numbering of ground atoms. Hidden and observed predicates have
// separate id spaces; within each, predicates are ordered by name and
// tuples lexicographically by constant name.
class AtomIndex {
 public:
  AtomIndex() = default;

  explicit AtomIndex(const Signature& sig) {
    const std::size_t np = sig.predicate_count();
    slots_.resize(np);
    std::vector<PredicateId> order(np);
    for (std::size_t i = 0; i < np; ++i) order[i] = static_cast<PredicateId>(i);
    std::sort(order.begin(), order.end(),
              [&](PredicateId a, PredicateId b) { return sig.predicate(a).name < sig.predicate(b).name; });

    positions_.assign(sig.type_count() + 1, std::vector<int>(sig.constant_count(), -1));
    for (std::size_t t = 0; t <= sig.type_count(); ++t) {
      TypeId type = t == sig.type_count() ? kAnyType : static_cast<TypeId>(t);
      const auto& dom = sig.domain(type);
      for (std::size_t i = 0; i < dom.size(); ++i) positions_[t][static_cast<std::size_t>(dom[i])] = static_cast<int>(i);
    }
    type_count_ = sig.type_count();

    AtomId next[2] = {0, 0};
    for (PredicateId p : order) {
      const Predicate& pred = sig.predicate(p);
      Slot& s = slots_[static_cast<std::size_t>(p)];
      s.observed = pred.observed;
      s.arg_types = pred.arg_types;
      s.strides.assign(pred.arg_types.size(), 1);
      AtomId size = 1;
      for (std::size_t i = pred.arg_types.size(); i-- > 0;) {
        s.strides[i] = size;
        size *= static_cast<AtomId>(sig.domain(pred.arg_types[i]).size());
      }
      s.size = size;
      s.offset = next[pred.observed ? 1 : 0];
      next[pred.observed ? 1 : 0] += size;
      (pred.observed ? observed_order_ : hidden_order_).push_back(p);
    }
    hidden_count_ = next[0];
    observed_count_ = next[1];
    domains_.resize(np);
    for (std::size_t p = 0; p < np; ++p) {
      for (TypeId t : slots_[p].arg_types) domains_[p].push_back(sig.domain(t));
    }
  }

  AtomId hidden_count() const { return hidden_count_; }
  AtomId observed_count() const { return observed_count_; }
  bool observed(PredicateId p) const { return slots_.at(static_cast<std::size_t>(p)).observed; }
  AtomId predicate_offset(PredicateId p) const { return slots_.at(static_cast<std::size_t>(p)).offset; }
  AtomId predicate_size(PredicateId p) const { return slots_.at(static_cast<std::size_t>(p)).size; }

  // Id within the predicate's space, or kNoAtom when an argument lies
  // outside the declared argument type.
  AtomId id(PredicateId p, std::span<const ConstantId> args) const {
    const Slot& s = slots_.at(static_cast<std::size_t>(p));
    if (args.size() != s.arg_types.size()) throw LogicError("arity mismatch in ground atom");
    AtomId id = s.offset;
    for (std::size_t i = 0; i < args.size(); ++i) {
      int pos = position(s.arg_types[i], args[i]);
      if (pos < 0) return kNoAtom;
      id += s.strides[i] * pos;
    }
    return id;
  }

  GroundAtom hidden_atom(AtomId id) const { return decode(hidden_order_, id); }
  GroundAtom observed_atom(AtomId id) const { return decode(observed_order_, id); }

  // Position of a constant within a type's sorted domain, -1 when absent.
  int position(TypeId t, ConstantId c) const {
    std::size_t row = t == kAnyType ? type_count_ : static_cast<std::size_t>(t);
    if (c < 0 || static_cast<std::size_t>(c) >= positions_[row].size()) return -1;
    return positions_[row][static_cast<std::size_t>(c)];
  }

 private:
  struct Slot {
    bool observed = false;
    std::vector<TypeId> arg_types;
    std::vector<AtomId> strides;
    AtomId offset = 0;
    AtomId size = 0;
  };

  GroundAtom decode(const std::vector<PredicateId>& order, AtomId id) const {
    for (PredicateId p : order) {
      const Slot& s = slots_[static_cast<std::size_t>(p)];
      if (id >= s.offset && id < s.offset + s.size) {
        GroundAtom atom{p, {}};
        AtomId rest = id - s.offset;
        for (std::size_t i = 0; i < s.strides.size(); ++i) {
          auto pos = static_cast<std::size_t>(rest / s.strides[i]);
          rest %= s.strides[i];
          atom.args.push_back(domains_[static_cast<std::size_t>(p)][i][pos]);
        }
        return atom;
      }
    }
    throw LogicError("atom id out of range");
  }

  std::vector<Slot> slots_;
  std::vector<std::vector<int>> positions_;
  std::vector<std::vector<std::vector<ConstantId>>> domains_;
  std::vector<PredicateId> hidden_order_;
  std::vector<PredicateId> observed_order_;
  std::size_t type_count_ = 0;
  AtomId hidden_count_ = 0;
  AtomId observed_count_ = 0;
};

// Truth of observed atoms under the closed-world assumption.
class Evidence {
 public:
  Evidence() = default;
  explicit Evidence(AtomId observed_count) : truth_(static_cast<std::size_t>(observed_count), 0) {}

  bool get(AtomId id) const { return id >= 0 && truth_[static_cast<std::size_t>(id)] != 0; }
  void set(AtomId id, bool value) { truth_.at(static_cast<std::size_t>(id)) = value ? 1 : 0; }
  std::size_t size() const { return truth_.size(); }

 private:
  std::vector<std::uint8_t> truth_;
};

// Binary assignment to every hidden ground atom.
class World {
 public:
  World() = default;
  explicit World(AtomId hidden_count) : values_(static_cast<std::size_t>(hidden_count), 0) {}

  bool get(AtomId id) const { return values_[static_cast<std::size_t>(id)] != 0; }
  void set(AtomId id, bool value) { values_[static_cast<std::size_t>(id)] = value ? 1 : 0; }
  void flip(AtomId id) { values_[static_cast<std::size_t>(id)] ^= 1; }
  AtomId size() const { return static_cast<AtomId>(values_.size()); }
  std::size_t count_true() const { return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), 1)); }
  const std::vector<std::uint8_t>& values() const { return values_; }

  friend bool operator==(const World&, const World&) = default;

 private:
  std::vector<std::uint8_t> values_;
};

// Everything needed to decide the truth of a ground atom.
struct Interpretation {
  const Signature& signature;
  const AtomIndex& atoms;
  const Evidence& evidence;
  const World& world;

  bool atom_true(PredicateId p, std::span<const ConstantId> args) const {
    AtomId id = atoms.id(p, args);
    if (id == kNoAtom) return false;
    return atoms.observed(p) ? evidence.get(id) : world.get(id);
  }
};

struct Literal {
  AtomId atom = kNoAtom;
  bool positive = true;

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

// Disjunction of literals over hidden atoms, sorted, without duplicates.
using GroundClause = std::vector<Literal>;

namespace detail {

inline void collect_free(const Formula& f, std::vector<VariableId>& bound, std::vector<VariableId>& out) {
  auto note = [&](const Term& t) {
    if (!t.is_variable) return;
    if (std::find(bound.begin(), bound.end(), t.id) != bound.end()) return;
    if (std::find(out.begin(), out.end(), t.id) == out.end()) out.push_back(t.id);
  };
  switch (f.kind) {
    case FormulaKind::Atom:
    case FormulaKind::Equal:
    case FormulaKind::NotEqual:
      for (const Term& t : f.args) note(t);
      break;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      bound.push_back(f.variable);
      collect_free(f.children[0], bound, out);
      bound.pop_back();
      break;
    default:
      for (const Formula& c : f.children) collect_free(c, bound, out);
  }
}

inline void max_variable(const Formula& f, VariableId& m) {
  for (const Term& t : f.args)
    if (t.is_variable) m = std::max(m, t.id);
  if (f.variable >= 0) m = std::max(m, f.variable);
  for (const Formula& c : f.children) max_variable(c, m);
}

}  // namespace detail

// Free variables in first-occurrence order, left to right.
inline std::vector<VariableId> free_variables(const Formula& f) {
  std::vector<VariableId> bound, out;
  detail::collect_free(f, bound, out);
  return out;
}

// Number of binding slots needed to evaluate f (max variable id + 1).
inline std::size_t variable_slots(const Formula& f) {
  VariableId m = -1;
  detail::max_variable(f, m);
  return static_cast<std::size_t>(m + 1);
}

inline bool is_ground(const Formula& f) { return free_variables(f).empty(); }

namespace detail {

inline Term bind_term(const Term& t, std::span<const ConstantId> binding, const std::vector<VariableId>& scope) {
  if (!t.is_variable) return t;
  if (std::find(scope.begin(), scope.end(), t.id) != scope.end()) return t;
  if (static_cast<std::size_t>(t.id) < binding.size() && binding[static_cast<std::size_t>(t.id)] != kUnbound)
    return Term::constant(binding[static_cast<std::size_t>(t.id)]);
  throw LogicError("incomplete binding: variable " + std::to_string(t.id) + " is unbound");
}

inline Formula substitute_rec(const Formula& f, std::span<const ConstantId> binding, std::vector<VariableId>& scope) {
  switch (f.kind) {
    case FormulaKind::Atom: {
      Formula out = f;
      for (Term& t : out.args) t = bind_term(t, binding, scope);
      return out;
    }
    case FormulaKind::Equal:
    case FormulaKind::NotEqual: {
      Term a = bind_term(f.args[0], binding, scope);
      Term b = bind_term(f.args[1], binding, scope);
      if (!a.is_variable && !b.is_variable) {
        bool same = a.id == b.id;
        Formula out = Formula::constant(f.kind == FormulaKind::Equal ? same : !same);
        out.loc = f.loc;
        return out;
      }
      Formula out = f;
      out.args = {a, b};
      return out;
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      scope.push_back(f.variable);
      Formula out = f;
      out.children[0] = substitute_rec(f.children[0], binding, scope);
      scope.pop_back();
      return out;
    }
    default: {
      Formula out = f;
      for (std::size_t i = 0; i < f.children.size(); ++i) out.children[i] = substitute_rec(f.children[i], binding, scope);
      return out;
    }
  }
}

}  // namespace detail

// Replace free variables by constants. Binding is indexed by variable id
// (kUnbound for unbound slots). Equality tests between constants reduce to
// True/False; no other folding happens.
inline Formula substitute(const Formula& f, std::span<const ConstantId> binding) {
  std::vector<VariableId> scope;
  return detail::substitute_rec(f, binding, scope);
}

// Constant folding of True/False through the connectives. Quantifier
// nodes are left alone apart from folding their bodies.
inline Formula fold_constants(Formula f) {
  for (Formula& c : f.children) c = fold_constants(std::move(c));
  auto is_true = [](const Formula& g) { return g.kind == FormulaKind::True; };
  auto is_false = [](const Formula& g) { return g.kind == FormulaKind::False; };
  switch (f.kind) {
    case FormulaKind::Not: {
      const Formula& c = f.children[0];
      if (c.is_constant()) return Formula::constant(is_false(c));
      if (c.kind == FormulaKind::Not) return c.children[0];
      return f;
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
      const bool conj = f.kind == FormulaKind::And;
      std::vector<Formula> kept;
      for (Formula& c : f.children) {
        if (conj ? is_false(c) : is_true(c)) return Formula::constant(!conj);
        if (conj ? is_true(c) : is_false(c)) continue;
        if (c.kind == f.kind) {
          for (Formula& g : c.children) kept.push_back(std::move(g));
        } else {
          kept.push_back(std::move(c));
        }
      }
      if (kept.empty()) return Formula::constant(conj);
      if (kept.size() == 1) return std::move(kept[0]);
      f.children = std::move(kept);
      return f;
    }
    case FormulaKind::Implies: {
      Formula& a = f.children[0];
      Formula& b = f.children[1];
      if (is_false(a) || is_true(b)) return Formula::constant(true);
      if (is_true(a)) return std::move(b);
      if (is_false(b)) return fold_constants(Formula::negation(std::move(a)));
      return f;
    }
    case FormulaKind::Iff: {
      Formula& a = f.children[0];
      Formula& b = f.children[1];
      if (a.is_constant() && b.is_constant()) return Formula::constant(a.kind == b.kind);
      if (is_true(a)) return std::move(b);
      if (is_true(b)) return std::move(a);
      if (is_false(a)) return fold_constants(Formula::negation(std::move(b)));
      if (is_false(b)) return fold_constants(Formula::negation(std::move(a)));
      return f;
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      if (is_true(f.children[0]) && f.kind == FormulaKind::Forall) return Formula::constant(true);
      if (is_false(f.children[0]) && f.kind == FormulaKind::Exists) return Formula::constant(false);
      return f;
    default:
      return f;
  }
}

namespace detail {

inline bool evaluate_rec(const Formula& f, std::vector<ConstantId>& binding, const Interpretation& in,
                         std::vector<ConstantId>& scratch) {
  switch (f.kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::False:
      return false;
    case FormulaKind::Atom: {
      if (f.atom != kNoAtom) return in.world.get(f.atom);
      scratch.resize(f.args.size());
      for (std::size_t i = 0; i < f.args.size(); ++i) {
        const Term& t = f.args[i];
        if (t.is_variable) {
          ConstantId c = static_cast<std::size_t>(t.id) < binding.size() ? binding[static_cast<std::size_t>(t.id)] : kUnbound;
          if (c == kUnbound) throw LogicError("cannot evaluate a non-ground formula");
          scratch[i] = c;
        } else {
          scratch[i] = t.id;
        }
      }
      return in.atom_true(f.predicate, scratch);
    }
    case FormulaKind::Equal:
    case FormulaKind::NotEqual: {
      ConstantId v[2];
      for (int i = 0; i < 2; ++i) {
        const Term& t = f.args[static_cast<std::size_t>(i)];
        v[i] = t.is_variable ? (static_cast<std::size_t>(t.id) < binding.size() ? binding[static_cast<std::size_t>(t.id)] : kUnbound)
                             : t.id;
        if (v[i] == kUnbound) throw LogicError("cannot evaluate a non-ground formula");
      }
      return (v[0] == v[1]) == (f.kind == FormulaKind::Equal);
    }
    case FormulaKind::Not:
      return !evaluate_rec(f.children[0], binding, in, scratch);
    case FormulaKind::And:
      for (const Formula& c : f.children)
        if (!evaluate_rec(c, binding, in, scratch)) return false;
      return true;
    case FormulaKind::Or:
      for (const Formula& c : f.children)
        if (evaluate_rec(c, binding, in, scratch)) return true;
      return false;
    case FormulaKind::Implies:
      return !evaluate_rec(f.children[0], binding, in, scratch) || evaluate_rec(f.children[1], binding, in, scratch);
    case FormulaKind::Iff:
      return evaluate_rec(f.children[0], binding, in, scratch) == evaluate_rec(f.children[1], binding, in, scratch);
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      const bool universal = f.kind == FormulaKind::Forall;
      auto slot = static_cast<std::size_t>(f.variable);
      if (binding.size() <= slot) binding.resize(slot + 1, kUnbound);
      ConstantId saved = binding[slot];
      bool result = universal;
      for (ConstantId c : in.signature.domain(f.variable_type)) {
        binding[slot] = c;
        if (evaluate_rec(f.children[0], binding, in, scratch) != universal) {
          result = !universal;
          break;
        }
      }
      binding[slot] = saved;
      return result;
    }
  }
  return false;
}

}  // namespace detail

// Truth of f when its free variables take the constants in binding.
inline bool evaluate_bound(const Formula& f, std::span<const ConstantId> binding, const Interpretation& in) {
  std::vector<ConstantId> b(binding.begin(), binding.end());
  std::vector<ConstantId> scratch;
  return detail::evaluate_rec(f, b, in, scratch);
}

// Reusable evaluator for hot loops: keeps its buffers between calls.
class BoundEvaluator {
 public:
  BoundEvaluator(const Formula& f, const Interpretation& in) : f_(f), in_(in), binding_(variable_slots(f), kUnbound) {}

  bool operator()(std::span<const ConstantId> tuple) {
    std::fill(binding_.begin(), binding_.end(), kUnbound);
    std::copy(tuple.begin(), tuple.end(), binding_.begin());
    return detail::evaluate_rec(f_, binding_, in_, scratch_);
  }

 private:
  const Formula& f_;
  const Interpretation& in_;
  std::vector<ConstantId> binding_;
  std::vector<ConstantId> scratch_;
};

// Classical truth of a ground formula. Observed atoms come from the
// evidence (absent = false).
inline bool evaluate(const Formula& f, const Interpretation& in) {
  if (!is_ground(f)) throw LogicError("cannot evaluate a non-ground formula");
  return evaluate_bound(f, {}, in);
}

namespace detail {

inline Formula expand_rec(const Formula& f, const Signature& sig) {
  if (f.kind == FormulaKind::Forall || f.kind == FormulaKind::Exists) {
    const auto& dom = sig.domain(f.variable_type);
    if (dom.empty()) {
      std::string type = f.variable_type == kAnyType ? std::string("<any>") : sig.type_name(f.variable_type);
      throw LogicError("cannot expand quantifier over empty type '" + type + "'");
    }
    std::vector<Formula> parts;
    std::vector<ConstantId> binding(static_cast<std::size_t>(f.variable) + 1, kUnbound);
    for (ConstantId c : dom) {
      binding[static_cast<std::size_t>(f.variable)] = c;
      std::vector<VariableId> scope;
      // Variables other than f.variable stay open: mark every other slot as
      // scoped so substitute leaves them alone.
      VariableId m = static_cast<VariableId>(variable_slots(f.children[0]));
      for (VariableId v = 0; v < m; ++v)
        if (v != f.variable) scope.push_back(v);
      parts.push_back(expand_rec(substitute_rec(f.children[0], binding, scope), sig));
    }
    if (parts.size() == 1) return std::move(parts[0]);
    return Formula::nary(f.kind == FormulaKind::Forall ? FormulaKind::And : FormulaKind::Or, std::move(parts));
  }
  Formula out = f;
  for (Formula& c : out.children) c = expand_rec(c, sig);
  return out;
}

}  // namespace detail

// Replace every quantifier by the finite conjunction (Forall) or
// disjunction (Exists) over the variable's typed domain.
inline Formula expand_quantifiers(const Formula& f, const Signature& sig) { return detail::expand_rec(f, sig); }

// Substitute, expand quantifiers, replace observed atoms by their evidence
// value, resolve hidden atoms to ids and fold constants, in one pass. The
// result mentions hidden atoms only.
class Instantiator {
 public:
  Instantiator(const Signature& sig, const AtomIndex& atoms, const Evidence& evidence)
      : sig_(sig), atoms_(atoms), evidence_(evidence) {}

  Formula operator()(const Formula& f, std::span<const ConstantId> tuple) {
    binding_.assign(std::max(variable_slots(f), tuple.size()), kUnbound);
    std::copy(tuple.begin(), tuple.end(), binding_.begin());
    return run(f);
  }

 private:
  ConstantId resolve(const Term& t) const {
    if (!t.is_variable) return t.id;
    ConstantId c = binding_[static_cast<std::size_t>(t.id)];
    if (c == kUnbound) throw LogicError("incomplete binding: variable " + std::to_string(t.id) + " is unbound");
    return c;
  }

  Formula run(const Formula& f) {
    switch (f.kind) {
      case FormulaKind::True:
      case FormulaKind::False:
        return Formula::constant(f.kind == FormulaKind::True);
      case FormulaKind::Atom: {
        std::vector<ConstantId> args(f.args.size());
        for (std::size_t i = 0; i < f.args.size(); ++i) args[i] = resolve(f.args[i]);
        AtomId id = atoms_.id(f.predicate, args);
        if (id == kNoAtom) return Formula::constant(false);
        if (atoms_.observed(f.predicate)) return Formula::constant(evidence_.get(id));
        std::vector<Term> terms;
        terms.reserve(args.size());
        for (ConstantId c : args) terms.push_back(Term::constant(c));
        Formula out = Formula::make_atom(f.predicate, std::move(terms));
        out.atom = id;
        return out;
      }
      case FormulaKind::Equal:
      case FormulaKind::NotEqual: {
        bool same = resolve(f.args[0]) == resolve(f.args[1]);
        return Formula::constant(f.kind == FormulaKind::Equal ? same : !same);
      }
      case FormulaKind::Forall:
      case FormulaKind::Exists: {
        const bool universal = f.kind == FormulaKind::Forall;
        auto slot = static_cast<std::size_t>(f.variable);
        ConstantId saved = binding_[slot];
        std::vector<Formula> parts;
        bool decided = false;
        for (ConstantId c : sig_.domain(f.variable_type)) {
          binding_[slot] = c;
          Formula part = run(f.children[0]);
          if (part.is_constant()) {
            if ((part.kind == FormulaKind::True) != universal) {
              decided = true;
              break;
            }
            continue;
          }
          parts.push_back(std::move(part));
        }
        binding_[slot] = saved;
        if (decided) return Formula::constant(!universal);
        return fold_constants(Formula::nary(universal ? FormulaKind::And : FormulaKind::Or, std::move(parts)));
      }
      default: {
        Formula out;
        out.kind = f.kind;
        out.children.reserve(f.children.size());
        for (const Formula& c : f.children) out.children.push_back(run(c));
        return fold_constants(std::move(out));
      }
    }
  }

  const Signature& sig_;
  const AtomIndex& atoms_;
  const Evidence& evidence_;
  std::vector<ConstantId> binding_;
};

namespace detail {

inline AtomId ground_atom_id(const Formula& f, const AtomIndex& atoms) {
  if (f.atom != kNoAtom) return f.atom;
  std::vector<ConstantId> args;
  for (const Term& t : f.args) {
    if (t.is_variable) throw LogicError("CNF input must be ground");
    args.push_back(t.id);
  }
  if (atoms.observed(f.predicate)) throw LogicError("CNF input contains an observed atom; simplify against evidence first");
  AtomId id = atoms.id(f.predicate, args);
  if (id == kNoAtom) throw LogicError("CNF input atom outside its predicate's domain");
  return id;
}

// Negation normal form over And/Or/Atom/Not(Atom)/True/False.
inline Formula nnf(const Formula& f, bool negate) {
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::False:
      return Formula::constant((f.kind == FormulaKind::True) != negate);
    case FormulaKind::Atom:
    case FormulaKind::Equal:
    case FormulaKind::NotEqual:
      return negate ? Formula::negation(f) : f;
    case FormulaKind::Not:
      return nnf(f.children[0], !negate);
    case FormulaKind::And:
    case FormulaKind::Or: {
      bool conj = (f.kind == FormulaKind::And) != negate;
      std::vector<Formula> parts;
      for (const Formula& c : f.children) parts.push_back(nnf(c, negate));
      return Formula::nary(conj ? FormulaKind::And : FormulaKind::Or, std::move(parts));
    }
    case FormulaKind::Implies: {
      // a => b  ==  !a | b
      Formula rewritten = Formula::nary(FormulaKind::Or, {Formula::negation(f.children[0]), f.children[1]});
      return nnf(rewritten, negate);
    }
    case FormulaKind::Iff: {
      const Formula& a = f.children[0];
      const Formula& b = f.children[1];
      if (!negate) {
        // (!a | b) & (a | !b)
        return Formula::nary(FormulaKind::And,
                             {Formula::nary(FormulaKind::Or, {nnf(a, true), nnf(b, false)}),
                              Formula::nary(FormulaKind::Or, {nnf(a, false), nnf(b, true)})});
      }
      // (a | b) & (!a | !b)
      return Formula::nary(FormulaKind::And, {Formula::nary(FormulaKind::Or, {nnf(a, false), nnf(b, false)}),
                                              Formula::nary(FormulaKind::Or, {nnf(a, true), nnf(b, true)})});
    }
    case FormulaKind::Forall:
    case FormulaKind::Exists: {
      bool universal = (f.kind == FormulaKind::Forall) != negate;
      return Formula::quantifier(universal ? FormulaKind::Forall : FormulaKind::Exists, f.variable, f.variable_type,
                                 nnf(f.children[0], negate));
    }
  }
  return f;
}

// Returns false when the clause is a tautology.
inline bool normalize_clause(GroundClause& c) {
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  for (std::size_t i = 1; i < c.size(); ++i)
    if (c[i].atom == c[i - 1].atom) return false;
  return true;
}

inline std::vector<GroundClause> cnf_rec(const Formula& f, const AtomIndex& atoms) {
  switch (f.kind) {
    case FormulaKind::True:
      return {};
    case FormulaKind::False:
      return {GroundClause{}};
    case FormulaKind::Atom:
      return {GroundClause{Literal{ground_atom_id(f, atoms), true}}};
    case FormulaKind::Not:
      return {GroundClause{Literal{ground_atom_id(f.children[0], atoms), false}}};
    case FormulaKind::And: {
      std::vector<GroundClause> out;
      for (const Formula& c : f.children) {
        auto part = cnf_rec(c, atoms);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
      }
      return out;
    }
    case FormulaKind::Or: {
      std::vector<GroundClause> acc{GroundClause{}};
      for (const Formula& c : f.children) {
        auto part = cnf_rec(c, atoms);
        std::vector<GroundClause> next;
        for (const GroundClause& a : acc) {
          for (const GroundClause& b : part) {
            GroundClause merged = a;
            merged.insert(merged.end(), b.begin(), b.end());
            if (normalize_clause(merged)) next.push_back(std::move(merged));
          }
        }
        acc = std::move(next);
        if (acc.empty()) break;
      }
      return acc;
    }
    default:
      throw LogicError("CNF input must be ground and quantifier-free");
  }
}

}  // namespace detail

inline Formula to_nnf(const Formula& f) { return detail::nnf(f, false); }

// Equivalent clause set by negation normal form and distribution. No
// auxiliary atoms; tautological and duplicate clauses are dropped.
inline std::vector<GroundClause> to_cnf(const Formula& f, const AtomIndex& atoms) {
  Formula n = fold_constants(detail::nnf(f, false));
  auto clauses = detail::cnf_rec(n, atoms);
  std::vector<GroundClause> out;
  for (GroundClause& c : clauses)
    if (detail::normalize_clause(c)) out.push_back(std::move(c));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace detail {

inline void collect_atoms(const Formula& f, std::vector<AtomId>& out) {
  if (f.kind == FormulaKind::Atom) {
    if (f.atom == kNoAtom) throw LogicError("expected an instantiated ground formula");
    out.push_back(f.atom);
    return;
  }
  for (const Formula& c : f.children) collect_atoms(c, out);
}

inline Formula condition(const Formula& f, AtomId atom, bool value) {
  if (f.kind == FormulaKind::Atom) return f.atom == atom ? Formula::constant(value) : f;
  if (f.children.empty()) return f;
  Formula out;
  out.kind = f.kind;
  out.variable = f.variable;
  out.variable_type = f.variable_type;
  out.children.reserve(f.children.size());
  for (const Formula& c : f.children) out.children.push_back(condition(c, atom, value));
  return fold_constants(std::move(out));
}

inline AtomId first_atom(const Formula& f) {
  if (f.kind == FormulaKind::Atom) return f.atom;
  for (const Formula& c : f.children) {
    AtomId a = first_atom(c);
    if (a != kNoAtom) return a;
  }
  return kNoAtom;
}

inline bool satisfiable_rec(const Formula& f) {
  if (f.kind == FormulaKind::True) return true;
  if (f.kind == FormulaKind::False) return false;
  AtomId a = first_atom(f);
  if (a == kNoAtom) throw LogicError("satisfiability check needs an instantiated ground formula");
  return satisfiable_rec(condition(f, a, true)) || satisfiable_rec(condition(f, a, false));
}

}  // namespace detail

// Distinct hidden atoms of an instantiated ground formula, sorted.
inline std::vector<AtomId> hidden_atoms(const Formula& f) {
  std::vector<AtomId> out;
  detail::collect_atoms(f, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Case-splitting satisfiability for instantiated ground formulae.
inline bool satisfiable(const Formula& f) { return detail::satisfiable_rec(fold_constants(f)); }
inline bool falsifiable(const Formula& f) { return detail::satisfiable_rec(fold_constants(Formula::negation(f))); }

// Truth of an instantiated formula when its atoms take the given values.
inline bool evaluate_assignment(const Formula& f, const World& world) {
  switch (f.kind) {
    case FormulaKind::True:
      return true;
    case FormulaKind::False:
      return false;
    case FormulaKind::Atom:
      return world.get(f.atom);
    case FormulaKind::Not:
      return !evaluate_assignment(f.children[0], world);
    case FormulaKind::And:
      for (const Formula& c : f.children)
        if (!evaluate_assignment(c, world)) return false;
      return true;
    case FormulaKind::Or:
      for (const Formula& c : f.children)
        if (evaluate_assignment(c, world)) return true;
      return false;
    case FormulaKind::Implies:
      return !evaluate_assignment(f.children[0], world) || evaluate_assignment(f.children[1], world);
    case FormulaKind::Iff:
      return evaluate_assignment(f.children[0], world) == evaluate_assignment(f.children[1], world);
    default:
      throw LogicError("expected an instantiated, quantifier-free formula");
  }
}

inline std::string atom_to_string(const Signature& sig, const GroundAtom& a) {
  std::string s = sig.predicate(a.predicate).name;
  if (a.args.empty()) return s;
  s += '(';
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    if (i) s += ',';
    s += sig.constant_name(a.args[i]);
  }
  s += ')';
  return s;
}

namespace detail {

inline void print_term(std::ostream& os, const Term& t, const Signature& sig, std::span<const std::string> names) {
  if (!t.is_variable) {
    os << sig.constant_name(t.id);
  } else if (static_cast<std::size_t>(t.id) < names.size()) {
    os << names[static_cast<std::size_t>(t.id)];
  } else {
    os << "_v" << t.id;
  }
}

inline void print(std::ostream& os, const Formula& f, const Signature& sig, std::span<const std::string> names) {
  auto join = [&](const char* op) {
    os << '(';
    for (std::size_t i = 0; i < f.children.size(); ++i) {
      if (i) os << ' ' << op << ' ';
      print(os, f.children[i], sig, names);
    }
    os << ')';
  };
  switch (f.kind) {
    case FormulaKind::True: os << "true"; break;
    case FormulaKind::False: os << "false"; break;
    case FormulaKind::Atom:
      os << sig.predicate(f.predicate).name;
      if (!f.args.empty()) {
        os << '(';
        for (std::size_t i = 0; i < f.args.size(); ++i) {
          if (i) os << ',';
          print_term(os, f.args[i], sig, names);
        }
        os << ')';
      }
      break;
    case FormulaKind::Equal:
    case FormulaKind::NotEqual:
      print_term(os, f.args[0], sig, names);
      os << (f.kind == FormulaKind::Equal ? " = " : " != ");
      print_term(os, f.args[1], sig, names);
      break;
    case FormulaKind::Not:
      os << '!';
      print(os, f.children[0], sig, names);
      break;
    case FormulaKind::And: join("^"); break;
    case FormulaKind::Or: join("|"); break;
    case FormulaKind::Implies: join("=>"); break;
    case FormulaKind::Iff: join("<=>"); break;
    case FormulaKind::Forall:
    case FormulaKind::Exists:
      os << '(' << (f.kind == FormulaKind::Forall ? "forall " : "exists ");
      print_term(os, Term::variable(f.variable), sig, names);
      os << ' ';
      print(os, f.children[0], sig, names);
      os << ')';
      break;
  }
}

}  // namespace detail

inline std::string to_string(const Formula& f, const Signature& sig, std::span<const std::string> variable_names = {}) {
  std::ostringstream os;
  detail::print(os, f, sig, variable_names);
  return os.str();
}

}  // namespace mlncpi
