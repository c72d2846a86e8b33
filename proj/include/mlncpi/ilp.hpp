#pragma once

// 0-1 integer linear programs for ground networks, and an exact
// depth-first branch-and-bound solver for them.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mlncpi/error.hpp"
#include "mlncpi/grounding.hpp"
#include "mlncpi/logic.hpp"
#include "mlncpi/problem.hpp"

namespace mlncpi {

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

enum class Comparator { GreaterEqual, LessEqual, Equal };

struct LinearConstraint {
  std::vector<LinearTerm> terms;
  Comparator cmp = Comparator::GreaterEqual;
  double rhs = 0.0;
};

// Maximise offset + sum objective[v] * x_v over binary x subject to the
// constraints.
struct IlpModel {
  std::vector<std::string> names;
  std::vector<double> objective;
  double offset = 0.0;
  std::vector<LinearConstraint> constraints;

  int add_variable(std::string name, double coef = 0.0) {
    names.push_back(std::move(name));
    objective.push_back(coef);
    return static_cast<int>(names.size() - 1);
  }
  std::size_t variable_count() const { return names.size(); }

  double evaluate(std::span<const std::uint8_t> x) const {
    double v = offset;
    for (std::size_t i = 0; i < objective.size(); ++i) v += objective[i] * x[i];
    return v;
  }

  bool feasible(std::span<const std::uint8_t> x, double eps = 1e-9) const {
    for (const LinearConstraint& c : constraints) {
      double act = 0.0;
      for (const LinearTerm& t : c.terms) act += t.coef * x[static_cast<std::size_t>(t.var)];
      switch (c.cmp) {
        case Comparator::GreaterEqual:
          if (act < c.rhs - eps) return false;
          break;
        case Comparator::LessEqual:
          if (act > c.rhs + eps) return false;
          break;
        case Comparator::Equal:
          if (std::fabs(act - c.rhs) > eps) return false;
          break;
      }
    }
    return true;
  }
};

// Clause (l1 | ... | lk) as sum(pos) - sum(neg) >= 1 - #neg.
inline LinearConstraint clause_constraint(std::span<const std::pair<int, bool>> literals) {
  LinearConstraint c;
  c.cmp = Comparator::GreaterEqual;
  c.rhs = 1.0;
  for (auto [var, positive] : literals) {
    c.terms.push_back(LinearTerm{var, positive ? 1.0 : -1.0});
    if (!positive) c.rhs -= 1.0;
  }
  return c;
}

struct EncodeOptions {
  // Groundings over a single hidden atom become objective coefficients on
  // that atom instead of an auxiliary variable.
  bool fold_single_atom = true;
  // Keep only the implication direction that matters at the optimum
  // (lambda => phi for w > 0, phi => lambda for w < 0).
  bool one_direction = false;
  // Encode hard groundings as soft ones with a weight exceeding the total
  // soft weight, so the optimum minimises violations first.
  bool hard_as_penalty = false;
};

struct EncodedGrounding {
  std::size_t formula = 0;
  Tuple tuple;
  int lambda = -1;
};

struct Encoding {
  IlpModel model;
  std::vector<AtomId> var_atom;  // kNoAtom for auxiliary variables
  std::unordered_map<AtomId, int> atom_var;
  std::vector<EncodedGrounding> auxiliaries;
  double hard_penalty = 0.0;  // weight of one hard grounding in penalty mode

  // Hidden-atom assignment carried by x, on top of base.
  World decode(std::span<const std::uint8_t> x, World base) const {
    for (std::size_t v = 0; v < var_atom.size(); ++v)
      if (var_atom[v] != kNoAtom) base.set(var_atom[v], x[v] != 0);
    return base;
  }
};

namespace detail {

inline std::string lp_name(std::string_view raw) {
  std::string s;
  for (char c : raw) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  while (!s.empty() && s.back() == '_') s.pop_back();
  return s;
}

class Encoder {
 public:
  Encoder(const Problem& problem, EncodeOptions options) : problem_(problem), options_(options) {}

  Encoding run(const PartialGrounding& g) {
    Instantiator inst(problem_.signature(), problem_.atoms(), problem_.evidence());
    double soft_total = 0.0;
    for (std::size_t fi = 0; fi < g.formula_count(); ++fi) {
      const WeightedFormula& wf = problem_.formula(fi);
      for (const Tuple& t : g.tuples(fi)) {
        Formula ground = inst(wf.formula, t);
        GroundingStatus status = classify(ground);
        if (status != GroundingStatus::Varies) {
          if (!wf.weight.hard && status == GroundingStatus::AlwaysTrue) enc_.model.offset += wf.weight.value;
          continue;
        }
        if (!wf.weight.hard) {
          if (wf.weight.value == 0.0) continue;
          soft_total += std::fabs(wf.weight.value);
          add_soft(fi, t, ground, wf.weight.value, false);
        } else if (options_.hard_as_penalty) {
          add_soft(fi, t, ground, 1.0, true);
        } else {
          for (const GroundClause& c : to_cnf(ground, problem_.atoms())) add_clause(c, -1, false);
        }
      }
    }
    if (options_.hard_as_penalty) {
      enc_.hard_penalty = soft_total + 1.0;
      for (std::size_t v = 0; v < hard_units_.size(); ++v) enc_.model.objective[v] += enc_.hard_penalty * hard_units_[v];
      enc_.model.offset += enc_.hard_penalty * hard_offset_units_;
    }
    return std::move(enc_);
  }

 private:
  int atom_variable(AtomId a) {
    auto it = enc_.atom_var.find(a);
    if (it != enc_.atom_var.end()) return it->second;
    int v = enc_.model.add_variable("y_" + lp_name(problem_.hidden_atom_name(a)));
    enc_.var_atom.push_back(a);
    hard_units_.push_back(0.0);
    enc_.atom_var.emplace(a, v);
    return v;
  }

  void add_objective(int var, double w, bool hard) {
    if (hard) {
      hard_units_[static_cast<std::size_t>(var)] += w;
    } else {
      enc_.model.objective[static_cast<std::size_t>(var)] += w;
    }
  }

  // Clause over hidden atoms, optionally with an extra literal on lambda.
  void add_clause(const GroundClause& clause, int lambda, bool lambda_positive) {
    std::vector<std::pair<int, bool>> lits;
    if (lambda >= 0) lits.emplace_back(lambda, lambda_positive);
    for (const Literal& l : clause) lits.emplace_back(atom_variable(l.atom), l.positive);
    enc_.model.constraints.push_back(clause_constraint(lits));
  }

  void add_soft(std::size_t fi, const Tuple& t, const Formula& ground, double w, bool hard) {
    std::vector<AtomId> atoms = hidden_atoms(ground);
    if (options_.fold_single_atom && atoms.size() == 1) {
      // w * f = w * f0 + w * (f1 - f0) * y
      bool f0 = condition(ground, atoms[0], false).kind == FormulaKind::True;
      bool f1 = condition(ground, atoms[0], true).kind == FormulaKind::True;
      int v = atom_variable(atoms[0]);
      add_objective(v, w * (static_cast<double>(f1) - static_cast<double>(f0)), hard);
      if (f0) {
        if (hard) {
          hard_offset_units_ += w;
        } else {
          enc_.model.offset += w;
        }
      }
      return;
    }
    std::string name = "l" + std::to_string(fi);
    for (ConstantId c : t) name += "_" + lp_name(problem_.signature().constant_name(c));
    int lambda = enc_.model.add_variable(name);
    enc_.var_atom.push_back(kNoAtom);
    hard_units_.push_back(0.0);
    add_objective(lambda, w, hard);
    enc_.auxiliaries.push_back(EncodedGrounding{fi, t, lambda});
    const bool need_forward = !options_.one_direction || w > 0;   // lambda => phi
    const bool need_backward = !options_.one_direction || w < 0;  // phi => lambda
    if (need_forward)
      for (const GroundClause& c : to_cnf(ground, problem_.atoms())) add_clause(c, lambda, false);
    if (need_backward)
      for (const GroundClause& c : to_cnf(Formula::negation(ground), problem_.atoms())) add_clause(c, lambda, true);
  }

  const Problem& problem_;
  EncodeOptions options_;
  Encoding enc_;
  std::vector<double> hard_units_;
  double hard_offset_units_ = 0.0;
};

}  // namespace detail

// ILP for the groundings in g: one binary per hidden atom involved, an
// auxiliary lambda <=> phi[v/c] per soft grounding (folded onto the atom
// when only one hidden atom is involved), hard groundings as clause
// constraints. The objective equals the soft part of s_G.
inline Encoding encode(const Problem& problem, const PartialGrounding& g, EncodeOptions options = {}) {
  return detail::Encoder(problem, options).run(g);
}

enum class IlpStatus { Optimal, Feasible, Infeasible, Unknown };

struct IlpSolution {
  IlpStatus status = IlpStatus::Unknown;
  std::vector<std::uint8_t> values;
  double objective = 0.0;
  bool optimal = false;
  std::uint64_t nodes = 0;
};

// Depth-first branch-and-bound. Bound: fixed objective + positive
// coefficients of free variables, less the cheapest repair of a disjoint
// set of constraints violated by the preferred completion. Linear
// constraints propagate by activity bounds (unit propagation for clauses).
class IlpSolver {
 public:
  explicit IlpSolver(const IlpModel& model) : model_(model), n_(model.variable_count()) {
    for (const LinearConstraint& c : model.constraints) {
      switch (c.cmp) {
        case Comparator::GreaterEqual:
          add_row(c.terms, 1.0, c.rhs);
          break;
        case Comparator::LessEqual:
          add_row(c.terms, -1.0, -c.rhs);
          break;
        case Comparator::Equal:
          add_row(c.terms, 1.0, c.rhs);
          add_row(c.terms, -1.0, -c.rhs);
          break;
      }
    }
    occurs_.resize(n_);
    for (std::size_t r = 0; r < rows_.size(); ++r)
      for (const auto& [v, a] : rows_[r].terms) occurs_[static_cast<std::size_t>(v)].push_back({static_cast<std::uint32_t>(r), a});
    preferred_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) preferred_[v] = model.objective[v] > 0.0 ? 1 : 0;
  }

  IlpSolution solve(double time_limit_seconds = std::numeric_limits<double>::infinity()) {
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    reset();
    IlpSolution sol;
    double incumbent = -std::numeric_limits<double>::infinity();
    bool have = false;
    bool timed_out = false;
    bool ok = !trivially_infeasible_ && propagate();
    std::vector<Decision> stack;
    auto backtrack = [&]() -> bool {
      while (!stack.empty()) {
        Decision& d = stack.back();
        undo_to(d.trail_size);
        if (!d.flipped) {
          d.flipped = true;
          assign(d.var, static_cast<std::int8_t>(1 - d.value));
          if (propagate()) return true;
          continue;
        }
        stack.pop_back();
      }
      return false;
    };
    bool running = ok;
    while (running) {
      ++sol.nodes;
      if ((sol.nodes & 255U) == 0 && std::chrono::duration<double>(clock::now() - start).count() > time_limit_seconds) {
        timed_out = true;
        break;
      }
      bool prune = true;
      if (violated_.empty()) {
        // The preferred completion is feasible and attains the bound.
        std::vector<std::uint8_t> x(n_);
        double obj = model_.offset;
        for (std::size_t v = 0; v < n_; ++v) {
          x[v] = static_cast<std::uint8_t>(value_[v] >= 0 ? value_[v] : preferred_[v]);
          obj += model_.objective[v] * x[v];
        }
        if (!have || obj > incumbent + kEps) {
          have = true;
          incumbent = obj;
          sol.values = std::move(x);
        }
      } else if (double b = have ? bound() : 0.0; !have || b > incumbent + kEps) {
        if (have && fix_by_reduced_cost(b - incumbent - kEps) > 0) {
          if (propagate()) continue;
          running = backtrack();
          continue;
        }
        int var = branch_variable();
        auto pref = preferred_[static_cast<std::size_t>(var)];
        stack.push_back(Decision{trail_.size(), var, pref, false});
        assign(var, pref);
        prune = !propagate();
      }
      if (prune) running = backtrack();
    }
    if (have) {
      sol.objective = incumbent;
      sol.optimal = !timed_out;
      sol.status = timed_out ? IlpStatus::Feasible : IlpStatus::Optimal;
    } else {
      sol.status = timed_out ? IlpStatus::Unknown : IlpStatus::Infeasible;
    }
    return sol;
  }

  // Bound after fixing `partial` (entries -1 = free) and propagating;
  // -infinity when that is infeasible. Exposed for testing the bound.
  double relaxation_bound(std::span<const std::int8_t> partial) {
    reset();
    if (trivially_infeasible_ || !propagate()) return -std::numeric_limits<double>::infinity();
    for (std::size_t v = 0; v < partial.size(); ++v) {
      if (partial[v] < 0) continue;
      if (value_[v] >= 0) {
        if (value_[v] != partial[v]) return -std::numeric_limits<double>::infinity();
        continue;
      }
      assign(static_cast<int>(v), partial[v]);
      if (!propagate()) return -std::numeric_limits<double>::infinity();
    }
    return bound();
  }

 private:
  static constexpr double kEps = 1e-9;

  struct Row {
    std::vector<std::pair<int, double>> terms;
    double rhs = 0.0;
    double max_abs = 0.0;
  };

  struct Occurrence {
    std::uint32_t row;
    double coef;
  };

  struct Decision {
    std::size_t trail_size;
    int var;
    std::int8_t value;
    bool flipped;
  };

  void add_row(const std::vector<LinearTerm>& terms, double sign, double rhs) {
    std::map<int, double> merged;
    for (const LinearTerm& t : terms) merged[t.var] += sign * t.coef;
    Row row;
    row.rhs = rhs;
    for (auto [v, a] : merged) {
      if (a == 0.0) continue;
      if (v < 0 || static_cast<std::size_t>(v) >= n_) throw SolverError("constraint references an unknown variable");
      row.terms.emplace_back(v, a);
      row.max_abs = std::max(row.max_abs, std::fabs(a));
    }
    if (row.terms.empty()) {
      if (0.0 < rhs - kEps) trivially_infeasible_ = true;
      return;
    }
    rows_.push_back(std::move(row));
  }

  void reset() {
    value_.assign(n_, -1);
    trail_.clear();
    queue_.clear();
    conflict_ = false;
    max_act_.assign(rows_.size(), 0.0);
    pref_act_.assign(rows_.size(), 0.0);
    fixed_obj_ = 0.0;
    free_pos_ = 0.0;
    for (std::size_t v = 0; v < n_; ++v) free_pos_ += std::max(model_.objective[v], 0.0);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      for (const auto& [v, a] : rows_[r].terms) {
        max_act_[r] += std::max(a, 0.0);
        pref_act_[r] += a * preferred_[static_cast<std::size_t>(v)];
      }
    }
    violated_.clear();
    violated_pos_.assign(rows_.size(), -1);
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      update_violated(static_cast<std::uint32_t>(r));
      if (max_act_[r] < rows_[r].rhs - kEps) conflict_ = true;
      check_row(static_cast<std::uint32_t>(r));
    }
    stamp_.assign(n_, 0);
    residual_.assign(n_, 0.0);
    stamp_id_ = 0;
  }

  void update_violated(std::uint32_t r) {
    bool v = pref_act_[r] < rows_[r].rhs - kEps;
    int& pos = violated_pos_[r];
    if (v && pos < 0) {
      pos = static_cast<int>(violated_.size());
      violated_.push_back(r);
    } else if (!v && pos >= 0) {
      std::uint32_t moved = violated_.back();
      violated_[static_cast<std::size_t>(pos)] = moved;
      violated_pos_[moved] = pos;
      violated_.pop_back();
      pos = -1;
    }
  }

  void assign(int var, std::int8_t val) {
    auto v = static_cast<std::size_t>(var);
    value_[v] = val;
    trail_.push_back(var);
    double c = model_.objective[v];
    fixed_obj_ += c * val;
    free_pos_ -= std::max(c, 0.0);
    for (const Occurrence& o : occurs_[v]) {
      double loss = std::max(o.coef, 0.0) - o.coef * val;
      pref_act_[o.row] += o.coef * (val - preferred_[v]);
      update_violated(o.row);
      if (loss <= 0.0) continue;
      max_act_[o.row] -= loss;
      if (max_act_[o.row] < rows_[o.row].rhs - kEps) {
        conflict_ = true;
      } else {
        check_row(o.row);
      }
    }
  }

  void unassign(int var) {
    auto v = static_cast<std::size_t>(var);
    std::int8_t val = value_[v];
    double c = model_.objective[v];
    fixed_obj_ -= c * val;
    free_pos_ += std::max(c, 0.0);
    for (const Occurrence& o : occurs_[v]) {
      double loss = std::max(o.coef, 0.0) - o.coef * val;
      max_act_[o.row] += loss;
      pref_act_[o.row] -= o.coef * (val - preferred_[v]);
      update_violated(o.row);
    }
    value_[v] = -1;
  }

  void undo_to(std::size_t size) {
    while (trail_.size() > size) {
      unassign(trail_.back());
      trail_.pop_back();
    }
    queue_.clear();
    conflict_ = false;
  }

  // Queue forced values for a row whose slack is below its largest
  // coefficient.
  void check_row(std::uint32_t r) {
    const Row& row = rows_[r];
    double slack = max_act_[r] - row.rhs;
    if (slack >= row.max_abs - kEps) return;
    for (const auto& [v, a] : row.terms) {
      if (value_[static_cast<std::size_t>(v)] >= 0) continue;
      if (std::fabs(a) > slack + kEps) queue_.push_back({v, static_cast<std::int8_t>(a > 0 ? 1 : 0)});
    }
  }

  bool propagate() {
    while (!conflict_ && !queue_.empty()) {
      auto [v, val] = queue_.back();
      queue_.pop_back();
      std::int8_t cur = value_[static_cast<std::size_t>(v)];
      if (cur >= 0) {
        if (cur != val) conflict_ = true;
        continue;
      }
      assign(v, val);
    }
    queue_.clear();
    bool ok = !conflict_;
    conflict_ = false;
    return ok;
  }

  bool helps(std::size_t v, double a) const { return preferred_[v] ? a < 0 : a > 0; }

  // Every row violated by the preferred completion needs one of its free
  // helpful variables moved off its preferred value, at cost |c|. Costs
  // are split greedily across rows (a dual-feasible packing), so the sum
  // of the charged amounts never exceeds the cheapest repair.
  double bound() {
    double b = model_.offset + fixed_obj_ + free_pos_;
    if (violated_.empty()) return b;
    if (++stamp_id_ == 0) {
      std::fill(stamp_.begin(), stamp_.end(), 0);
      stamp_id_ = 1;
    }
    auto residual = [&](std::size_t v) -> double& {
      if (stamp_[v] != stamp_id_) {
        stamp_[v] = stamp_id_;
        residual_[v] = std::fabs(model_.objective[v]);
      }
      return residual_[v];
    };
    double penalty = 0.0;
    for (std::uint32_t r : violated_) {
      double delta = std::numeric_limits<double>::infinity();
      for (const auto& [v, a] : rows_[r].terms) {
        auto sv = static_cast<std::size_t>(v);
        if (value_[sv] < 0 && helps(sv, a)) delta = std::min(delta, residual(sv));
      }
      if (!(delta > 0.0) || delta == std::numeric_limits<double>::infinity()) continue;
      for (const auto& [v, a] : rows_[r].terms) {
        auto sv = static_cast<std::size_t>(v);
        if (value_[sv] < 0 && helps(sv, a)) residual(sv) -= delta;
      }
      penalty += delta;
    }
    return b - penalty;
  }

  // After bound(): a free variable whose move off its preferred value
  // costs at least `gap` in residual terms cannot be part of an improving
  // solution, so it is fixed to its preferred value.
  std::size_t fix_by_reduced_cost(double gap) {
    std::size_t fixed = 0;
    for (std::size_t v = 0; v < n_; ++v) {
      if (value_[v] >= 0) continue;
      double r = stamp_[v] == stamp_id_ ? residual_[v] : std::fabs(model_.objective[v]);
      if (r > 0.0 && r >= gap) {
        assign(static_cast<int>(v), preferred_[v]);
        ++fixed;
      }
    }
    return fixed;
  }

  // Free variable that can repair a violated row, largest |c| first, then
  // lowest index.
  int branch_variable() const {
    int best = -1;
    double best_c = -1.0;
    for (std::uint32_t r : violated_) {
      for (const auto& [v, a] : rows_[r].terms) {
        auto sv = static_cast<std::size_t>(v);
        if (value_[sv] >= 0 || !helps(sv, a)) continue;
        double c = std::fabs(model_.objective[sv]);
        if (c > best_c || (c == best_c && v < best)) {
          best = v;
          best_c = c;
        }
      }
    }
    return best;
  }

  const IlpModel& model_;
  std::size_t n_;
  std::vector<Row> rows_;
  std::vector<std::vector<Occurrence>> occurs_;
  std::vector<std::int8_t> preferred_;
  bool trivially_infeasible_ = false;

  std::vector<std::int8_t> value_;
  std::vector<int> trail_;
  std::vector<std::pair<int, std::int8_t>> queue_;
  bool conflict_ = false;
  std::vector<double> max_act_;
  std::vector<double> pref_act_;
  std::vector<std::uint32_t> violated_;
  std::vector<int> violated_pos_;
  std::vector<std::uint32_t> stamp_;
  std::uint32_t stamp_id_ = 0;
  std::vector<double> residual_;
  double fixed_obj_ = 0.0;
  double free_pos_ = 0.0;
};

inline IlpSolution solve_ilp(const IlpModel& model,
                             double time_limit_seconds = std::numeric_limits<double>::infinity()) {
  IlpSolver solver(model);
  return solver.solve(time_limit_seconds);
}

namespace detail {

inline void write_lp_number(std::ostream& os, double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  os << s.str();
}

inline void write_lp_terms(std::ostream& os, const std::vector<LinearTerm>& terms) {
  bool first = true;
  for (const LinearTerm& t : terms) {
    if (t.coef == 0.0) continue;
    os << (t.coef < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
    write_lp_number(os, std::fabs(t.coef));
    os << ' ' << "v" << t.var;
    first = false;
  }
  if (first) os << "0 v0";
}

}  // namespace detail

// CPLEX LP text: Maximize / Subject To / Binary / End. Variables are
// written as v<index>; a comment block maps them to their names.
inline void write_lp(std::ostream& os, const IlpModel& model) {
  os << "\\ " << model.variable_count() << " binary variables, " << model.constraints.size() << " constraints\n";
  os << "\\ objective offset ";
  detail::write_lp_number(os, model.offset);
  os << '\n';
  for (std::size_t v = 0; v < model.variable_count(); ++v) os << "\\ v" << v << " = " << model.names[v] << '\n';
  os << "Maximize\n obj: ";
  std::vector<LinearTerm> obj;
  for (std::size_t v = 0; v < model.variable_count(); ++v)
    if (model.objective[v] != 0.0) obj.push_back(LinearTerm{static_cast<int>(v), model.objective[v]});
  if (obj.empty() && model.variable_count() == 0) {
    os << "0";
  } else if (obj.empty()) {
    os << "0 v0";
  } else {
    detail::write_lp_terms(os, obj);
  }
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < model.constraints.size(); ++i) {
    const LinearConstraint& c = model.constraints[i];
    os << " c" << i << ": ";
    detail::write_lp_terms(os, c.terms);
    os << (c.cmp == Comparator::GreaterEqual ? " >= " : c.cmp == Comparator::LessEqual ? " <= " : " = ");
    detail::write_lp_number(os, c.rhs);
    os << '\n';
  }
  os << "Binary\n";
  for (std::size_t v = 0; v < model.variable_count(); ++v) os << " v" << v << '\n';
  os << "End\n";
}

}  // namespace mlncpi
