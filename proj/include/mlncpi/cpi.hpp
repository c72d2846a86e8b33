#pragma once

// Cutting Plane Inference: solve the partial problem, separate against the
// solution, grow the grounding, repeat until nothing new is found.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mlncpi/error.hpp"
#include "mlncpi/grounding.hpp"
#include "mlncpi/ilp.hpp"
#include "mlncpi/mws.hpp"
#include "mlncpi/problem.hpp"
#include "mlncpi/query.hpp"
#include "mlncpi/random.hpp"

namespace mlncpi {

struct BaseSolution {
  World world;
  bool optimal = false;
  std::uint64_t work = 0;  // flips or branch-and-bound nodes
  bool penalty_mode = false;
};

// Propositional MAP over a partial grounding.
class BaseSolver {
 public:
  virtual ~BaseSolver() = default;
  // previous is the last iteration's solution, or the all-false world on
  // the first call (iteration == 1).
  virtual BaseSolution solve(const Problem& problem, const PartialGrounding& g, const World& previous, int iteration) = 0;
  virtual bool exact() const = 0;
};

class MwsBaseSolver : public BaseSolver {
 public:
  explicit MwsBaseSolver(MwsParams params, bool warm_start = true) : params_(params), warm_start_(warm_start) {}

  BaseSolution solve(const Problem& problem, const PartialGrounding& g, const World& previous, int iteration) override {
    WeightedClauseSet clauses = clausify(problem, g);
    MwsParams p = params_;
    p.seed = stream_seed(params_.seed, "mws", static_cast<std::uint64_t>(iteration));
    const bool given = warm_start_ && iteration > 1;
    MwsResult r = mws_solve(clauses, p, given ? previous : problem.empty_world(), given ? MwsStart::Given : MwsStart::Random);
    return BaseSolution{std::move(r.world), false, r.flips, false};
  }
  bool exact() const override { return false; }

 private:
  MwsParams params_;
  bool warm_start_;
};

class IlpBaseSolver : public BaseSolver {
 public:
  explicit IlpBaseSolver(EncodeOptions options = {}, double time_limit_seconds = std::numeric_limits<double>::infinity())
      : options_(options), time_limit_(time_limit_seconds) {}

  BaseSolution solve(const Problem& problem, const PartialGrounding& g, const World&, int) override {
    EncodeOptions opts = options_;
    opts.hard_as_penalty = false;
    Encoding enc = encode(problem, g, opts);
    IlpSolution sol = solve_ilp(enc.model, time_limit_);
    bool penalty = false;
    if (sol.status == IlpStatus::Infeasible) {
      // Contradictory hard groundings: minimise violations instead.
      opts.hard_as_penalty = true;
      enc = encode(problem, g, opts);
      std::uint64_t nodes = sol.nodes;
      sol = solve_ilp(enc.model, time_limit_);
      sol.nodes += nodes;
      penalty = true;
    }
    if (sol.status == IlpStatus::Unknown) throw SolverError("ILP time limit reached before any feasible solution");
    if (sol.status == IlpStatus::Infeasible) throw SolverError("ILP penalty model reported infeasible");
    return BaseSolution{enc.decode(sol.values, problem.empty_world()), sol.optimal, sol.nodes, penalty};
  }
  bool exact() const override { return true; }

 private:
  EncodeOptions options_;
  double time_limit_;
};

// Sum of |w| over newly added groundings; any hard grounding makes it
// infinite.
struct BoundTerm {
  std::int64_t hard = 0;
  double soft = 0.0;

  bool infinite() const { return hard > 0; }
  double value() const { return infinite() ? std::numeric_limits<double>::infinity() : soft; }
};

struct CpiIteration {
  int index = 0;  // from 1
  std::vector<std::size_t> grounding_before;  // |G^{i-1}_phi|
  std::vector<std::size_t> added;             // |G^i_phi \ G^{i-1}_phi|
  Score partial;                              // s_{G^{i-1}}(y_i)
  Score full;                                 // s(y_i)
  BoundTerm b;
  double solver_ms = 0.0;
  double separation_ms = 0.0;
  bool solver_optimal = false;
  bool penalty_mode = false;
  std::uint64_t solver_work = 0;
};

struct CpiTrace {
  std::vector<CpiIteration> iterations;
  int incumbent_iteration = 0;  // 0 = the initial all-false world
  bool converged = false;
};

struct CpiParams {
  int max_iterations = 100;
};

struct CpiResult {
  World world;
  Score score;
  CpiTrace trace;
  PartialGrounding grounding;  // final G
};

class CpiFailure : public SolverError {
 public:
  CpiFailure(const std::string& what, CpiTrace trace) : SolverError(what), trace_(std::move(trace)) {}
  const CpiTrace& trace() const { return trace_; }

 private:
  CpiTrace trace_;
};

// G restricted to the first sizes[phi] tuples of each formula, i.e. the
// grounding as it was before an iteration.
inline PartialGrounding grounding_prefix(const PartialGrounding& g, const std::vector<std::size_t>& sizes) {
  PartialGrounding out(g.formula_count());
  for (std::size_t fi = 0; fi < g.formula_count(); ++fi) {
    const auto& t = g.tuples(fi);
    for (std::size_t j = 0; j < sizes.at(fi); ++j) out.add(fi, t[j]);
  }
  return out;
}

inline CpiResult cpi_solve(const Problem& problem, BaseSolver& solver, CpiParams params = {}) {
  if (params.max_iterations < 1) throw std::invalid_argument("maxIterations must be at least 1");
  using clock = std::chrono::steady_clock;
  auto ms = [](clock::duration d) { return std::chrono::duration<double, std::milli>(d).count(); };

  CpiResult res;
  res.grounding = initial_grounding(problem);
  res.world = problem.empty_world();
  res.score = score(problem, res.world);
  AtomStore store(problem);
  World previous = problem.empty_world();
  const std::size_t nf = problem.formula_count();

  for (int i = 1;; ++i) {
    CpiIteration it;
    it.index = i;
    for (std::size_t fi = 0; fi < nf; ++fi) it.grounding_before.push_back(res.grounding.size(fi));

    auto t0 = clock::now();
    BaseSolution sol;
    try {
      sol = solver.solve(problem, res.grounding, previous, i);
    } catch (const SolverError& e) {
      throw CpiFailure(std::string("base solver failed in iteration ") + std::to_string(i) + ": " + e.what(), res.trace);
    }
    auto t1 = clock::now();
    it.solver_ms = ms(t1 - t0);
    it.solver_optimal = sol.optimal;
    it.penalty_mode = sol.penalty_mode;
    it.solver_work = sol.work;
    it.partial = partial_score(problem, res.grounding, sol.world);
    it.full = score(problem, sol.world);
    // Ties go to the later solution, so the incumbent always comes from
    // an iteration whose bound is on record.
    if (!res.score.better_than(it.full)) {
      res.world = sol.world;
      res.score = it.full;
      res.trace.incumbent_iteration = i;
    }

    store.load_world(sol.world);
    it.added.assign(nf, 0);
    std::size_t total = 0;
    for (std::size_t fi = 0; fi < nf; ++fi) {
      const Weight& w = problem.formula(fi).weight;
      for (const Tuple& t : separate(problem, store, fi, sol.world)) {
        if (!res.grounding.add(fi, t)) continue;
        ++it.added[fi];
        ++total;
        if (w.hard) {
          ++it.b.hard;
        } else {
          it.b.soft += std::fabs(w.value);
        }
      }
    }
    it.separation_ms = ms(clock::now() - t1);
    res.trace.iterations.push_back(std::move(it));

    if (total == 0) {
      res.trace.converged = true;
      break;
    }
    if (i >= params.max_iterations) break;
    previous = std::move(sol.world);
  }
  return res;
}

// Suboptimality bound for iteration i: partial_gap + b_i, infinite when b_i
// includes a hard grounding.
inline double error_bound(const CpiTrace& trace, int iteration, double partial_gap) {
  if (iteration < 1 || static_cast<std::size_t>(iteration) > trace.iterations.size())
    throw std::out_of_range("no such iteration in trace");
  const BoundTerm& b = trace.iterations[static_cast<std::size_t>(iteration - 1)].b;
  if (b.infinite()) return std::numeric_limits<double>::infinity();
  return partial_gap + b.soft;
}

// Plain (non-CPI) inference: one solver call on the full grounding.
inline CpiResult full_solve(const Problem& problem, BaseSolver& solver) {
  using clock = std::chrono::steady_clock;
  CpiResult res;
  res.grounding = PartialGrounding::full(problem);
  CpiIteration it;
  it.index = 1;
  for (std::size_t fi = 0; fi < problem.formula_count(); ++fi) it.grounding_before.push_back(res.grounding.size(fi));
  it.added.assign(problem.formula_count(), 0);
  auto t0 = clock::now();
  BaseSolution sol = solver.solve(problem, res.grounding, problem.empty_world(), 1);
  it.solver_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  it.solver_optimal = sol.optimal;
  it.penalty_mode = sol.penalty_mode;
  it.solver_work = sol.work;
  it.full = score(problem, sol.world);
  it.partial = it.full;
  res.world = std::move(sol.world);
  res.score = it.full;
  res.trace.iterations.push_back(std::move(it));
  res.trace.incumbent_iteration = 1;
  res.trace.converged = true;
  return res;
}

}  // namespace mlncpi
