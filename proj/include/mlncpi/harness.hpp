#pragma once

// End-to-end runs: pick a pipeline, run it, collect stats and metrics.

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlncpi/cpi.hpp"
#include "mlncpi/er.hpp"
#include "mlncpi/oracle.hpp"
#include "mlncpi/output.hpp"
#include "mlncpi/random.hpp"

namespace mlncpi {

enum class SolverKind { Mws, Ilp, CpiMws, CpiIlp, Oracle };

inline const char* solver_name(SolverKind k) {
  switch (k) {
    case SolverKind::Mws: return "mws";
    case SolverKind::Ilp: return "ilp";
    case SolverKind::CpiMws: return "cpi-mws";
    case SolverKind::CpiIlp: return "cpi-ilp";
    case SolverKind::Oracle: return "oracle";
  }
  return "?";
}

inline std::optional<SolverKind> parse_solver(std::string_view s) {
  for (SolverKind k : {SolverKind::Mws, SolverKind::Ilp, SolverKind::CpiMws, SolverKind::CpiIlp, SolverKind::Oracle})
    if (s == solver_name(k)) return k;
  return std::nullopt;
}

inline bool uses_mws(SolverKind k) { return k == SolverKind::Mws || k == SolverKind::CpiMws; }
inline bool uses_ilp(SolverKind k) { return k == SolverKind::Ilp || k == SolverKind::CpiIlp; }
inline bool uses_cpi(SolverKind k) { return k == SolverKind::CpiMws || k == SolverKind::CpiIlp; }

struct RunConfig {
  SolverKind solver = SolverKind::CpiIlp;
  MwsParams mws;  // mws.seed is ignored; the solver stream comes from seed
  int cpi_max_iterations = 100;
  bool warm_start = true;
  EncodeOptions encode;
  double ilp_time_limit = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  bool timing = true;             // false: all wall-clock fields are 0
  bool compare_with_oracle = false;
};

struct MetricsReport {
  std::optional<double> delta_s_soft;  // soft score minus the oracle's
  std::optional<std::int64_t> oracle_violations;
  std::int64_t hard_violations = 0;
  double wall_time_ms = 0.0;
  std::size_t iterations = 0;
  std::size_t solver_calls = 0;
  std::optional<double> f1;
};

struct RunOutcome {
  World world;
  CpiResult result;
  RunStats stats;
  MetricsReport metrics;
};

inline RunOutcome run(const Problem& problem, const RunConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  RunOutcome out;
  MwsParams mp = cfg.mws;
  mp.seed = stream_seed(cfg.seed, "solver");

  switch (cfg.solver) {
    case SolverKind::Mws: {
      MwsBaseSolver s(mp, cfg.warm_start);
      out.result = full_solve(problem, s);
      break;
    }
    case SolverKind::Ilp: {
      IlpBaseSolver s(cfg.encode, cfg.ilp_time_limit);
      out.result = full_solve(problem, s);
      break;
    }
    case SolverKind::CpiMws:
    case SolverKind::CpiIlp: {
      CpiParams cp;
      cp.max_iterations = cfg.cpi_max_iterations;
      if (cfg.solver == SolverKind::CpiMws) {
        MwsBaseSolver s(mp, cfg.warm_start);
        out.result = cpi_solve(problem, s, cp);
      } else {
        IlpBaseSolver s(cfg.encode, cfg.ilp_time_limit);
        out.result = cpi_solve(problem, s, cp);
      }
      break;
    }
    case SolverKind::Oracle: {
      OracleResult o = brute_force_map(problem);
      out.result.grounding = PartialGrounding::full(problem);
      out.result.world = o.world;
      out.result.score = o.score;
      CpiIteration it;
      it.index = 1;
      it.full = it.partial = o.score;
      it.solver_optimal = true;
      it.added.assign(problem.formula_count(), 0);
      out.result.trace.iterations.push_back(it);
      out.result.trace.incumbent_iteration = 1;
      out.result.trace.converged = true;
      break;
    }
  }
  const double wall = cfg.timing ? std::chrono::duration<double, std::milli>(clock::now() - t0).count() : 0.0;
  out.world = out.result.world;

  RunStats& st = out.stats;
  st.solver = solver_name(cfg.solver);
  st.score = out.result.score;
  st.iterations = out.result.trace.iterations.size();
  for (const CpiIteration& it : out.result.trace.iterations) {
    st.solver_calls += it.penalty_mode ? 2 : 1;
    if (uses_cpi(cfg.solver)) st.bound_b_per_iteration.push_back(it.b);
  }
  for (std::size_t fi = 0; fi < problem.formula_count(); ++fi)
    st.groundings_per_formula.push_back(out.result.grounding.size(fi));
  st.wall_time_ms = wall;
  st.converged = out.result.trace.converged;
  st.incumbent_iteration = out.result.trace.incumbent_iteration;
  st.trace = out.result.trace.iterations;
  if (!cfg.timing) {
    for (CpiIteration& it : st.trace) it.solver_ms = it.separation_ms = 0.0;
  }
  st.extra.emplace_back("seed", std::to_string(cfg.seed));

  MetricsReport& m = out.metrics;
  m.hard_violations = st.score.hard_violations;
  m.wall_time_ms = wall;
  m.iterations = st.iterations;
  m.solver_calls = st.solver_calls;
  if (cfg.compare_with_oracle) {
    OracleResult o = brute_force_map(problem);
    m.delta_s_soft = st.score.soft - o.score.soft;
    m.oracle_violations = o.score.hard_violations;
    st.extra.emplace_back("delta_s_soft", format_number(*m.delta_s_soft));
    st.extra.emplace_back("oracle_hard_violations", std::to_string(o.score.hard_violations));
  }
  return out;
}

struct SweepRow {
  int size = 0;
  int runs = 0;
  double mean_time_ms = 0.0;
  double mean_groundings = 0.0;
  double mean_soft = 0.0;
  double mean_violations = 0.0;
  double mean_iterations = 0.0;
  double mean_f1 = 0.0;
};

struct SweepParams {
  std::vector<int> sizes;
  int seeds = 5;
  double noise = 0.1;
  int records_per_entity = 4;
  RunConfig run;
};

// One row per size, each the mean over `seeds` generated ER instances.
inline std::vector<SweepRow> sweep(const SweepParams& p) {
  for (std::size_t i = 1; i < p.sizes.size(); ++i)
    if (p.sizes[i] < p.sizes[i - 1]) throw std::invalid_argument("sweep sizes must be non-decreasing");
  if (p.seeds < 1) throw std::invalid_argument("sweep needs at least one seed");
  std::vector<SweepRow> rows;
  for (int size : p.sizes) {
    SweepRow row;
    row.size = size;
    for (int k = 0; k < p.seeds; ++k) {
      ErParams ep;
      ep.n_records = size;
      ep.n_entities = std::max(1, size / std::max(1, p.records_per_entity));
      ep.noise = p.noise;
      ep.seed = stream_seed(p.run.seed, "sweep", static_cast<std::uint64_t>(size) * 1000003ULL + static_cast<std::uint64_t>(k));
      ErInstance inst = gen_er(ep);
      Problem problem = inst.problem();
      RunConfig cfg = p.run;
      cfg.seed = ep.seed;
      RunOutcome r = run(problem, cfg);
      row.runs += 1;
      row.mean_time_ms += r.metrics.wall_time_ms;
      row.mean_groundings += static_cast<double>(r.result.grounding.total());
      row.mean_soft += r.stats.score.soft;
      row.mean_violations += static_cast<double>(r.stats.score.hard_violations);
      row.mean_iterations += static_cast<double>(r.stats.iterations);
      row.mean_f1 += er_f1(inst, problem, r.world).f1();
    }
    const double n = row.runs;
    row.mean_time_ms /= n;
    row.mean_groundings /= n;
    row.mean_soft /= n;
    row.mean_violations /= n;
    row.mean_iterations /= n;
    row.mean_f1 /= n;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace mlncpi
