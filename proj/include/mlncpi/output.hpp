#pragma once

// Solution files: one true hidden atom per line in canonical order, then
// "---" and a key<TAB>value stats block. The structured variant is a
// single flat JSON object.

#include <charconv>
#include <cstdint>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mlncpi/cpi.hpp"
#include "mlncpi/problem.hpp"

namespace mlncpi {

// Shortest text that reads back as the same double; "inf"/"-inf" for
// infinities.
inline std::string format_number(double v) {
  if (v == std::numeric_limits<double>::infinity()) return "inf";
  if (v == -std::numeric_limits<double>::infinity()) return "-inf";
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct RunStats {
  std::string solver;
  Score score;
  std::size_t iterations = 0;
  std::size_t solver_calls = 0;
  std::vector<std::size_t> groundings_per_formula;
  double wall_time_ms = 0.0;
  std::vector<BoundTerm> bound_b_per_iteration;
  bool converged = false;
  int incumbent_iteration = 0;
  std::vector<CpiIteration> trace;
  // Extra scalar entries, emitted after the fixed keys in this order.
  std::vector<std::pair<std::string, std::string>> extra;
};

namespace detail {

inline std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string format_bound(const BoundTerm& b) { return b.infinite() ? "inf" : format_number(b.soft); }

inline std::string trace_row(const CpiIteration& it) {
  std::string s = "added=" + join_sizes(it.added);
  s += " partial_viol=" + std::to_string(it.partial.hard_violations);
  s += " partial_soft=" + format_number(it.partial.soft);
  s += " full_viol=" + std::to_string(it.full.hard_violations);
  s += " full_soft=" + format_number(it.full.soft);
  s += " b=" + format_bound(it.b);
  s += " b_hard=" + std::to_string(it.b.hard);
  s += " solver_ms=" + format_number(it.solver_ms);
  s += " separation_ms=" + format_number(it.separation_ms);
  s += " solver_work=" + std::to_string(it.solver_work);
  s += std::string(" optimal=") + (it.solver_optimal ? "1" : "0");
  return s;
}

}  // namespace detail

// The stats as ordered key/value pairs.
inline std::vector<std::pair<std::string, std::string>> stats_entries(const RunStats& st) {
  std::vector<std::pair<std::string, std::string>> kv;
  const bool feasible = st.score.hard_violations == 0;
  kv.emplace_back("solver", st.solver);
  kv.emplace_back("score", feasible ? format_number(st.score.soft) : "-inf");
  kv.emplace_back("soft_score", format_number(st.score.soft));
  kv.emplace_back("hard_violations", std::to_string(st.score.hard_violations));
  kv.emplace_back("iterations", std::to_string(st.iterations));
  kv.emplace_back("solver_calls", std::to_string(st.solver_calls));
  kv.emplace_back("groundings_per_formula", detail::join_sizes(st.groundings_per_formula));
  kv.emplace_back("wall_time_ms", format_number(st.wall_time_ms));
  std::string b;
  for (std::size_t i = 0; i < st.bound_b_per_iteration.size(); ++i)
    b += (i ? "," : "") + detail::format_bound(st.bound_b_per_iteration[i]);
  kv.emplace_back("bound_b_per_iteration", b);
  kv.emplace_back("converged", st.converged ? "1" : "0");
  kv.emplace_back("incumbent_iteration", std::to_string(st.incumbent_iteration));
  for (const auto& e : st.extra) kv.push_back(e);
  for (const CpiIteration& it : st.trace) kv.emplace_back("trace_" + std::to_string(it.index), detail::trace_row(it));
  return kv;
}

inline std::vector<std::string> true_atom_lines(const Problem& problem, const World& world) {
  std::vector<std::string> out;
  for (AtomId id = 0; id < world.size(); ++id)
    if (world.get(id)) out.push_back(problem.hidden_atom_name(id));
  return out;
}

inline void write_stats_tsv(std::ostream& os, const RunStats& st) {
  for (const auto& [k, v] : stats_entries(st)) os << k << '\t' << v << '\n';
}

inline void emit_solution(std::ostream& os, const Problem& problem, const World& world, const RunStats& st) {
  for (const std::string& line : true_atom_lines(problem, world)) os << line << '\n';
  os << "---\n";
  write_stats_tsv(os, st);
}

inline std::string emit_solution(const Problem& problem, const World& world, const RunStats& st) {
  std::ostringstream os;
  emit_solution(os, problem, world, st);
  return os.str();
}

// Flat object: "atoms" lists the true hidden atoms, every stat is a string
// exactly as in the TSV block.
inline nlohmann::ordered_json stats_json(const RunStats& st) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : stats_entries(st)) j[k] = v;
  return j;
}

inline nlohmann::ordered_json solution_json(const Problem& problem, const World& world, const RunStats& st) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  j["atoms"] = true_atom_lines(problem, world);
  for (const auto& [k, v] : stats_entries(st)) j[k] = v;
  return j;
}

}  // namespace mlncpi
