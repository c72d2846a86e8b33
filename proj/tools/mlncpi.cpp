// mlncpi: MAP inference for Markov logic networks.
//
// exit status: 0 ok, 1 usage or input error, 2 solver failure,
// 3 oracle refused an oversized instance.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "mlncpi/harness.hpp"
#include "mlncpi/ilp.hpp"
#include "mlncpi/output.hpp"
#include "mlncpi/parser.hpp"

namespace {

using namespace mlncpi;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

Problem load(const std::string& mln_path, const std::string& db_path) {
  std::string mln = read_file(mln_path);
  std::string db = db_path.empty() ? std::string() : read_file(db_path);
  MlnDocument doc;
  try {
    doc = parse_mln(mln);
  } catch (const ParseError& e) {
    throw ParseError(mln_path + ": " + e.message(), e.location());
  }
  EvidenceSet ev;
  try {
    ev = parse_evidence(db, doc.signature);
  } catch (const ParseError& e) {
    throw ParseError(db_path + ": " + e.message(), e.location());
  }
  return Problem(std::move(doc), ev);
}

struct InferOptions {
  std::string mln, db, out = "-", stats_out, dump_lp, format = "tsv", solver = "cpi-ilp";
  int cpi_max_iter = 100;
  std::uint64_t mws_flips = 100000;
  int mws_restarts = 0;
  double mws_q = 0.5;
  std::uint64_t seed = 0;
  double ilp_time_limit = 0.0;
  bool no_timing = false, no_warm_start = false, one_direction = false, compare_oracle = false;
};

void add_output_flags(CLI::App* cmd, InferOptions& o) {
  cmd->add_option("--out", o.out, "solution file (default: stdout)");
  cmd->add_option("--stats-out", o.stats_out, "also write the stats block to this file");
  cmd->add_option("--format", o.format, "output format")->check(CLI::IsMember({"tsv", "structured"}));
  cmd->add_flag("--no-timing", o.no_timing, "report all wall-clock fields as 0 (byte-identical reruns)");
}

int run_infer(const InferOptions& o, const CLI::App* cmd) {
  auto kind = parse_solver(o.solver);
  if (!kind) throw UsageError("unknown solver '" + o.solver + "'");
  auto given = [&](const char* name) { return cmd->get_option_no_throw(name) && cmd->count(name) > 0; };
  for (const char* f : {"--mws-flips", "--mws-restarts", "--mws-q", "--no-warm-start"})
    if (given(f) && !uses_mws(*kind)) throw UsageError(std::string(f) + " applies only to mws and cpi-mws");
  if (given("--cpi-max-iter") && !uses_cpi(*kind)) throw UsageError("--cpi-max-iter applies only to cpi-mws and cpi-ilp");
  for (const char* f : {"--dump-lp", "--ilp-time-limit", "--one-direction"})
    if (given(f) && !uses_ilp(*kind)) throw UsageError(std::string(f) + " applies only to ilp and cpi-ilp");

  Problem problem = load(o.mln, o.db);
  RunConfig cfg;
  cfg.solver = *kind;
  cfg.mws.flips = o.mws_flips;
  cfg.mws.restarts = o.mws_restarts;
  cfg.mws.q = o.mws_q;
  cfg.cpi_max_iterations = o.cpi_max_iter;
  cfg.warm_start = !o.no_warm_start;
  cfg.encode.one_direction = o.one_direction;
  if (o.ilp_time_limit > 0.0) cfg.ilp_time_limit = o.ilp_time_limit;
  cfg.seed = o.seed;
  cfg.timing = !o.no_timing;
  cfg.compare_with_oracle = o.compare_oracle;

  RunOutcome r;
  try {
    r = run(problem, cfg);
  } catch (const CpiFailure& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    for (const CpiIteration& it : e.trace().iterations) std::cerr << "  trace_" << it.index << '\t' << detail::trace_row(it) << '\n';
    return 2;
  }

  if (!o.dump_lp.empty()) {
    std::ostringstream lp;
    write_lp(lp, encode(problem, r.result.grounding, cfg.encode).model);
    write_file(o.dump_lp, lp.str());
  }
  if (o.format == "structured") {
    write_file(o.out, solution_json(problem, r.world, r.stats).dump(2) + "\n");
    if (!o.stats_out.empty()) write_file(o.stats_out, stats_json(r.stats).dump(2) + "\n");
  } else {
    write_file(o.out, emit_solution(problem, r.world, r.stats));
    if (!o.stats_out.empty()) {
      std::ostringstream st;
      write_stats_tsv(st, r.stats);
      write_file(o.stats_out, st.str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAP inference for Markov logic networks (cutting plane inference over MaxWalkSAT / 0-1 ILP)"};
  app.require_subcommand(1);

  InferOptions infer;
  CLI::App* cmd_infer = app.add_subcommand("infer", "MAP inference on a model and evidence file");
  cmd_infer->add_option("--mln", infer.mln, "model file")->required();
  cmd_infer->add_option("--db", infer.db, "evidence file (default: no evidence)");
  cmd_infer->add_option("--solver", infer.solver, "mws | ilp | cpi-mws | cpi-ilp | oracle")
      ->check(CLI::IsMember({"mws", "ilp", "cpi-mws", "cpi-ilp", "oracle"}));
  cmd_infer->add_option("--cpi-max-iter", infer.cpi_max_iter, "CPI iteration limit")->check(CLI::PositiveNumber);
  cmd_infer->add_option("--mws-flips", infer.mws_flips, "MaxWalkSAT flips per try");
  cmd_infer->add_option("--mws-restarts", infer.mws_restarts, "extra MaxWalkSAT tries")->check(CLI::NonNegativeNumber);
  cmd_infer->add_option("--mws-q", infer.mws_q, "MaxWalkSAT random-flip probability")->check(CLI::Range(0.0, 1.0));
  cmd_infer->add_flag("--no-warm-start", infer.no_warm_start, "CPI-MWS: start every iteration from a random world");
  cmd_infer->add_option("--ilp-time-limit", infer.ilp_time_limit, "seconds per ILP solve (best found is used)");
  cmd_infer->add_flag("--one-direction", infer.one_direction, "encode only the needed implication per soft grounding");
  cmd_infer->add_option("--dump-lp", infer.dump_lp, "write the ILP of the final grounding in LP format");
  cmd_infer->add_option("--seed", infer.seed, "master random seed");
  cmd_infer->add_flag("--oracle-compare", infer.compare_oracle, "report delta_s_soft against brute force");
  add_output_flags(cmd_infer, infer);

  InferOptions oracle;
  oracle.solver = "oracle";
  CLI::App* cmd_oracle = app.add_subcommand("oracle", "exact MAP by enumeration (small models only)");
  cmd_oracle->add_option("--mln", oracle.mln, "model file")->required();
  cmd_oracle->add_option("--db", oracle.db, "evidence file");
  add_output_flags(cmd_oracle, oracle);

  ErParams er;
  std::string er_prefix;
  CLI::App* cmd_gen = app.add_subcommand("gen-er", "generate a synthetic entity-resolution instance");
  cmd_gen->add_option("--records", er.n_records, "number of records")->required();
  cmd_gen->add_option("--entities", er.n_entities, "number of planted entities")->required();
  cmd_gen->add_option("--noise", er.noise, "probability that a pair's similarity bucket is random")
      ->check(CLI::Range(0.0, 1.0));
  cmd_gen->add_option("--seed", er.seed, "master random seed");
  cmd_gen->add_option("--out-prefix", er_prefix, "writes PREFIX.mln, PREFIX.db and PREFIX.gold")->required();

  SweepParams sw;
  std::string sweep_solver = "cpi-ilp", sweep_out = "-", sweep_format = "tsv";
  bool sweep_no_timing = false;
  CLI::App* cmd_sweep = app.add_subcommand("sweep", "runtime and quality over generated ER instances of growing size");
  cmd_sweep->add_option("--sizes", sw.sizes, "record counts, non-decreasing")->delimiter(',');
  cmd_sweep->add_option("--seeds", sw.seeds, "instances per size")->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--noise", sw.noise, "generator noise")->check(CLI::Range(0.0, 1.0));
  cmd_sweep->add_option("--records-per-entity", sw.records_per_entity, "records per planted entity")
      ->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--solver", sweep_solver, "pipeline to time")
      ->check(CLI::IsMember({"mws", "ilp", "cpi-mws", "cpi-ilp", "oracle"}));
  cmd_sweep->add_option("--cpi-max-iter", sw.run.cpi_max_iterations, "CPI iteration limit")->check(CLI::PositiveNumber);
  cmd_sweep->add_option("--mws-flips", sw.run.mws.flips, "MaxWalkSAT flips per try");
  cmd_sweep->add_option("--seed", sw.run.seed, "master random seed");
  cmd_sweep->add_option("--out", sweep_out, "table file (default: stdout)");
  cmd_sweep->add_option("--format", sweep_format, "output format")->check(CLI::IsMember({"tsv", "structured"}));
  cmd_sweep->add_flag("--no-timing", sweep_no_timing, "report times as 0");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*cmd_infer) return run_infer(infer, cmd_infer);
    if (*cmd_oracle) return run_infer(oracle, cmd_oracle);
    if (*cmd_gen) {
      ErInstance inst = gen_er(er);
      write_file(er_prefix + ".mln", inst.mln);
      write_file(er_prefix + ".db", inst.db);
      std::string gold;
      const int n = er.n_records;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          if (inst.gold_match(i, j)) gold += "sameBib(" + ErInstance::name(i, n) + ", " + ErInstance::name(j, n) + ")\n";
      write_file(er_prefix + ".gold", gold);
      std::cout << "transitivity_groundings\t" << n * (n - 1) * (n - 2) << '\n';
      return 0;
    }
    if (*cmd_sweep) {
      auto kind = parse_solver(sweep_solver);
      sw.run.solver = *kind;
      sw.run.timing = !sweep_no_timing;
      std::vector<SweepRow> rows = sweep(sw);
      std::ostringstream os;
      if (sweep_format == "structured") {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const SweepRow& r : rows)
          j.push_back({{"size", r.size}, {"runs", r.runs}, {"mean_time_ms", r.mean_time_ms},
                       {"mean_groundings", r.mean_groundings}, {"mean_soft", r.mean_soft},
                       {"mean_violations", r.mean_violations}, {"mean_iterations", r.mean_iterations},
                       {"mean_f1", r.mean_f1}});
        os << j.dump(2) << '\n';
      } else {
        os << "size\truns\tmean_time_ms\tmean_groundings\tmean_soft\tmean_violations\tmean_iterations\tmean_f1\n";
        for (const SweepRow& r : rows)
          os << r.size << '\t' << r.runs << '\t' << format_number(r.mean_time_ms) << '\t'
             << format_number(r.mean_groundings) << '\t' << format_number(r.mean_soft) << '\t'
             << format_number(r.mean_violations) << '\t' << format_number(r.mean_iterations) << '\t'
             << format_number(r.mean_f1) << '\n';
      }
      write_file(sweep_out, os.str());
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const OracleSizeError& e) {
    std::cerr << "oracle: " << e.what() << '\n';
    return 3;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  } catch (const LogicError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
