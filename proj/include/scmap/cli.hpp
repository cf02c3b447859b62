#pragma once

// Command-line front end: solve, sweep, validate, lowerbound, partition.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "scmap/baselines.hpp"
#include "scmap/engine.hpp"
#include "scmap/plan.hpp"
#include "scmap/sptg.hpp"

namespace scmap {

enum ExitCode { exit_ok = 0, exit_input = 1, exit_infeasible = 2, exit_invalid = 3 };

struct SweepSpec {
  std::vector<int> nc_values;
  std::vector<int> k_values;
  SolveOptions options;
  std::string out_path;
};

struct SweepRow {
  int nc = 0;
  int k = 0;
  std::string status;
  double objective = 0.0;
  double lp_bound = 0.0;
  double gap = 0.0;
  int nfv_nodes_used = 0;
  int iterations = 0;
  int columns_generated = 0;
  double wall_ms = 0.0;
  double lb = 0.0;
  double single_node = 0.0;
};

inline const char* kSweepHeader =
    "nc,k,status,objective,lp_bound,gap,nfv_nodes_used,iterations,columns_generated,wall_ms,lb,single_node";

inline std::string sweep_row_csv(const SweepRow& r) {
  using io_detail::format_double;
  const bool solved = r.status == "optimal" || r.status == "feasible";
  auto num = [&](double v) { return solved ? format_double(v) : std::string(); };
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.1f", r.wall_ms);
  return std::to_string(r.nc) + "," + std::to_string(r.k) + "," + r.status + "," + num(r.objective) + "," +
         num(r.lp_bound) + "," + num(r.gap) + "," + (solved ? std::to_string(r.nfv_nodes_used) : std::string()) + "," +
         std::to_string(r.iterations) + "," + std::to_string(r.columns_generated) + "," + wall + "," +
         format_double(r.lb) + "," + format_double(r.single_node);
}

inline std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = std::string(kSweepHeader) + "\n";
  for (const SweepRow& r : rows) out += sweep_row_csv(r) + "\n";
  return out;
}

/// Worker count from SCMAP_THREADS, else the machine's parallelism.
inline int sweep_threads() {
  if (const char* env = std::getenv("SCMAP_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// One row per (nc, k), nc-major, regardless of completion order.
inline std::vector<SweepRow> run_sweep(const ProblemInstance& base, const SweepSpec& spec, int threads = 0) {
  if (spec.nc_values.empty() || spec.k_values.empty()) throw ValidationError("sweep needs nonempty nc and k lists");
  const int nfv = static_cast<int>(base.topology().nfv_nodes().size());
  for (int k : spec.k_values)
    if (k < 1 || k > nfv) throw ValidationError("sweep k=" + std::to_string(k) + " outside 1.." + std::to_string(nfv));
  for (int nc : spec.nc_values)
    if (nc < 1) throw ValidationError("sweep nc values must be positive");
  const PathTable paths = all_pairs_hops(base.topology());
  const double lb = shortest_path_lb(base, paths);
  const SingleNodeResult sn = single_node_oracle(base, paths);

  std::vector<std::pair<int, int>> cells;
  for (int nc : spec.nc_values)
    for (int k : spec.k_values) cells.emplace_back(nc, k);
  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      SweepRow& row = rows[i];
      row.nc = cells[i].first;
      row.k = cells[i].second;
      row.lb = lb;
      row.single_node = sn.objective;
      try {
        NcSpec nc;
        nc.uniform = row.nc;
        const ProblemInstance inst = base.with_parameters(row.k, nc);
        const SolveResult r = solve(inst, spec.options);
        row.iterations = static_cast<int>(r.cg.trace.size());
        row.columns_generated = r.cg.columns_generated;
        row.wall_ms = r.wall_ms;
        if (r.feasible) {
          row.status = r.plan.status;
          row.objective = r.plan.objective;
          row.lp_bound = r.plan.lp_bound;
          row.gap = r.plan.gap;
          row.nfv_nodes_used = r.plan.nfv_nodes_used();
        } else {
          row.status = "infeasible";
        }
      } catch (const std::exception&) {
        row.status = "error";
      }
    }
  };
  if (threads <= 0) threads = sweep_threads();
  threads = std::min<int>(threads, static_cast<int>(cells.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

namespace cli_detail {

struct InstanceFlags {
  std::string topology, chains, demands, nc = "1";
  int k = 1;
};

inline void add_instance_flags(CLI::App* cmd, InstanceFlags& f, bool need_k) {
  cmd->add_option("--topology", f.topology, "topology JSON")->required();
  cmd->add_option("--chains", f.chains, "chains JSON")->required();
  cmd->add_option("--demands", f.demands, "demands CSV")->required();
  auto* k = cmd->add_option("--k", f.k, "max NFV hosting nodes");
  if (need_k) k->required();
}

inline std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto dots = tok.find("..");
    try {
      if (dots != std::string::npos) {
        const int a = std::stoi(tok.substr(0, dots));
        const int b = std::stoi(tok.substr(dots + 2));
        for (int v = a; v <= b; ++v) out.push_back(v);
      } else {
        std::size_t used = 0;
        out.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      }
    } catch (const std::exception&) {
      throw ParseError(std::string("bad ") + what + " entry '" + tok + "'");
    }
  }
  if (out.empty()) throw ParseError(std::string("empty ") + what);
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot write '" + path + "'");
  f << text;
}

}  // namespace cli_detail

inline int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"scmap: service-chain mapping with multiple instances", "scmap"};
  app.require_subcommand(1);

  InstanceFlags flags;
  std::string mode = "auto", plan_out, trace_out, sweep_out, plan_in, nc_list, k_list, partition_out;
  double time_limit = 120.0;
  int max_iters = 500;
  long node_limit = 20000;

  auto* solve_cmd = app.add_subcommand("solve", "solve one instance");
  add_instance_flags(solve_cmd, flags, true);
  solve_cmd->add_option("--nc", flags.nc, "instances per chain: N or chain=N,...")->required();
  solve_cmd->add_option("--mode", mode, "final model: auto, full or fast")
      ->check(CLI::IsMember({"auto", "full", "fast"}));
  solve_cmd->add_option("--time-limit", time_limit, "seconds for the final integer solve");
  solve_cmd->add_option("--max-iters", max_iters, "column generation iteration cap");
  solve_cmd->add_option("--node-limit", node_limit, "branch-and-bound node cap");
  solve_cmd->add_option("--out", plan_out, "plan JSON path")->required();
  solve_cmd->add_option("--trace", trace_out, "column generation trace CSV");

  auto* sweep_cmd = app.add_subcommand("sweep", "grid of (nc, k) solves");
  InstanceFlags sweep_flags;
  add_instance_flags(sweep_cmd, sweep_flags, false);
  sweep_cmd->add_option("--nc-list", nc_list, "e.g. 1,2,4 or 1..8")->required();
  sweep_cmd->add_option("--k-list", k_list, "e.g. 1,3,14")->required();
  sweep_cmd->add_option("--time-limit", time_limit, "seconds per final integer solve");
  sweep_cmd->add_option("--max-iters", max_iters, "column generation iteration cap");
  sweep_cmd->add_option("--node-limit", node_limit, "branch-and-bound node cap");
  sweep_cmd->add_option("--out", sweep_out, "CSV path (default: standard output)");

  auto* validate_cmd = app.add_subcommand("validate", "check a plan against an instance");
  InstanceFlags val_flags;
  add_instance_flags(validate_cmd, val_flags, false);
  validate_cmd->add_option("--plan", plan_in, "plan JSON")->required();

  auto* lb_cmd = app.add_subcommand("lowerbound", "reference values");
  InstanceFlags lb_flags;
  add_instance_flags(lb_cmd, lb_flags, false);

  auto* part_cmd = app.add_subcommand("partition", "dump the traffic grouping");
  InstanceFlags part_flags;
  add_instance_flags(part_cmd, part_flags, false);
  part_cmd->add_option("--nc", part_flags.nc, "instances per chain")->required();
  part_cmd->add_option("--out", partition_out, "JSON path (default: standard output)");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_input;
  }

  auto load = [](const InstanceFlags& f, int k) {
    return load_instance(f.topology, f.chains, f.demands, k, NcSpec::parse(f.nc));
  };

  try {
    if (*solve_cmd) {
      const ProblemInstance inst = load(flags, flags.k);
      for (const auto& w : inst.warnings()) err << "warning: " << w << "\n";
      SolveOptions opt;
      opt.cg.max_iterations = max_iters;
      opt.extract.mip_time_limit_s = time_limit;
      opt.extract.mip_node_limit = node_limit;
      opt.extract.mode = mode == "full" ? FinalModeChoice::full
                         : mode == "fast" ? FinalModeChoice::fast
                                          : FinalModeChoice::automatic;
      const SolveResult r = solve(inst, opt);
      if (!trace_out.empty()) write_text(trace_out, trace_to_csv(r.cg.trace));
      if (!r.feasible) {
        for (const auto& d : r.diagnostics) err << d << "\n";
        out << "status=infeasible\n";
        return exit_infeasible;
      }
      write_text(plan_out, plan_to_json(inst, r.plan).dump(2) + "\n");
      out << "status=" << r.plan.status << " objective=" << io_detail::format_double(r.plan.objective)
          << " lp_bound=" << io_detail::format_double(r.plan.lp_bound)
          << " gap=" << io_detail::format_double(r.plan.gap) << " nfv_nodes_used=" << r.plan.nfv_nodes_used()
          << "\n";
      return exit_ok;
    }
    if (*sweep_cmd) {
      sweep_flags.nc = "1";
      const ProblemInstance base = load(sweep_flags, 1);
      SweepSpec spec;
      spec.nc_values = parse_int_list(nc_list, "--nc-list");
      spec.k_values = parse_int_list(k_list, "--k-list");
      spec.options.cg.max_iterations = max_iters;
      spec.options.extract.mip_time_limit_s = time_limit;
      spec.options.extract.mip_node_limit = node_limit;
      const std::string csv = sweep_to_csv(run_sweep(base, spec));
      if (sweep_out.empty()) {
        out << csv;
      } else {
        write_text(sweep_out, csv);
      }
      return exit_ok;
    }
    if (*validate_cmd) {
      const nlohmann::json doc = io_detail::parse_json(io_detail::read_file(plan_in), plan_in);
      int k = val_flags.k;
      if (validate_cmd->count("--k") == 0) {
        if (!doc.is_object() || !doc.contains("k") || !doc.at("k").is_number_integer())
          throw ParseError(plan_in + ": no 'k' recorded; pass --k");
        k = doc.at("k").get<int>();
      }
      const ProblemInstance inst = load(val_flags, k);
      const MappingPlan plan = plan_from_json(inst, doc);
      const ValidationReport rep = validate_plan(inst, plan);
      if (rep.ok()) {
        out << "ok\n";
        return exit_ok;
      }
      for (const Violation& v : rep.violations) out << v.kind << ": " << v.detail << "\n";
      return exit_invalid;
    }
    if (*lb_cmd) {
      const ProblemInstance inst = load(lb_flags, lb_cmd->count("--k") ? lb_flags.k : 1);
      const BaselineReport b = compute_baselines(inst);
      out << "shortest_path_lb=" << io_detail::format_double(b.shortest_path_lb) << "\n";
      if (b.single_node_feasible) {
        out << "single_node=" << io_detail::format_double(b.single_node_objective) << " at " << b.single_node_id
            << "\n";
      } else {
        out << "single_node=infeasible\n";
      }
      out << "per_pair=" << io_detail::format_double(b.per_pair) << (b.per_pair_via_engine ? " (solved)" : "")
          << "\n";
      return exit_ok;
    }
    if (*part_cmd) {
      const ProblemInstance inst = load(part_flags, part_cmd->count("--k") ? part_flags.k : 1);
      nlohmann::json doc = nlohmann::json::array();
      for (const ChainPartition& p : partition_all(inst)) doc.push_back(partition_to_json(inst, p));
      if (partition_out.empty()) {
        out << doc.dump(2) << "\n";
      } else {
        write_text(partition_out, doc.dump(2) + "\n");
      }
      return exit_ok;
    }
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return exit_input;
  } catch (const ValidationError& e) {
    err << "input error: " << e.what() << "\n";
    return exit_input;
  }
  return exit_input;
}

}  // namespace scmap
