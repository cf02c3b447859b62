#pragma once

// End-to-end pipeline: grouping, column generation, final integer model,
// plan decoding.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scmap/master.hpp"
#include "scmap/mip.hpp"
#include "scmap/plan.hpp"
#include "scmap/pricer.hpp"
#include "scmap/sptg.hpp"

namespace scmap {

/// Per chain instance, the whole chain co-located on the group's 1-median NFV node.
inline std::vector<Configuration> seed_pool(const ProblemInstance& instance,
                                            const std::vector<ChainPartition>& partitions, const PathTable& paths) {
  const auto cis = make_chain_instances(instance, partitions);
  const auto nfv = instance.topology().nfv_nodes();
  if (nfv.empty()) throw ValidationError("topology has no NFV node");
  std::vector<Configuration> out;
  for (int q = 0; q < static_cast<int>(cis.size()); ++q) {
    const ChainInstance& ci = cis[q];
    NodeIndex best = nfv.front();
    double best_cost = std::numeric_limits<double>::infinity();
    for (NodeIndex v : nfv) {
      double c = 0.0;
      for (std::size_t p = 0; p < ci.pairs.size(); ++p)
        c += ci.pair_demand[p] * (paths.dist(ci.pairs[p].src, v) + paths.dist(v, ci.pairs[p].dst));
      if (c < best_cost - 1e-9) {
        best_cost = c;
        best = v;
      }
    }
    const int len = instance.chain_length(ci.chain);
    out.push_back({q, std::vector<NodeIndex>(len, best), std::vector<std::vector<ArcIndex>>(len - 1)});
  }
  return out;
}

inline std::vector<Configuration> seed_pool(const ProblemInstance& instance,
                                            const std::vector<ChainPartition>& partitions) {
  return seed_pool(instance, partitions, all_pairs_hops(instance.topology()));
}

/// A host set of at most K nodes with the best per-instance configurations inside it.
struct HostSelection {
  std::vector<NodeIndex> hosts;
  std::vector<Configuration> configs;  // one per chain instance
  double cost = std::numeric_limits<double>::infinity();  // uncapacitated Gbps*hops
};

namespace engine_detail {

// Exact per-instance optimum with locations restricted to a node set, hop metric.
class RestrictedPlacement {
 public:
  RestrictedPlacement(const ProblemInstance& inst, const std::vector<ChainInstance>& cis, const PathTable& paths)
      : inst_(inst), cis_(cis), paths_(paths), n_(inst.topology().node_count()) {
    to_first_.assign(cis.size(), std::vector<double>(n_, 0.0));
    from_last_.assign(cis.size(), std::vector<double>(n_, 0.0));
    for (std::size_t q = 0; q < cis.size(); ++q)
      for (NodeIndex v = 0; v < n_; ++v)
        for (std::size_t p = 0; p < cis[q].pairs.size(); ++p) {
          to_first_[q][v] += cis[q].pair_demand[p] * paths.dist(cis[q].pairs[p].src, v);
          from_last_[q][v] += cis[q].pair_demand[p] * paths.dist(v, cis[q].pairs[p].dst);
        }
  }

  double instance_cost(int q, const std::vector<NodeIndex>& hosts, std::vector<NodeIndex>* locations) const {
    const int len = inst_.chain_length(cis_[q].chain);
    const int m = static_cast<int>(hosts.size());
    const double dem = cis_[q].demand;
    std::vector<double> val(static_cast<std::size_t>(len) * m);
    std::vector<int> from(val.size(), -1);
    for (int a = 0; a < m; ++a) val[a] = to_first_[q][hosts[a]];
    for (int i = 1; i < len; ++i)
      for (int b = 0; b < m; ++b) {
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < m; ++a) {
          const double c = val[(i - 1) * m + a] + dem * paths_.dist(hosts[a], hosts[b]);
          if (c < best) {
            best = c;
            from[i * m + b] = a;
          }
        }
        val[i * m + b] = best;
      }
    int end = 0;
    double best = std::numeric_limits<double>::infinity();
    for (int b = 0; b < m; ++b) {
      const double c = val[(len - 1) * m + b] + from_last_[q][hosts[b]];
      if (c < best) {
        best = c;
        end = b;
      }
    }
    if (locations) {
      locations->assign(len, -1);
      for (int i = len - 1; i >= 0; --i) {
        (*locations)[i] = hosts[end];
        if (i > 0) end = from[i * m + end];
      }
    }
    return best;
  }

  double total(const std::vector<NodeIndex>& hosts) const {
    double s = 0.0;
    for (int q = 0; q < static_cast<int>(cis_.size()); ++q) s += instance_cost(q, hosts, nullptr);
    return s;
  }

  Configuration config(int q, const std::vector<NodeIndex>& hosts) const {
    Configuration c;
    c.instance = q;
    instance_cost(q, hosts, &c.locations);
    for (std::size_t i = 0; i + 1 < c.locations.size(); ++i)
      c.segments.push_back(paths_.arcs(inst_.topology(), c.locations[i], c.locations[i + 1]));
    return c;
  }

 private:
  const ProblemInstance& inst_;
  const std::vector<ChainInstance>& cis_;
  const PathTable& paths_;
  int n_;
  std::vector<std::vector<double>> to_first_, from_last_;
};

}  // namespace engine_detail

inline constexpr double kExhaustiveHostBudget = 5000.0;

/// Greedy host selection with 1-swap local search, grown one node at a
/// time so that the answer for k is never worse than for k-1. When there
/// are few enough subsets of size k they are all tried instead.
inline HostSelection select_hosts(const ProblemInstance& inst, const std::vector<ChainInstance>& cis,
                                  const PathTable& paths, int k) {
  engine_detail::RestrictedPlacement placement(inst, cis, paths);
  const auto nfv = inst.topology().nfv_nodes();
  k = std::min<int>(k, static_cast<int>(nfv.size()));
  std::vector<NodeIndex> cur;
  double cur_cost = std::numeric_limits<double>::infinity();
  HostSelection best;
  auto sorted = [](std::vector<NodeIndex> s) {
    std::sort(s.begin(), s.end());
    return s;
  };
  for (int step = 1; step <= k; ++step) {
    NodeIndex pick = -1;
    double pick_cost = std::numeric_limits<double>::infinity();
    for (NodeIndex v : nfv) {
      if (std::find(cur.begin(), cur.end(), v) != cur.end()) continue;
      auto s = cur;
      s.push_back(v);
      const double c = placement.total(sorted(s));
      if (c < pick_cost - 1e-9) {
        pick_cost = c;
        pick = v;
      }
    }
    cur.push_back(pick);
    cur = sorted(cur);
    cur_cost = pick_cost;
    bool improved = true;
    while (improved) {
      improved = false;
      double best_swap = cur_cost;
      std::vector<NodeIndex> best_set;
      for (std::size_t i = 0; i < cur.size(); ++i)
        for (NodeIndex v : nfv) {
          if (std::find(cur.begin(), cur.end(), v) != cur.end()) continue;
          auto s = cur;
          s[i] = v;
          s = sorted(s);
          const double c = placement.total(s);
          if (c < best_swap - 1e-9) {
            best_swap = c;
            best_set = s;
          }
        }
      if (!best_set.empty()) {
        cur = best_set;
        cur_cost = best_swap;
        improved = true;
      }
    }
    if (cur_cost < best.cost - 1e-9) {
      best.cost = cur_cost;
      best.hosts = cur;
    }
  }
  // Small enough to try every subset of size k; adding a node never hurts,
  // so subsets of exactly k suffice.
  double subsets = 1.0;
  for (int i = 0; i < k; ++i) subsets = subsets * (static_cast<double>(nfv.size()) - i) / (i + 1);
  if (k > 0 && subsets <= kExhaustiveHostBudget) {
    std::vector<int> idx(k);
    for (int i = 0; i < k; ++i) idx[i] = i;
    const int n = static_cast<int>(nfv.size());
    while (true) {
      std::vector<NodeIndex> s(k);
      for (int i = 0; i < k; ++i) s[i] = nfv[idx[i]];
      const double c = placement.total(sorted(s));
      if (c < best.cost - 1e-9) {
        best.cost = c;
        best.hosts = sorted(s);
      }
      int i = k - 1;
      while (i >= 0 && idx[i] == n - k + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  for (int q = 0; q < static_cast<int>(cis.size()); ++q) best.configs.push_back(placement.config(q, best.hosts));
  // Report only nodes actually used.
  std::vector<char> used(inst.topology().node_count(), 0);
  for (const Configuration& c : best.configs)
    for (NodeIndex v : c.locations) used[v] = 1;
  std::erase_if(best.hosts, [&](NodeIndex v) { return !used[v]; });
  return best;
}

struct CgLimits {
  int max_iterations = 500;
  double time_limit_s = 1800.0;
  lp::SimplexOptions simplex;
};

struct CgIteration {
  int iter = 0;
  double objective = 0.0;
  int columns_added = 0;
  double best_rc = 0.0;
  double wall_ms = 0.0;
};

struct CgResult {
  std::vector<CgIteration> trace;
  bool converged = false;
  bool truncated = false;
  bool failed = false;
  std::string failure;
  double lp_bound = -std::numeric_limits<double>::infinity();
  int columns_generated = 0;
  Relaxation last;
};

inline std::string trace_to_csv(const std::vector<CgIteration>& trace) {
  std::string out = "iter,objective,columns_added,best_rc,wall_ms\n";
  for (const CgIteration& it : trace) {
    out += std::to_string(it.iter) + "," + io_detail::format_double(it.objective) + "," +
           std::to_string(it.columns_added) + "," + io_detail::format_double(it.best_rc) + "," +
           io_detail::format_double(std::round(it.wall_ms * 1000.0) / 1000.0) + "\n";
  }
  return out;
}

/// Solve, price every chain instance round-robin, add improving columns, repeat.
inline CgResult run_column_generation(RmpModel& model, const CgLimits& limits = {}) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  CgResult out;
  const ProblemInstance& inst = model.instance();
  const auto& cis = model.chain_instances();
  double best_lagrangian = -std::numeric_limits<double>::infinity();
  for (int iter = 1;; ++iter) {
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    if (iter > limits.max_iterations || elapsed > limits.time_limit_s) {
      out.truncated = true;
      break;
    }
    out.last = solve_relaxation(model, limits.simplex);
    if (out.last.solution.status != lp::LpStatus::optimal) {
      out.failed = true;
      out.failure = std::string("relaxation ") + lp::to_string(out.last.solution.status);
      for (const auto& name : out.last.solution.infeasibilities) out.failure += "; " + name;
      return out;
    }
    const DualPrices& duals = out.last.duals;
    const DualArcMetric metric(inst.topology(), duals);
    CgIteration row;
    row.iter = iter;
    row.objective = out.last.solution.objective;
    row.best_rc = 0.0;
    double lagrangian = out.last.solution.objective;
    for (int q = 0; q < static_cast<int>(cis.size()); ++q) {
      PricedColumn pc = price_min(inst, cis[q], q, duals, metric);
      row.best_rc = std::min(row.best_rc, pc.breakdown.total);
      lagrangian += std::min(0.0, pc.breakdown.total);
      if (pc.breakdown.total < -kPricingEpsilon && model.add_column(pc.config)) ++row.columns_added;
    }
    best_lagrangian = std::max(best_lagrangian, lagrangian);
    row.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    out.columns_generated += row.columns_added;
    out.trace.push_back(row);
    if (row.columns_added == 0) {
      out.converged = true;
      break;
    }
  }
  if (out.converged) {
    out.lp_bound = out.last.solution.objective;
  } else {
    // Truncated: the restricted objective is not a bound, the Lagrangian one is.
    out.lp_bound = best_lagrangian;
  }
  return out;
}

enum class FinalModeChoice { automatic, full, fast };

struct ExtractOptions {
  FinalModeChoice mode = FinalModeChoice::automatic;
  double mip_time_limit_s = 120.0;
  long mip_node_limit = 20000;
  lp::SimplexOptions simplex;
};

struct ExtractResult {
  bool feasible = false;
  MappingPlan plan;
  std::vector<std::string> diagnostics;
  lp::MipSolution mip;
};

namespace engine_detail {

// Integer start vector for the final model from one configuration per instance.
inline std::optional<std::vector<double>> start_vector(const RmpModel& ilp, const std::vector<Configuration>& chosen) {
  const ProblemInstance& inst = ilp.instance();
  const Topology& t = inst.topology();
  const auto& cis = ilp.chain_instances();
  if (chosen.size() != cis.size()) return std::nullopt;
  std::vector<double> x(ilp.lp().num_variables(), 0.0);
  std::map<Configuration, int> index;
  for (std::size_t k = 0; k < ilp.pool().size(); ++k) index[ilp.pool()[k]] = static_cast<int>(k);
  std::vector<char> vf(static_cast<std::size_t>(t.node_count()) * inst.vnfs().size(), 0);
  for (const Configuration& c : chosen) {
    auto it = index.find(c);
    if (it == index.end()) return std::nullopt;
    x[ilp.z_var(it->second)] = 1.0;
    const auto& fs = inst.chain_vnfs(cis[c.instance].chain);
    for (std::size_t i = 0; i < c.locations.size(); ++i) {
      vf[c.locations[i] * inst.vnfs().size() + fs[i]] = 1;
      if (ilp.form() == RmpForm::full) x[ilp.x_position_var(c.instance, static_cast<int>(i), c.locations[i])] = 1.0;
    }
    if (ilp.form() == RmpForm::full) {
      const ChainInstance& ci = cis[c.instance];
      for (std::size_t p = 0; p < ci.pairs.size(); ++p) {
        for (ArcIndex a : ilp.paths().arcs(t, ci.pairs[p].src, c.locations.front()))
          x[ilp.y_first_var(c.instance, static_cast<int>(p), a)] = 1.0;
        for (ArcIndex a : ilp.paths().arcs(t, c.locations.back(), ci.pairs[p].dst))
          x[ilp.y_last_var(c.instance, static_cast<int>(p), a)] = 1.0;
      }
    }
  }
  for (NodeIndex v = 0; v < t.node_count(); ++v) {
    if (!t.node(v).nfv) continue;
    bool any = false;
    for (std::size_t f = 0; f < inst.vnfs().size(); ++f) {
      if (vf[v * inst.vnfs().size() + f]) {
        x[ilp.x_vf_var(v, static_cast<int>(f))] = 1.0;
        any = true;
      }
    }
    if (any) x[ilp.h_var(v)] = 1.0;
  }
  return x;
}

// Follows unit arc flows from `from` until `to`; smallest arc index on ties.
inline std::vector<NodeIndex> follow_flow(const Topology& t, NodeIndex from, NodeIndex to,
                                          const std::function<double(ArcIndex)>& flow) {
  std::vector<NodeIndex> nodes{from};
  std::vector<char> seen(t.node_count(), 0);
  seen[from] = 1;
  NodeIndex u = from;
  while (u != to) {
    ArcIndex next = -1;
    for (ArcIndex a : t.out_arcs(u))
      if (flow(a) > 0.5 && !seen[t.arc(a).dst]) {
        next = a;
        break;
      }
    if (next < 0) break;
    u = t.arc(next).dst;
    seen[u] = 1;
    nodes.push_back(u);
  }
  return nodes;
}

inline MappingPlan decode_plan(const RmpModel& ilp, const std::vector<double>& values) {
  const ProblemInstance& inst = ilp.instance();
  const Topology& t = inst.topology();
  const auto& cis = ilp.chain_instances();
  MappingPlan plan;
  std::vector<int> chosen(cis.size(), -1);
  for (std::size_t k = 0; k < ilp.pool().size(); ++k)
    if (values[ilp.z_var(static_cast<int>(k))] > 0.5) chosen[ilp.pool()[k].instance] = static_cast<int>(k);
  for (int q = 0; q < static_cast<int>(cis.size()); ++q) {
    if (chosen[q] < 0) throw ModelError("final solution selects no configuration for instance " + std::to_string(q));
    const Configuration& c = ilp.pool()[chosen[q]];
    PlannedInstance pi{cis[q].chain, cis[q].group, c.locations, {}, cis[q].pairs};
    for (std::size_t i = 0; i < c.segments.size(); ++i) {
      auto nodes = path_nodes(t, c.segments[i]);
      if (nodes.empty()) nodes = {c.locations[i]};
      pi.segments.push_back(std::move(nodes));
    }
    plan.instances.push_back(std::move(pi));
    for (std::size_t p = 0; p < cis[q].pairs.size(); ++p) {
      const DemandPair dp = cis[q].pairs[p];
      PlannedRoute r{cis[q].chain, dp.src, dp.dst, q, cis[q].pair_demand[p], {}, {}};
      if (ilp.form() == RmpForm::projected) {
        r.first = ilp.paths().nodes(dp.src, c.locations.front());
        r.last = ilp.paths().nodes(c.locations.back(), dp.dst);
      } else {
        const int pi_ = static_cast<int>(p);
        r.first = follow_flow(t, dp.src, c.locations.front(),
                              [&](ArcIndex a) { return values[ilp.y_first_var(q, pi_, a)]; });
        r.last = follow_flow(t, c.locations.back(), dp.dst,
                             [&](ArcIndex a) { return values[ilp.y_last_var(q, pi_, a)]; });
      }
      plan.routes.push_back(std::move(r));
    }
  }
  std::sort(plan.routes.begin(), plan.routes.end(), [](const PlannedRoute& a, const PlannedRoute& b) {
    return std::tie(a.chain, a.src, a.dst) < std::tie(b.chain, b.src, b.dst);
  });
  finalize_loads(inst, plan);
  return plan;
}

}  // namespace engine_detail

/// Final integer solve over the generated pool and plan decoding.
inline ExtractResult extract_plan(const RmpModel& model, const CgResult& cg, const ExtractOptions& opt = {},
                                  const std::vector<Configuration>& start = {}) {
  ExtractResult out;
  const ProblemInstance& inst = model.instance();
  std::vector<FinalMode> attempts;
  switch (opt.mode) {
    case FinalModeChoice::full: attempts = {FinalMode::full}; break;
    case FinalModeChoice::fast: attempts = {FinalMode::uncapacitated_fast}; break;
    case FinalModeChoice::automatic:
      attempts = {FinalMode::uncapacitated_fast, FinalMode::full};
      break;
  }
  for (std::size_t t = 0; t < attempts.size(); ++t) {
    const FinalMode mode = attempts[t];
    const bool more = t + 1 < attempts.size();
    std::optional<RmpModel> ilp;
    try {
      const bool check = model.form() == RmpForm::full || !capacities_ample(inst);
      ilp.emplace(build_final_ilp(model, mode, check ? &cg.last.solution : nullptr));
    } catch (const ModelError& e) {
      out.diagnostics.push_back(e.what());
      if (more) continue;
      return out;
    }
    lp::MipOptions mo;
    mo.time_limit_s = opt.mip_time_limit_s;
    mo.node_limit = opt.mip_node_limit;
    mo.simplex = opt.simplex;
    if (!start.empty()) mo.start = engine_detail::start_vector(*ilp, start);
    out.mip = lp::solve_mip(ilp->lp(), mo);
    if (out.mip.status == lp::MipStatus::infeasible || out.mip.status == lp::MipStatus::no_solution) {
      std::string why = std::string("final integer model ") + lp::to_string(out.mip.status);
      for (const auto& name : out.mip.infeasibilities) why += "; binding: " + name;
      out.diagnostics.push_back(why);
      return out;
    }
    MappingPlan plan = engine_detail::decode_plan(*ilp, out.mip.values);
    plan.final_mode = mode == FinalMode::full ? "full" : "fast";
    const ValidationReport rep = validate_plan(inst, plan);
    if (!rep.ok()) {
      for (const Violation& v : rep.violations) out.diagnostics.push_back(v.kind + ": " + v.detail);
      if (more && mode == FinalMode::uncapacitated_fast) continue;
      return out;
    }
    plan.lp_bound = cg.lp_bound;
    plan.cg_converged = cg.converged;
    plan.mip_gap = out.mip.gap;
    plan.gap = std::max(0.0, (plan.objective - cg.lp_bound) / std::max(1.0, std::abs(plan.objective)));
    if (plan.gap < 1e-12) plan.gap = 0.0;
    plan.status = out.mip.status == lp::MipStatus::optimal && cg.converged ? "optimal" : "feasible";
    out.plan = std::move(plan);
    out.feasible = true;
    return out;
  }
  return out;
}

struct SolveOptions {
  CgLimits cg;
  ExtractOptions extract;
  std::optional<RmpForm> form;  // default: projected when capacities are ample
  bool host_heuristic = true;
};

struct SolveResult {
  bool feasible = false;
  MappingPlan plan;
  std::vector<ChainPartition> partitions;
  CgResult cg;
  RmpForm form = RmpForm::projected;
  std::vector<std::string> diagnostics;
  double wall_ms = 0.0;
};

inline SolveResult solve(const ProblemInstance& inst, const SolveOptions& opt = {}) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  SolveResult out;
  const PathTable paths = all_pairs_hops(inst.topology());
  out.partitions = partition_all(inst, paths);
  out.form = opt.form ? *opt.form : (capacities_ample(inst) ? RmpForm::projected : RmpForm::full);
  RmpModel model(inst, out.partitions, out.form);
  seed_model(model, seed_pool(inst, out.partitions, paths));
  std::vector<Configuration> start;
  if (opt.host_heuristic) {
    HostSelection hs = select_hosts(inst, model.chain_instances(), paths, inst.k());
    for (const Configuration& c : hs.configs) model.add_column(c);
    start = std::move(hs.configs);
  }
  out.cg = run_column_generation(model, opt.cg);
  auto finish = [&]() {
    out.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return out;
  };
  if (out.cg.failed) {
    out.diagnostics.push_back(out.cg.failure);
    return finish();
  }
  if (!out.cg.last.overflowing.empty()) {
    for (const auto& label : out.cg.last.overflowing) out.diagnostics.push_back("infeasible: " + label + " cannot be met");
    return finish();
  }
  ExtractResult ex = extract_plan(model, out.cg, opt.extract, start);
  out.diagnostics.insert(out.diagnostics.end(), ex.diagnostics.begin(), ex.diagnostics.end());
  out.feasible = ex.feasible;
  if (ex.feasible) out.plan = std::move(ex.plan);
  return finish();
}

}  // namespace scmap
