#pragma once

// Closed-form reference values computed from hop distances only.

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "scmap/engine.hpp"
#include "scmap/netmodel.hpp"
#include "scmap/pathcore.hpp"

namespace scmap {

/// Sum over demands of gbps times hop distance.
inline double shortest_path_lb(const ProblemInstance& inst, const PathTable& paths) {
  double s = 0.0;
  for (const Demand& d : inst.demands()) s += d.gbps * paths.dist(d.src, d.dst);
  return s;
}

inline double shortest_path_lb(const ProblemInstance& inst) {
  return shortest_path_lb(inst, all_pairs_hops(inst.topology()));
}

struct SingleNodeResult {
  NodeIndex node = -1;
  double objective = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

/// Best NFV node to host every chain in full; capacity and cores are
/// verified on the hop-shortest routing, and infeasible candidates skipped.
inline SingleNodeResult single_node_oracle(const ProblemInstance& inst, const PathTable& paths) {
  const Topology& t = inst.topology();
  std::vector<std::pair<double, NodeIndex>> ranked;
  double cores_needed = 0.0;
  for (const Demand& d : inst.demands())
    for (int f : inst.chain_vnfs(d.chain)) cores_needed += d.gbps * inst.vnfs()[f].cores_per_gbps;
  for (NodeIndex v : t.nfv_nodes()) {
    double c = 0.0;
    for (const Demand& d : inst.demands()) c += d.gbps * (paths.dist(d.src, v) + paths.dist(v, d.dst));
    ranked.emplace_back(c, v);
  }
  std::sort(ranked.begin(), ranked.end());
  for (const auto& [cost, v] : ranked) {
    if (cores_needed > t.node(v).cores + 1e-7 * (1.0 + t.node(v).cores)) continue;
    std::vector<double> load(t.arc_count(), 0.0);
    for (const Demand& d : inst.demands()) {
      for (ArcIndex a : paths.arcs(t, d.src, v)) load[a] += d.gbps;
      for (ArcIndex a : paths.arcs(t, v, d.dst)) load[a] += d.gbps;
    }
    bool ok = true;
    for (ArcIndex a = 0; a < t.arc_count(); ++a)
      if (load[a] > t.arc(a).capacity_gbps + 1e-7 * (1.0 + t.arc(a).capacity_gbps)) ok = false;
    if (ok) return {v, cost, true};
  }
  return {};
}

inline SingleNodeResult single_node_oracle(const ProblemInstance& inst) {
  return single_node_oracle(inst, all_pairs_hops(inst.topology()));
}

struct PerPairResult {
  double objective = 0.0;
  bool via_engine = false;  // preconditions failed, value came from a full solve
  bool feasible = true;
};

/// One chain instance per demand pair. With every node NFV and ample
/// capacity, each pair hosts its chain at its source and the value is the
/// shortest-path bound; otherwise the engine is run with that setting.
inline PerPairResult per_pair_instance_ub(const ProblemInstance& inst, const PathTable& paths) {
  const Topology& t = inst.topology();
  bool all_nfv = true;
  for (const NodeSpec& n : t.nodes()) all_nfv = all_nfv && n.nfv;
  bool cores_ok = true;
  {
    std::vector<double> per_node(t.node_count(), 0.0);
    for (const Demand& d : inst.demands())
      for (int f : inst.chain_vnfs(d.chain)) per_node[d.src] += d.gbps * inst.vnfs()[f].cores_per_gbps;
    for (NodeIndex v = 0; v < t.node_count(); ++v)
      if (per_node[v] > t.node(v).cores + 1e-7 * (1.0 + t.node(v).cores)) cores_ok = false;
  }
  if (all_nfv && cores_ok && capacities_ample(inst)) return {shortest_path_lb(inst, paths), false, true};

  NcSpec nc;
  nc.uniform = static_cast<int>(inst.demands().size());
  const int k = static_cast<int>(t.nfv_nodes().size());
  const ProblemInstance per_pair = inst.with_parameters(k, nc);
  const SolveResult r = solve(per_pair);
  return {r.feasible ? r.plan.objective : std::numeric_limits<double>::infinity(), true, r.feasible};
}

inline PerPairResult per_pair_instance_ub(const ProblemInstance& inst) {
  return per_pair_instance_ub(inst, all_pairs_hops(inst.topology()));
}

struct BaselineReport {
  double shortest_path_lb = 0.0;
  std::string single_node_id;
  double single_node_objective = std::numeric_limits<double>::infinity();
  bool single_node_feasible = false;
  double per_pair = 0.0;
  bool per_pair_via_engine = false;
};

inline BaselineReport compute_baselines(const ProblemInstance& inst) {
  const PathTable paths = all_pairs_hops(inst.topology());
  BaselineReport r;
  r.shortest_path_lb = shortest_path_lb(inst, paths);
  const SingleNodeResult sn = single_node_oracle(inst, paths);
  r.single_node_feasible = sn.feasible;
  if (sn.feasible) {
    r.single_node_id = inst.topology().node(sn.node).id;
    r.single_node_objective = sn.objective;
  }
  const PerPairResult pp = per_pair_instance_ub(inst, paths);
  r.per_pair = pp.objective;
  r.per_pair_via_engine = pp.via_engine;
  return r;
}

}  // namespace scmap
