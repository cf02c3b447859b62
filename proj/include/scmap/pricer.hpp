#pragma once

// Pricing for one chain instance: the minimum reduced-cost configuration
// under a dual snapshot, via a layered shortest path over NFV nodes.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "scmap/master.hpp"
#include "scmap/pathcore.hpp"

namespace scmap {

inline constexpr double kPricingEpsilon = 1e-6;

struct ReducedCostBreakdown {
  double raw_cost = 0.0;
  double convexity_term = 0.0;
  double node_terms = 0.0;
  double arc_terms = 0.0;
  double total = 0.0;
};

struct PricedColumn {
  Configuration config;
  ReducedCostBreakdown breakdown;
};

/// Arc weights 1 - capacity dual and the all-pairs distances under them.
/// One instance serves every chain instance of a pricing round; a group's
/// transition cost is its demand times these distances.
class DualArcMetric {
 public:
  DualArcMetric(const Topology& topo, const DualPrices& duals) : topo_(&topo), n_(topo.node_count()) {
    weights_.weight.resize(topo.arc_count());
    for (ArcIndex a = 0; a < topo.arc_count(); ++a)
      weights_.weight[a] = std::max(0.0, 1.0 - (a < static_cast<int>(duals.capacity.size()) ? duals.capacity[a] : 0.0));
    dist_.resize(static_cast<std::size_t>(n_) * n_);
    for (NodeIndex u = 0; u < n_; ++u) {
      const auto d = shortest_distances_from(topo, weights_, u);
      std::copy(d.begin(), d.end(), dist_.begin() + static_cast<std::ptrdiff_t>(u) * n_);
    }
  }

  double dist(NodeIndex u, NodeIndex w) const { return dist_[static_cast<std::size_t>(u) * n_ + w]; }
  const ArcWeighting& weights() const { return weights_; }
  std::vector<ArcIndex> path(NodeIndex u, NodeIndex w) const {
    return shortest_path_weighted(*topo_, weights_, u, w).arcs;
  }

 private:
  const Topology* topo_;
  int n_;
  ArcWeighting weights_;
  std::vector<double> dist_;
};

/// Reduced cost of `cfg` for instance q, split into its additive parts.
inline ReducedCostBreakdown reduced_cost_breakdown(const ProblemInstance& instance, const ChainInstance& ci, int q,
                                                   const Configuration& cfg, const DualPrices& duals) {
  const int n = instance.topology().node_count();
  const auto& fs = instance.chain_vnfs(ci.chain);
  ReducedCostBreakdown b;
  b.raw_cost = configuration_cost(ci, cfg);
  b.convexity_term = duals.convexity.at(q);
  for (std::size_t i = 0; i < cfg.locations.size(); ++i) {
    const NodeIndex v = cfg.locations[i];
    b.node_terms += duals.core.at(v) * ci.demand * instance.vnfs()[fs[i]].cores_per_gbps +
                    duals.consistency.at(q).at(i * n + v);
  }
  for (const auto& seg : cfg.segments)
    for (ArcIndex a : seg) b.arc_terms += duals.capacity.at(a) * ci.demand;
  b.total = b.raw_cost - b.convexity_term - b.node_terms - b.arc_terms;
  return b;
}

/// Exact minimiser of the reduced cost regardless of sign.
inline PricedColumn price_min(const ProblemInstance& instance, const ChainInstance& ci, int q,
                              const DualPrices& duals, const DualArcMetric& metric) {
  const Topology& topo = instance.topology();
  const int n = topo.node_count();
  const auto& fs = instance.chain_vnfs(ci.chain);
  const int len = static_cast<int>(fs.size());
  const std::vector<NodeIndex> nfv = topo.nfv_nodes();
  const int m = static_cast<int>(nfv.size());
  const double inf = std::numeric_limits<double>::infinity();

  auto node_cost = [&](int i, NodeIndex v) {
    return -(duals.core[v] * ci.demand * instance.vnfs()[fs[i]].cores_per_gbps + duals.consistency[q][i * n + v]);
  };

  std::vector<double> val(static_cast<std::size_t>(len) * m, inf);
  std::vector<int> from(val.size(), -1);
  for (int a = 0; a < m; ++a) val[a] = node_cost(0, nfv[a]);
  for (int i = 1; i < len; ++i) {
    for (int b = 0; b < m; ++b) {
      double best = inf;
      int arg = -1;
      for (int a = 0; a < m; ++a) {
        const double c = val[(i - 1) * m + a] + ci.demand * metric.dist(nfv[a], nfv[b]);
        if (arg < 0 || c < best - 1e-12 * (1.0 + std::abs(best))) {
          best = c;
          arg = a;
        }
      }
      val[i * m + b] = best + node_cost(i, nfv[b]);
      from[i * m + b] = arg;
    }
  }
  int end = 0;
  for (int b = 1; b < m; ++b)
    if (val[(len - 1) * m + b] < val[(len - 1) * m + end] - 1e-12 * (1.0 + std::abs(val[(len - 1) * m + end])))
      end = b;

  Configuration cfg;
  cfg.instance = q;
  cfg.locations.assign(len, -1);
  int cur = end;
  for (int i = len - 1; i >= 0; --i) {
    cfg.locations[i] = nfv[cur];
    if (i > 0) cur = from[i * m + cur];
  }
  for (int i = 0; i + 1 < len; ++i) cfg.segments.push_back(metric.path(cfg.locations[i], cfg.locations[i + 1]));
  PricedColumn out{std::move(cfg), {}};
  out.breakdown = reduced_cost_breakdown(instance, ci, q, out.config, duals);
  return out;
}

/// The improving column for chain instance q, or none when its reduced cost is >= -epsilon.
inline std::optional<PricedColumn> price_chain_instance(const ProblemInstance& instance, const ChainInstance& ci,
                                                        int q, const DualPrices& duals,
                                                        const DualArcMetric& metric) {
  PricedColumn best = price_min(instance, ci, q, duals, metric);
  if (best.breakdown.total < -kPricingEpsilon) return best;
  return std::nullopt;
}

inline std::optional<PricedColumn> price_chain_instance(const ProblemInstance& instance, const ChainInstance& ci,
                                                        int q, const DualPrices& duals) {
  return price_chain_instance(instance, ci, q, duals, DualArcMetric(instance.topology(), duals));
}

/// Every configuration whose segments are simple paths (test oracle, tiny instances only).
inline std::vector<Configuration> enumerate_all_configs(const ProblemInstance& instance, const ChainInstance& ci, int q,
                                                        int max_nodes = 7) {
  const Topology& topo = instance.topology();
  const int len = instance.chain_length(ci.chain);
  if (topo.node_count() > std::min(max_nodes, 7) || len > 3)
    throw ModelError("enumerate_all_configs is limited to 7 nodes and chains of length 3");
  const int n = topo.node_count();

  // All simple arc paths between each ordered node pair.
  std::vector<std::vector<std::vector<ArcIndex>>> simple(static_cast<std::size_t>(n) * n);
  std::vector<char> on(n, 0);
  std::vector<ArcIndex> stack;
  std::function<void(NodeIndex, NodeIndex)> dfs = [&](NodeIndex root, NodeIndex u) {
    for (ArcIndex a : topo.out_arcs(u)) {
      const NodeIndex w = topo.arc(a).dst;
      if (on[w]) continue;
      stack.push_back(a);
      simple[static_cast<std::size_t>(root) * n + w].push_back(stack);
      on[w] = 1;
      dfs(root, w);
      on[w] = 0;
      stack.pop_back();
    }
  };
  for (NodeIndex u = 0; u < n; ++u) {
    on[u] = 1;
    dfs(u, u);
    on[u] = 0;
  }

  const auto nfv = topo.nfv_nodes();
  std::vector<Configuration> out;
  Configuration cur;
  cur.instance = q;
  std::function<void(int)> place = [&](int i) {
    if (i == len) {
      std::function<void(int)> route = [&](int s) {
        if (s + 1 == len) {
          out.push_back(cur);
          return;
        }
        const NodeIndex a = cur.locations[s], b = cur.locations[s + 1];
        if (a == b) {
          cur.segments.push_back({});
          route(s + 1);
          cur.segments.pop_back();
          return;
        }
        for (const auto& p : simple[static_cast<std::size_t>(a) * n + b]) {
          cur.segments.push_back(p);
          route(s + 1);
          cur.segments.pop_back();
        }
      };
      route(0);
      return;
    }
    for (NodeIndex v : nfv) {
      cur.locations.push_back(v);
      place(i + 1);
      cur.locations.pop_back();
    }
  };
  place(0);
  return out;
}

}  // namespace scmap
