#pragma once

// Hop-metric all-pairs shortest paths and weighted single-pair shortest paths.

#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "scmap/netmodel.hpp"

namespace scmap {

class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hop distances and canonical next hops for every ordered node pair.
///
/// The canonical path from u to w always steps to the smallest-index
/// neighbour that stays on some shortest path, which makes it the
/// lexicographically smallest shortest node sequence.
class PathTable {
 public:
  PathTable() = default;
  explicit PathTable(int n) : n_(n), dist_(static_cast<std::size_t>(n) * n, -1), next_(dist_.size(), -1) {}

  int size() const { return n_; }
  int dist(NodeIndex u, NodeIndex w) const { return dist_[idx(u, w)]; }
  NodeIndex next_hop(NodeIndex u, NodeIndex w) const { return next_[idx(u, w)]; }

  std::vector<NodeIndex> nodes(NodeIndex u, NodeIndex w) const {
    std::vector<NodeIndex> out{u};
    while (u != w) {
      u = next_hop(u, w);
      out.push_back(u);
    }
    return out;
  }

  std::vector<ArcIndex> arcs(const Topology& topo, NodeIndex u, NodeIndex w) const {
    std::vector<ArcIndex> out;
    while (u != w) {
      const NodeIndex x = next_hop(u, w);
      out.push_back(*topo.find_arc(u, x));
      u = x;
    }
    return out;
  }

  void set(NodeIndex u, NodeIndex w, int d, NodeIndex next) {
    dist_[idx(u, w)] = d;
    next_[idx(u, w)] = next;
  }

 private:
  std::size_t idx(NodeIndex u, NodeIndex w) const { return static_cast<std::size_t>(u) * n_ + w; }

  int n_ = 0;
  std::vector<int> dist_;
  std::vector<NodeIndex> next_;
};

inline PathTable all_pairs_hops(const Topology& topo) {
  const int n = topo.node_count();
  PathTable table(n);
  // BFS toward each target w over in-arcs gives dist(., w).
  std::vector<int> dist(n);
  for (NodeIndex w = 0; w < n; ++w) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<NodeIndex> q;
    dist[w] = 0;
    q.push(w);
    while (!q.empty()) {
      const NodeIndex v = q.front();
      q.pop();
      for (ArcIndex a : topo.in_arcs(v)) {
        const NodeIndex u = topo.arc(a).src;
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push(u);
        }
      }
    }
    for (NodeIndex u = 0; u < n; ++u) {
      NodeIndex next = u;
      if (u != w) {
        // out_arcs are sorted by destination index
        for (ArcIndex a : topo.out_arcs(u)) {
          const NodeIndex x = topo.arc(a).dst;
          if (dist[x] == dist[u] - 1) {
            next = x;
            break;
          }
        }
      }
      table.set(u, w, dist[u], next);
    }
  }
  return table;
}

/// Nonnegative per-arc weights, indexed by ArcIndex.
struct ArcWeighting {
  std::vector<double> weight;

  static ArcWeighting uniform(const Topology& topo, double w) {
    return {std::vector<double>(topo.arc_count(), w)};
  }
};

struct WeightedPath {
  std::vector<ArcIndex> arcs;
  double cost = 0.0;
};

namespace path_detail {

inline bool close(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) return a == b;
  return std::abs(a - b) <= 1e-12 * (1.0 + std::abs(a) + std::abs(b));
}

inline void check_weights(const Topology& topo, const ArcWeighting& w) {
  if (static_cast<int>(w.weight.size()) != topo.arc_count())
    throw ModelError("arc weighting size does not match topology");
  for (double x : w.weight)
    if (!(x >= 0.0) || !std::isfinite(x)) throw ModelError("arc weights must be finite and nonnegative");
}

// Dijkstra keyed on (cost, hops); reverse=true walks in-arcs toward `root`.
inline void dijkstra(const Topology& topo, const ArcWeighting& w, NodeIndex root, bool reverse,
                     std::vector<double>& cost, std::vector<int>& hops) {
  const int n = topo.node_count();
  cost.assign(n, std::numeric_limits<double>::infinity());
  hops.assign(n, std::numeric_limits<int>::max());
  using Entry = std::tuple<double, int, NodeIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  cost[root] = 0.0;
  hops[root] = 0;
  pq.emplace(0.0, 0, root);
  std::vector<char> done(n, 0);
  while (!pq.empty()) {
    auto [c, h, v] = pq.top();
    pq.pop();
    if (done[v]) continue;
    done[v] = 1;
    const auto& arcs = reverse ? topo.in_arcs(v) : topo.out_arcs(v);
    for (ArcIndex a : arcs) {
      const NodeIndex u = reverse ? topo.arc(a).src : topo.arc(a).dst;
      if (done[u]) continue;
      const double nc = c + w.weight[a];
      const int nh = h + 1;
      if ((nc < cost[u] && !close(nc, cost[u])) || (close(nc, cost[u]) && nh < hops[u])) {
        cost[u] = nc;
        hops[u] = nh;
        pq.emplace(nc, nh, u);
      }
    }
  }
}

}  // namespace path_detail

/// Weighted distances from `src` to every node (infinity when unreachable).
inline std::vector<double> shortest_distances_from(const Topology& topo, const ArcWeighting& weights,
                                                   NodeIndex src) {
  path_detail::check_weights(topo, weights);
  std::vector<double> cost;
  std::vector<int> hops;
  path_detail::dijkstra(topo, weights, src, false, cost, hops);
  return cost;
}

/// Minimum-weight path; among equal-cost paths the one with fewest hops,
/// then the lexicographically smallest node sequence.
inline WeightedPath shortest_path_weighted(const Topology& topo, const ArcWeighting& weights,
                                           NodeIndex src, NodeIndex dst) {
  path_detail::check_weights(topo, weights);
  WeightedPath out;
  if (src == dst) return out;
  std::vector<double> to_dst;
  std::vector<int> hops;
  path_detail::dijkstra(topo, weights, dst, true, to_dst, hops);
  if (!std::isfinite(to_dst[src]))
    throw UnreachableError("no path from " + topo.node(src).id + " to " + topo.node(dst).id);
  NodeIndex u = src;
  while (u != dst) {
    ArcIndex chosen = -1;
    for (ArcIndex a : topo.out_arcs(u)) {
      const NodeIndex x = topo.arc(a).dst;
      if (hops[x] == hops[u] - 1 && path_detail::close(weights.weight[a] + to_dst[x], to_dst[u])) {
        chosen = a;
        break;
      }
    }
    if (chosen < 0) {
      // Rounding broke the exact tie; take the best strictly-progressing arc.
      double best = std::numeric_limits<double>::infinity();
      for (ArcIndex a : topo.out_arcs(u)) {
        const NodeIndex x = topo.arc(a).dst;
        const double c = weights.weight[a] + to_dst[x];
        if (hops[x] < hops[u] && c < best) {
          best = c;
          chosen = a;
        }
      }
    }
    if (chosen < 0) throw UnreachableError("path reconstruction failed");
    out.arcs.push_back(chosen);
    out.cost += weights.weight[chosen];
    u = topo.arc(chosen).dst;
  }
  return out;
}

/// Node sequence visited by a contiguous arc path; empty path gives an empty list.
inline std::vector<NodeIndex> path_nodes(const Topology& topo, std::span<const ArcIndex> path) {
  std::vector<NodeIndex> out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path[i] < 0 || path[i] >= topo.arc_count()) throw ModelError("arc index out of range");
    const ArcSpec& a = topo.arc(path[i]);
    if (i == 0) {
      out.push_back(a.src);
    } else if (out.back() != a.src) {
      throw ModelError("non-contiguous arc path: " + topo.node(out.back()).id + " then " +
                       topo.arc_label(path[i]));
    }
    out.push_back(a.dst);
  }
  return out;
}

}  // namespace scmap
