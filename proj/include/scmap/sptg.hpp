#pragma once

// Shortest-path traffic grouping: split each chain's demand pairs into at
// most N_c groups that will each share one chain instance.

#include <algorithm>
#include <map>
#include <span>
#include <vector>

#include "json.hpp"
#include "scmap/netmodel.hpp"
#include "scmap/pathcore.hpp"

namespace scmap {

struct Group {
  DemandPair anchor;
  std::vector<DemandPair> members;  // sorted

  bool operator==(const Group&) const = default;
};

struct ChainPartition {
  int chain = 0;
  std::vector<Group> groups;

  bool operator==(const ChainPartition&) const = default;
};

namespace sptg_detail {

// Position of every node on a pair's canonical shortest path (-1 if absent).
class PathPositions {
 public:
  PathPositions(const PathTable& paths, std::span<const DemandPair> pairs) : n_(paths.size()) {
    for (const DemandPair& p : pairs) {
      auto& pos = table_[p];
      pos.assign(n_, -1);
      const auto nodes = paths.nodes(p.src, p.dst);
      for (std::size_t i = 0; i < nodes.size(); ++i) pos[nodes[i]] = static_cast<int>(i);
    }
  }

  // True when the canonical path of `pair` visits u and later (or at) w.
  bool visits_in_order(DemandPair pair, NodeIndex u, NodeIndex w) const {
    const auto& pos = table_.at(pair);
    return pos[u] >= 0 && pos[w] >= 0 && pos[u] <= pos[w];
  }

 private:
  int n_;
  std::map<DemandPair, std::vector<int>> table_;
};

inline std::vector<DemandPair> cluster(const PathPositions& pos, DemandPair anchor,
                                       std::span<const DemandPair> remaining) {
  std::vector<DemandPair> out;
  for (const DemandPair& p : remaining)
    if (p == anchor || pos.visits_in_order(p, anchor.src, anchor.dst)) out.push_back(p);
  return out;
}

inline int via_anchor(const PathTable& paths, DemandPair pair, DemandPair anchor) {
  return paths.dist(pair.src, anchor.src) + paths.dist(anchor.src, anchor.dst) +
         paths.dist(anchor.dst, pair.dst);
}

inline void erase_members(std::vector<DemandPair>& from, const std::vector<DemandPair>& gone) {
  std::erase_if(from, [&](const DemandPair& p) { return std::binary_search(gone.begin(), gone.end(), p); });
}

// Largest cluster over the candidate anchors; ties keep the smallest anchor.
inline std::pair<DemandPair, std::vector<DemandPair>> largest_cluster(
    const PathPositions& pos, std::span<const DemandPair> anchors, std::span<const DemandPair> remaining) {
  std::pair<DemandPair, std::vector<DemandPair>> best;
  bool found = false;
  for (const DemandPair& a : anchors) {
    auto c = cluster(pos, a, remaining);
    if (!found || c.size() > best.second.size()) {
      best = {a, std::move(c)};
      found = true;
    }
  }
  return best;
}

}  // namespace sptg_detail

/// Demand pairs from `remaining` whose canonical shortest path visits
/// anchor.src and then anchor.dst. The anchor itself is always included
/// when present in `remaining`.
inline std::vector<DemandPair> cluster_of(DemandPair anchor, std::span<const DemandPair> remaining,
                                          const PathTable& paths) {
  std::vector<DemandPair> all(remaining.begin(), remaining.end());
  all.push_back(anchor);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  sptg_detail::PathPositions pos(paths, all);
  return sptg_detail::cluster(pos, anchor, remaining);
}

inline ChainPartition partition_chain(const ProblemInstance& instance, int chain, const PathTable& paths) {
  using namespace sptg_detail;
  const std::vector<DemandPair> pairs = instance.demand_pairs(chain);
  ChainPartition part{chain, {}};
  if (pairs.empty()) return part;
  const std::size_t target = std::min<std::size_t>(instance.nc(chain), pairs.size());
  PathPositions pos(paths, pairs);

  std::vector<DemandPair> left = pairs;
  while (part.groups.size() < target && !left.empty()) {
    auto [anchor, members] = largest_cluster(pos, left, left);
    erase_members(left, members);
    part.groups.push_back({anchor, std::move(members)});
  }

  // Leftovers join the group whose anchor gives the shortest detour.
  for (const DemandPair& p : left) {
    std::size_t best = 0;
    for (std::size_t g = 1; g < part.groups.size(); ++g) {
      const int cur = via_anchor(paths, p, part.groups[g].anchor);
      const int inc = via_anchor(paths, p, part.groups[best].anchor);
      if (cur < inc || (cur == inc && part.groups[g].anchor < part.groups[best].anchor)) best = g;
    }
    auto& m = part.groups[best].members;
    m.insert(std::upper_bound(m.begin(), m.end(), p), p);
  }

  // Split the largest group until the target count is reached.
  while (part.groups.size() < target) {
    std::size_t g = 0;
    for (std::size_t i = 1; i < part.groups.size(); ++i)
      if (part.groups[i].members.size() > part.groups[g].members.size()) g = i;
    Group& big = part.groups[g];
    std::vector<DemandPair> others;
    for (const DemandPair& p : big.members)
      if (p != big.anchor) others.push_back(p);
    auto [anchor, members] = largest_cluster(pos, others, others);
    if (members.size() < 2) {
      // No internal affinity left: peel off the member with the largest detour.
      DemandPair worst = others.front();
      int worst_detour = -1;
      for (const DemandPair& p : others) {
        const int detour = via_anchor(paths, p, big.anchor) - paths.dist(p.src, p.dst);
        if (detour > worst_detour) {
          worst_detour = detour;
          worst = p;
        }
      }
      anchor = worst;
      members = {worst};
    }
    erase_members(big.members, members);
    part.groups.push_back({anchor, std::move(members)});
  }
  return part;
}

/// One partition per chain that has demand, in chain order.
inline std::vector<ChainPartition> partition_all(const ProblemInstance& instance, const PathTable& paths) {
  std::vector<ChainPartition> out;
  for (int c = 0; c < static_cast<int>(instance.chains().size()); ++c) {
    auto part = partition_chain(instance, c, paths);
    if (!part.groups.empty()) out.push_back(std::move(part));
  }
  return out;
}

inline std::vector<ChainPartition> partition_all(const ProblemInstance& instance) {
  return partition_all(instance, all_pairs_hops(instance.topology()));
}

inline nlohmann::json partition_to_json(const ProblemInstance& instance, const ChainPartition& part) {
  const Topology& t = instance.topology();
  auto pair_json = [&](DemandPair p) { return nlohmann::json::array({t.node(p.src).id, t.node(p.dst).id}); };
  nlohmann::json doc;
  doc["chain"] = instance.chains()[part.chain].id;
  doc["groups"] = nlohmann::json::array();
  for (const Group& g : part.groups) {
    nlohmann::json jg;
    jg["anchor"] = pair_json(g.anchor);
    jg["members"] = nlohmann::json::array();
    for (const DemandPair& p : g.members) jg["members"].push_back(pair_json(p));
    doc["groups"].push_back(std::move(jg));
  }
  return doc;
}

}  // namespace scmap
