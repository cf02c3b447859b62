#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "test_support.hpp"

using namespace scmap;
using namespace testsupport;

namespace {

// Minimum weight over every simple src->dst path.
double brute_force(const Topology& t, const ArcWeighting& w, NodeIndex src, NodeIndex dst) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<char> on(t.node_count(), 0);
  std::function<void(NodeIndex, double)> dfs = [&](NodeIndex u, double c) {
    if (c >= best) return;
    if (u == dst) {
      best = c;
      return;
    }
    for (ArcIndex a : t.out_arcs(u)) {
      const NodeIndex x = t.arc(a).dst;
      if (on[x]) continue;
      on[x] = 1;
      dfs(x, c + w.weight[a]);
      on[x] = 0;
    }
  };
  on[src] = 1;
  dfs(src, 0.0);
  return best;
}

}  // namespace

TEST(PathCore, TriangleDistances) {
  const Topology t = triangle().topology();
  const PathTable p = all_pairs_hops(t);
  for (NodeIndex u = 0; u < 3; ++u)
    for (NodeIndex v = 0; v < 3; ++v) EXPECT_EQ(p.dist(u, v), u == v ? 0 : 1);
}

TEST(PathCore, PathGraphDistance) {
  const Topology t = load_fixture("path5.json", "chain1.json", "path5_single.csv", 1).topology();
  const PathTable p = all_pairs_hops(t);
  EXPECT_EQ(p.dist(t.node_index("a"), t.node_index("e")), 4);
  EXPECT_EQ(p.nodes(0, 4), (std::vector<NodeIndex>{0, 1, 2, 3, 4}));
}

TEST(PathCore, NsfnetHopSumFrozen) {
  const ProblemInstance inst = nsfnet(1, "1");
  const PathTable p = all_pairs_hops(inst.topology());
  const auto fw = floyd_hops(inst.topology());
  int sum = 0, fw_sum = 0;
  for (const Demand& d : inst.demands()) {
    sum += p.dist(d.src, d.dst);
    fw_sum += fw[d.src][d.dst];
  }
  EXPECT_EQ(sum, fw_sum);
  EXPECT_EQ(sum, 390);
}

TEST(PathCore, TableInvariantsOnRandomGraphs) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    const Topology t = make_topology(n, random_connected_edges(rng, n, 0.2));
    const PathTable p = all_pairs_hops(t);
    const auto fw = floyd_hops(t);
    for (NodeIndex u = 0; u < n; ++u)
      for (NodeIndex w = 0; w < n; ++w) {
        ASSERT_EQ(p.dist(u, w), fw[u][w]);
        const auto arcs = p.arcs(t, u, w);
        ASSERT_EQ(static_cast<int>(arcs.size()), p.dist(u, w));
        if (!arcs.empty()) EXPECT_EQ(path_nodes(t, arcs), p.nodes(u, w));
        for (NodeIndex v = 0; v < n; ++v) EXPECT_LE(p.dist(u, w), p.dist(u, v) + p.dist(v, w));
      }
  }
}

TEST(PathCore, CanonicalPathIsLexicographicallySmallest) {
  // Square 0-1-3, 0-2-3: both are shortest, the tie goes to the smaller id.
  const Topology t = make_topology(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  const PathTable p = all_pairs_hops(t);
  EXPECT_EQ(p.nodes(0, 3), (std::vector<NodeIndex>{0, 1, 3}));
  EXPECT_EQ(p.nodes(3, 0), (std::vector<NodeIndex>{3, 1, 0}));
  EXPECT_EQ(p.nodes(1, 2), (std::vector<NodeIndex>{1, 0, 2}));
}

TEST(PathCore, WeightedMatchesBruteForceOnThousandQueries) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> wdist(0.0, 5.0);
  int queries = 0;
  while (queries < 1000) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    const Topology t = make_topology(n, random_connected_edges(rng, n, n > 8 ? 0.12 : 0.3));
    ArcWeighting w;
    for (int a = 0; a < t.arc_count(); ++a) w.weight.push_back(std::round(wdist(rng) * 4.0) / 4.0);
    for (int rep = 0; rep < 20 && queries < 1000; ++rep, ++queries) {
      const NodeIndex s = std::uniform_int_distribution<int>(0, n - 1)(rng);
      const NodeIndex d = std::uniform_int_distribution<int>(0, n - 1)(rng);
      const WeightedPath got = shortest_path_weighted(t, w, s, d);
      double sum = 0.0;
      for (ArcIndex a : got.arcs) sum += w.weight[a];
      ASSERT_NEAR(got.cost, sum, 1e-9);
      ASSERT_NEAR(got.cost, s == d ? 0.0 : brute_force(t, w, s, d), 1e-9) << "n=" << n << " s=" << s << " d=" << d;
      if (!got.arcs.empty()) {
        const auto nodes = path_nodes(t, got.arcs);
        EXPECT_EQ(nodes.front(), s);
        EXPECT_EQ(nodes.back(), d);
      }
    }
  }
}

TEST(PathCore, UnitWeightsReproduceHopPaths) {
  const ProblemInstance inst = nsfnet(1, "1");
  const Topology& t = inst.topology();
  const PathTable p = all_pairs_hops(t);
  const ArcWeighting w = ArcWeighting::uniform(t, 1.0);
  for (NodeIndex u = 0; u < t.node_count(); ++u)
    for (NodeIndex v = 0; v < t.node_count(); ++v) {
      const WeightedPath got = shortest_path_weighted(t, w, u, v);
      EXPECT_EQ(got.arcs, p.arcs(t, u, v));
      EXPECT_DOUBLE_EQ(got.cost, p.dist(u, v));
    }
}

TEST(PathCore, DetourAroundHeavyArc) {
  // 0-1-3 is the unique hop-shortest path; 0-2-4-3 is the alternative.
  const Topology t = make_topology(5, {{0, 1}, {1, 3}, {0, 2}, {2, 4}, {4, 3}});
  ArcWeighting w = ArcWeighting::uniform(t, 1.0);
  w.weight[*t.find_arc(1, 3)] = 10.0;
  const WeightedPath got = shortest_path_weighted(t, w, 0, 3);
  EXPECT_EQ(path_nodes(t, got.arcs), (std::vector<NodeIndex>{0, 2, 4, 3}));
  EXPECT_DOUBLE_EQ(got.cost, 3.0);
  EXPECT_DOUBLE_EQ(got.cost, brute_force(t, w, 0, 3));
}

TEST(PathCore, SourceEqualsDestination) {
  const Topology t = triangle().topology();
  const WeightedPath got = shortest_path_weighted(t, ArcWeighting::uniform(t, 2.0), 1, 1);
  EXPECT_TRUE(got.arcs.empty());
  EXPECT_EQ(got.cost, 0.0);
}

TEST(PathCore, Determinism) {
  std::mt19937 rng(9);
  const Topology t = make_topology(10, random_connected_edges(rng, 10, 0.4));
  ArcWeighting w = ArcWeighting::uniform(t, 1.0);
  for (int a = 0; a < t.arc_count(); a += 3) w.weight[a] = 0.5;
  for (NodeIndex u = 0; u < 10; ++u)
    for (NodeIndex v = 0; v < 10; ++v) {
      const auto first = shortest_path_weighted(t, w, u, v).arcs;
      for (int rep = 0; rep < 3; ++rep) EXPECT_EQ(shortest_path_weighted(t, w, u, v).arcs, first);
    }
  EXPECT_EQ(all_pairs_hops(t).nodes(0, 9), all_pairs_hops(t).nodes(0, 9));
}

TEST(PathCore, InvalidWeightsRejected) {
  const Topology t = triangle().topology();
  ArcWeighting w = ArcWeighting::uniform(t, 1.0);
  w.weight[2] = -1.0;
  EXPECT_THROW(shortest_path_weighted(t, w, 0, 1), ModelError);
  w.weight[2] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(shortest_path_weighted(t, w, 0, 1), ModelError);
  EXPECT_THROW(shortest_path_weighted(t, ArcWeighting{{1.0}}, 0, 1), ModelError);
}

TEST(PathCore, PathNodes) {
  const Topology t = make_topology(4, {{0, 1}, {1, 2}, {2, 3}});
  const ArcIndex ab = *t.find_arc(0, 1), bc = *t.find_arc(1, 2), cd = *t.find_arc(2, 3);
  EXPECT_EQ(path_nodes(t, std::vector<ArcIndex>{ab, bc}), (std::vector<NodeIndex>{0, 1, 2}));
  EXPECT_TRUE(path_nodes(t, std::vector<ArcIndex>{}).empty());
  EXPECT_THROW(path_nodes(t, std::vector<ArcIndex>{ab, cd}), ModelError);
}
