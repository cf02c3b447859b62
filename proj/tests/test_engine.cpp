#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace scmap;
using namespace testsupport;

namespace {

ProblemInstance path_single(int k = 5, const std::string& chains = "chain3.json") {
  return load_fixture("path5.json", chains, "path5_single.csv", k);
}

// Ring of four with every ordered pair; 4 Gbps links bind once flows share arcs.
ProblemInstance ring(double cap, const std::string& nc, int k) {
  Topology t = make_topology(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, cap);
  std::vector<DemandRecord> recs;
  for (int s = 0; s < 4; ++s)
    for (int d = 0; d < 4; ++d)
      if (s != d) recs.push_back({node_name(s), node_name(d), "sc", 1.0});
  return ProblemInstance(t, simple_catalog(2), recs, k, NcSpec::parse(nc));
}

SolveResult solve_ok(const ProblemInstance& inst, const SolveOptions& opt = {}) {
  SolveResult r = solve(inst, opt);
  EXPECT_TRUE(r.feasible);
  if (r.feasible) {
    const ValidationReport rep = validate_plan(inst, r.plan);
    for (const Violation& v : rep.violations) ADD_FAILURE() << v.kind << ": " << v.detail;
    EXPECT_GE(r.plan.gap, 0.0);
    EXPECT_GE(r.plan.mip_gap, 0.0);
    EXPECT_GE(r.plan.objective, shortest_path_lb(inst) - 1e-6);
  }
  return r;
}

}  // namespace

TEST(Engine, SeedTriangleUsesFirstNode) {
  const ProblemInstance inst = triangle(3, "1", "chain3.json");
  const auto seeds = seed_pool(inst, partition_all(inst));
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(seeds[0].locations, (std::vector<NodeIndex>{0, 0, 0}));
  for (const auto& s : seeds[0].segments) EXPECT_TRUE(s.empty());
}

TEST(Engine, SeedStarPicksHub) {
  Topology star = make_topology(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}}, 100.0, {true, false, false, false, false});
  std::vector<DemandRecord> recs;
  for (int s = 1; s <= 4; ++s)
    for (int d = 1; d <= 4; ++d)
      if (s != d) recs.push_back({node_name(s), node_name(d), "sc", 1.0});
  const ProblemInstance inst(star, simple_catalog(2), recs, 1, {});
  const auto seeds = seed_pool(inst, partition_all(inst));
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(seeds[0].locations, (std::vector<NodeIndex>{0, 0}));
}

TEST(Engine, SeedPathFirstMedian) {
  // Every node on a-e has total 4; the tie goes to a.
  const ProblemInstance inst = path_single(5, "chain1.json");
  const auto seeds = seed_pool(inst, partition_all(inst));
  ASSERT_EQ(seeds.size(), 1u);
  EXPECT_EQ(seeds[0].locations, std::vector<NodeIndex>{0});
}

TEST(Engine, NoNfvNodeRejected) {
  Topology t = make_topology(2, {{0, 1}}, 10.0, {false, false});
  EXPECT_THROW(ProblemInstance(t, simple_catalog(1), {{"v00", "v01", "sc", 1.0}}, 1, {}), ValidationError);
}

TEST(Engine, SinglePairCollapsesOntoShortestPath) {
  const ProblemInstance inst = path_single();
  for (RmpForm form : {RmpForm::full, RmpForm::projected}) {
    const auto parts = partition_all(inst);
    RmpModel m = build_rmp(inst, parts, seed_pool(inst, parts), form);
    const CgResult cg = run_column_generation(m);
    EXPECT_TRUE(cg.converged);
    EXPECT_NEAR(cg.trace.back().objective, 4.0, 1e-9) << to_string(form);
    EXPECT_NEAR(cg.lp_bound, 4.0, 1e-9);
  }
  const SolveResult r = solve_ok(inst);
  EXPECT_NEAR(r.plan.objective, 4.0, 1e-9);
  EXPECT_EQ(r.plan.status, "optimal");
  EXPECT_EQ(r.plan.gap, 0.0);
}

TEST(Engine, TraceMonotoneAndFixedPoint) {
  for (const ProblemInstance& inst : {nsfnet(14, "4"), nsfnet(3, "8"), ring(4.0, "2", 4), ring(3.0, "4", 4)}) {
    const auto parts = partition_all(inst);
    const RmpForm form = capacities_ample(inst) ? RmpForm::projected : RmpForm::full;
    RmpModel m = build_rmp(inst, parts, seed_pool(inst, parts), form);
    const CgResult cg = run_column_generation(m);
    ASSERT_TRUE(cg.converged);
    for (std::size_t i = 1; i < cg.trace.size(); ++i)
      EXPECT_LE(cg.trace[i].objective, cg.trace[i - 1].objective + 1e-7);
    const CgResult again = run_column_generation(m);
    EXPECT_TRUE(again.converged);
    EXPECT_EQ(again.columns_generated, 0);
    EXPECT_NEAR(again.trace.back().objective, cg.trace.back().objective, 1e-7);
  }
}

TEST(Engine, IterationCapIsTruncated) {
  const ProblemInstance inst = ring(4.0, "2", 4);
  const auto parts = partition_all(inst);
  RmpModel m = build_rmp(inst, parts, seed_pool(inst, parts), RmpForm::full);
  CgLimits lim;
  lim.max_iterations = 1;
  const CgResult cg = run_column_generation(m, lim);
  EXPECT_FALSE(cg.converged);
  EXPECT_TRUE(cg.truncated);
  EXPECT_LE(cg.lp_bound, cg.trace.back().objective + 1e-9);
}

TEST(Engine, NsfnetBoundBelowSingleNode) {
  const ProblemInstance inst = nsfnet(14, "1");
  const SolveResult r = solve_ok(inst);
  const double oracle = single_node_oracle(inst).objective;
  EXPECT_LE(r.plan.lp_bound, oracle + 1e-6);
  EXPECT_LE(r.plan.objective, oracle + 1e-6);
}

TEST(Engine, KOneMatchesSingleNodeOracle) {
  const ProblemInstance inst = nsfnet(1, "4");
  const SolveResult r = solve_ok(inst);
  EXPECT_EQ(r.plan.nfv_nodes_used(), 1);
  EXPECT_NEAR(r.plan.objective, single_node_oracle(inst).objective, 1e-6);
}

TEST(Engine, PerPairReachesLowerBound) {
  const ProblemInstance inst = nsfnet(14, "182");
  const SolveResult r = solve_ok(inst);
  EXPECT_NEAR(r.plan.objective, shortest_path_lb(inst), 1e-6);
}

TEST(Engine, CapacityTooTightReportsArc) {
  std::vector<LinkSpec> links = triangle().topology().links();
  for (LinkSpec& l : links) l.capacity_gbps = 0.5;
  const Topology t("thin", triangle().topology().nodes(), links);
  const ProblemInstance inst = triangle().with_topology(t);
  const SolveResult r = solve(inst);
  EXPECT_FALSE(r.feasible);
  bool named = false;
  for (const auto& d : r.diagnostics) named = named || d.find("capacity a->b") != std::string::npos;
  EXPECT_TRUE(named) << (r.diagnostics.empty() ? "" : r.diagnostics[0]);
}

TEST(Engine, FullAndFastAgreeWhenAmple) {
  const ProblemInstance inst = triangle(2, "2", "chain3.json");
  SolveOptions fast, full;
  fast.extract.mode = FinalModeChoice::fast;
  full.extract.mode = FinalModeChoice::full;
  full.form = RmpForm::full;
  const SolveResult a = solve_ok(inst, fast);
  const SolveResult b = solve_ok(inst, full);
  EXPECT_EQ(a.plan.final_mode, "fast");
  EXPECT_EQ(b.plan.final_mode, "full");
  EXPECT_NEAR(a.plan.objective, b.plan.objective, 1e-6);
}

TEST(Engine, CapacitatedInstanceUsesFullForm) {
  const ProblemInstance inst = ring(4.0, "2", 4);
  EXPECT_FALSE(capacities_ample(inst));
  const SolveResult r = solve_ok(inst);
  EXPECT_EQ(r.form, RmpForm::full);
  EXPECT_EQ(r.plan.final_mode, "full");
  EXPECT_GT(r.cg.trace.size(), 1u);
  for (double l : r.plan.arc_load) EXPECT_LE(l, 4.0 + 1e-7);
  EXPECT_NEAR(r.plan.objective, 24.0, 1e-9);
}

TEST(Engine, IntegerInfeasibleWithFractionalRelaxation) {
  // K=1 needs 9 Gbps into one host over two 3.5 Gbps arcs; the relaxation
  // spreads hosts fractionally and stays feasible.
  const ProblemInstance inst = ring(3.5, "1", 1);
  const SolveResult r = solve(inst);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(r.cg.last.overflowing.empty());
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_NE(r.diagnostics.back().find("infeasible"), std::string::npos);
}

TEST(Engine, Deterministic) {
  const ProblemInstance inst = nsfnet(3, "4");
  const SolveResult a = solve_ok(inst);
  const SolveResult b = solve_ok(inst);
  EXPECT_EQ(plan_to_json(inst, a.plan).dump(), plan_to_json(inst, b.plan).dump());
}

TEST(Engine, ValidatorCatchesCorruption) {
  const ProblemInstance inst = triangle(3, "6", "chain3.json");
  const SolveResult r = solve_ok(inst);
  ASSERT_TRUE(r.feasible);
  ASSERT_GE(r.plan.nfv_nodes_used(), 2);

  MappingPlan cap = r.plan;
  cap.arc_load[0] = 1000.0;
  const ValidationReport a = validate_plan(inst, cap);
  EXPECT_TRUE(a.has("capacity_exceeded"));
  EXPECT_TRUE(a.has("load_mismatch"));
  bool named = false;
  for (const Violation& v : a.violations)
    named = named || (v.kind == "capacity_exceeded" && v.detail.find(inst.topology().arc_label(0)) == 0);
  EXPECT_TRUE(named);

  const ProblemInstance k1 = inst.with_parameters(1, NcSpec::parse("6"));
  EXPECT_TRUE(validate_plan(k1, r.plan).has("k_exceeded"));

  MappingPlan broken = r.plan;
  broken.routes[0].first = {broken.routes[0].dst};
  if (broken.routes[0].dst == broken.routes[0].src) broken.routes[0].first = {(broken.routes[0].src + 1) % 3};
  EXPECT_TRUE(validate_plan(inst, broken).has("route_discontinuous"));

  MappingPlan dropped = r.plan;
  dropped.routes.pop_back();
  EXPECT_TRUE(validate_plan(inst, dropped).has("missing_demand"));

  MappingPlan obj = r.plan;
  obj.objective += 1.0;
  EXPECT_TRUE(validate_plan(inst, obj).has("objective_mismatch"));
}

TEST(Engine, PlanJsonRoundTrip) {
  const ProblemInstance inst = nsfnet(5, "4");
  const SolveResult r = solve_ok(inst);
  const auto doc = plan_to_json(inst, r.plan);
  const MappingPlan back = plan_from_json(inst, doc);
  EXPECT_TRUE(validate_plan(inst, back).ok());
  EXPECT_EQ(plan_to_json(inst, back).dump(), doc.dump());
  EXPECT_EQ(doc["k"], 5);
}

TEST(Engine, HopBandwidthIdentity) {
  std::mt19937 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = std::uniform_int_distribution<int>(3, 7)(rng);
    Topology t = make_topology(n, random_connected_edges(rng, n, 0.3));
    std::vector<DemandRecord> recs;
    for (int s = 0; s < n; ++s)
      for (int d = 0; d < n; ++d)
        if (s != d && std::bernoulli_distribution(0.3)(rng)) recs.push_back({node_name(s), node_name(d), "sc", 1.5});
    if (recs.empty()) recs.push_back({node_name(0), node_name(n - 1), "sc", 1.0});
    const int k = std::uniform_int_distribution<int>(1, n)(rng);
    const ProblemInstance inst(t, simple_catalog(2), recs, k, NcSpec::parse("2"));
    const SolveResult r = solve_ok(inst);
    double sum = 0.0;
    for (double l : r.plan.arc_load) sum += l;
    EXPECT_NEAR(sum, r.plan.objective, 1e-9);
    EXPECT_LE(r.plan.nfv_nodes_used(), k);
    EXPECT_LE(r.plan.objective, single_node_oracle(inst).objective + 1e-6);
  }
}
