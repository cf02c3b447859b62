#include <gtest/gtest.h>

#include <map>

#include "test_support.hpp"

using namespace scmap;
using namespace testsupport;

namespace {

int count_rows(const lp::LinearProgram& p, const std::string& prefix) {
  int c = 0;
  for (const auto& row : p.constraints()) c += row.name.rfind(prefix, 0) == 0 ? 1 : 0;
  return c;
}

std::map<int, double> stored_column(const lp::LinearProgram& p, int var) {
  std::map<int, double> out;
  for (int i = 0; i < p.num_constraints(); ++i)
    for (const lp::Term& t : p.constraint(i).terms)
      if (t.var == var) out[i] += t.coef;
  std::erase_if(out, [](const auto& kv) { return kv.second == 0.0; });
  return out;
}

// Row coefficients re-derived from the a/b fields of a configuration.
std::map<int, double> expected_column(const RmpModel& m, const Configuration& cfg) {
  const ProblemInstance& inst = m.instance();
  const ChainInstance& ci = m.chain_instances()[cfg.instance];
  const auto& fs = inst.chain_vnfs(ci.chain);
  std::map<int, double> out;
  out[m.convexity_row(cfg.instance)] += 1.0;
  for (std::size_t i = 0; i < cfg.locations.size(); ++i) {
    const NodeIndex v = cfg.locations[i];
    out[m.core_row(v)] += ci.demand * inst.vnfs()[fs[i]].cores_per_gbps;
    if (m.form() == RmpForm::full) out[m.consistency_row(cfg.instance, static_cast<int>(i), v)] += 1.0;
  }
  for (const auto& seg : cfg.segments)
    for (ArcIndex a : seg) out[m.capacity_row(a)] += ci.demand;
  if (m.form() == RmpForm::projected) {
    const Topology& t = inst.topology();
    for (std::size_t p = 0; p < ci.pairs.size(); ++p) {
      for (ArcIndex a : m.paths().arcs(t, ci.pairs[p].src, cfg.locations.front())) out[m.capacity_row(a)] += ci.pair_demand[p];
      for (ArcIndex a : m.paths().arcs(t, cfg.locations.back(), ci.pairs[p].dst)) out[m.capacity_row(a)] += ci.pair_demand[p];
    }
    for (std::size_t i = 0; i < cfg.locations.size(); ++i) {
      const NodeIndex v = cfg.locations[i];
      const std::string tag = t.node(v).id + "," + inst.vnfs()[fs[i]].id + "]";
      for (int r = 0; r < m.lp().num_constraints(); ++r) {
        const std::string& name = m.lp().constraint(r).name;
        if (name == "vnf_m[" + tag) out[r] -= 1.0;
        if (name == "vnf_1[" + tag) out[r] += 1.0;
      }
    }
  }
  std::erase_if(out, [](const auto& kv) { return kv.second == 0.0; });
  return out;
}

struct Fixture {
  ProblemInstance inst;
  std::vector<ChainPartition> parts;
};

Fixture triangle_setup(int k, const std::string& nc, const std::string& chains) {
  Fixture s{triangle(k, nc, chains), {}};
  s.parts = partition_all(s.inst);
  return s;
}

std::vector<Configuration> all_configs(const RmpModel& m) {
  std::vector<Configuration> out;
  for (int q = 0; q < static_cast<int>(m.chain_instances().size()); ++q) {
    auto c = enumerate_all_configs(m.instance(), m.chain_instances()[q], q);
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

}  // namespace

TEST(Master, TriangleRowCounts) {
  for (RmpForm form : {RmpForm::full, RmpForm::projected}) {
    Fixture s = triangle_setup(3, "1", "chain1.json");
    const RmpModel m = build_rmp(s.inst, s.parts, seed_pool(s.inst, s.parts), form);
    EXPECT_EQ(count_rows(m.lp(), "conv["), 1);
    EXPECT_EQ(count_rows(m.lp(), "core["), 3);
    EXPECT_EQ(count_rows(m.lp(), "cap["), 6);
    EXPECT_EQ(count_rows(m.lp(), "k"), 1);
    // Linking rows per (node, vnf) and host rows per node.
    EXPECT_EQ(count_rows(m.lp(), "vnf_m["), 3);
    EXPECT_EQ(count_rows(m.lp(), "host_1["), 3);
    EXPECT_EQ(count_rows(m.lp(), "cons["), form == RmpForm::full ? 3 : 0);
    EXPECT_EQ(m.big_m(), 1);
  }
}

TEST(Master, MissingSeedIsAnError) {
  Fixture s = triangle_setup(3, "2", "chain1.json");
  auto seeds = seed_pool(s.inst, s.parts);
  seeds.pop_back();
  EXPECT_THROW(build_rmp(s.inst, s.parts, seeds, RmpForm::projected), ModelError);
}

TEST(Master, ColumnCoefficientAudit) {
  for (RmpForm form : {RmpForm::full, RmpForm::projected}) {
    Fixture s = triangle_setup(2, "2", "chain3.json");
    RmpModel m(s.inst, s.parts, form);
    for (const Configuration& c : all_configs(m)) m.add_column(c);
    ASSERT_GT(m.pool().size(), 50u);
    for (std::size_t k = 0; k < m.pool().size(); ++k) {
      const Configuration& c = m.pool()[k];
      ASSERT_EQ(stored_column(m.lp(), m.z_var(static_cast<int>(k))), expected_column(m, c)) << "column " << k;
      const ChainInstance& ci = m.chain_instances()[c.instance];
      double hops = 0;
      for (const auto& seg : c.segments) hops += static_cast<double>(seg.size());
      EXPECT_DOUBLE_EQ(configuration_cost(ci, c), ci.demand * hops);
    }
  }
}

TEST(Master, DuplicateColumnRejected) {
  Fixture s = triangle_setup(3, "1", "chain1.json");
  RmpModel m = build_rmp(s.inst, s.parts, seed_pool(s.inst, s.parts), RmpForm::projected);
  const double before = solve_relaxation(m).solution.objective;
  const std::size_t pool = m.pool().size();
  EXPECT_FALSE(m.add_column(m.pool()[0]).has_value());
  EXPECT_EQ(m.pool().size(), pool);
  EXPECT_NEAR(solve_relaxation(m).solution.objective, before, 1e-9);
}

TEST(Master, NonNfvLocationRejected) {
  Topology t = make_topology(3, {{0, 1}, {1, 2}}, 100.0, {true, false, true});
  const ProblemInstance inst(t, simple_catalog(2), {{"v00", "v02", "sc", 1.0}}, 1, {});
  const auto parts = partition_all(inst);
  RmpModel m(inst, parts, RmpForm::projected);
  Configuration bad{0, {1, 1}, {{}}};
  EXPECT_THROW(m.add_column(bad), ModelError);
  Configuration gap{0, {0, 2}, {{*t.find_arc(0, 1)}}};
  EXPECT_THROW(m.add_column(gap), ModelError);
  Configuration wrong_len{0, {0}, {}};
  EXPECT_THROW(m.add_column(wrong_len), ModelError);
  Configuration ok{0, {0, 2}, {{*t.find_arc(0, 1), *t.find_arc(1, 2)}}};
  EXPECT_TRUE(m.add_column(ok).has_value());
}

TEST(Master, ObjectiveNeverIncreasesAsColumnsArrive) {
  for (RmpForm form : {RmpForm::full, RmpForm::projected}) {
    Fixture s = triangle_setup(2, "2", "chain3.json");
    RmpModel m = build_rmp(s.inst, s.parts, seed_pool(s.inst, s.parts), form);
    double last = solve_relaxation(m).solution.objective;
    int added = 0;
    for (const Configuration& c : all_configs(m)) {
      if (!m.add_column(c)) continue;
      if (++added % 7 != 0) continue;
      const Relaxation r = solve_relaxation(m);
      ASSERT_EQ(r.solution.status, lp::LpStatus::optimal);
      EXPECT_LE(r.solution.objective, last + 1e-7);
      EXPECT_TRUE(lp::check_certificate(m.lp(), r.solution).ok());
      last = r.solution.objective;
    }
  }
}

TEST(Master, SingleConfigurationClosedForm) {
  // One configuration per instance: objective = its cost plus hop-shortest end segments.
  const ProblemInstance inst = nsfnet(14, "4");
  const auto parts = partition_all(inst);
  RmpModel m = build_rmp(inst, parts, seed_pool(inst, parts), RmpForm::projected);
  const Relaxation rp = solve_relaxation(m);
  ASSERT_EQ(rp.solution.status, lp::LpStatus::optimal);
  double sum = 0.0;
  for (const Configuration& c : m.pool())
    sum += configuration_cost(m.chain_instances()[c.instance], c) + m.end_segment_cost(c);
  EXPECT_NEAR(rp.solution.objective, sum, 1e-6);
  for (std::size_t k = 0; k < m.pool().size(); ++k) EXPECT_NEAR(rp.solution.values[m.z_var(static_cast<int>(k))], 1.0, 1e-9);

  // The full layout routes end segments explicitly; a triangle keeps it small.
  Fixture s = triangle_setup(3, "2", "chain3.json");
  RmpModel full = build_rmp(s.inst, s.parts, seed_pool(s.inst, s.parts), RmpForm::full);
  const Relaxation r = solve_relaxation(full);
  ASSERT_EQ(r.solution.status, lp::LpStatus::optimal);
  double expected = 0.0;
  for (const Configuration& c : full.pool())
    expected += configuration_cost(full.chain_instances()[c.instance], c) + full.end_segment_cost(c);
  EXPECT_NEAR(r.solution.objective, expected, 1e-6);
}

TEST(Master, SeedAtSourceSendsNoFirstSegmentFlow) {
  Topology t = triangle().topology();
  const ProblemInstance inst(t, parse_chains(io_detail::read_file(data("chain3.json"))), {{"a", "b", "sc1", 1.0}}, 3, {});
  const auto parts = partition_all(inst);
  const NodeIndex a = t.node_index("a");
  RmpModel m = build_rmp(inst, parts, {{0, {a, a, a}, {{}, {}}}}, RmpForm::full);
  const Relaxation r = solve_relaxation(m);
  ASSERT_EQ(r.solution.status, lp::LpStatus::optimal);
  for (ArcIndex arc = 0; arc < t.arc_count(); ++arc) EXPECT_NEAR(r.solution.values[m.y_first_var(0, 0, arc)], 0.0, 1e-9);
  EXPECT_NEAR(r.solution.values[m.x_position_var(0, 0, a)], 1.0, 1e-9);
  EXPECT_NEAR(r.solution.objective, 1.0, 1e-9);  // only the last segment a->b
}

TEST(Master, FullBudgetLeavesKRowSlack) {
  Fixture s = triangle_setup(3, "1", "chain3.json");
  const RmpModel m = build_rmp(s.inst, s.parts, seed_pool(s.inst, s.parts), RmpForm::projected);
  const auto& row = m.lp().constraint(m.k_row());
  EXPECT_EQ(row.terms.size(), 3u);
  std::vector<double> x(m.lp().num_variables(), 0.0);
  for (NodeIndex v = 0; v < 3; ++v) x[m.h_var(v)] = 1.0;
  EXPECT_LE(m.lp().row_activity(m.k_row(), x), row.rhs);
}

TEST(Master, RelaxedKOneBelowOracle) {
  const ProblemInstance inst = nsfnet(1, "1");
  const auto parts = partition_all(inst);
  RmpModel m = build_rmp(inst, parts, seed_pool(inst, parts), RmpForm::projected);
  const Relaxation r = solve_relaxation(m);
  ASSERT_EQ(r.solution.status, lp::LpStatus::optimal);
  EXPECT_LE(r.solution.objective, single_node_oracle(inst).objective + 1e-6);
}

TEST(Master, DualSignConvention) {
  // Tight capacities on a triangle force binding capacity rows.
  Topology t = make_topology(3, {{0, 1}, {1, 2}, {0, 2}}, 1.5, {}, 3);
  std::vector<DemandRecord> recs;
  for (int s = 0; s < 3; ++s)
    for (int d = 0; d < 3; ++d)
      if (s != d) recs.push_back({node_name(s), node_name(d), "sc", 1.0});
  const ProblemInstance inst(t, simple_catalog(2), recs, 3, NcSpec::parse("2"));
  const auto parts = partition_all(inst);
  RmpModel m(inst, parts, RmpForm::full);
  for (const Configuration& c : all_configs(m)) m.add_column(c);
  const Relaxation r = solve_relaxation(m);
  ASSERT_EQ(r.solution.status, lp::LpStatus::optimal);
  EXPECT_TRUE(lp::check_certificate(m.lp(), r.solution).ok());
  for (double y : r.duals.core) EXPECT_LE(y, 1e-7);
  for (double y : r.duals.capacity) EXPECT_LE(y, 1e-7);
}

TEST(Master, FullAndProjectedRelaxationsAgreeWhenAmple) {
  Fixture s = triangle_setup(2, "2", "chain3.json");
  RmpModel full(s.inst, s.parts, RmpForm::full), proj(s.inst, s.parts, RmpForm::projected);
  ASSERT_TRUE(capacities_ample(s.inst));
  for (const Configuration& c : all_configs(full)) {
    full.add_column(c);
    proj.add_column(c);
  }
  const double a = solve_relaxation(full).solution.objective;
  const double b = solve_relaxation(proj).solution.objective;
  EXPECT_NEAR(a, b, 1e-6);
}

TEST(Master, FastIlpBinaryCount) {
  Fixture s = triangle_setup(3, "1", "chain3.json");
  RmpModel m = build_rmp(s.inst, s.parts, seed_pool(s.inst, s.parts), RmpForm::projected);
  for (const Configuration& c : all_configs(m)) m.add_column(c);
  const RmpModel ilp = build_final_ilp(m, FinalMode::uncapacitated_fast);
  int binaries = 0;
  for (const auto& v : ilp.lp().variables()) binaries += v.integer ? 1 : 0;
  const int vnfs = static_cast<int>(s.inst.vnfs().size());
  EXPECT_EQ(binaries, static_cast<int>(m.pool().size()) + 3 * vnfs + 3);
}

TEST(Master, FullAndFastIlpAgreeAtTenfoldCapacity) {
  // Triangle capacity 100 Gbps is well above ten times the 6 Gbps of demand.
  Fixture s = triangle_setup(2, "2", "chain3.json");
  RmpModel m = build_rmp(s.inst, s.parts, seed_pool(s.inst, s.parts), RmpForm::projected);
  for (const Configuration& c : all_configs(m)) m.add_column(c);
  const RmpModel fast = build_final_ilp(m, FinalMode::uncapacitated_fast);
  const RmpModel full = build_final_ilp(m, FinalMode::full);
  const auto a = lp::solve_mip(fast.lp());
  const auto b = lp::solve_mip(full.lp());
  ASSERT_EQ(a.status, lp::MipStatus::optimal);
  ASSERT_EQ(b.status, lp::MipStatus::optimal);
  EXPECT_NEAR(a.objective, b.objective, 1e-6);
  const Relaxation r = solve_relaxation(m);
  EXPECT_GE(a.objective, r.solution.objective - 1e-6);
}

TEST(Master, FastModeRefusedOnTightArc) {
  Topology t = make_topology(3, {{0, 1}, {1, 2}, {0, 2}}, 1.0);
  const ProblemInstance inst(t, simple_catalog(1), {{"v00", "v01", "sc", 1.0}}, 3, {});
  const auto parts = partition_all(inst);
  RmpModel m = build_rmp(inst, parts, seed_pool(inst, parts), RmpForm::full);
  const Relaxation r = solve_relaxation(m);
  ASSERT_EQ(r.solution.status, lp::LpStatus::optimal);
  EXPECT_FALSE(tight_arcs(m, r.solution).empty());
  EXPECT_THROW(build_final_ilp(m, FinalMode::uncapacitated_fast, &r.solution), ModelError);
  EXPECT_NO_THROW(build_final_ilp(m, FinalMode::full, &r.solution));
}

TEST(Master, BudgetTooSmallForPoolIsInfeasible) {
  Fixture s = triangle_setup(1, "2", "chain1.json");
  // Each instance may only use a node the other one cannot.
  RmpModel m(s.inst, s.parts, RmpForm::projected);
  m.add_column({0, {0}, {}});
  m.add_column({1, {1}, {}});
  const RmpModel ilp = build_final_ilp(m, FinalMode::uncapacitated_fast);
  EXPECT_EQ(lp::solve_mip(ilp.lp()).status, lp::MipStatus::infeasible);
}
