#pragma once

// Restricted master problem over a pool of chain-instance configurations.
//
// Two layouts share the same rows for convexity, cores, arc capacity,
// VNF linking, hosting and the K budget:
//  - full: explicit position variables x[q,i,v] tied to the pool by
//    consistency rows, and per-pair first/last segment arc flows y;
//  - projected: x[q,i,v] and y are substituted out, each z column carries
//    its pairs' hop-shortest end segments in its cost and capacity usage.
// The projected layout is exact whenever no arc can ever saturate.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "scmap/mip.hpp"
#include "scmap/netmodel.hpp"
#include "scmap/pathcore.hpp"
#include "scmap/simplex.hpp"
#include "scmap/sptg.hpp"

namespace scmap {

/// One group of one chain, treated downstream as its own single-instance chain.
struct ChainInstance {
  int chain = 0;
  int group = 0;
  std::vector<DemandPair> pairs;
  std::vector<double> pair_demand;
  double demand = 0.0;  // total over pairs
};

inline std::vector<ChainInstance> make_chain_instances(const ProblemInstance& instance,
                                                       const std::vector<ChainPartition>& partitions) {
  std::vector<ChainInstance> out;
  for (const ChainPartition& part : partitions) {
    for (std::size_t g = 0; g < part.groups.size(); ++g) {
      ChainInstance ci{part.chain, static_cast<int>(g), part.groups[g].members, {}, 0.0};
      for (const DemandPair& p : ci.pairs) {
        ci.pair_demand.push_back(instance.demand(part.chain, p));
        ci.demand += ci.pair_demand.back();
      }
      out.push_back(std::move(ci));
    }
  }
  return out;
}

/// A candidate mapping of one chain instance: locations per position and
/// arc paths between consecutive positions.
struct Configuration {
  int instance = 0;
  std::vector<NodeIndex> locations;
  std::vector<std::vector<ArcIndex>> segments;

  auto operator<=>(const Configuration&) const = default;
};

inline void check_configuration(const Topology& topo, const Configuration& cfg, int chain_length) {
  if (static_cast<int>(cfg.locations.size()) != chain_length)
    throw ModelError("configuration has " + std::to_string(cfg.locations.size()) + " locations, chain needs " +
                     std::to_string(chain_length));
  if (cfg.segments.size() + 1 != cfg.locations.size())
    throw ModelError("configuration needs one segment between consecutive positions");
  for (NodeIndex v : cfg.locations) {
    if (v < 0 || v >= topo.node_count()) throw ModelError("configuration location out of range");
    if (!topo.node(v).nfv) throw ModelError("configuration places a VNF on non-NFV node " + topo.node(v).id);
  }
  for (std::size_t i = 0; i < cfg.segments.size(); ++i) {
    const auto& seg = cfg.segments[i];
    const NodeIndex from = cfg.locations[i];
    const NodeIndex to = cfg.locations[i + 1];
    if (seg.empty()) {
      if (from != to) throw ModelError("empty segment between distinct locations");
      continue;
    }
    if (from == to) throw ModelError("non-empty segment between co-located positions");
    const auto nodes = path_nodes(topo, seg);
    if (nodes.front() != from || nodes.back() != to)
      throw ModelError("segment " + std::to_string(i + 1) + " does not join its locations");
  }
}

/// cost_gamma: group demand times the number of inter-VNF arcs.
inline double configuration_cost(const ChainInstance& ci, const Configuration& cfg) {
  std::size_t hops = 0;
  for (const auto& seg : cfg.segments) hops += seg.size();
  return ci.demand * static_cast<double>(hops);
}

enum class RmpForm { full, projected };

inline const char* to_string(RmpForm f) { return f == RmpForm::full ? "full" : "projected"; }

/// True when no arc can saturate whatever the routing: every arc holds the
/// worst case of each demand crossing it once per segment.
inline bool capacities_ample(const ProblemInstance& instance) {
  double worst = 0.0;
  for (const Demand& d : instance.demands()) worst += d.gbps * (instance.chain_length(d.chain) + 1);
  for (const ArcSpec& a : instance.topology().arcs())
    if (a.capacity_gbps < worst) return false;
  return true;
}

/// Dual values of a solved relaxation (minimisation: <= rows carry y <= 0).
struct DualPrices {
  std::vector<double> convexity;                 // per chain instance
  std::vector<double> core;                      // per node (0 for non-NFV)
  std::vector<double> capacity;                  // per arc
  std::vector<std::vector<double>> consistency;  // [instance][position * |V| + node]
};

class RmpModel {
 public:
  inline static constexpr double kOverflowPenalty = 1e5;

  RmpModel(const ProblemInstance& instance, const std::vector<ChainPartition>& partitions, RmpForm form)
      : instance_(instance),
        instances_(make_chain_instances(instance, partitions)),
        form_(form),
        paths_(all_pairs_hops(instance.topology())) {
    build_rows();
  }

  const ProblemInstance& instance() const { return instance_; }
  const std::vector<ChainInstance>& chain_instances() const { return instances_; }
  RmpForm form() const { return form_; }
  const PathTable& paths() const { return paths_; }
  const lp::LinearProgram& lp() const { return lp_; }
  lp::LinearProgram& mutable_lp() { return lp_; }
  const std::vector<Configuration>& pool() const { return pool_; }
  int z_var(int pool_index) const { return z_var_.at(pool_index); }
  int big_m() const { return big_m_; }
  int chain_length(int q) const { return instance_.chain_length(instances_.at(q).chain); }

  int convexity_row(int q) const { return conv_row_.at(q); }
  int core_row(NodeIndex v) const { return core_row_.at(v); }
  int capacity_row(ArcIndex a) const { return cap_row_.at(a); }
  int consistency_row(int q, int i, NodeIndex v) const {
    return form_ == RmpForm::full ? cons_row_.at(q).at(i * n_nodes() + v) : -1;
  }
  int k_row() const { return k_row_; }
  int x_position_var(int q, int i, NodeIndex v) const {
    return form_ == RmpForm::full ? xpos_var_.at(q).at(i * n_nodes() + v) : -1;
  }
  int x_vf_var(NodeIndex v, int f) const { return xvf_var_.at(v * n_vnfs() + f); }
  int h_var(NodeIndex v) const { return h_var_.at(v); }
  /// First/last segment arc flow of pair p in instance q (full layout only).
  int y_first_var(int q, int p, ArcIndex a) const { return y_first_.at(q).at(p * n_arcs() + a); }
  int y_last_var(int q, int p, ArcIndex a) const { return y_last_.at(q).at(p * n_arcs() + a); }
  const std::vector<std::pair<int, std::string>>& overflow_vars() const { return overflow_; }

  /// Row coefficients of a configuration's z column, derived from its fields.
  std::vector<std::pair<int, double>> column_terms(const Configuration& cfg) const {
    const ChainInstance& ci = instances_.at(cfg.instance);
    const auto& fs = instance_.chain_vnfs(ci.chain);
    std::map<int, double> acc;
    acc[conv_row_[cfg.instance]] += 1.0;
    for (std::size_t i = 0; i < cfg.locations.size(); ++i) {
      const NodeIndex v = cfg.locations[i];
      acc[core_row_[v]] += ci.demand * instance_.vnfs()[fs[i]].cores_per_gbps;
      if (form_ == RmpForm::full) {
        acc[cons_row_[cfg.instance][static_cast<int>(i) * n_nodes() + v]] += 1.0;
      } else {
        acc[vf_lo_row_[v * n_vnfs() + fs[i]]] -= 1.0;
        acc[vf_hi_row_[v * n_vnfs() + fs[i]]] += 1.0;
      }
    }
    for (const auto& seg : cfg.segments)
      for (ArcIndex a : seg) acc[cap_row_[a]] += ci.demand;
    if (form_ == RmpForm::projected) {
      for (std::size_t p = 0; p < ci.pairs.size(); ++p) {
        for (ArcIndex a : paths_.arcs(topo(), ci.pairs[p].src, cfg.locations.front()))
          acc[cap_row_[a]] += ci.pair_demand[p];
        for (ArcIndex a : paths_.arcs(topo(), cfg.locations.back(), ci.pairs[p].dst))
          acc[cap_row_[a]] += ci.pair_demand[p];
      }
    }
    std::vector<std::pair<int, double>> out;
    for (auto [r, c] : acc)
      if (c != 0.0) out.emplace_back(r, c);
    return out;
  }

  /// Objective coefficient of a configuration's z column.
  double column_cost(const Configuration& cfg) const {
    const ChainInstance& ci = instances_.at(cfg.instance);
    double c = configuration_cost(ci, cfg);
    if (form_ == RmpForm::projected) c += end_segment_cost(cfg);
    return c;
  }

  /// Hop-shortest end-segment bandwidth of all pairs of the configuration's instance.
  double end_segment_cost(const Configuration& cfg) const {
    const ChainInstance& ci = instances_.at(cfg.instance);
    double c = 0.0;
    for (std::size_t p = 0; p < ci.pairs.size(); ++p)
      c += ci.pair_demand[p] * (paths_.dist(ci.pairs[p].src, cfg.locations.front()) +
                                paths_.dist(cfg.locations.back(), ci.pairs[p].dst));
    return c;
  }

  /// Adds a z column; returns its pool index, or nullopt for an exact duplicate.
  std::optional<int> add_column(const Configuration& cfg) {
    if (cfg.instance < 0 || cfg.instance >= static_cast<int>(instances_.size()))
      throw ModelError("configuration names an unknown chain instance");
    check_configuration(topo(), cfg, chain_length(cfg.instance));
    if (!seen_.insert(cfg).second) return std::nullopt;
    const int j = lp_.add_variable("z[" + std::to_string(cfg.instance) + "," + std::to_string(pool_.size()) + "]",
                                   0.0, integral_ ? 1.0 : lp::kInfinity, column_cost(cfg), integral_);
    for (auto [r, c] : column_terms(cfg)) lp_.add_term(r, j, c);
    pool_.push_back(cfg);
    z_var_.push_back(j);
    return static_cast<int>(pool_.size()) - 1;
  }

  /// Pool indices belonging to one chain instance, in insertion order.
  std::vector<int> pool_of(int q) const {
    std::vector<int> out;
    for (std::size_t k = 0; k < pool_.size(); ++k)
      if (pool_[k].instance == q) out.push_back(static_cast<int>(k));
    return out;
  }

  /// Turns this model into its integer counterpart: binaries everywhere,
  /// overflow columns fixed at zero.
  void make_integral() {
    integral_ = true;
    for (int j = 0; j < lp_.num_variables(); ++j) {
      lp::Variable& v = lp_.variable(j);
      if (v.name.rfind("ovf", 0) == 0) {
        v.upper = 0.0;
        continue;
      }
      v.integer = true;
      v.upper = 1.0;
    }
  }

  bool integral() const { return integral_; }

  const std::optional<lp::Basis>& warm_basis() const { return basis_; }
  void set_warm_basis(lp::Basis b) { basis_ = std::move(b); }

  DualPrices extract_duals(const lp::LpSolution& sol) const {
    DualPrices d;
    const int n = n_nodes();
    for (int q = 0; q < static_cast<int>(instances_.size()); ++q) d.convexity.push_back(sol.duals[conv_row_[q]]);
    d.core.assign(n, 0.0);
    for (NodeIndex v = 0; v < n; ++v)
      if (core_row_[v] >= 0) d.core[v] = sol.duals[core_row_[v]];
    d.capacity.resize(n_arcs());
    for (ArcIndex a = 0; a < n_arcs(); ++a) d.capacity[a] = sol.duals[cap_row_[a]];
    d.consistency.resize(instances_.size());
    for (int q = 0; q < static_cast<int>(instances_.size()); ++q) {
      const int len = chain_length(q);
      auto& mu = d.consistency[q];
      mu.assign(static_cast<std::size_t>(len) * n, 0.0);
      if (form_ == RmpForm::full) {
        for (int i = 0; i < len; ++i)
          for (NodeIndex v = 0; v < n; ++v)
            if (topo().node(v).nfv) mu[i * n + v] = sol.duals[cons_row_[q][i * n + v]];
        continue;
      }
      // Projected layout: fold linking duals and priced end segments into
      // an equivalent per-position price so pricing stays layout-agnostic.
      const ChainInstance& ci = instances_[q];
      const auto& fs = instance_.chain_vnfs(ci.chain);
      for (NodeIndex v = 0; v < n; ++v) {
        if (!topo().node(v).nfv) continue;
        double first = 0.0, last = 0.0;
        for (std::size_t p = 0; p < ci.pairs.size(); ++p) {
          for (ArcIndex a : paths_.arcs(topo(), ci.pairs[p].src, v)) first += ci.pair_demand[p] * (1.0 - d.capacity[a]);
          for (ArcIndex a : paths_.arcs(topo(), v, ci.pairs[p].dst)) last += ci.pair_demand[p] * (1.0 - d.capacity[a]);
        }
        for (int i = 0; i < len; ++i) {
          const int f = fs[i];
          double m = sol.duals[vf_hi_row_[v * n_vnfs() + f]] - sol.duals[vf_lo_row_[v * n_vnfs() + f]];
          if (i == 0) m -= first;
          if (i == len - 1) m -= last;
          mu[i * n + v] = m;
        }
      }
    }
    return d;
  }

  /// Reduced cost of an arbitrary configuration straight from LP coefficients.
  double reduced_cost(const Configuration& cfg, std::span<const double> duals) const {
    double rc = column_cost(cfg);
    for (auto [r, c] : column_terms(cfg)) rc -= duals[r] * c;
    return rc;
  }

 private:
  const Topology& topo() const { return instance_.topology(); }
  int n_nodes() const { return topo().node_count(); }
  int n_arcs() const { return topo().arc_count(); }
  int n_vnfs() const { return static_cast<int>(instance_.vnfs().size()); }

  std::string node_id(NodeIndex v) const { return topo().node(v).id; }

  void add_overflow(int row, const std::string& label) {
    const int j = lp_.add_variable("ovf:" + label, 0.0, lp::kInfinity, kOverflowPenalty);
    lp_.add_term(row, j, -1.0);
    overflow_.emplace_back(j, label);
  }

  void build_rows() {
    using lp::Relation;
    const Topology& t = topo();
    const int n = n_nodes();
    const int nq = static_cast<int>(instances_.size());
    big_m_ = 0;
    for (int q = 0; q < nq; ++q) big_m_ += chain_length(q);
    const bool elastic = form_ == RmpForm::full;

    for (int q = 0; q < nq; ++q)
      conv_row_.push_back(lp_.add_constraint("conv[" + std::to_string(q) + "]", Relation::equal, 1.0));
    core_row_.assign(n, -1);
    for (NodeIndex v = 0; v < n; ++v) {
      if (!t.node(v).nfv) continue;
      core_row_[v] = lp_.add_constraint("core[" + node_id(v) + "]", Relation::less_equal, t.node(v).cores);
    }
    for (ArcIndex a = 0; a < n_arcs(); ++a)
      cap_row_.push_back(lp_.add_constraint("cap[" + t.arc_label(a) + "]", Relation::less_equal,
                                            t.arc(a).capacity_gbps));
    if (elastic) {
      for (NodeIndex v = 0; v < n; ++v)
        if (core_row_[v] >= 0) add_overflow(core_row_[v], "cores " + node_id(v));
      for (ArcIndex a = 0; a < n_arcs(); ++a) add_overflow(cap_row_[a], "capacity " + t.arc_label(a));
    }

    // Position variables and consistency rows (full layout).
    if (form_ == RmpForm::full) {
      cons_row_.resize(nq);
      xpos_var_.resize(nq);
      for (int q = 0; q < nq; ++q) {
        const int len = chain_length(q);
        cons_row_[q].assign(static_cast<std::size_t>(len) * n, -1);
        xpos_var_[q].assign(static_cast<std::size_t>(len) * n, -1);
        for (int i = 0; i < len; ++i) {
          for (NodeIndex v = 0; v < n; ++v) {
            if (!t.node(v).nfv) continue;
            const std::string tag = std::to_string(q) + "," + std::to_string(i + 1) + "," + node_id(v);
            const int x = lp_.add_variable("x[" + tag + "]", 0.0, lp::kInfinity, 0.0);
            const int r = lp_.add_constraint("cons[" + tag + "]", Relation::equal, 0.0);
            lp_.add_term(r, x, -1.0);
            cons_row_[q][i * n + v] = r;
            xpos_var_[q][i * n + v] = x;
          }
        }
      }
    }

    // VNF-on-node linking, hosting indicators and the K budget.
    xvf_var_.assign(static_cast<std::size_t>(n) * n_vnfs(), -1);
    vf_lo_row_.assign(xvf_var_.size(), -1);
    vf_hi_row_.assign(xvf_var_.size(), -1);
    h_var_.assign(n, -1);
    for (NodeIndex v = 0; v < n; ++v) {
      if (!t.node(v).nfv) continue;
      for (int f = 0; f < n_vnfs(); ++f) {
        const std::string tag = node_id(v) + "," + instance_.vnfs()[f].id;
        const int x = lp_.add_variable("xvf[" + tag + "]", 0.0, 1.0, 0.0);
        const int lo = lp_.add_constraint("vnf_m[" + tag + "]", Relation::greater_equal, 0.0);
        const int hi = lp_.add_constraint("vnf_1[" + tag + "]", Relation::greater_equal, 0.0);
        lp_.add_term(lo, x, big_m_);
        lp_.add_term(hi, x, -1.0);
        xvf_var_[v * n_vnfs() + f] = x;
        vf_lo_row_[v * n_vnfs() + f] = lo;
        vf_hi_row_[v * n_vnfs() + f] = hi;
      }
      if (form_ == RmpForm::full) {
        for (int q = 0; q < nq; ++q) {
          const auto& fs = instance_.chain_vnfs(instances_[q].chain);
          for (int i = 0; i < chain_length(q); ++i) {
            const int x = xpos_var_[q][i * n + v];
            lp_.add_term(vf_lo_row_[v * n_vnfs() + fs[i]], x, -1.0);
            lp_.add_term(vf_hi_row_[v * n_vnfs() + fs[i]], x, 1.0);
          }
        }
      }
    }
    for (NodeIndex v = 0; v < n; ++v) {
      if (!t.node(v).nfv) continue;
      const int h = lp_.add_variable("h[" + node_id(v) + "]", 0.0, 1.0, 0.0);
      const int lo = lp_.add_constraint("host_m[" + node_id(v) + "]", Relation::greater_equal, 0.0);
      const int hi = lp_.add_constraint("host_1[" + node_id(v) + "]", Relation::greater_equal, 0.0);
      lp_.add_term(lo, h, big_m_);
      lp_.add_term(hi, h, -1.0);
      for (int f = 0; f < n_vnfs(); ++f) {
        lp_.add_term(lo, xvf_var_[v * n_vnfs() + f], -1.0);
        lp_.add_term(hi, xvf_var_[v * n_vnfs() + f], 1.0);
      }
      h_var_[v] = h;
    }
    k_row_ = lp_.add_constraint("k", Relation::less_equal, instance_.k());
    for (NodeIndex v = 0; v < n; ++v)
      if (h_var_[v] >= 0) lp_.add_term(k_row_, h_var_[v], 1.0);

    if (form_ == RmpForm::full) build_segment_flows();
  }

  // First segment: source -> first location; last segment: last location -> destination.
  void build_segment_flows() {
    using lp::Relation;
    const Topology& t = topo();
    const int n = n_nodes();
    const int nq = static_cast<int>(instances_.size());
    y_first_.resize(nq);
    y_last_.resize(nq);
    for (int q = 0; q < nq; ++q) {
      const ChainInstance& ci = instances_[q];
      const int last_pos = chain_length(q) - 1;
      const int np = static_cast<int>(ci.pairs.size());
      y_first_[q].assign(static_cast<std::size_t>(np) * n_arcs(), -1);
      y_last_[q].assign(static_cast<std::size_t>(np) * n_arcs(), -1);
      for (int p = 0; p < np; ++p) {
        const NodeIndex s = ci.pairs[p].src;
        const NodeIndex dd = ci.pairs[p].dst;
        const double dem = ci.pair_demand[p];
        const std::string tag = std::to_string(q) + "," + node_id(s) + "," + node_id(dd);
        for (ArcIndex a = 0; a < n_arcs(); ++a) {
          const int yf = lp_.add_variable("yf[" + tag + "," + t.arc_label(a) + "]", 0.0, 1.0, dem);
          const int yl = lp_.add_variable("yl[" + tag + "," + t.arc_label(a) + "]", 0.0, 1.0, dem);
          lp_.add_term(cap_row_[a], yf, dem);
          lp_.add_term(cap_row_[a], yl, dem);
          y_first_[q][p * n_arcs() + a] = yf;
          y_last_[q][p * n_arcs() + a] = yl;
        }
        auto yf = [&](ArcIndex a) { return y_first_[q][p * n_arcs() + a]; };
        auto yl = [&](ArcIndex a) { return y_last_[q][p * n_arcs() + a]; };

        // Source leaves on exactly one arc unless the first VNF sits at the source.
        int r = lp_.add_constraint("src_out[" + tag + "]", Relation::equal, 1.0);
        for (ArcIndex a : t.out_arcs(s)) lp_.add_term(r, yf(a), 1.0);
        if (t.node(s).nfv) lp_.add_term(r, xpos_var_[q][0 * n + s], 1.0);
        for (NodeIndex v = 0; v < n; ++v) {
          if (v == s) continue;
          const std::string vt = tag + "," + node_id(v);
          if (t.node(v).nfv) {
            const int x = xpos_var_[q][0 * n + v];
            int in = lp_.add_constraint("first_in[" + vt + "]", Relation::greater_equal, 0.0);
            for (ArcIndex a : t.in_arcs(v)) lp_.add_term(in, yf(a), 1.0);
            lp_.add_term(in, x, -1.0);
            int bal = lp_.add_constraint("first_bal[" + vt + "]", Relation::equal, 0.0);
            for (ArcIndex a : t.out_arcs(v)) lp_.add_term(bal, yf(a), 1.0);
            for (ArcIndex a : t.in_arcs(v)) lp_.add_term(bal, yf(a), -1.0);
            lp_.add_term(bal, x, 1.0);
          } else {
            int bal = lp_.add_constraint("first_bal[" + vt + "]", Relation::equal, 0.0);
            for (ArcIndex a : t.out_arcs(v)) lp_.add_term(bal, yf(a), 1.0);
            for (ArcIndex a : t.in_arcs(v)) lp_.add_term(bal, yf(a), -1.0);
          }
        }

        // Mirror: destination entered on exactly one arc unless the last VNF sits there.
        r = lp_.add_constraint("dst_in[" + tag + "]", Relation::equal, 1.0);
        for (ArcIndex a : t.in_arcs(dd)) lp_.add_term(r, yl(a), 1.0);
        if (t.node(dd).nfv) lp_.add_term(r, xpos_var_[q][last_pos * n + dd], 1.0);
        for (NodeIndex v = 0; v < n; ++v) {
          if (v == dd) continue;
          const std::string vt = tag + "," + node_id(v);
          if (t.node(v).nfv) {
            const int x = xpos_var_[q][last_pos * n + v];
            int out = lp_.add_constraint("last_out[" + vt + "]", Relation::greater_equal, 0.0);
            for (ArcIndex a : t.out_arcs(v)) lp_.add_term(out, yl(a), 1.0);
            lp_.add_term(out, x, -1.0);
            int bal = lp_.add_constraint("last_bal[" + vt + "]", Relation::equal, 0.0);
            for (ArcIndex a : t.in_arcs(v)) lp_.add_term(bal, yl(a), 1.0);
            for (ArcIndex a : t.out_arcs(v)) lp_.add_term(bal, yl(a), -1.0);
            lp_.add_term(bal, x, 1.0);
          } else {
            int bal = lp_.add_constraint("last_bal[" + vt + "]", Relation::equal, 0.0);
            for (ArcIndex a : t.in_arcs(v)) lp_.add_term(bal, yl(a), 1.0);
            for (ArcIndex a : t.out_arcs(v)) lp_.add_term(bal, yl(a), -1.0);
          }
        }
      }
    }
  }

  ProblemInstance instance_;
  std::vector<ChainInstance> instances_;
  RmpForm form_;
  PathTable paths_;
  lp::LinearProgram lp_;
  bool integral_ = false;
  int big_m_ = 0;

  std::vector<int> conv_row_, core_row_, cap_row_, vf_lo_row_, vf_hi_row_, h_var_, xvf_var_;
  std::vector<std::vector<int>> cons_row_, xpos_var_, y_first_, y_last_;
  int k_row_ = -1;
  std::vector<std::pair<int, std::string>> overflow_;

  std::vector<Configuration> pool_;
  std::vector<int> z_var_;
  std::set<Configuration> seen_;
  std::optional<lp::Basis> basis_;
};

/// Relaxation outcome with duals and any elastic overflow left in use.
struct Relaxation {
  lp::LpSolution solution;
  DualPrices duals;
  std::vector<std::string> overflowing;  // labels of rows needing overflow > tolerance
};

inline Relaxation solve_relaxation(RmpModel& model, const lp::SimplexOptions& opt = {}) {
  Relaxation out;
  const auto& warm = model.warm_basis();
  out.solution = lp::solve_lp(model.lp(), opt, warm ? &*warm : nullptr);
  if (out.solution.status != lp::LpStatus::optimal) return out;
  model.set_warm_basis(out.solution.basis);
  out.duals = model.extract_duals(out.solution);
  for (const auto& [j, label] : model.overflow_vars())
    if (out.solution.values[j] > 1e-7) out.overflowing.push_back(label);
  return out;
}

/// Objective of a relaxation net of elastic overflow penalties.
inline double relaxation_bandwidth(const RmpModel& model, const lp::LpSolution& sol) {
  double obj = sol.objective;
  for (const auto& [j, _] : model.overflow_vars()) obj -= RmpModel::kOverflowPenalty * sol.values[j];
  return obj;
}

/// Seeds every chain instance of `model` from `configs`; throws when one is left without a column.
inline void seed_model(RmpModel& model, const std::vector<Configuration>& configs) {
  for (const Configuration& c : configs) model.add_column(c);
  for (int q = 0; q < static_cast<int>(model.chain_instances().size()); ++q)
    if (model.pool_of(q).empty())
      throw ModelError("chain instance " + std::to_string(q) + " has no seed configuration");
}

inline RmpModel build_rmp(const ProblemInstance& instance, const std::vector<ChainPartition>& partitions,
                          const std::vector<Configuration>& seeds, RmpForm form) {
  RmpModel model(instance, partitions, form);
  seed_model(model, seeds);
  return model;
}

enum class FinalMode { full, uncapacitated_fast };

/// Arcs whose capacity row is tight at the given relaxation solution.
inline std::vector<ArcIndex> tight_arcs(const RmpModel& model, const lp::LpSolution& sol, double tol = 1e-7) {
  std::vector<ArcIndex> out;
  const Topology& t = model.instance().topology();
  for (ArcIndex a = 0; a < t.arc_count(); ++a) {
    const double act = model.lp().row_activity(model.capacity_row(a), sol.values);
    const double cap = t.arc(a).capacity_gbps;
    if (act >= cap - tol * (1.0 + cap)) out.push_back(a);
  }
  return out;
}

/// Final integer model over the pool. Fast mode uses the projected layout
/// and refuses when an arc-capacity row is tight at `relaxed`.
inline RmpModel build_final_ilp(const RmpModel& model, FinalMode mode, const lp::LpSolution* relaxed = nullptr) {
  if (mode == FinalMode::uncapacitated_fast && relaxed) {
    const auto tight = tight_arcs(model, *relaxed);
    if (!tight.empty())
      throw ModelError("fast final model refused: capacity of " + model.instance().topology().arc_label(tight[0]) +
                       " is tight at the relaxation optimum");
  }
  const RmpForm form = mode == FinalMode::full ? RmpForm::full : RmpForm::projected;
  std::vector<ChainPartition> parts;
  // Re-derive partitions from the chain-instance list to keep instance order.
  for (const ChainInstance& ci : model.chain_instances()) {
    if (parts.empty() || parts.back().chain != ci.chain) parts.push_back({ci.chain, {}});
    parts.back().groups.push_back({ci.pairs.front(), ci.pairs});
  }
  RmpModel ilp(model.instance(), parts, form);
  ilp.make_integral();
  for (const Configuration& c : model.pool()) ilp.add_column(c);
  return ilp;
}

}  // namespace scmap
