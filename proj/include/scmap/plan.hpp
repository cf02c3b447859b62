#pragma once

// Final mapping plans: representation, JSON form and independent validation.

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "scmap/netmodel.hpp"

namespace scmap {

struct PlannedInstance {
  int chain = 0;
  int group = 0;
  std::vector<NodeIndex> locations;
  /// Node list per inter-VNF segment; a co-located segment is the single node.
  std::vector<std::vector<NodeIndex>> segments;
  std::vector<DemandPair> pairs;
};

struct PlannedRoute {
  int chain = 0;
  NodeIndex src = 0;
  NodeIndex dst = 0;
  int instance = 0;
  double gbps = 0.0;
  std::vector<NodeIndex> first;  // src .. first VNF location
  std::vector<NodeIndex> last;   // last VNF location .. dst
};

struct MappingPlan {
  std::vector<PlannedInstance> instances;
  std::vector<PlannedRoute> routes;
  std::vector<double> arc_load;    // per arc
  std::vector<double> node_cores;  // per node
  std::vector<char> hosts;         // per node
  double objective = 0.0;          // Gbps*hops
  double lp_bound = 0.0;
  double gap = 0.0;
  double mip_gap = 0.0;
  std::string status = "optimal";
  std::string final_mode;
  bool cg_converged = true;

  int nfv_nodes_used() const {
    int c = 0;
    for (char h : hosts) c += h ? 1 : 0;
    return c;
  }
};

struct Violation {
  std::string kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(std::string_view kind) const {
    for (const Violation& v : violations)
      if (v.kind == kind) return true;
    return false;
  }
};

/// Loads recomputed from raw routes; arcs that do not exist are skipped and reported.
struct PlanLoads {
  std::vector<double> arc_load;
  std::vector<double> node_cores;
  std::vector<char> hosts;
  std::vector<Violation> structural;
};

namespace plan_detail {

inline bool near(double a, double b) { return std::abs(a - b) <= 1e-6 * (1.0 + std::abs(a) + std::abs(b)); }

// Adds `gbps` to every arc along `nodes`; records unknown arcs.
inline void charge(const Topology& t, const std::vector<NodeIndex>& nodes, double gbps, std::vector<double>& load,
                   std::vector<Violation>& out, const std::string& what) {
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    auto a = t.find_arc(nodes[i], nodes[i + 1]);
    if (!a) {
      out.push_back({"unknown_arc", what + ": no arc " + t.node(nodes[i]).id + "->" + t.node(nodes[i + 1]).id});
      continue;
    }
    load[*a] += gbps;
  }
}

}  // namespace plan_detail

inline PlanLoads recompute_loads(const ProblemInstance& inst, const MappingPlan& plan) {
  using namespace plan_detail;
  const Topology& t = inst.topology();
  PlanLoads out;
  out.arc_load.assign(t.arc_count(), 0.0);
  out.node_cores.assign(t.node_count(), 0.0);
  out.hosts.assign(t.node_count(), 0);
  std::vector<double> inst_demand(plan.instances.size(), 0.0);
  for (const PlannedRoute& r : plan.routes) {
    if (r.instance < 0 || r.instance >= static_cast<int>(plan.instances.size())) continue;
    inst_demand[r.instance] += r.gbps;
    const std::string what = t.node(r.src).id + "->" + t.node(r.dst).id;
    charge(t, r.first, r.gbps, out.arc_load, out.structural, what + " first segment");
    charge(t, r.last, r.gbps, out.arc_load, out.structural, what + " last segment");
    for (const auto& seg : plan.instances[r.instance].segments)
      charge(t, seg, r.gbps, out.arc_load, out.structural, what + " inter-VNF segment");
  }
  for (std::size_t q = 0; q < plan.instances.size(); ++q) {
    const PlannedInstance& pi = plan.instances[q];
    const auto& fs = inst.chain_vnfs(pi.chain);
    for (std::size_t i = 0; i < pi.locations.size() && i < fs.size(); ++i) {
      out.node_cores[pi.locations[i]] += inst_demand[q] * inst.vnfs()[fs[i]].cores_per_gbps;
      out.hosts[pi.locations[i]] = 1;
    }
  }
  return out;
}

/// Re-derives every plan invariant from its raw routes.
inline ValidationReport validate_plan(const ProblemInstance& inst, const MappingPlan& plan) {
  using namespace plan_detail;
  const Topology& t = inst.topology();
  ValidationReport rep;
  auto flag = [&](std::string kind, std::string detail) { rep.violations.push_back({std::move(kind), std::move(detail)}); };

  for (std::size_t q = 0; q < plan.instances.size(); ++q) {
    const PlannedInstance& pi = plan.instances[q];
    const std::string tag = "instance " + std::to_string(q);
    if (pi.chain < 0 || pi.chain >= static_cast<int>(inst.chains().size())) {
      flag("route_discontinuous", tag + ": unknown chain");
      continue;
    }
    if (static_cast<int>(pi.locations.size()) != inst.chain_length(pi.chain) ||
        pi.segments.size() + 1 != pi.locations.size()) {
      flag("route_discontinuous", tag + ": wrong number of locations or segments");
      continue;
    }
    for (NodeIndex v : pi.locations)
      if (!t.node(v).nfv) flag("location_not_nfv", tag + ": " + t.node(v).id + " is not an NFV node");
    for (std::size_t i = 0; i < pi.segments.size(); ++i) {
      const auto& seg = pi.segments[i];
      if (seg.empty() || seg.front() != pi.locations[i] || seg.back() != pi.locations[i + 1])
        flag("route_discontinuous", tag + ": segment " + std::to_string(i + 1) + " does not join its VNF locations");
    }
  }

  std::set<std::tuple<int, NodeIndex, NodeIndex>> covered;
  for (const PlannedRoute& r : plan.routes) {
    const std::string tag = t.node(r.src).id + "->" + t.node(r.dst).id;
    if (r.instance < 0 || r.instance >= static_cast<int>(plan.instances.size())) {
      flag("route_discontinuous", tag + ": unknown chain instance");
      continue;
    }
    const PlannedInstance& pi = plan.instances[r.instance];
    if (pi.chain != r.chain) flag("route_discontinuous", tag + ": route served by an instance of another chain");
    if (pi.locations.empty()) continue;
    if (r.first.empty() || r.first.front() != r.src || r.first.back() != pi.locations.front())
      flag("route_discontinuous", tag + ": first segment does not run from the source to the first VNF");
    if (r.last.empty() || r.last.front() != pi.locations.back() || r.last.back() != r.dst)
      flag("route_discontinuous", tag + ": last segment does not run from the last VNF to the destination");
    if (!near(r.gbps, inst.demand(r.chain, {r.src, r.dst})))
      flag("missing_demand", tag + ": routed volume differs from the demand");
    if (!covered.insert({r.chain, r.src, r.dst}).second) flag("missing_demand", tag + ": routed twice");
  }
  for (const Demand& d : inst.demands())
    if (!covered.count({d.chain, d.src, d.dst}))
      flag("missing_demand", t.node(d.src).id + "->" + t.node(d.dst).id + " (" + inst.chains()[d.chain].id +
                                 ") has no route");

  const PlanLoads loads = recompute_loads(inst, plan);
  for (const Violation& v : loads.structural) rep.violations.push_back(v);
  double total = 0.0;
  for (ArcIndex a = 0; a < t.arc_count(); ++a) {
    const double cap = t.arc(a).capacity_gbps;
    const double stored = a < static_cast<int>(plan.arc_load.size()) ? plan.arc_load[a] : 0.0;
    total += loads.arc_load[a];
    if (!near(stored, loads.arc_load[a]))
      flag("load_mismatch", t.arc_label(a) + ": stored " + io_detail::format_double(stored) + ", recomputed " +
                                io_detail::format_double(loads.arc_load[a]));
    const double worst = std::max(stored, loads.arc_load[a]);
    if (worst > cap + 1e-7 * (1.0 + cap))
      flag("capacity_exceeded", t.arc_label(a) + ": load " + io_detail::format_double(worst) + " > capacity " +
                                    io_detail::format_double(cap));
  }
  int hosting = 0, stored_hosting = 0;
  for (NodeIndex v = 0; v < t.node_count(); ++v) {
    const double stored = v < static_cast<int>(plan.node_cores.size()) ? plan.node_cores[v] : 0.0;
    if (!near(stored, loads.node_cores[v]))
      flag("cores_mismatch", t.node(v).id + ": stored " + io_detail::format_double(stored) + ", recomputed " +
                                 io_detail::format_double(loads.node_cores[v]));
    const double used = std::max(stored, loads.node_cores[v]);
    if (used > t.node(v).cores + 1e-7 * (1.0 + t.node(v).cores))
      flag("cores_exceeded", t.node(v).id + ": " + io_detail::format_double(used) + " cores used of " +
                                 std::to_string(t.node(v).cores));
    hosting += loads.hosts[v] ? 1 : 0;
    stored_hosting += (v < static_cast<int>(plan.hosts.size()) && plan.hosts[v]) ? 1 : 0;
  }
  const int worst_hosting = std::max(hosting, stored_hosting);
  if (worst_hosting > inst.k())
    flag("k_exceeded", std::to_string(worst_hosting) + " hosting nodes, K=" + std::to_string(inst.k()));
  if (!near(total, plan.objective))
    flag("objective_mismatch", "stored " + io_detail::format_double(plan.objective) + ", sum of arc loads " +
                                   io_detail::format_double(total));
  return rep;
}

/// Fills the aggregate fields of a plan from its routes.
inline void finalize_loads(const ProblemInstance& inst, MappingPlan& plan) {
  PlanLoads loads = recompute_loads(inst, plan);
  plan.arc_load = std::move(loads.arc_load);
  plan.node_cores = std::move(loads.node_cores);
  plan.hosts = std::move(loads.hosts);
  plan.objective = 0.0;
  for (double l : plan.arc_load) plan.objective += l;
}

inline nlohmann::json plan_to_json(const ProblemInstance& inst, const MappingPlan& plan) {
  using nlohmann::json;
  const Topology& t = inst.topology();
  auto ids = [&](const std::vector<NodeIndex>& nodes) {
    json a = json::array();
    for (NodeIndex v : nodes) a.push_back(t.node(v).id);
    return a;
  };
  json doc;
  doc["status"] = plan.status;
  doc["objective_gbps_hops"] = plan.objective;
  doc["lp_bound"] = plan.lp_bound;
  doc["gap"] = plan.gap;
  doc["mip_gap"] = plan.mip_gap;
  doc["final_mode"] = plan.final_mode;
  doc["cg_converged"] = plan.cg_converged;
  doc["k"] = inst.k();
  doc["nfv_nodes_used"] = plan.nfv_nodes_used();
  doc["chain_instances"] = json::array();
  for (const PlannedInstance& pi : plan.instances) {
    json j;
    j["chain"] = inst.chains()[pi.chain].id;
    j["group"] = pi.group;
    j["locations"] = ids(pi.locations);
    j["segments"] = json::array();
    for (const auto& s : pi.segments) j["segments"].push_back(ids(s));
    j["pairs"] = json::array();
    for (const DemandPair& p : pi.pairs) j["pairs"].push_back(json::array({t.node(p.src).id, t.node(p.dst).id}));
    doc["chain_instances"].push_back(std::move(j));
  }
  doc["routes"] = json::array();
  for (const PlannedRoute& r : plan.routes) {
    json j;
    j["src"] = t.node(r.src).id;
    j["dst"] = t.node(r.dst).id;
    j["chain"] = inst.chains()[r.chain].id;
    j["instance"] = r.instance;
    j["gbps"] = r.gbps;
    j["first"] = ids(r.first);
    j["last"] = ids(r.last);
    doc["routes"].push_back(std::move(j));
  }
  doc["arc_loads"] = json::array();
  for (ArcIndex a = 0; a < t.arc_count(); ++a)
    doc["arc_loads"].push_back({{"src", t.node(t.arc(a).src).id},
                                {"dst", t.node(t.arc(a).dst).id},
                                {"load_gbps", a < static_cast<int>(plan.arc_load.size()) ? plan.arc_load[a] : 0.0}});
  doc["nodes"] = json::array();
  for (NodeIndex v = 0; v < t.node_count(); ++v)
    doc["nodes"].push_back({{"id", t.node(v).id},
                            {"cores_used", v < static_cast<int>(plan.node_cores.size()) ? plan.node_cores[v] : 0.0},
                            {"hosts_vnfs", v < static_cast<int>(plan.hosts.size()) && plan.hosts[v]}});
  return doc;
}

inline MappingPlan plan_from_json(const ProblemInstance& inst, const nlohmann::json& doc) {
  const Topology& t = inst.topology();
  auto node = [&](const nlohmann::json& j) {
    if (!j.is_string()) throw ParseError("plan: node ids must be strings");
    auto v = t.find_node(j.get<std::string>());
    if (!v) throw ParseError("plan references unknown node '" + j.get<std::string>() + "'");
    return *v;
  };
  auto nodes = [&](const nlohmann::json& j) {
    if (!j.is_array()) throw ParseError("plan: expected a node list");
    std::vector<NodeIndex> out;
    for (const auto& x : j) out.push_back(node(x));
    return out;
  };
  auto chain = [&](const nlohmann::json& j) {
    if (!j.is_string()) throw ParseError("plan: chain ids must be strings");
    auto c = inst.find_chain(j.get<std::string>());
    if (!c) throw ParseError("plan references unknown chain '" + j.get<std::string>() + "'");
    return *c;
  };
  try {
    MappingPlan plan;
    if (!doc.is_object()) throw ParseError("plan: top level must be an object");
    plan.status = doc.value("status", std::string("optimal"));
    plan.objective = doc.at("objective_gbps_hops").get<double>();
    plan.lp_bound = doc.value("lp_bound", 0.0);
    plan.gap = doc.value("gap", 0.0);
    plan.mip_gap = doc.value("mip_gap", 0.0);
    plan.final_mode = doc.value("final_mode", std::string());
    plan.cg_converged = doc.value("cg_converged", true);
    for (const auto& j : doc.at("chain_instances")) {
      PlannedInstance pi;
      pi.chain = chain(j.at("chain"));
      pi.group = j.value("group", 0);
      pi.locations = nodes(j.at("locations"));
      for (const auto& s : j.at("segments")) pi.segments.push_back(nodes(s));
      for (const auto& p : j.value("pairs", nlohmann::json::array())) {
        auto pn = nodes(p);
        if (pn.size() != 2) throw ParseError("plan: pair entries need two nodes");
        pi.pairs.push_back({pn[0], pn[1]});
      }
      plan.instances.push_back(std::move(pi));
    }
    for (const auto& j : doc.at("routes")) {
      PlannedRoute r;
      r.src = node(j.at("src"));
      r.dst = node(j.at("dst"));
      r.chain = chain(j.at("chain"));
      r.instance = j.at("instance").get<int>();
      r.gbps = j.at("gbps").get<double>();
      r.first = nodes(j.at("first"));
      r.last = nodes(j.at("last"));
      plan.routes.push_back(std::move(r));
    }
    plan.arc_load.assign(t.arc_count(), 0.0);
    for (const auto& j : doc.at("arc_loads")) {
      const NodeIndex a = node(j.at("src"));
      const NodeIndex b = node(j.at("dst"));
      auto arc = t.find_arc(a, b);
      if (!arc) throw ParseError("plan lists a load on missing arc " + t.node(a).id + "->" + t.node(b).id);
      plan.arc_load[*arc] = j.at("load_gbps").get<double>();
    }
    plan.node_cores.assign(t.node_count(), 0.0);
    plan.hosts.assign(t.node_count(), 0);
    for (const auto& j : doc.at("nodes")) {
      const NodeIndex v = node(j.at("id"));
      plan.node_cores[v] = j.at("cores_used").get<double>();
      plan.hosts[v] = j.at("hosts_vnfs").get<bool>() ? 1 : 0;
    }
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("plan: ") + e.what());
  }
}

}  // namespace scmap
