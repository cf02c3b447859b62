#pragma once

// Network, service-chain and demand model plus the file formats that feed it.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <compare>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "scmap/error.hpp"

namespace scmap {

using NodeIndex = int;
using ArcIndex = int;

struct NodeSpec {
  std::string id;
  bool nfv = false;
  int cores = 0;

  bool operator==(const NodeSpec&) const = default;
};

/// Undirected link as written in the topology file.
struct LinkSpec {
  std::string a;
  std::string b;
  double capacity_gbps = 0.0;

  bool operator==(const LinkSpec&) const = default;
};

/// Directed arc; every link yields arcs 2k (a->b) and 2k+1 (b->a).
struct ArcSpec {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  double capacity_gbps = 0.0;

  bool operator==(const ArcSpec&) const = default;
};

class Topology {
 public:
  Topology() = default;

  // Nodes are stored sorted by id, so index order is the lexicographic
  // order every tie-break in the solver relies on.
  Topology(std::string name, std::vector<NodeSpec> nodes, std::vector<LinkSpec> links)
      : name_(std::move(name)), nodes_(std::move(nodes)), links_(std::move(links)) {
    std::sort(nodes_.begin(), nodes_.end(),
              [](const NodeSpec& x, const NodeSpec& y) { return x.id < y.id; });
    if (nodes_.empty()) throw ValidationError("topology '" + name_ + "' has no nodes");
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].id.empty()) throw ValidationError("node with empty id");
      if (i > 0 && nodes_[i].id == nodes_[i - 1].id)
        throw ValidationError("duplicate node id '" + nodes_[i].id + "'");
      if (nodes_[i].cores < 0)
        throw ValidationError("node '" + nodes_[i].id + "' has negative cores");
    }
    const int n = node_count();
    out_.assign(n, {});
    in_.assign(n, {});
    for (const LinkSpec& link : links_) {
      const auto a = find_node(link.a);
      const auto b = find_node(link.b);
      if (!a) throw ValidationError("link references unknown node '" + link.a + "'");
      if (!b) throw ValidationError("link references unknown node '" + link.b + "'");
      if (*a == *b) throw ValidationError("self-loop link at node '" + link.a + "'");
      if (!(link.capacity_gbps > 0.0) || !std::isfinite(link.capacity_gbps))
        throw ValidationError("link " + link.a + "-" + link.b + " has nonpositive capacity");
      if (find_arc(*a, *b))
        throw ValidationError("duplicate link " + link.a + "-" + link.b);
      add_arc(*a, *b, link.capacity_gbps);
      add_arc(*b, *a, link.capacity_gbps);
    }
    auto by_dst = [this](ArcIndex x, ArcIndex y) { return arcs_[x].dst < arcs_[y].dst; };
    auto by_src = [this](ArcIndex x, ArcIndex y) { return arcs_[x].src < arcs_[y].src; };
    for (auto& list : out_) std::sort(list.begin(), list.end(), by_dst);
    for (auto& list : in_) std::sort(list.begin(), list.end(), by_src);
    if (!strongly_connected())
      throw ValidationError("topology '" + name_ + "' is not connected");
  }

  const std::string& name() const { return name_; }
  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const std::vector<LinkSpec>& links() const { return links_; }
  const std::vector<ArcSpec>& arcs() const { return arcs_; }
  const NodeSpec& node(NodeIndex v) const { return nodes_.at(v); }
  const ArcSpec& arc(ArcIndex a) const { return arcs_.at(a); }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int arc_count() const { return static_cast<int>(arcs_.size()); }
  const std::vector<ArcIndex>& out_arcs(NodeIndex v) const { return out_.at(v); }
  const std::vector<ArcIndex>& in_arcs(NodeIndex v) const { return in_.at(v); }

  std::optional<NodeIndex> find_node(std::string_view id) const {
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), id,
                               [](const NodeSpec& n, std::string_view key) { return n.id < key; });
    if (it == nodes_.end() || it->id != id) return std::nullopt;
    return static_cast<NodeIndex>(it - nodes_.begin());
  }

  NodeIndex node_index(std::string_view id) const {
    if (auto v = find_node(id)) return *v;
    throw ValidationError("unknown node '" + std::string(id) + "'");
  }

  std::optional<ArcIndex> find_arc(NodeIndex u, NodeIndex v) const {
    for (ArcIndex a : out_.at(u))
      if (arcs_[a].dst == v) return a;
    return std::nullopt;
  }

  std::vector<NodeIndex> nfv_nodes() const {
    std::vector<NodeIndex> out;
    for (NodeIndex v = 0; v < node_count(); ++v)
      if (nodes_[v].nfv) out.push_back(v);
    return out;
  }

  std::string arc_label(ArcIndex a) const {
    return nodes_[arcs_[a].src].id + "->" + nodes_[arcs_[a].dst].id;
  }

  bool operator==(const Topology& other) const {
    return name_ == other.name_ && nodes_ == other.nodes_ && links_ == other.links_;
  }

 private:
  void add_arc(NodeIndex u, NodeIndex v, double cap) {
    const auto idx = static_cast<ArcIndex>(arcs_.size());
    arcs_.push_back({u, v, cap});
    out_[u].push_back(idx);
    in_[v].push_back(idx);
  }

  // Links are bidirectional, so reachability from node 0 suffices.
  bool strongly_connected() const {
    std::vector<char> seen(nodes_.size(), 0);
    std::vector<NodeIndex> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const NodeIndex u = stack.back();
      stack.pop_back();
      for (ArcIndex a : out_[u]) {
        if (!seen[arcs_[a].dst]) {
          seen[arcs_[a].dst] = 1;
          stack.push_back(arcs_[a].dst);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  }

  std::string name_;
  std::vector<NodeSpec> nodes_;
  std::vector<LinkSpec> links_;
  std::vector<ArcSpec> arcs_;
  std::vector<std::vector<ArcIndex>> out_;
  std::vector<std::vector<ArcIndex>> in_;
};

struct VnfSpec {
  std::string id;
  double cores_per_gbps = 0.0;

  bool operator==(const VnfSpec&) const = default;
};

struct ChainSpec {
  std::string id;
  std::vector<std::string> vnfs;

  bool operator==(const ChainSpec&) const = default;
};

struct Catalog {
  std::vector<VnfSpec> vnfs;
  std::vector<ChainSpec> chains;
};

/// One row of the demands file, ids unresolved.
struct DemandRecord {
  std::string src;
  std::string dst;
  std::string chain;
  double gbps = 0.0;

  bool operator==(const DemandRecord&) const = default;
};

struct DemandPair {
  NodeIndex src = 0;
  NodeIndex dst = 0;

  auto operator<=>(const DemandPair&) const = default;
};

struct Demand {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  int chain = 0;
  double gbps = 0.0;

  bool operator==(const Demand&) const = default;
};

/// Instances per chain: a uniform value with optional per-chain overrides.
struct NcSpec {
  int uniform = 1;
  std::map<std::string, int> per_chain;

  /// Accepts "4", "sc1=2,sc2=3" or a mix such as "4,sc2=8".
  static NcSpec parse(std::string_view text) {
    NcSpec spec;
    std::size_t pos = 0;
    bool any = false;
    while (pos <= text.size()) {
      const std::size_t comma = std::min(text.find(',', pos), text.size());
      std::string_view token = text.substr(pos, comma - pos);
      pos = comma + 1;
      if (token.empty()) throw ParseError("empty entry in --nc value");
      any = true;
      const std::size_t eq = token.find('=');
      std::string_view num = eq == std::string_view::npos ? token : token.substr(eq + 1);
      int value = 0;
      auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), value);
      if (ec != std::errc() || ptr != num.data() + num.size())
        throw ParseError("bad instance count '" + std::string(num) + "'");
      if (eq == std::string_view::npos) {
        spec.uniform = value;
      } else {
        spec.per_chain[std::string(token.substr(0, eq))] = value;
      }
      if (comma == text.size()) break;
    }
    if (!any) throw ParseError("empty --nc value");
    return spec;
  }

  int for_chain(const std::string& id) const {
    auto it = per_chain.find(id);
    return it == per_chain.end() ? uniform : it->second;
  }
};

class ProblemInstance {
 public:
  ProblemInstance() = default;

  ProblemInstance(Topology topology, Catalog catalog, const std::vector<DemandRecord>& records,
                  int k, const NcSpec& nc)
      : topology_(std::move(topology)), vnfs_(std::move(catalog.vnfs)),
        chains_(std::move(catalog.chains)), k_(k) {
    std::sort(vnfs_.begin(), vnfs_.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
    std::sort(chains_.begin(), chains_.end(),
              [](const auto& x, const auto& y) { return x.id < y.id; });
    for (std::size_t i = 0; i < vnfs_.size(); ++i) {
      if (i > 0 && vnfs_[i].id == vnfs_[i - 1].id)
        throw ValidationError("duplicate vnf id '" + vnfs_[i].id + "'");
      if (!std::isfinite(vnfs_[i].cores_per_gbps) || vnfs_[i].cores_per_gbps < 0.0)
        throw ValidationError("vnf '" + vnfs_[i].id + "' has invalid cores_per_gbps");
    }
    chain_vnfs_.resize(chains_.size());
    for (std::size_t c = 0; c < chains_.size(); ++c) {
      if (c > 0 && chains_[c].id == chains_[c - 1].id)
        throw ValidationError("duplicate chain id '" + chains_[c].id + "'");
      if (chains_[c].vnfs.empty())
        throw ValidationError("chain '" + chains_[c].id + "' has no vnfs");
      for (const auto& f : chains_[c].vnfs) {
        auto idx = find_vnf(f);
        if (!idx) throw ValidationError("chain '" + chains_[c].id + "' references unknown vnf '" + f + "'");
        chain_vnfs_[c].push_back(*idx);
      }
    }
    std::map<std::tuple<int, NodeIndex, NodeIndex>, std::size_t> seen;
    for (std::size_t r = 0; r < records.size(); ++r) {
      const DemandRecord& rec = records[r];
      const std::string where = "demand row " + std::to_string(r + 1);
      auto s = topology_.find_node(rec.src);
      auto d = topology_.find_node(rec.dst);
      auto c = find_chain(rec.chain);
      if (!s) throw ValidationError(where + ": unknown source node '" + rec.src + "'");
      if (!d) throw ValidationError(where + ": unknown destination node '" + rec.dst + "'");
      if (!c) throw ValidationError(where + ": unknown chain '" + rec.chain + "'");
      if (*s == *d) throw ValidationError(where + ": source equals destination ('" + rec.src + "')");
      if (!(rec.gbps > 0.0) || !std::isfinite(rec.gbps))
        throw ValidationError(where + ": demand must be positive");
      if (!seen.emplace(std::tuple{*c, *s, *d}, r).second)
        throw ValidationError(where + ": duplicate (src,dst,chain) triple");
      demands_.push_back({*s, *d, *c, rec.gbps});
    }
    std::sort(demands_.begin(), demands_.end(), [](const Demand& x, const Demand& y) {
      return std::tie(x.chain, x.src, x.dst) < std::tie(y.chain, y.src, y.dst);
    });

    const int nfv_count = static_cast<int>(topology_.nfv_nodes().size());
    if (nfv_count == 0) throw ValidationError("topology has no NFV node");
    if (k_ < 1) throw ValidationError("k must be at least 1");
    if (k_ > nfv_count)
      throw ValidationError("k=" + std::to_string(k_) + " exceeds the number of NFV nodes (" +
                            std::to_string(nfv_count) + ")");
    for (const auto& [id, _] : nc.per_chain)
      if (!find_chain(id)) throw ValidationError("--nc names unknown chain '" + id + "'");
    nc_.resize(chains_.size());
    for (std::size_t c = 0; c < chains_.size(); ++c) {
      const int requested = nc.for_chain(chains_[c].id);
      if (requested < 1)
        throw ValidationError("instance count for chain '" + chains_[c].id + "' must be positive");
      const int pairs = static_cast<int>(demand_pairs(static_cast<int>(c)).size());
      nc_[c] = requested;
      if (pairs > 0 && requested > pairs) {
        nc_[c] = pairs;
        warnings_.push_back("chain '" + chains_[c].id + "': nc=" + std::to_string(requested) +
                            " clamped to " + std::to_string(pairs) + " demand pairs");
      }
    }
  }

  const Topology& topology() const { return topology_; }
  const std::vector<VnfSpec>& vnfs() const { return vnfs_; }
  const std::vector<ChainSpec>& chains() const { return chains_; }
  const std::vector<Demand>& demands() const { return demands_; }
  int k() const { return k_; }
  int nc(int chain) const { return nc_.at(chain); }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// VNF catalog indices of a chain's positions.
  const std::vector<int>& chain_vnfs(int chain) const { return chain_vnfs_.at(chain); }
  int chain_length(int chain) const { return static_cast<int>(chain_vnfs_.at(chain).size()); }

  std::optional<int> find_chain(std::string_view id) const {
    for (std::size_t c = 0; c < chains_.size(); ++c)
      if (chains_[c].id == id) return static_cast<int>(c);
    return std::nullopt;
  }
  std::optional<int> find_vnf(std::string_view id) const {
    for (std::size_t f = 0; f < vnfs_.size(); ++f)
      if (vnfs_[f].id == id) return static_cast<int>(f);
    return std::nullopt;
  }
  int chain_index(std::string_view id) const {
    if (auto c = find_chain(id)) return *c;
    throw ValidationError("unknown chain '" + std::string(id) + "'");
  }

  /// Sorted demand pairs of one chain (the SD_c set).
  std::vector<DemandPair> demand_pairs(int chain) const {
    std::vector<DemandPair> out;
    for (const Demand& d : demands_)
      if (d.chain == chain) out.push_back({d.src, d.dst});
    return out;
  }

  double demand(int chain, DemandPair pair) const {
    auto it = std::lower_bound(demands_.begin(), demands_.end(), std::tuple{chain, pair.src, pair.dst},
                               [](const Demand& d, const std::tuple<int, NodeIndex, NodeIndex>& key) {
                                 return std::tie(d.chain, d.src, d.dst) < key;
                               });
    if (it == demands_.end() || it->chain != chain || it->src != pair.src || it->dst != pair.dst)
      return 0.0;
    return it->gbps;
  }

  std::vector<DemandRecord> demand_records() const {
    std::vector<DemandRecord> out;
    for (const Demand& d : demands_)
      out.push_back({topology_.node(d.src).id, topology_.node(d.dst).id, chains_[d.chain].id, d.gbps});
    return out;
  }

  /// Copy with a different K and instance-count spec; demands and topology are shared values.
  ProblemInstance with_parameters(int k, const NcSpec& nc) const {
    return ProblemInstance(topology_, Catalog{vnfs_, chains_}, demand_records(), k, nc);
  }

  ProblemInstance with_topology(Topology topology) const {
    NcSpec spec;
    for (std::size_t c = 0; c < chains_.size(); ++c) spec.per_chain[chains_[c].id] = nc_[c];
    return ProblemInstance(std::move(topology), Catalog{vnfs_, chains_}, demand_records(), k_, spec);
  }

  bool operator==(const ProblemInstance& other) const {
    return topology_ == other.topology_ && vnfs_ == other.vnfs_ && chains_ == other.chains_ &&
           demands_ == other.demands_ && k_ == other.k_ && nc_ == other.nc_;
  }

 private:
  Topology topology_;
  std::vector<VnfSpec> vnfs_;
  std::vector<ChainSpec> chains_;
  std::vector<std::vector<int>> chain_vnfs_;
  std::vector<Demand> demands_;
  int k_ = 1;
  std::vector<int> nc_;
  std::vector<std::string> warnings_;
};

/// Overall traffic of a chain, optionally restricted to a subset of its pairs.
inline double total_demand(const ProblemInstance& instance, std::string_view chain,
                           std::optional<std::span<const DemandPair>> pairs = std::nullopt) {
  const int c = instance.chain_index(chain);
  double sum = 0.0;
  if (!pairs) {
    for (const Demand& d : instance.demands())
      if (d.chain == c) sum += d.gbps;
    return sum;
  }
  for (const DemandPair& p : *pairs) sum += instance.demand(c, p);
  return sum;
}

// ---------------------------------------------------------------------------
// File formats

namespace io_detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json parse_json(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source + ": " + e.what());
  }
}

template <typename T>
T field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

inline const nlohmann::json& array_field(const nlohmann::json& obj, const char* key,
                                         const std::string& where) {
  if (!obj.is_object() || !obj.contains(key) || !obj.at(key).is_array())
    throw ParseError(where + ": missing array '" + key + "'");
  return obj.at(key);
}

inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace io_detail

inline Topology parse_topology(const std::string& text, const std::string& source = "topology") {
  using io_detail::field;
  const auto doc = io_detail::parse_json(text, source);
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  const auto& jn = io_detail::array_field(doc, "nodes", source);
  for (std::size_t i = 0; i < jn.size(); ++i) {
    const std::string where = source + ": nodes[" + std::to_string(i) + "]";
    const auto& n = jn[i];
    const bool nfv = n.contains("nfv") ? field<bool>(n, "nfv", where) : false;
    int cores = 0;
    if (n.contains("cores")) {
      if (!n.at("cores").is_number_integer()) throw ParseError(where + ": field 'cores' must be an integer");
      cores = n.at("cores").get<int>();
    }
    nodes.push_back({field<std::string>(n, "id", where), nfv, cores});
  }
  const auto& jl = io_detail::array_field(doc, "links", source);
  for (std::size_t i = 0; i < jl.size(); ++i) {
    const std::string where = source + ": links[" + std::to_string(i) + "]";
    const auto& l = jl[i];
    links.push_back({field<std::string>(l, "a", where), field<std::string>(l, "b", where),
                     field<double>(l, "capacity_gbps", where)});
  }
  const std::string name = doc.contains("name") ? field<std::string>(doc, "name", source) : "";
  return Topology(name, std::move(nodes), std::move(links));
}

inline Catalog parse_chains(const std::string& text, const std::string& source = "chains") {
  using io_detail::field;
  const auto doc = io_detail::parse_json(text, source);
  Catalog cat;
  const auto& jv = io_detail::array_field(doc, "vnfs", source);
  for (std::size_t i = 0; i < jv.size(); ++i) {
    const std::string where = source + ": vnfs[" + std::to_string(i) + "]";
    cat.vnfs.push_back({field<std::string>(jv[i], "id", where), field<double>(jv[i], "cores_per_gbps", where)});
  }
  const auto& jc = io_detail::array_field(doc, "chains", source);
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string where = source + ": chains[" + std::to_string(i) + "]";
    cat.chains.push_back(
        {field<std::string>(jc[i], "id", where), field<std::vector<std::string>>(jc[i], "vnfs", where)});
  }
  return cat;
}

inline std::vector<DemandRecord> parse_demands(const std::string& text,
                                               const std::string& source = "demands") {
  std::vector<DemandRecord> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    const std::string where = source + ":" + std::to_string(line_no);
    if (!header_seen) {
      if (cells != std::vector<std::string>{"src", "dst", "chain", "gbps"})
        throw ParseError(where + ": expected header 'src,dst,chain,gbps'");
      header_seen = true;
      continue;
    }
    if (cells.size() != 4)
      throw ParseError(where + ": expected 4 fields, got " + std::to_string(cells.size()));
    double gbps = 0.0;
    const std::string& g = cells[3];
    auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), gbps);
    if (ec != std::errc() || ptr != g.data() + g.size())
      throw ParseError(where + ": field 'gbps' is not a number ('" + g + "')");
    for (int i = 0; i < 3; ++i)
      if (cells[i].empty()) throw ParseError(where + ": empty field " + std::to_string(i + 1));
    out.push_back({cells[0], cells[1], cells[2], gbps});
  }
  if (!header_seen) throw ParseError(source + ": empty demands file");
  return out;
}

inline std::string topology_to_json(const Topology& t) {
  nlohmann::json doc;
  doc["name"] = t.name();
  doc["nodes"] = nlohmann::json::array();
  for (const auto& n : t.nodes()) doc["nodes"].push_back({{"id", n.id}, {"nfv", n.nfv}, {"cores", n.cores}});
  doc["links"] = nlohmann::json::array();
  for (const auto& l : t.links())
    doc["links"].push_back({{"a", l.a}, {"b", l.b}, {"capacity_gbps", l.capacity_gbps}});
  return doc.dump(2);
}

inline std::string chains_to_json(const ProblemInstance& inst) {
  nlohmann::json doc;
  doc["vnfs"] = nlohmann::json::array();
  for (const auto& f : inst.vnfs()) doc["vnfs"].push_back({{"id", f.id}, {"cores_per_gbps", f.cores_per_gbps}});
  doc["chains"] = nlohmann::json::array();
  for (const auto& c : inst.chains()) doc["chains"].push_back({{"id", c.id}, {"vnfs", c.vnfs}});
  return doc.dump(2);
}

inline std::string demands_to_csv(const ProblemInstance& inst) {
  std::string out = "src,dst,chain,gbps\n";
  for (const auto& r : inst.demand_records())
    out += r.src + "," + r.dst + "," + r.chain + "," + io_detail::format_double(r.gbps) + "\n";
  return out;
}

inline ProblemInstance load_instance(const std::string& topology_path, const std::string& chains_path,
                                     const std::string& demands_path, int k, const NcSpec& nc) {
  Topology topo = parse_topology(io_detail::read_file(topology_path), topology_path);
  Catalog cat = parse_chains(io_detail::read_file(chains_path), chains_path);
  auto records = parse_demands(io_detail::read_file(demands_path), demands_path);
  return ProblemInstance(std::move(topo), std::move(cat), records, k, nc);
}

}  // namespace scmap
