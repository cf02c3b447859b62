#pragma once

// Best-bound branch-and-bound over the simplex kernel, for mixed-integer
// programs with a few hundred integer variables at most.

#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "scmap/simplex.hpp"

namespace scmap::lp {

enum class MipStatus {
  optimal,     // incumbent proven optimal within tolerance
  feasible,    // limit reached with an incumbent; see gap
  infeasible,  // proven: no integer solution
  no_solution  // limit reached before any incumbent was found
};

inline const char* to_string(MipStatus s) {
  switch (s) {
    case MipStatus::optimal: return "optimal";
    case MipStatus::feasible: return "feasible";
    case MipStatus::infeasible: return "infeasible";
    case MipStatus::no_solution: return "no_solution";
  }
  return "?";
}

struct MipOptions {
  double time_limit_s = 60.0;
  long node_limit = 200000;
  double integrality_tol = 1e-6;
  double feasibility_tol = 1e-7;
  /// Optional starting incumbent; ignored unless it is feasible and integral.
  std::optional<std::vector<double>> start;
  SimplexOptions simplex;
};

struct MipSolution {
  MipStatus status = MipStatus::no_solution;
  std::vector<double> values;
  double objective = kInfinity;
  double bound = -kInfinity;       // best proven lower bound
  double root_bound = -kInfinity;  // root LP relaxation
  double gap = kInfinity;          // (objective - bound) / max(1, |objective|)
  long nodes = 0;                  // branch nodes created beyond the root
  bool limit_hit = false;
  bool start_used = false;
  /// (incumbent objective, global bound) each time either improves.
  std::vector<std::pair<double, double>> trace;
  /// Infeasible rows reported by the root relaxation, if any.
  std::vector<std::string> infeasibilities;
};

/// True when `x` satisfies bounds, rows and integrality of `lp`.
inline bool is_feasible_point(const LinearProgram& lp, std::span<const double> x, double feas_tol = 1e-7,
                              double int_tol = 1e-6) {
  if (static_cast<int>(x.size()) != lp.num_variables()) return false;
  for (int j = 0; j < lp.num_variables(); ++j) {
    const Variable& v = lp.variable(j);
    if (x[j] < v.lower - feas_tol || x[j] > v.upper + feas_tol) return false;
    if (v.integer && std::abs(x[j] - std::round(x[j])) > int_tol) return false;
  }
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const Constraint& c = lp.constraint(i);
    const double act = lp.row_activity(i, x);
    const double tol = feas_tol * (1.0 + std::abs(c.rhs));
    if (c.relation != Relation::greater_equal && act > c.rhs + tol) return false;
    if (c.relation != Relation::less_equal && act < c.rhs - tol) return false;
  }
  return true;
}

namespace mip_detail {

struct BoundChange {
  int var;
  double lower;
  double upper;
};

struct Node {
  std::vector<BoundChange> changes;  // cumulative from the root
  double parent_bound = -kInfinity;
  std::shared_ptr<const Basis> basis;
};

}  // namespace mip_detail

inline MipSolution solve_mip(const LinearProgram& lp, const MipOptions& opt = {}) {
  using namespace mip_detail;
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  MipSolution out;
  const int n = lp.num_variables();

  auto gap_tol = [](double inc) { return 1e-6 * std::max(1.0, std::abs(inc)); };
  double running_bound = -kInfinity;
  std::multimap<std::pair<double, long>, mip_detail::Node>* open_ptr = nullptr;
  // Global bound is the smallest open subtree bound; any max of valid bounds stays valid.
  auto record = [&]() {
    double b = out.objective;
    if (open_ptr && !open_ptr->empty()) b = std::min(b, open_ptr->begin()->first.first);
    running_bound = std::max({running_bound, b, out.root_bound});
    out.trace.emplace_back(out.objective, running_bound);
  };

  if (opt.start && is_feasible_point(lp, *opt.start, opt.feasibility_tol, opt.integrality_tol)) {
    out.values = *opt.start;
    for (int j = 0; j < n; ++j)
      if (lp.variable(j).integer) out.values[j] = std::round(out.values[j]);
    out.objective = lp.objective_value(out.values);
    out.start_used = true;
  }

  Simplex solver(lp, opt.simplex);
  std::vector<double> root_lower(n), root_upper(n);
  for (int j = 0; j < n; ++j) {
    root_lower[j] = lp.variable(j).lower;
    root_upper[j] = lp.variable(j).upper;
  }
  std::vector<int> touched;
  std::vector<char> is_touched(n, 0);

  auto apply = [&](const Node& node) {
    for (int j : touched) {
      solver.set_bounds(j, root_lower[j], root_upper[j]);
      is_touched[j] = 0;
    }
    touched.clear();
    for (const BoundChange& bc : node.changes) {
      solver.set_bounds(bc.var, bc.lower, bc.upper);
      if (!is_touched[bc.var]) {
        is_touched[bc.var] = 1;
        touched.push_back(bc.var);
      }
    }
    if (node.basis) solver.load_basis(*node.basis);
  };

  // Best-bound queue; the sequence number makes ties deterministic.
  std::multimap<std::pair<double, long>, Node> open;
  long seq = 0;
  open_ptr = &open;
  bool proof_lost = false;
  std::optional<Node> current = Node{};
  bool at_root = true;

  while (true) {
    if (!current) {
      if (open.empty()) break;
      auto it = open.begin();
      if (it->first.first >= out.objective - gap_tol(out.objective)) {
        open.clear();
        break;
      }
      current = std::move(it->second);
      open.erase(it);
    }
    const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!at_root && (out.nodes >= opt.node_limit || elapsed >= opt.time_limit_s)) {
      out.limit_hit = true;
      open.emplace(std::pair{current->parent_bound, seq++}, std::move(*current));
      current.reset();
      break;
    }

    apply(*current);
    LpSolution sol = solver.solve();
    if (sol.status == LpStatus::stalled) {
      // Retry once from a cold start before giving up on this node.
      Simplex cold(lp, opt.simplex);
      for (const BoundChange& bc : current->changes) cold.set_bounds(bc.var, bc.lower, bc.upper);
      sol = cold.solve();
    }
    if (at_root) {
      at_root = false;
      if (sol.status == LpStatus::infeasible) {
        out.status = MipStatus::infeasible;
        out.infeasibilities = sol.infeasibilities;
        return out;
      }
      if (sol.status == LpStatus::optimal) out.root_bound = sol.objective;
    }
    if (sol.status == LpStatus::infeasible) {
      current.reset();
      continue;
    }
    if (sol.status != LpStatus::optimal) {
      // Unbounded relaxations cannot occur for bounded models; stalls lose the proof.
      proof_lost = true;
      current.reset();
      continue;
    }
    if (sol.objective >= out.objective - gap_tol(out.objective)) {
      current.reset();
      continue;
    }

    int branch = -1;
    double most = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!lp.variable(j).integer) continue;
      const double f = sol.values[j] - std::floor(sol.values[j]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > opt.integrality_tol && dist > most + 1e-12) {
        most = dist;
        branch = j;
      }
    }
    if (branch < 0) {
      out.values = sol.values;
      for (int j = 0; j < n; ++j)
        if (lp.variable(j).integer) out.values[j] = std::round(out.values[j]);
      out.objective = lp.objective_value(out.values);
      record();
      current.reset();
      continue;
    }

    const double v = sol.values[branch];
    auto basis = std::make_shared<const Basis>(sol.basis);
    double cur_lo = root_lower[branch], cur_up = root_upper[branch];
    for (const BoundChange& bc : current->changes) {
      if (bc.var == branch) {
        cur_lo = bc.lower;
        cur_up = bc.upper;
      }
    }
    Node down{current->changes, sol.objective, basis};
    down.changes.push_back({branch, cur_lo, std::floor(v)});
    Node up{std::move(current->changes), sol.objective, basis};
    up.changes.push_back({branch, std::ceil(v), cur_up});
    out.nodes += 2;
    // Plunge into the child nearer to the fractional value; the solver
    // already holds the parent basis, so that child needs no reload.
    const bool go_up = v - std::floor(v) >= 0.5;
    Node& dive = go_up ? up : down;
    Node& park = go_up ? down : up;
    open.emplace(std::pair{park.parent_bound, seq++}, std::move(park));
    dive.basis.reset();
    current = std::move(dive);
  }

  double open_bound = out.objective;
  for (const auto& [key, node] : open) open_bound = std::min(open_bound, key.first);
  if (out.values.empty()) {
    out.status = (out.limit_hit || proof_lost) ? MipStatus::no_solution : MipStatus::infeasible;
    out.bound = out.limit_hit ? open_bound : kInfinity;
    return out;
  }
  out.bound = std::max({out.root_bound, running_bound, std::min(open_bound, out.objective)});
  if (proof_lost && !out.limit_hit) out.bound = std::min(out.bound, out.root_bound);
  out.gap = std::max(0.0, (out.objective - out.bound) / std::max(1.0, std::abs(out.objective)));
  out.status = (out.limit_hit || proof_lost) && out.gap > 1e-9 ? MipStatus::feasible : MipStatus::optimal;
  if (out.status == MipStatus::optimal) out.gap = std::max(0.0, out.gap);
  record();
  return out;
}

/// Backend seam so an external LP/MILP engine can replace the built-in kernel.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;
  virtual LpSolution solve_lp(const LinearProgram& lp, const Basis* warm_start) = 0;
  virtual MipSolution solve_mip(const LinearProgram& lp, const MipOptions& opt) = 0;
};

class BuiltinBackend : public SolverBackend {
 public:
  explicit BuiltinBackend(SimplexOptions opt = {}) : opt_(opt) {}
  LpSolution solve_lp(const LinearProgram& lp, const Basis* warm_start) override {
    return lp::solve_lp(lp, opt_, warm_start);
  }
  MipSolution solve_mip(const LinearProgram& lp, const MipOptions& opt) override { return lp::solve_mip(lp, opt); }

 private:
  SimplexOptions opt_;
};

}  // namespace scmap::lp
