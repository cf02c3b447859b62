#pragma once

// Bounded-variable revised primal simplex for desk-scale linear programs.
//
// Every row i gets a logical variable r_i with a_i x + r_i = b_i, bounded
// by the row relation (<=: r >= 0, >=: r <= 0, =: r = 0), so the all-logical
// basis is always available. Phase I minimises the sum of bound
// violations of basic variables (composite objective), which also lets any
// warm-start basis be repaired after bound changes. The basis inverse is
// kept dense and updated in product form, with periodic refactorisation.
//
// Dual sign convention (minimisation): y is c_B B^-1, so a <= row has
// y <= 0, a >= row has y >= 0, and an equality row is free. Reduced cost
// d_j = c_j - y^T a_j.

#include <algorithm>
#include <cmath>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scmap/error.hpp"

namespace scmap::lp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class Relation { less_equal, equal, greater_equal };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInfinity;
  double cost = 0.0;
  bool integer = false;
};

struct Term {
  int var = 0;
  double coef = 0.0;
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::less_equal;
  double rhs = 0.0;
};

class LinearProgram {
 public:
  int add_variable(std::string name, double lower, double upper, double cost, bool integer = false) {
    vars_.push_back({std::move(name), lower, upper, cost, integer});
    return static_cast<int>(vars_.size()) - 1;
  }

  int add_constraint(std::string name, Relation rel, double rhs, std::vector<Term> terms = {}) {
    rows_.push_back({std::move(name), std::move(terms), rel, rhs});
    return static_cast<int>(rows_.size()) - 1;
  }

  void add_term(int row, int var, double coef) { rows_.at(row).terms.push_back({var, coef}); }

  int num_variables() const { return static_cast<int>(vars_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }
  const Variable& variable(int j) const { return vars_.at(j); }
  Variable& variable(int j) { return vars_.at(j); }
  const Constraint& constraint(int i) const { return rows_.at(i); }
  Constraint& constraint(int i) { return rows_.at(i); }
  const std::vector<Variable>& variables() const { return vars_; }
  const std::vector<Constraint>& constraints() const { return rows_; }

  void validate() const {
    for (const Variable& v : vars_) {
      if (!std::isfinite(v.lower)) throw ModelError("variable '" + v.name + "' needs a finite lower bound");
      if (std::isnan(v.upper) || v.upper < v.lower)
        throw ModelError("variable '" + v.name + "' has inconsistent bounds");
      if (!std::isfinite(v.cost)) throw ModelError("variable '" + v.name + "' has a non-finite cost");
    }
    for (const Constraint& c : rows_) {
      if (!std::isfinite(c.rhs)) throw ModelError("row '" + c.name + "' has a non-finite rhs");
      for (const Term& t : c.terms) {
        if (t.var < 0 || t.var >= num_variables())
          throw ModelError("row '" + c.name + "' references a missing variable");
        if (!std::isfinite(t.coef)) throw ModelError("row '" + c.name + "' has a non-finite coefficient");
      }
    }
  }

  double objective_value(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t j = 0; j < vars_.size(); ++j) s += vars_[j].cost * x[j];
    return s;
  }

  double row_activity(int i, std::span<const double> x) const {
    double s = 0.0;
    for (const Term& t : rows_.at(i).terms) s += t.coef * x[t.var];
    return s;
  }

 private:
  std::vector<Variable> vars_;
  std::vector<Constraint> rows_;
};

enum class LpStatus { optimal, infeasible, unbounded, stalled };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::stalled: return "stalled";
  }
  return "?";
}

enum class VarState : std::uint8_t { basic, at_lower, at_upper };

/// Warm-start description; columns may be shorter than the LP (new columns start at lower).
struct Basis {
  std::vector<VarState> columns;
  std::vector<VarState> rows;
};

struct LpSolution {
  LpStatus status = LpStatus::stalled;
  double objective = 0.0;
  std::vector<double> values;
  std::vector<double> duals;
  std::vector<double> reduced_costs;
  /// Names of rows/variables still violated when Phase I gave up.
  std::vector<std::string> infeasibilities;
  int iterations = 0;
  Basis basis;
};

struct SimplexOptions {
  int max_iterations = 0;  // 0: automatic
  double primal_tol = 1e-9;
  double dual_tol = 1e-9;
  double pivot_tol = 1e-9;
  int refactor_interval = 64;
  int degenerate_limit = 50;  // consecutive degenerate pivots before Bland's rule
};

class Simplex {
 public:
  explicit Simplex(const LinearProgram& lp, SimplexOptions opt = {}) : opt_(opt) {
    lp.validate();
    n_ = lp.num_variables();
    m_ = lp.num_constraints();
    const int total = n_ + m_;
    lower_.resize(total);
    upper_.resize(total);
    cost_.assign(total, 0.0);
    names_.resize(total);
    for (int j = 0; j < n_; ++j) {
      const Variable& v = lp.variable(j);
      lower_[j] = v.lower;
      upper_[j] = v.upper;
      cost_[j] = v.cost;
      names_[j] = v.name;
    }
    col_start_.assign(n_ + 1, 0);
    for (const Constraint& c : lp.constraints())
      for (const Term& t : c.terms) ++col_start_[t.var + 1];
    for (int j = 0; j < n_; ++j) col_start_[j + 1] += col_start_[j];
    col_row_.resize(col_start_[n_]);
    col_val_.resize(col_start_[n_]);
    std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
    rhs_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      const Constraint& c = lp.constraint(i);
      rhs_[i] = c.rhs;
      names_[n_ + i] = c.name;
      switch (c.relation) {
        case Relation::less_equal: lower_[n_ + i] = 0.0; upper_[n_ + i] = kInfinity; break;
        case Relation::greater_equal: lower_[n_ + i] = -kInfinity; upper_[n_ + i] = 0.0; break;
        case Relation::equal: lower_[n_ + i] = 0.0; upper_[n_ + i] = 0.0; break;
      }
      for (const Term& t : c.terms) {
        col_row_[fill[t.var]] = i;
        col_val_[fill[t.var]++] = t.coef;
      }
    }
    set_slack_basis();
  }

  int num_rows() const { return m_; }
  int num_columns() const { return n_; }

  void set_bounds(int j, double lower, double upper) {
    lower_.at(j) = lower;
    upper_.at(j) = upper;
    if (state_[j] != VarState::basic) {
      if (state_[j] == VarState::at_upper && std::isfinite(upper)) {
        x_[j] = upper;
      } else {
        state_[j] = VarState::at_lower;
        x_[j] = lower;
      }
      primal_dirty_ = true;
    }
  }

  double lower(int j) const { return lower_.at(j); }
  double upper(int j) const { return upper_.at(j); }

  void load_basis(const Basis& b) {
    if (static_cast<int>(b.rows.size()) != m_ || static_cast<int>(b.columns.size()) > n_) return;
    std::vector<VarState> st(n_ + m_, VarState::at_lower);
    std::copy(b.columns.begin(), b.columns.end(), st.begin());
    std::copy(b.rows.begin(), b.rows.end(), st.begin() + n_);
    if (std::count(st.begin(), st.end(), VarState::basic) != m_) return;
    state_ = std::move(st);
    head_.clear();
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::basic) {
        head_.push_back(j);
      } else {
        place_at_bound(j);
      }
    }
    if (!factorize()) set_slack_basis();
    primal_dirty_ = true;
  }

  Basis basis() const {
    Basis b;
    b.columns.assign(state_.begin(), state_.begin() + n_);
    b.rows.assign(state_.begin() + n_, state_.end());
    return b;
  }

  LpSolution solve() {
    LpSolution sol;
    const int max_iter = opt_.max_iterations > 0 ? opt_.max_iterations : 20000 + 50 * (n_ + m_);
    int iter = 0;
    int degenerate_run = 0;
    int resets = 0;
    bool verified = false;
    if (primal_dirty_) compute_primal();
    std::vector<double> cb(m_), y(m_), alpha(m_);

    while (true) {
      if (iter >= max_iter) {
        sol.status = LpStatus::stalled;
        break;
      }
      // Phase selection from current basic infeasibility.
      bool phase1 = false;
      for (int r = 0; r < m_; ++r) {
        const int j = head_[r];
        if (x_[j] < lower_[j] - tol(lower_[j]) || x_[j] > upper_[j] + tol(upper_[j])) {
          phase1 = true;
          break;
        }
      }
      for (int r = 0; r < m_; ++r) {
        const int j = head_[r];
        if (phase1) {
          cb[r] = x_[j] < lower_[j] - tol(lower_[j]) ? -1.0 : (x_[j] > upper_[j] + tol(upper_[j]) ? 1.0 : 0.0);
        } else {
          cb[r] = cost_[j];
        }
      }
      btran(cb, y);

      const bool bland = degenerate_run >= opt_.degenerate_limit;
      int q = -1;
      double best = 0.0;
      double dq = 0.0;
      for (int j = 0; j < n_ + m_; ++j) {
        if (state_[j] == VarState::basic || lower_[j] == upper_[j]) continue;
        const double d = (phase1 ? 0.0 : cost_[j]) - dot_column(j, y);
        const bool can_rise = state_[j] == VarState::at_lower && d < -opt_.dual_tol;
        const bool can_fall = state_[j] == VarState::at_upper && d > opt_.dual_tol;
        if (!can_rise && !can_fall) continue;
        if (bland) {
          q = j;
          dq = d;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          q = j;
          dq = d;
        }
      }

      if (q < 0) {
        if (!verified && since_refactor_ > 0) {
          // Confirm on a fresh factorisation before declaring a result.
          if (!factorize()) {
            if (++resets > 3) { sol.status = LpStatus::stalled; break; }
            set_slack_basis();
          }
          compute_primal();
          verified = true;
          continue;
        }
        sol.status = phase1 ? LpStatus::infeasible : LpStatus::optimal;
        if (phase1) {
          for (int r = 0; r < m_; ++r) {
            const int j = head_[r];
            if (x_[j] < lower_[j] - tol(lower_[j]) || x_[j] > upper_[j] + tol(upper_[j]))
              sol.infeasibilities.push_back(names_[j]);
          }
        }
        break;
      }
      verified = false;

      ftran(q, alpha);
      const double dir = dq < 0.0 ? 1.0 : -1.0;  // +1: entering variable increases

      // Harris two-pass ratio test over effective bounds.
      auto eff_bounds = [&](int j, double& lo, double& hi) {
        lo = lower_[j];
        hi = upper_[j];
        if (phase1) {
          if (x_[j] < lower_[j] - tol(lower_[j])) {
            lo = -kInfinity;
            hi = lower_[j];
          } else if (x_[j] > upper_[j] + tol(upper_[j])) {
            lo = upper_[j];
            hi = kInfinity;
          }
        }
      };
      double theta_max = upper_[q] - lower_[q];
      for (int r = 0; r < m_; ++r) {
        if (std::abs(alpha[r]) <= opt_.pivot_tol) continue;
        const int j = head_[r];
        const double rate = -dir * alpha[r];
        double lo, hi;
        eff_bounds(j, lo, hi);
        double t;
        if (rate < 0.0) {
          if (!std::isfinite(lo)) continue;
          t = (x_[j] - lo + tol(lo)) / -rate;
        } else {
          if (!std::isfinite(hi)) continue;
          t = (hi - x_[j] + tol(hi)) / rate;
        }
        theta_max = std::min(theta_max, std::max(t, 0.0));
      }
      if (!std::isfinite(theta_max)) {
        sol.status = phase1 ? LpStatus::stalled : LpStatus::unbounded;
        break;
      }
      int leave = -1;
      double leave_theta = 0.0;
      double leave_mag = 0.0;
      double leave_bound = 0.0;
      for (int r = 0; r < m_; ++r) {
        if (std::abs(alpha[r]) <= opt_.pivot_tol) continue;
        const int j = head_[r];
        const double rate = -dir * alpha[r];
        double lo, hi;
        eff_bounds(j, lo, hi);
        double t, bound;
        if (rate < 0.0) {
          if (!std::isfinite(lo)) continue;
          t = (x_[j] - lo) / -rate;
          bound = lo;
        } else {
          if (!std::isfinite(hi)) continue;
          t = (hi - x_[j]) / rate;
          bound = hi;
        }
        t = std::max(t, 0.0);
        if (t > theta_max) continue;
        const bool better = leave < 0 || (bland ? j < head_[leave] : std::abs(alpha[r]) > leave_mag);
        if (better) {
          leave = r;
          leave_theta = t;
          leave_mag = std::abs(alpha[r]);
          leave_bound = bound;
        }
      }

      ++iter;
      const double flip = upper_[q] - lower_[q];
      if (leave < 0 || (std::isfinite(flip) && flip <= leave_theta)) {
        // Bound flip: entering variable crosses to its other bound.
        const double step = dir * flip;
        x_[q] += step;
        state_[q] = dir > 0 ? VarState::at_upper : VarState::at_lower;
        x_[q] = dir > 0 ? upper_[q] : lower_[q];
        for (int r = 0; r < m_; ++r) x_[head_[r]] -= step * alpha[r];
        degenerate_run = flip > 1e-12 ? 0 : degenerate_run + 1;
        continue;
      }

      const double step = dir * leave_theta;
      for (int r = 0; r < m_; ++r) x_[head_[r]] -= step * alpha[r];
      x_[q] += step;
      const int out = head_[leave];
      x_[out] = leave_bound;
      state_[out] = leave_bound == lower_[out] ? VarState::at_lower : VarState::at_upper;
      if (lower_[out] == upper_[out]) state_[out] = VarState::at_lower;
      state_[q] = VarState::basic;
      head_[leave] = q;
      pivot(leave, alpha);
      degenerate_run = leave_theta > 1e-12 ? 0 : degenerate_run + 1;

      if (since_refactor_ >= opt_.refactor_interval) {
        if (!factorize()) {
          if (++resets > 3) { sol.status = LpStatus::stalled; break; }
          set_slack_basis();
        }
        compute_primal();
      }
    }

    sol.iterations = iter;
    sol.basis = basis();
    sol.values.assign(x_.begin(), x_.begin() + n_);
    if (sol.status == LpStatus::optimal) {
      for (int r = 0; r < m_; ++r) cb[r] = cost_[head_[r]];
      btran(cb, y);
      sol.duals = y;
      sol.reduced_costs.resize(n_);
      for (int j = 0; j < n_; ++j)
        sol.reduced_costs[j] = state_[j] == VarState::basic ? 0.0 : cost_[j] - dot_column(j, y);
      // Snap nonbasic values exactly onto their bounds.
      for (int j = 0; j < n_; ++j)
        if (state_[j] != VarState::basic) sol.values[j] = state_[j] == VarState::at_upper ? upper_[j] : lower_[j];
    }
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * sol.values[j];
    sol.objective = obj;
    return sol;
  }

 private:
  double tol(double bound) const {
    return opt_.primal_tol * (1.0 + (std::isfinite(bound) ? std::abs(bound) : 0.0));
  }

  void place_at_bound(int j) {
    if (state_[j] == VarState::at_upper && !std::isfinite(upper_[j])) state_[j] = VarState::at_lower;
    if (state_[j] == VarState::at_lower && !std::isfinite(lower_[j])) state_[j] = VarState::at_upper;
    x_[j] = state_[j] == VarState::at_upper ? upper_[j] : lower_[j];
  }

  void set_slack_basis() {
    state_.assign(n_ + m_, VarState::at_lower);
    x_.assign(n_ + m_, 0.0);
    head_.resize(m_);
    for (int j = 0; j < n_; ++j) place_at_bound(j);
    for (int i = 0; i < m_; ++i) {
      head_[i] = n_ + i;
      state_[n_ + i] = VarState::basic;
    }
    binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
    for (int i = 0; i < m_; ++i) binv_[static_cast<std::size_t>(i) * m_ + i] = 1.0;
    since_refactor_ = 0;
    primal_dirty_ = true;
  }

  double dot_column(int j, const std::vector<double>& y) const {
    if (j >= n_) return y[j - n_];
    double s = 0.0;
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) s += col_val_[k] * y[col_row_[k]];
    return s;
  }

  // alpha = B^-1 a_j
  void ftran(int j, std::vector<double>& alpha) const {
    if (j >= n_) {
      const int i = j - n_;
      for (int r = 0; r < m_; ++r) alpha[r] = binv_[static_cast<std::size_t>(r) * m_ + i];
      return;
    }
    std::fill(alpha.begin(), alpha.end(), 0.0);
    for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) {
      const int i = col_row_[k];
      const double v = col_val_[k];
      for (int r = 0; r < m_; ++r) alpha[r] += binv_[static_cast<std::size_t>(r) * m_ + i] * v;
    }
  }

  // y = cb^T B^-1
  void btran(const std::vector<double>& cb, std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (int r = 0; r < m_; ++r) {
      if (cb[r] == 0.0) continue;
      const double* row = &binv_[static_cast<std::size_t>(r) * m_];
      for (int i = 0; i < m_; ++i) y[i] += cb[r] * row[i];
    }
  }

  void pivot(int r, const std::vector<double>& alpha) {
    double* prow = &binv_[static_cast<std::size_t>(r) * m_];
    const double inv = 1.0 / alpha[r];
    for (int i = 0; i < m_; ++i) prow[i] *= inv;
    for (int k = 0; k < m_; ++k) {
      if (k == r || alpha[k] == 0.0) continue;
      double* row = &binv_[static_cast<std::size_t>(k) * m_];
      const double f = alpha[k];
      for (int i = 0; i < m_; ++i) row[i] -= f * prow[i];
    }
    ++since_refactor_;
  }

  // Basis inverse from its structural block. With L the rows whose logical
  // is basic and R the rest, only C = B[R, structurals] needs inverting:
  // structural rows of B^-1 are C^-1 on R and zero on L, and the logical of
  // row i in L gets e_i minus (B[L, structurals] C^-1) on R.
  bool factorize() {
    const std::size_t mm = static_cast<std::size_t>(m_);
    std::vector<int> logical_pos(m_, -1);  // row -> basis position of its logical
    std::vector<int> structural;           // basis positions holding structurals
    for (int r = 0; r < m_; ++r) {
      if (head_[r] >= n_) {
        logical_pos[head_[r] - n_] = r;
      } else {
        structural.push_back(r);
      }
    }
    std::vector<int> rrow;  // rows without a basic logical
    std::vector<int> rindex(m_, -1);
    for (int i = 0; i < m_; ++i) {
      if (logical_pos[i] < 0) {
        rindex[i] = static_cast<int>(rrow.size());
        rrow.push_back(i);
      }
    }
    const std::size_t s = structural.size();
    if (rrow.size() != s) return false;

    std::vector<double> c(s * s, 0.0), inv(s * s, 0.0);
    for (std::size_t k = 0; k < s; ++k) {
      const int j = head_[structural[k]];
      for (int t = col_start_[j]; t < col_start_[j + 1]; ++t)
        if (rindex[col_row_[t]] >= 0) c[static_cast<std::size_t>(rindex[col_row_[t]]) * s + k] += col_val_[t];
    }
    for (std::size_t i = 0; i < s; ++i) inv[i * s + i] = 1.0;
    for (std::size_t col = 0; col < s; ++col) {
      std::size_t p = col;
      double best = std::abs(c[col * s + col]);
      for (std::size_t r = col + 1; r < s; ++r) {
        if (std::abs(c[r * s + col]) > best) {
          best = std::abs(c[r * s + col]);
          p = r;
        }
      }
      if (best < 1e-11) return false;
      if (p != col) {
        for (std::size_t k = 0; k < s; ++k) {
          std::swap(c[p * s + k], c[col * s + k]);
          std::swap(inv[p * s + k], inv[col * s + k]);
        }
      }
      const double d = 1.0 / c[col * s + col];
      for (std::size_t k = 0; k < s; ++k) {
        c[col * s + k] *= d;
        inv[col * s + k] *= d;
      }
      for (std::size_t r = 0; r < s; ++r) {
        if (r == col) continue;
        const double f = c[r * s + col];
        if (f == 0.0) continue;
        for (std::size_t k = col; k < s; ++k) c[r * s + k] -= f * c[col * s + k];
        for (std::size_t k = 0; k < s; ++k) inv[r * s + k] -= f * inv[col * s + k];
      }
    }
    // inv now maps R-row residuals to structural values: x_S = inv * b_R.
    std::vector<double> out(mm * mm, 0.0);
    for (std::size_t k = 0; k < s; ++k) {
      double* row = &out[static_cast<std::size_t>(structural[k]) * mm];
      for (std::size_t t = 0; t < s; ++t) row[rrow[t]] = inv[k * s + t];
    }
    for (int i = 0; i < m_; ++i)
      if (logical_pos[i] >= 0) out[static_cast<std::size_t>(logical_pos[i]) * mm + i] = 1.0;
    for (std::size_t k = 0; k < s; ++k) {
      const int j = head_[structural[k]];
      for (int t = col_start_[j]; t < col_start_[j + 1]; ++t) {
        const int i = col_row_[t];
        if (logical_pos[i] < 0) continue;
        double* row = &out[static_cast<std::size_t>(logical_pos[i]) * mm];
        const double a = col_val_[t];
        for (std::size_t u = 0; u < s; ++u) row[rrow[u]] -= a * inv[k * s + u];
      }
    }
    binv_ = std::move(out);
    since_refactor_ = 0;
    return true;
  }

  void compute_primal() {
    std::vector<double> rhs = rhs_;
    for (int j = 0; j < n_ + m_; ++j) {
      if (state_[j] == VarState::basic) continue;
      const double v = x_[j];
      if (v == 0.0) continue;
      if (j >= n_) {
        rhs[j - n_] -= v;
      } else {
        for (int k = col_start_[j]; k < col_start_[j + 1]; ++k) rhs[col_row_[k]] -= col_val_[k] * v;
      }
    }
    for (int r = 0; r < m_; ++r) {
      const double* row = &binv_[static_cast<std::size_t>(r) * m_];
      double s = 0.0;
      for (int i = 0; i < m_; ++i) s += row[i] * rhs[i];
      x_[head_[r]] = s;
    }
    primal_dirty_ = false;
  }

  SimplexOptions opt_;
  int n_ = 0;
  int m_ = 0;
  std::vector<double> lower_, upper_, cost_, rhs_;
  std::vector<std::string> names_;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;
  std::vector<VarState> state_;
  std::vector<int> head_;
  std::vector<double> x_;
  std::vector<double> binv_;
  int since_refactor_ = 0;
  bool primal_dirty_ = true;
};

inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {},
                           const Basis* warm_start = nullptr) {
  Simplex s(lp, opt);
  if (warm_start) s.load_basis(*warm_start);
  return s.solve();
}

/// Residuals of an optimal solution's optimality certificate.
struct CertificateCheck {
  double primal_infeasibility = 0.0;   // worst bound/row violation (scaled)
  double dual_infeasibility = 0.0;     // worst sign violation of duals / reduced costs
  double complementarity = 0.0;        // worst |dual * slack|
  double duality_gap = 0.0;            // |primal - dual| / (1 + |primal|)
  double dual_objective = 0.0;

  bool ok(double feas_tol = 1e-7, double opt_tol = 1e-6) const {
    return primal_infeasibility <= feas_tol && dual_infeasibility <= opt_tol && complementarity <= opt_tol &&
           duality_gap <= opt_tol;
  }
};

inline CertificateCheck check_certificate(const LinearProgram& lp, const LpSolution& sol,
                                          double zero_tol = 1e-7) {
  CertificateCheck out;
  const int n = lp.num_variables();
  const int m = lp.num_constraints();
  double dual_obj = 0.0;
  for (int j = 0; j < n; ++j) {
    const Variable& v = lp.variable(j);
    const double x = sol.values[j];
    out.primal_infeasibility = std::max(out.primal_infeasibility, (v.lower - x) / (1.0 + std::abs(v.lower)));
    if (std::isfinite(v.upper))
      out.primal_infeasibility = std::max(out.primal_infeasibility, (x - v.upper) / (1.0 + std::abs(v.upper)));
    const double d = sol.reduced_costs[j];
    if (d > zero_tol) {
      out.complementarity = std::max(out.complementarity, std::abs(d * (x - v.lower)));
      dual_obj += d * v.lower;
    } else if (d < -zero_tol) {
      if (!std::isfinite(v.upper)) {
        out.dual_infeasibility = std::max(out.dual_infeasibility, -d);
      } else {
        out.complementarity = std::max(out.complementarity, std::abs(d * (v.upper - x)));
        dual_obj += d * v.upper;
      }
    }
  }
  for (int i = 0; i < m; ++i) {
    const Constraint& c = lp.constraint(i);
    const double act = lp.row_activity(i, sol.values);
    const double y = sol.duals[i];
    const double scale = 1.0 + std::abs(c.rhs);
    switch (c.relation) {
      case Relation::less_equal:
        out.primal_infeasibility = std::max(out.primal_infeasibility, (act - c.rhs) / scale);
        out.dual_infeasibility = std::max(out.dual_infeasibility, y);
        break;
      case Relation::greater_equal:
        out.primal_infeasibility = std::max(out.primal_infeasibility, (c.rhs - act) / scale);
        out.dual_infeasibility = std::max(out.dual_infeasibility, -y);
        break;
      case Relation::equal:
        out.primal_infeasibility = std::max(out.primal_infeasibility, std::abs(act - c.rhs) / scale);
        break;
    }
    out.complementarity = std::max(out.complementarity, std::abs(y * (act - c.rhs)));
    dual_obj += y * c.rhs;
  }
  out.dual_objective = dual_obj;
  out.duality_gap = std::abs(sol.objective - dual_obj) / (1.0 + std::abs(sol.objective));
  return out;
}

/// Human-readable dump in the conventional CPLEX-style LP text format.
inline std::string to_lp_text(const LinearProgram& lp) {
  auto clean = [](const std::string& s) {
    std::string out;
    for (char ch : s) {
      const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.';
      out.push_back(ok ? ch : '_');
    }
    if (out.empty() || std::isdigit(static_cast<unsigned char>(out[0])) || out[0] == '.') out.insert(0, "v");
    return out;
  };
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  auto linear = [&](const std::vector<std::pair<int, double>>& terms) {
    std::string s;
    bool first = true;
    for (auto [j, c] : terms) {
      if (c == 0.0) continue;
      s += first ? (c < 0 ? "- " : "") : (c < 0 ? " - " : " + ");
      if (std::abs(c) != 1.0) s += num(std::abs(c)) + " ";
      s += clean(lp.variable(j).name);
      first = false;
    }
    return first ? std::string("0") : s;
  };
  std::string out = "\\ generated by scmap\nMinimize\n obj: ";
  std::vector<std::pair<int, double>> obj;
  for (int j = 0; j < lp.num_variables(); ++j) obj.emplace_back(j, lp.variable(j).cost);
  out += linear(obj) + "\nSubject To\n";
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const Constraint& c = lp.constraint(i);
    std::vector<std::pair<int, double>> terms;
    for (const Term& t : c.terms) terms.emplace_back(t.var, t.coef);
    const char* rel = c.relation == Relation::less_equal ? "<=" : c.relation == Relation::equal ? "=" : ">=";
    out += " " + clean(c.name) + "_" + std::to_string(i) + ": " + linear(terms) + " " + rel + " " + num(c.rhs) + "\n";
  }
  out += "Bounds\n";
  for (int j = 0; j < lp.num_variables(); ++j) {
    const Variable& v = lp.variable(j);
    out += " " + num(v.lower) + " <= " + clean(v.name) + " <= " +
           (std::isfinite(v.upper) ? num(v.upper) : std::string("+inf")) + "\n";
  }
  std::string gen;
  for (int j = 0; j < lp.num_variables(); ++j)
    if (lp.variable(j).integer) gen += " " + clean(lp.variable(j).name) + "\n";
  if (!gen.empty()) out += "Generals\n" + gen;
  out += "End\n";
  return out;
}

}  // namespace scmap::lp
