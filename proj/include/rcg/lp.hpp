#pragma once

/// Dense linear programming:
///
///   minimize c.z   subject to   A_eq z = b_eq,  A_le z <= b_le,  lower <= z <= upper
///
/// solved by a bounded-variable revised simplex with Bland's rule (smallest
/// index entering, smallest basic index on ratio ties), two phases, and an
/// explicitly maintained dense basis inverse refreshed by periodic
/// refactorization. Pivoting is fully deterministic, so identical inputs
/// yield identical outcomes, pivot counts, and bases.
///
/// Conventions: free variables are split into nonnegative parts internally;
/// inequality rows get slack columns. For a minimum, inequality-row duals
/// come out <= 0 and pair with row slack in complementary slackness.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rcg/detail/linalg.hpp"

namespace rcg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpStatus { optimal, infeasible, unbounded, iteration_cap };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_cap: return "iteration_cap";
  }
  return "unknown";
}

struct LinearProgram {
  Vec c;
  std::vector<Vec> eq_rows;
  Vec eq_rhs;
  std::vector<Vec> le_rows;
  Vec le_rhs;
  Vec lower;  // empty means all -inf
  Vec upper;  // empty means all +inf

  std::size_t n_vars() const { return c.size(); }

  void validate() const {
    const std::size_t n = c.size();
    if (eq_rows.size() != eq_rhs.size()) throw std::invalid_argument("lp: eq row/rhs count mismatch");
    if (le_rows.size() != le_rhs.size()) throw std::invalid_argument("lp: le row/rhs count mismatch");
    for (const Vec& r : eq_rows)
      if (r.size() != n) throw std::invalid_argument("lp: eq row width mismatch");
    for (const Vec& r : le_rows)
      if (r.size() != n) throw std::invalid_argument("lp: le row width mismatch");
    if (!lower.empty() && lower.size() != n) throw std::invalid_argument("lp: lower bound width mismatch");
    if (!upper.empty() && upper.size() != n) throw std::invalid_argument("lp: upper bound width mismatch");
    for (std::size_t j = 0; j < n; ++j) {
      const double lo = lower.empty() ? -kInf : lower[j];
      const double hi = upper.empty() ? kInf : upper[j];
      if (std::isnan(lo) || std::isnan(hi) || lo > hi)
        throw std::invalid_argument("lp: variable " + std::to_string(j) + " has empty bound interval");
    }
  }
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double pivot_tol = 1e-10;
  int max_pivots = 20000;
  int refactor_every = 128;
};

/// Opaque restart certificate: the internal basis of a solved program.
/// Entries of -1 mark rows carried by a pinned (redundant-row) artificial.
struct LpBasis {
  std::vector<int> basic;
  std::vector<std::uint8_t> at_upper;
  bool empty() const { return basic.empty(); }
};

struct LpOutcome {
  LpStatus status = LpStatus::iteration_cap;
  Vec z;
  double objective = std::numeric_limits<double>::quiet_NaN();
  Vec dual_eq, dual_le;
  double primal_residual = 0.0;
  double complementary_slackness = 0.0;
  double duality_gap = 0.0;
  int pivots = 0;
  LpBasis basis;

  bool optimal() const { return status == LpStatus::optimal; }
};

namespace detail {

struct SparseCol {
  std::vector<std::pair<int, double>> entries;
};

class Simplex {
 public:
  Simplex(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {
    lp.validate();
    build();
  }

  LpOutcome run(const LpBasis* warm) {
    init_state();
    bool warm_ok = warm != nullptr && restore_basis(*warm);
    if (!warm_ok) {
      if (warm != nullptr) init_state();  // discard a partially restored basis
      init_phase1();
      phase1_ = true;
      const PhaseResult r1 = iterate();
      phase1_ = false;
      if (r1 == PhaseResult::cap) return capped();
      double art_sum = 0.0;
      for (int r = 0; r < m_; ++r)
        if (basis_[r] >= n_core_) art_sum += xval_[basis_[r]];
      if (art_sum > opt_.feas_tol * (1.0 + b_scale_)) {
        LpOutcome out;
        out.status = LpStatus::infeasible;
        out.pivots = pivots_;
        return out;
      }
      drive_out_artificials();
    }
    const PhaseResult r2 = iterate();
    if (r2 == PhaseResult::cap) return capped();
    if (r2 == PhaseResult::unbounded) {
      LpOutcome out;
      out.status = LpStatus::unbounded;
      out.pivots = pivots_;
      return out;
    }
    return extract();
  }

 private:
  enum class PhaseResult { optimal, unbounded, cap };

  const LinearProgram& lp_;
  SimplexOptions opt_;

  int m_ = 0, me_ = 0, mi_ = 0;
  int n_core_ = 0;  // structural + slack columns; artificials follow
  std::vector<SparseCol> cols_;
  Vec cost_, lo_, hi_, bstd_;
  std::vector<int> pos_col_, neg_col_;
  double b_scale_ = 0.0;

  std::vector<double> art_sign_;
  std::vector<int> basis_;
  std::vector<std::uint8_t> is_basic_, at_upper_;
  Vec xval_;
  Mat binv_;
  int pivots_ = 0;
  int since_refactor_ = 0;
  bool phase1_ = false;

  int n_all() const { return n_core_ + m_; }

  void build() {
    const int n = static_cast<int>(lp_.n_vars());
    me_ = static_cast<int>(lp_.eq_rows.size());
    mi_ = static_cast<int>(lp_.le_rows.size());
    m_ = me_ + mi_;

    pos_col_.assign(n, -1);
    neg_col_.assign(n, -1);
    for (int j = 0; j < n; ++j) {
      const double lo = lp_.lower.empty() ? -kInf : lp_.lower[j];
      const double hi = lp_.upper.empty() ? kInf : lp_.upper[j];
      if (std::isinf(lo) && std::isinf(hi)) {
        pos_col_[j] = push_col(lp_.c[j], 0.0, kInf, j, +1.0);
        neg_col_[j] = push_col(-lp_.c[j], 0.0, kInf, j, -1.0);
      } else {
        pos_col_[j] = push_col(lp_.c[j], lo, hi, j, +1.0);
      }
    }
    for (int r = 0; r < mi_; ++r) {
      const int id = push_col(0.0, 0.0, kInf, -1, 0.0);
      cols_[id].entries.push_back({me_ + r, 1.0});
    }
    n_core_ = static_cast<int>(cols_.size());

    bstd_.resize(m_);
    for (int r = 0; r < me_; ++r) bstd_[r] = lp_.eq_rhs[r];
    for (int r = 0; r < mi_; ++r) bstd_[me_ + r] = lp_.le_rhs[r];
    for (double v : bstd_) b_scale_ = std::max(b_scale_, std::abs(v));

    art_sign_.assign(m_, 0.0);
    cost_.resize(n_all(), 0.0);
    lo_.resize(n_all(), 0.0);
    hi_.resize(n_all(), 0.0);
  }

  int push_col(double cost, double lo, double hi, int orig_var, double sign) {
    const int id = static_cast<int>(cols_.size());
    SparseCol col;
    if (orig_var >= 0) {
      for (int r = 0; r < me_; ++r) {
        const double v = lp_.eq_rows[r][orig_var];
        if (v != 0.0) col.entries.push_back({r, sign * v});
      }
      for (int r = 0; r < mi_; ++r) {
        const double v = lp_.le_rows[r][orig_var];
        if (v != 0.0) col.entries.push_back({me_ + r, sign * v});
      }
    }
    cols_.push_back(std::move(col));
    cost_.push_back(cost);
    lo_.push_back(lo);
    hi_.push_back(hi);
    return id;
  }

  SparseCol artificial_col(int row) const {
    SparseCol c;
    c.entries.push_back({row, art_sign_[row]});
    return c;
  }

  const SparseCol& col_of(int j, SparseCol& scratch) const {
    if (j < n_core_) return cols_[j];
    scratch = artificial_col(j - n_core_);
    return scratch;
  }

  double cost_of(int j) const {
    if (j >= n_core_) return phase1_ ? 1.0 : 0.0;
    return phase1_ ? 0.0 : cost_[j];
  }

  double rest_value(int j) const { return at_upper_[j] ? hi_[j] : lo_[j]; }

  bool enterable(int j) const { return j < n_core_ && !is_basic_[j] && hi_[j] > lo_[j]; }

  void init_state() {
    is_basic_.assign(n_all(), 0);
    at_upper_.assign(n_all(), 0);
    xval_.assign(n_all(), 0.0);
    basis_.assign(m_, -1);
    art_sign_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      lo_[n_core_ + r] = 0.0;
      hi_[n_core_ + r] = 0.0;
    }
    for (int j = 0; j < n_core_; ++j) {
      if (std::isinf(lo_[j])) at_upper_[j] = 1;  // park at the finite side
      xval_[j] = rest_value(j);
    }
    pivots_ = 0;
    since_refactor_ = 0;
  }

  void init_phase1() {
    Vec resid = bstd_;
    SparseCol scratch;
    for (int j = 0; j < n_core_; ++j) {
      if (xval_[j] == 0.0) continue;
      for (const auto& [r, v] : cols_[j].entries) resid[r] -= v * xval_[j];
    }
    binv_ = Mat(m_, m_);
    for (int r = 0; r < m_; ++r) {
      const int slack = (r >= me_) ? (n_core_ - mi_ + (r - me_)) : -1;
      if (slack >= 0 && resid[r] >= 0.0) {
        basis_[r] = slack;
        is_basic_[slack] = 1;
        xval_[slack] = resid[r];
        binv_(r, r) = 1.0;
      } else {
        const int art = n_core_ + r;
        art_sign_[r] = (resid[r] >= 0.0) ? 1.0 : -1.0;
        basis_[r] = art;
        is_basic_[art] = 1;
        lo_[art] = 0.0;
        hi_[art] = kInf;
        xval_[art] = std::abs(resid[r]);
        binv_(r, r) = art_sign_[r];
      }
    }
  }

  /// Restores a previously exported basis; returns false when it cannot
  /// reproduce a primal-feasible basic solution (caller then cold-starts).
  bool restore_basis(const LpBasis& warm) {
    if (static_cast<int>(warm.basic.size()) != m_) return false;
    if (static_cast<int>(warm.at_upper.size()) != n_core_) return false;
    for (int r = 0; r < m_; ++r) {
      int j = warm.basic[r];
      if (j == -1) {
        j = n_core_ + r;
        art_sign_[r] = 1.0;
        lo_[j] = hi_[j] = 0.0;
      } else if (j < 0 || j >= n_core_ || is_basic_[j]) {
        return false;
      }
      basis_[r] = j;
      is_basic_[j] = 1;
    }
    for (int j = 0; j < n_core_; ++j) {
      if (is_basic_[j]) continue;
      at_upper_[j] = warm.at_upper[j] && std::isfinite(hi_[j]);
      if (!at_upper_[j] && std::isinf(lo_[j])) at_upper_[j] = 1;
      xval_[j] = rest_value(j);
    }
    if (!refactor()) return false;
    for (int r = 0; r < m_; ++r) {
      const int j = basis_[r];
      const double slack_tol = opt_.feas_tol * (1.0 + b_scale_);
      if (xval_[j] < lo_[j] - slack_tol || xval_[j] > hi_[j] + slack_tol) return false;
    }
    return true;
  }

  bool refactor() {
    Mat B(m_, m_);
    SparseCol scratch;
    for (int r = 0; r < m_; ++r) {
      const SparseCol& col = col_of(basis_[r], scratch);
      for (const auto& [row, v] : col.entries) B(row, r) = v;
    }
    if (!invert(std::move(B), binv_)) return false;
    recompute_basics();
    since_refactor_ = 0;
    return true;
  }

  void recompute_basics() {
    Vec resid = bstd_;
    for (int j = 0; j < n_all(); ++j) {
      if (is_basic_[j] || xval_[j] == 0.0) continue;
      SparseCol scratch;
      const SparseCol& col = col_of(j, scratch);
      for (const auto& [r, v] : col.entries) resid[r] -= v * xval_[j];
    }
    for (int r = 0; r < m_; ++r) {
      double s = 0.0;
      const double* row = binv_.row(r);
      for (int k = 0; k < m_; ++k) s += row[k] * resid[k];
      xval_[basis_[r]] = s;
    }
  }

  Vec price() const {
    Vec y(m_, 0.0);
    for (int r = 0; r < m_; ++r) {
      const double cb = cost_of(basis_[r]);
      if (cb == 0.0) continue;
      const double* row = binv_.row(r);
      for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
    }
    return y;
  }

  double reduced_cost(int j, const Vec& y) const {
    double d = cost_of(j);
    for (const auto& [r, v] : cols_[j].entries) d -= y[r] * v;
    return d;
  }

  void ftran(const SparseCol& col, Vec& w) const {
    w.assign(m_, 0.0);
    for (const auto& [r, v] : col.entries) {
      for (int i = 0; i < m_; ++i) w[i] += binv_(i, r) * v;
    }
  }

  void pivot_update(const Vec& w, int leave_row) {
    const double piv = w[leave_row];
    double* lr = binv_.row(leave_row);
    for (int k = 0; k < m_; ++k) lr[k] /= piv;
    for (int i = 0; i < m_; ++i) {
      if (i == leave_row) continue;
      const double f = w[i];
      if (f == 0.0) continue;
      double* row = binv_.row(i);
      for (int k = 0; k < m_; ++k) row[k] -= f * lr[k];
    }
  }

  PhaseResult iterate() {
    const double dual_tol = opt_.feas_tol;
    Vec w;
    while (true) {
      if (pivots_ >= opt_.max_pivots) return PhaseResult::cap;
      const Vec y = price();

      int enter = -1;
      double sigma = 1.0;
      for (int j = 0; j < n_core_; ++j) {  // Bland: first eligible index
        if (!enterable(j)) continue;
        const double d = reduced_cost(j, y);
        if (!at_upper_[j] && d < -dual_tol) {
          enter = j;
          sigma = 1.0;
          break;
        }
        if (at_upper_[j] && d > dual_tol) {
          enter = j;
          sigma = -1.0;
          break;
        }
      }
      if (enter < 0) return PhaseResult::optimal;

      ftran(cols_[enter], w);

      double theta = (std::isfinite(lo_[enter]) && std::isfinite(hi_[enter]))
                         ? hi_[enter] - lo_[enter]
                         : kInf;
      int leave = -1;
      bool leave_hits_upper = false;
      for (int i = 0; i < m_; ++i) {
        const double delta = -sigma * w[i];
        const int bi = basis_[i];
        double t;
        bool to_upper;
        if (delta > opt_.pivot_tol) {
          if (std::isinf(hi_[bi])) continue;
          t = (hi_[bi] - xval_[bi]) / delta;
          to_upper = true;
        } else if (delta < -opt_.pivot_tol) {
          if (std::isinf(lo_[bi])) continue;
          t = (xval_[bi] - lo_[bi]) / (-delta);
          to_upper = false;
        } else {
          continue;
        }
        if (t < 0.0) t = 0.0;
        if (t < theta - 1e-12) {
          theta = t;
          leave = i;
          leave_hits_upper = to_upper;
        } else if (leave >= 0 && t <= theta + 1e-12 && basis_[i] < basis_[leave]) {
          leave = i;
          leave_hits_upper = to_upper;
        }
      }

      if (std::isinf(theta)) return PhaseResult::unbounded;

      if (leave < 0) {
        // entering variable runs to its opposite bound
        for (int i = 0; i < m_; ++i) xval_[basis_[i]] -= sigma * theta * w[i];
        at_upper_[enter] ^= 1;
        xval_[enter] = rest_value(enter);
      } else {
        for (int i = 0; i < m_; ++i) xval_[basis_[i]] -= sigma * theta * w[i];
        const int leaving = basis_[leave];
        xval_[leaving] = leave_hits_upper ? hi_[leaving] : lo_[leaving];
        at_upper_[leaving] = leave_hits_upper;
        is_basic_[leaving] = 0;
        xval_[enter] = rest_value(enter) + sigma * theta;
        is_basic_[enter] = 1;
        basis_[leave] = enter;
        at_upper_[enter] = 0;
        pivot_update(w, leave);
      }

      ++pivots_;
      if (++since_refactor_ >= opt_.refactor_every) {
        if (!refactor()) throw std::runtime_error("simplex: basis became singular");
      }
    }
  }

  void drive_out_artificials() {
    Vec w;
    for (int r = 0; r < m_; ++r) {
      if (basis_[r] < n_core_) continue;
      int found = -1;
      for (int j = 0; j < n_core_; ++j) {
        if (is_basic_[j]) continue;
        double wr = 0.0;
        for (const auto& [row, v] : cols_[j].entries) wr += binv_(r, row) * v;
        if (std::abs(wr) > 1e-9) {
          found = j;
          break;
        }
      }
      if (found < 0) {
        // redundant row: pin the artificial at zero and leave it basic
        const int art = basis_[r];
        lo_[art] = hi_[art] = 0.0;
        xval_[art] = 0.0;
        continue;
      }
      ftran(cols_[found], w);
      const int art = basis_[r];
      is_basic_[art] = 0;
      lo_[art] = hi_[art] = 0.0;
      xval_[art] = 0.0;
      xval_[found] = rest_value(found);  // zero-length pivot
      is_basic_[found] = 1;
      basis_[r] = found;
      at_upper_[found] = 0;
      pivot_update(w, r);
    }
  }

  LpOutcome capped() const {
    LpOutcome out;
    out.status = LpStatus::iteration_cap;
    out.pivots = pivots_;
    return out;
  }

  LpOutcome extract() {
    if (!refactor()) throw std::runtime_error("simplex: basis became singular at extraction");
    LpOutcome out;
    out.status = LpStatus::optimal;
    out.pivots = pivots_;

    const int n = static_cast<int>(lp_.n_vars());
    out.z.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
      double v = xval_[pos_col_[j]];
      if (neg_col_[j] >= 0) v -= xval_[neg_col_[j]];
      out.z[j] = v;
    }
    out.objective = dot(lp_.c, out.z);

    const Vec y = price();
    out.dual_eq.assign(y.begin(), y.begin() + me_);
    out.dual_le.assign(y.begin() + me_, y.end());

    double resid = 0.0;
    for (int r = 0; r < me_; ++r) resid = std::max(resid, std::abs(dot(lp_.eq_rows[r], out.z) - lp_.eq_rhs[r]));
    double comp = 0.0;
    for (int r = 0; r < mi_; ++r) {
      const double slack = lp_.le_rhs[r] - dot(lp_.le_rows[r], out.z);
      resid = std::max(resid, -std::min(slack, 0.0));
      comp = std::max(comp, std::abs(out.dual_le[r] * slack));
    }
    for (int j = 0; j < n; ++j) {
      const double lo = lp_.lower.empty() ? -kInf : lp_.lower[j];
      const double hi = lp_.upper.empty() ? kInf : lp_.upper[j];
      if (std::isfinite(lo)) resid = std::max(resid, lo - out.z[j]);
      if (std::isfinite(hi)) resid = std::max(resid, out.z[j] - hi);
    }
    out.primal_residual = resid;
    out.complementary_slackness = comp;

    double internal_obj = 0.0;
    double dual_obj = dot(y, bstd_);
    for (int j = 0; j < n_core_; ++j) {
      if (!is_basic_[j]) dual_obj += reduced_cost(j, y) * xval_[j];
      internal_obj += cost_[j] * xval_[j];
    }
    out.duality_gap = std::abs(internal_obj - dual_obj);

    out.basis.basic.resize(m_);
    for (int r = 0; r < m_; ++r) out.basis.basic[r] = (basis_[r] >= n_core_) ? -1 : basis_[r];
    out.basis.at_upper.assign(at_upper_.begin(), at_upper_.begin() + n_core_);
    return out;
  }
};

}  // namespace detail

inline LpOutcome solve(const LinearProgram& lp, const SimplexOptions& opts = {},
                       const LpBasis* warm = nullptr) {
  detail::Simplex s(lp, opts);
  return s.run(warm);
}

/// Pure feasibility check for { A_eq z = b_eq, A_ge z >= b_ge }: a phase-1
/// program whose optimum is zero exactly when the system is consistent.
/// On success the outcome's z is a feasible point.
inline LpOutcome feasible_point(const std::vector<Vec>& a_eq, const Vec& b_eq,
                                const std::vector<Vec>& a_ge, const Vec& b_ge,
                                const SimplexOptions& opts = {}, std::size_t n_vars = 0) {
  if (a_eq.size() != b_eq.size() || a_ge.size() != b_ge.size())
    throw std::invalid_argument("feasible_point: row/rhs count mismatch");
  std::size_t n = n_vars;
  for (const Vec& r : a_eq) n = std::max(n, r.size());
  for (const Vec& r : a_ge) n = std::max(n, r.size());
  LinearProgram lp;
  lp.c.assign(n, 0.0);
  lp.eq_rows = a_eq;
  lp.eq_rhs = b_eq;
  lp.le_rows.reserve(a_ge.size());
  for (const Vec& r : a_ge) {
    Vec neg(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) neg[j] = -r[j];
    lp.le_rows.push_back(std::move(neg));
  }
  lp.le_rhs.reserve(b_ge.size());
  for (double v : b_ge) lp.le_rhs.push_back(-v);
  return solve(lp, opts);
}

}  // namespace rcg
