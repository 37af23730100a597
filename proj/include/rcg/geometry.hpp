#pragma once

/// Polyhedral target sets and the operators the payoff dynamics apply to
/// them: metric projection, over-projection (reflection), and their convex
/// mixture. A set is one efficiency hyperplane plus halfspaces `a.x >= b`.
///
/// Projection uses Dykstra's cyclic scheme with per-row correction vectors,
/// which converges to the exact metric projection onto the intersection
/// (plain cyclic projection would only reach some feasible point). Row order
/// is fixed: the hyperplane first, then halfspaces in construction order, so
/// results are deterministic.

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rcg/detail/linalg.hpp"
#include "rcg/game.hpp"
#include "rcg/lp.hpp"

namespace rcg {

inline constexpr double kProjectionTol = 1e-10;
inline constexpr int kProjectionMaxCycles = 50000;

struct Halfspace {
  Vec normal;
  double offset = 0.0;  // normal.x >= offset
  double norm2 = 0.0;   // cached |normal|^2

  Halfspace() = default;
  Halfspace(Vec a, double b) : normal(std::move(a)), offset(b), norm2(detail::dot(normal, normal)) {
    if (norm2 <= 0.0) throw std::invalid_argument("Halfspace: zero normal");
  }
};

struct PolyhedralSet {
  int dim = 0;
  Vec eq_normal;
  double eq_offset = 0.0;  // eq_normal.x == eq_offset
  std::vector<Halfspace> halfspaces;
  double eq_norm2 = 0.0;

  PolyhedralSet() = default;
  PolyhedralSet(int d, Vec eq_a, double eq_b, std::vector<Halfspace> rows)
      : dim(d), eq_normal(std::move(eq_a)), eq_offset(eq_b), halfspaces(std::move(rows)) {
    if (dim < 1) throw std::invalid_argument("PolyhedralSet: dimension must be positive");
    if (static_cast<int>(eq_normal.size()) != dim)
      throw std::invalid_argument("PolyhedralSet: equality normal has wrong dimension");
    eq_norm2 = detail::dot(eq_normal, eq_normal);
    if (eq_norm2 <= 0.0) throw std::invalid_argument("PolyhedralSet: zero equality normal");
    for (const Halfspace& h : halfspaces)
      if (static_cast<int>(h.normal.size()) != dim)
        throw std::invalid_argument("PolyhedralSet: halfspace has wrong dimension");
  }

  /// Largest constraint violation at x (0 when feasible).
  double max_violation(const Vec& x) const {
    double v = std::abs(detail::dot(eq_normal, x) - eq_offset);
    for (const Halfspace& h : halfspaces)
      v = std::max(v, h.offset - detail::dot(h.normal, x));
    return std::max(v, 0.0);
  }

  bool contains(const Vec& x, double tol = kMembershipTol) const {
    return max_violation(x) <= tol;
  }
};

/// Core of v: efficiency equality plus one rationality halfspace per
/// nonempty strict coalition (2^N - 2 rows), in ascending mask order.
inline PolyhedralSet core_polyhedron(const ValueFunction& v) {
  const int n = v.n_agents();
  std::vector<Halfspace> rows;
  rows.reserve((std::size_t{1} << n) - 2);
  for (CoalitionMask m : strict_masks(n)) {
    Vec a(n, 0.0);
    for (int i = 0; i < n; ++i)
      if ((m >> i) & 1u) a[i] = 1.0;
    rows.emplace_back(std::move(a), v.value(m));
  }
  return PolyhedralSet(n, Vec(n, 1.0), v.grand_value(), std::move(rows));
}

/// Agent i's bounding set: efficiency plus rationality for the strict
/// coalitions containing i (2^(N-1) - 1 rows), ascending mask order.
inline PolyhedralSet bounding_polyhedron(const ValueFunction& v, int agent) {
  const int n = v.n_agents();
  if (agent < 0 || agent >= n) throw std::invalid_argument("bounding_polyhedron: agent out of range");
  const CoalitionMask bit = CoalitionMask{1} << agent;
  std::vector<Halfspace> rows;
  for (CoalitionMask m : strict_masks(n)) {
    if (!(m & bit)) continue;
    Vec a(n, 0.0);
    for (int i = 0; i < n; ++i)
      if ((m >> i) & 1u) a[i] = 1.0;
    rows.emplace_back(std::move(a), v.value(m));
  }
  return PolyhedralSet(n, Vec(n, 1.0), v.grand_value(), std::move(rows));
}

struct ProjectOptions {
  double tol = kProjectionTol;       // on the state change across one full cycle
  double feas_tol = 1e-9;            // row violation allowed in a converged point
  int max_cycles = kProjectionMaxCycles;
};

struct ProjectionResult {
  Vec point;
  bool converged = false;
  int cycles = 0;
  double max_violation = 0.0;
  double last_change = 0.0;
};

class ProjectionError : public std::runtime_error {
 public:
  ProjectionError(std::string msg, ProjectionResult result, bool set_infeasible)
      : std::runtime_error(std::move(msg)), result_(std::move(result)), set_infeasible_(set_infeasible) {}
  const ProjectionResult& result() const { return result_; }
  bool set_infeasible() const { return set_infeasible_; }

 private:
  ProjectionResult result_;
  bool set_infeasible_;
};

/// Dykstra's algorithm; never throws. Check `converged` before trusting the point.
inline ProjectionResult project_detail(const PolyhedralSet& set, const Vec& x0,
                                       const ProjectOptions& opts = {}) {
  if (static_cast<int>(x0.size()) != set.dim)
    throw std::invalid_argument("project: point has wrong dimension");
  const std::size_t nrows = set.halfspaces.size();
  Vec x = x0;
  Vec eq_corr(set.dim, 0.0);
  std::vector<Vec> corr(nrows, Vec(set.dim, 0.0));
  Vec y(set.dim);

  // Convergence requires the whole state (point and every correction) to be
  // stationary, not just the end-of-cycle point: intra-cycle moves can cancel
  // and, on an empty intersection, the point settles while corrections grow
  // without bound. A full-state fixed point satisfies the projection's
  // optimality conditions exactly, so feasibility plus stationarity is sound.
  ProjectionResult res;
  for (int cycle = 1; cycle <= opts.max_cycles; ++cycle) {
    double change = 0.0;

    for (int i = 0; i < set.dim; ++i) y[i] = x[i] + eq_corr[i];
    const double t_eq = (set.eq_offset - detail::dot(set.eq_normal, y)) / set.eq_norm2;
    for (int i = 0; i < set.dim; ++i) {
      const double xi = y[i] + t_eq * set.eq_normal[i];
      change = std::max(change, std::abs(y[i] - xi - eq_corr[i]));
      eq_corr[i] = y[i] - xi;
      x[i] = xi;
    }

    for (std::size_t r = 0; r < nrows; ++r) {
      const Halfspace& h = set.halfspaces[r];
      Vec& p = corr[r];
      for (int i = 0; i < set.dim; ++i) y[i] = x[i] + p[i];
      const double slack = detail::dot(h.normal, y) - h.offset;
      if (slack >= 0.0) {
        for (int i = 0; i < set.dim; ++i) {
          change = std::max(change, std::abs(p[i]));
          p[i] = 0.0;
          x[i] = y[i];
        }
      } else {
        const double t = -slack / h.norm2;
        for (int i = 0; i < set.dim; ++i) {
          const double xi = y[i] + t * h.normal[i];
          change = std::max(change, std::abs(y[i] - xi - p[i]));
          p[i] = y[i] - xi;
          x[i] = xi;
        }
      }
    }

    res.cycles = cycle;
    res.last_change = change;
    if (change <= opts.tol && set.max_violation(x) <= opts.feas_tol) {
      res.converged = true;
      break;
    }
  }
  res.point = std::move(x);
  res.max_violation = set.max_violation(res.point);
  return res;
}

/// Metric projection onto the set. Throws ProjectionError on non-convergence,
/// distinguishing an empty intersection (checked by a feasibility program)
/// from plain ill-conditioning.
inline Vec project(const PolyhedralSet& set, const Vec& x,
                   const ProjectOptions& opts = {}) {
  ProjectionResult res = project_detail(set, x, opts);
  if (res.converged) return std::move(res.point);

  std::vector<Vec> a_ge;
  Vec b_ge;
  for (const Halfspace& h : set.halfspaces) {
    a_ge.push_back(h.normal);
    b_ge.push_back(h.offset);
  }
  const LpOutcome feas = feasible_point({set.eq_normal}, {set.eq_offset}, a_ge, b_ge,
                                        {}, static_cast<std::size_t>(set.dim));
  const bool infeasible = feas.status == LpStatus::infeasible;
  std::ostringstream msg;
  msg << "projection did not converge in " << opts.max_cycles << " cycles"
      << " (last change " << res.last_change << ", max violation " << res.max_violation << "); "
      << (infeasible ? "the target set is infeasible" : "the target set appears nonempty; ill-conditioned rows");
  throw ProjectionError(msg.str(), std::move(res), infeasible);
}

enum class OperatorKind { projection, over_projection, mixed };

inline const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::projection: return "proj";
    case OperatorKind::over_projection: return "overproj";
    case OperatorKind::mixed: return "mixed";
  }
  return "unknown";
}

/// An operator targeted at a polyhedral set. With p the projection of x:
///   projection      -> p
///   over_projection -> 2p - x
///   mixed(beta)     -> p + beta (p - x),  beta in [0, 1]
/// All three are nonexpansive with fixed-point set equal to the target;
/// projection and mixed with beta < 1 are additionally paracontractions.
struct OperatorSpec {
  OperatorKind kind = OperatorKind::projection;
  double beta = 0.0;  // used by mixed only
  PolyhedralSet target;

  OperatorSpec() = default;
  OperatorSpec(OperatorKind k, PolyhedralSet set, double mix_beta = 0.0)
      : kind(k), beta(mix_beta), target(std::move(set)) {
    if (kind == OperatorKind::mixed && (!(beta >= 0.0) || !(beta <= 1.0)))
      throw std::invalid_argument("OperatorSpec: mixed beta must lie in [0, 1]");
  }

  /// Reflection weight actually applied: 0, 1, or beta.
  double effective_beta() const {
    switch (kind) {
      case OperatorKind::projection: return 0.0;
      case OperatorKind::over_projection: return 1.0;
      case OperatorKind::mixed: return beta;
    }
    return 0.0;
  }

  bool paracontraction() const {
    return kind == OperatorKind::projection || (kind == OperatorKind::mixed && beta < 1.0);
  }
};

inline Vec apply_operator(const OperatorSpec& op, const Vec& x, const ProjectOptions& opts = {}) {
  Vec p = project(op.target, x, opts);
  const double b = op.effective_beta();
  if (b != 0.0) {
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = p[i] + b * (p[i] - x[i]);
  }
  return p;
}

}  // namespace rcg
