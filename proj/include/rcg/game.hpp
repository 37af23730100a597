#pragma once

/// Transferable-utility games with interval-uncertain coalition values.
///
/// A ValueFunction assigns a worth to every nonempty coalition. A RobustGame
/// carries a closed interval [lower(S), upper(S)] per strict coalition plus a
/// committed grand-coalition value (degenerate interval); admissible worths
/// form a finite grid of pitch `grid_step` inside each interval. The robust
/// core of such a game equals the core of the upper envelope, because every
/// admissible value function is dominated by it row by row.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rcg/coalition.hpp"
#include "rcg/detail/linalg.hpp"
#include "rcg/detail/rng.hpp"
#include "rcg/lp.hpp"

namespace rcg {

inline constexpr double kMembershipTol = 1e-8;
inline constexpr double kGridStepDefault = 0.01;

using Payoff = Vec;  // one share per agent

class ValueFunction {
 public:
  ValueFunction() = default;

  ValueFunction(int n_agents, Vec values_by_mask) : n_(n_agents), v_(std::move(values_by_mask)) {
    check_agent_count(n_);
    const std::size_t want = (std::size_t{1} << n_) ;
    if (v_.size() != want)
      throw std::invalid_argument("ValueFunction: values table must have 2^N entries (index 0 unused)");
    for (CoalitionMask m = 1; m < want; ++m)
      if (!std::isfinite(v_[m])) throw std::invalid_argument("ValueFunction: non-finite value");
  }

  static ValueFunction from_map(int n_agents, const std::map<std::string, double>& values) {
    check_agent_count(n_agents);
    Vec table(std::size_t{1} << n_agents, std::numeric_limits<double>::quiet_NaN());
    table[0] = 0.0;
    for (const auto& [key, val] : values) {
      const Coalition c = Coalition::from_key(key, n_agents);
      if (!std::isnan(table[c.mask()]))
        throw std::invalid_argument("ValueFunction: coalition '" + key + "' defined twice");
      table[c.mask()] = val;
    }
    for (CoalitionMask m = 1; m < table.size(); ++m)
      if (std::isnan(table[m]))
        throw std::invalid_argument("ValueFunction: coalition '" + Coalition(m).key() + "' missing");
    return ValueFunction(n_agents, std::move(table));
  }

  int n_agents() const { return n_; }
  double value(Coalition c) const { return v_[c.mask()]; }
  double value(CoalitionMask m) const { return v_[m]; }
  double grand_value() const { return v_[(CoalitionMask{1} << n_) - 1]; }
  CoalitionMask grand_mask() const { return (CoalitionMask{1} << n_) - 1; }

  friend bool operator==(const ValueFunction& a, const ValueFunction& b) {
    return a.n_ == b.n_ && a.v_ == b.v_;
  }

 private:
  int n_ = 0;
  Vec v_;  // indexed by coalition mask; entry 0 unused (kept 0)
};

class RobustGame {
 public:
  RobustGame() = default;

  RobustGame(ValueFunction lower, ValueFunction upper, double grid_step = kGridStepDefault)
      : lower_(std::move(lower)), upper_(std::move(upper)), step_(grid_step) {
    if (lower_.n_agents() != upper_.n_agents())
      throw std::invalid_argument("RobustGame: envelope agent counts differ");
    if (!(step_ > 0.0) || !std::isfinite(step_))
      throw std::invalid_argument("RobustGame: grid_step must be positive");
    const int n = lower_.n_agents();
    for (CoalitionMask m : strict_masks(n)) {
      if (lower_.value(m) > upper_.value(m) + 1e-12)
        throw std::invalid_argument("RobustGame: lower > upper for coalition '" + Coalition(m).key() + "'");
    }
    if (std::abs(lower_.grand_value() - upper_.grand_value()) > 1e-12)
      throw std::invalid_argument("RobustGame: grand-coalition value must be committed (lower == upper)");
  }

  int n_agents() const { return lower_.n_agents(); }
  const ValueFunction& lower() const { return lower_; }
  const ValueFunction& upper() const { return upper_; }
  double grid_step() const { return step_; }

  /// Number of admissible grid points for a coalition's value interval.
  std::size_t grid_count(CoalitionMask m) const {
    const double width = upper_.value(m) - lower_.value(m);
    if (width <= 0.0) return 1;
    return static_cast<std::size_t>(std::floor(width / step_ + 1e-9)) + 1;
  }

 private:
  ValueFunction lower_, upper_;
  double step_ = kGridStepDefault;
};

/// The worst-case envelope: upper values on every strict coalition, committed
/// grand value. Its core is the robust core of the whole interval game.
inline ValueFunction grand_value_fixed_upper(const RobustGame& g) { return g.upper(); }

/// Draws one admissible value function: grand value fixed at the commitment,
/// every strict coalition uniform over its grid. Deterministic in `seed`.
inline ValueFunction sample_value_function(const RobustGame& g, std::uint64_t seed) {
  const int n = g.n_agents();
  detail::Rng rng(seed);
  Vec table(std::size_t{1} << n, 0.0);
  for (CoalitionMask m : strict_masks(n)) {
    const std::size_t count = g.grid_count(m);
    const std::size_t idx = (count == 1) ? 0 : rng.uniform_index(count);
    table[m] = g.lower().value(m) + static_cast<double>(idx) * g.grid_step();
  }
  table[g.upper().grand_mask()] = g.upper().grand_value();
  return ValueFunction(n, std::move(table));
}

namespace detail {

/// Sums of x over every coalition mask, O(2^N).
inline Vec coalition_sums(const Vec& x) {
  const int n = static_cast<int>(x.size());
  Vec sums(std::size_t{1} << n, 0.0);
  for (CoalitionMask m = 1; m < sums.size(); ++m) {
    const CoalitionMask low = m & (m - 1);
    const int bit = __builtin_ctz(m);
    sums[m] = sums[low] + x[bit];
  }
  return sums;
}

inline void check_payoff(const Payoff& x, int n) {
  if (static_cast<int>(x.size()) != n) throw std::invalid_argument("payoff length mismatch");
  if (!all_finite(x)) throw std::invalid_argument("payoff has non-finite entries");
}

}  // namespace detail

/// Core membership: exact efficiency (within tol) plus coalition rationality
/// for every nonempty coalition.
inline bool in_core(const Payoff& x, const ValueFunction& v, double tol = kMembershipTol) {
  const int n = v.n_agents();
  detail::check_payoff(x, n);
  const Vec sums = detail::coalition_sums(x);
  const CoalitionMask full = v.grand_mask();
  if (std::abs(sums[full] - v.value(full)) > tol) return false;
  for (CoalitionMask m = 1; m < full; ++m)
    if (sums[m] < v.value(m) - tol) return false;
  return true;
}

/// Agent i's bounding set: efficiency plus rationality for the strict
/// coalitions containing i (2^(N-1) - 1 inequalities).
inline bool in_bounding_set(const Payoff& x, const ValueFunction& v, int agent,
                            double tol = kMembershipTol) {
  const int n = v.n_agents();
  detail::check_payoff(x, n);
  if (agent < 0 || agent >= n) throw std::invalid_argument("in_bounding_set: agent out of range");
  const Vec sums = detail::coalition_sums(x);
  const CoalitionMask full = v.grand_mask();
  if (std::abs(sums[full] - v.value(full)) > tol) return false;
  const CoalitionMask bit = CoalitionMask{1} << agent;
  for (CoalitionMask m = 1; m < full; ++m) {
    if (!(m & bit)) continue;
    if (sums[m] < v.value(m) - tol) return false;
  }
  return true;
}

struct CoreCertificate {
  bool feasible = false;
  Payoff witness;        // valid when feasible
  LpStatus solver_status = LpStatus::iteration_cap;
};

/// Decides core nonemptiness by a feasibility program over the efficiency
/// hyperplane and all strict-coalition rationality halfspaces.
inline CoreCertificate core_nonempty(const ValueFunction& v, const SimplexOptions& opts = {}) {
  const int n = v.n_agents();
  std::vector<Vec> a_eq{Vec(n, 1.0)};
  Vec b_eq{v.grand_value()};
  std::vector<Vec> a_ge;
  Vec b_ge;
  for (CoalitionMask m : strict_masks(n)) {
    Vec row(n, 0.0);
    for (int i = 0; i < n; ++i)
      if ((m >> i) & 1u) row[i] = 1.0;
    a_ge.push_back(std::move(row));
    b_ge.push_back(v.value(m));
  }
  const LpOutcome out = feasible_point(a_eq, b_eq, a_ge, b_ge, opts, n);
  CoreCertificate cert;
  cert.solver_status = out.status;
  cert.feasible = out.status == LpStatus::optimal;
  if (cert.feasible) cert.witness = out.z;
  return cert;
}

}  // namespace rcg
