#pragma once

/// Distributed payoff dynamics over a time-varying network.
///
/// Allocation: x_i <- (1 - alpha) x_i + alpha T_i(sum_j w_ij x_j), where T_i
/// is a nonexpansive operator (projection / over-projection / mixture)
/// targeted at the core of the value function drawn for that iteration.
///
/// Bargaining: x_i <- M_i(sum_j w_ij x_j), where M_i is a paracontraction
/// targeted at agent i's bounding set (projection, or mixture with beta < 1;
/// pure over-projection is not a paracontraction and is rejected).
///
/// Both sequences are Fejer monotone with respect to the consensual robust
/// core, the common fixed-point set of every (operator, graph) pair.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rcg/detail/rng.hpp"
#include "rcg/game.hpp"
#include "rcg/geometry.hpp"
#include "rcg/network.hpp"
#include "rcg/profile.hpp"

namespace rcg {

inline constexpr double kStopTolDefault = 1e-6;
inline constexpr int kMaxIterDefault = 10000;
inline constexpr int kThinEveryDefault = 10;
inline constexpr double kEpsilonDefault = 0.05;
inline constexpr double kTerminalMembershipTol = 1e-6;

class EmptyCoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-iteration choice of the admissible value function.
class ValueSchedule {
 public:
  enum class Mode { iid, block_cyclic };

  ValueSchedule(RobustGame game, Mode mode, std::uint64_t seed, std::size_t family_cap = 4096)
      : game_(std::move(game)), mode_(mode), seed_(seed) {
    if (mode_ != Mode::block_cyclic) return;
    const int n = game_.n_agents();
    const auto masks = strict_masks(n);
    std::size_t count = 1;
    for (CoalitionMask m : masks) {
      const std::size_t g = game_.grid_count(m);
      if (count > family_cap / g + 1) {
        count = family_cap + 1;
        break;
      }
      count *= g;
      if (count > family_cap) break;
    }
    if (count > family_cap)
      throw std::invalid_argument(
          "ValueSchedule: the admissible family exceeds the block-cyclic cap (" +
          std::to_string(family_cap) + "); use iid mode");
    // odometer over per-coalition grid indices, ascending mask order
    std::vector<std::size_t> digit(masks.size(), 0);
    family_.reserve(count);
    while (true) {
      Vec table(std::size_t{1} << n, 0.0);
      for (std::size_t d = 0; d < masks.size(); ++d)
        table[masks[d]] = game_.lower().value(masks[d]) + static_cast<double>(digit[d]) * game_.grid_step();
      table[game_.upper().grand_mask()] = game_.upper().grand_value();
      family_.emplace_back(n, std::move(table));
      std::size_t d = 0;
      for (; d < masks.size(); ++d) {
        if (++digit[d] < game_.grid_count(masks[d])) break;
        digit[d] = 0;
      }
      if (d == masks.size()) break;
    }
    perm_.resize(family_.size());
    for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = i;
    detail::Rng rng(detail::derive_seed(seed_, 0x76616c75));
    rng.shuffle(perm_);
  }

  Mode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }

  /// Period after which the block-cyclic order repeats (1 for iid).
  std::size_t period() const { return mode_ == Mode::block_cyclic ? family_.size() : 1; }

  /// Family size in block-cyclic mode (unavailable for iid draws).
  std::size_t family_size() const { return family_.size(); }

  ValueFunction at(std::size_t k) const {
    if (mode_ == Mode::block_cyclic) return family_[perm_[k % family_.size()]];
    return sample_value_function(game_, detail::derive_seed(seed_, k));
  }

 private:
  RobustGame game_;
  Mode mode_;
  std::uint64_t seed_;
  std::vector<ValueFunction> family_;
  std::vector<std::size_t> perm_;
};

namespace detail {

inline Vec apply_targeted(const PolyhedralSet& target, OperatorKind kind, double beta,
                          const Vec& x, const ProjectOptions& opts) {
  Vec p = project(target, x, opts);
  const double b = kind == OperatorKind::projection  ? 0.0
                   : kind == OperatorKind::over_projection ? 1.0
                                                           : beta;
  if (b != 0.0)
    for (std::size_t i = 0; i < p.size(); ++i) p[i] += b * (p[i] - x[i]);
  return p;
}

}  // namespace detail

/// One allocation iteration. All agents share the core of v as target.
inline StackedProfile allocation_step(const StackedProfile& x, const WeightedGraph& w,
                                      const ValueFunction& v, OperatorKind kind, double beta,
                                      double alpha, const ProjectOptions& opts = {}) {
  if (!(alpha > 0.0) || !(alpha < 1.0))
    throw std::invalid_argument("allocation_step: alpha must lie strictly inside (0, 1)");
  if (x.n != v.n_agents() || x.n != w.n)
    throw std::invalid_argument("allocation_step: dimension mismatch");
  const StackedProfile mixed = mix(w, x);
  const PolyhedralSet target = core_polyhedron(v);
  StackedProfile out(x.n);
  for (int i = 0; i < x.n; ++i) {
    const Vec t = detail::apply_targeted(target, kind, beta, mixed.block_vec(i), opts);
    const double* xi = x.block(i);
    double* oi = out.block(i);
    for (int j = 0; j < x.n; ++j) oi[j] = (1.0 - alpha) * xi[j] + alpha * t[j];
  }
  return out;
}

/// One bargaining iteration. Agent i's operator targets its own bounding set.
inline StackedProfile bargaining_step(const StackedProfile& x, const WeightedGraph& w,
                                      const ValueFunction& v, OperatorKind kind, double beta,
                                      const ProjectOptions& opts = {}) {
  if (kind == OperatorKind::over_projection || (kind == OperatorKind::mixed && beta >= 1.0))
    throw std::invalid_argument("bargaining_step: operator must be a paracontraction");
  if (x.n != v.n_agents() || x.n != w.n)
    throw std::invalid_argument("bargaining_step: dimension mismatch");
  const StackedProfile mixed = mix(w, x);
  StackedProfile out(x.n);
  for (int i = 0; i < x.n; ++i) {
    const PolyhedralSet target = bounding_polyhedron(v, i);
    out.set_block(i, detail::apply_targeted(target, kind, beta, mixed.block_vec(i), opts));
  }
  return out;
}

namespace detail {

inline double distance_to_target_set(const StackedProfile& x, const PolyhedralSet& robust_core,
                                     const ProjectOptions& opts) {
  const Vec p = project(robust_core, x.mean_block(), opts);
  double s = 0.0;
  for (int i = 0; i < x.n; ++i) {
    const double* xi = x.block(i);
    for (int j = 0; j < x.n; ++j) {
      const double d = xi[j] - p[j];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

}  // namespace detail

/// Euclidean distance from a stacked profile to the consensual robust core
/// {(p, ..., p) : p in core(v_bar)}. The nearest such point replicates the
/// projection of the mean block, because deviations split orthogonally into
/// a consensus part and a mean part.
inline double distance_to_target(const StackedProfile& x, const ValueFunction& v_bar,
                                 const ProjectOptions& opts = {}) {
  return detail::distance_to_target_set(x, core_polyhedron(v_bar), opts);
}

enum class RunStatus { converged, max_iterations };

inline const char* to_string(RunStatus s) {
  return s == RunStatus::converged ? "converged" : "max_iterations";
}

struct TrajectoryPoint {
  int k = 0;
  double normalized_distance = 0.0;
  double consensus_residual = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;                  // one entry per iterate, k = 0 first
  std::vector<std::pair<int, StackedProfile>> snapshots;  // thinned raw profiles
  RunStatus status = RunStatus::max_iterations;
  int iterations = 0;
  double initial_distance = 0.0;
  double final_distance = 0.0;
  Payoff terminal_payoff;
  double terminal_consensus = 0.0;
  bool terminal_in_core = false;  // against v_bar at kTerminalMembershipTol
};

struct AllocationConfig {
  RobustGame game;
  NetworkSchedule schedule;
  OperatorKind kind = OperatorKind::over_projection;
  double beta = 0.5;  // mixed only
  double alpha = 0.5;
  double epsilon = kEpsilonDefault;
  ValueSchedule::Mode value_mode = ValueSchedule::Mode::iid;
  std::uint64_t value_seed = 0;
  double stop_tol = kStopTolDefault;
  int max_iter = kMaxIterDefault;
  int thin_every = kThinEveryDefault;
  ProjectOptions projection;

  void validate() const {
    if (!(epsilon > 0.0) || epsilon > 0.5)
      throw std::invalid_argument("AllocationConfig: epsilon must lie in (0, 1/2]");
    if (alpha < epsilon || alpha > 1.0 - epsilon)
      throw std::invalid_argument("AllocationConfig: alpha must lie in [epsilon, 1 - epsilon]");
    if (kind == OperatorKind::mixed && (!(beta >= 0.0) || !(beta <= 1.0)))
      throw std::invalid_argument("AllocationConfig: beta must lie in [0, 1]");
    if (max_iter < 0) throw std::invalid_argument("AllocationConfig: max_iter must be nonnegative");
    if (!(stop_tol >= 0.0)) throw std::invalid_argument("AllocationConfig: stop_tol must be nonnegative");
    if (thin_every < 1) throw std::invalid_argument("AllocationConfig: thin_every must be positive");
    if (game.n_agents() != schedule.n_agents())
      throw std::invalid_argument("AllocationConfig: game and schedule sizes differ");
  }
};

struct BargainConfig {
  RobustGame game;
  NetworkSchedule schedule;
  OperatorKind kind = OperatorKind::projection;
  double beta = 0.5;  // mixed only, must stay below 1
  ValueSchedule::Mode value_mode = ValueSchedule::Mode::iid;
  std::uint64_t value_seed = 0;
  double stop_tol = kStopTolDefault;
  int max_iter = kMaxIterDefault;
  int thin_every = kThinEveryDefault;
  ProjectOptions projection;

  void validate() const {
    if (kind == OperatorKind::over_projection || (kind == OperatorKind::mixed && beta >= 1.0))
      throw std::invalid_argument("BargainConfig: operator must be a paracontraction");
    if (kind == OperatorKind::mixed && !(beta >= 0.0))
      throw std::invalid_argument("BargainConfig: beta must lie in [0, 1)");
    if (max_iter < 0) throw std::invalid_argument("BargainConfig: max_iter must be nonnegative");
    if (!(stop_tol >= 0.0)) throw std::invalid_argument("BargainConfig: stop_tol must be nonnegative");
    if (thin_every < 1) throw std::invalid_argument("BargainConfig: thin_every must be positive");
    if (game.n_agents() != schedule.n_agents())
      throw std::invalid_argument("BargainConfig: game and schedule sizes differ");
  }
};

namespace detail {

template <typename StepFn>
Trajectory run_loop(const RobustGame& game, const NetworkSchedule& schedule,
                    ValueSchedule::Mode value_mode, std::uint64_t value_seed, double stop_tol,
                    int max_iter, int thin_every, const ProjectOptions& proj,
                    const std::optional<StackedProfile>& x0, StepFn&& step) {
  const ValueFunction v_bar = grand_value_fixed_upper(game);
  const CoreCertificate cert = core_nonempty(v_bar);
  if (!cert.feasible)
    throw EmptyCoreError(cert.solver_status == LpStatus::infeasible
                             ? "the robust core is empty; dynamics have no target"
                             : "robust-core certification failed: solver status " +
                                   std::string(to_string(cert.solver_status)));
  const PolyhedralSet robust_core = core_polyhedron(v_bar);
  const ValueSchedule values(game, value_mode, value_seed);

  StackedProfile x = x0 ? *x0 : StackedProfile::selfish(game.n_agents(), v_bar.grand_value());
  if (x.n != game.n_agents()) throw std::invalid_argument("run: profile size mismatch");
  if (!x.finite()) throw std::invalid_argument("run: profile has non-finite entries");

  Trajectory traj;
  const double d0 = distance_to_target_set(x, robust_core, proj);
  traj.initial_distance = d0;
  auto normalized = [d0](double d) { return d0 > 0.0 ? d / d0 : 0.0; };

  double d = d0;
  traj.points.push_back({0, normalized(d0), x.consensus_residual()});
  traj.snapshots.push_back({0, x});
  traj.status = RunStatus::max_iterations;
  traj.iterations = 0;
  if (normalized(d0) <= stop_tol) {
    traj.status = RunStatus::converged;
  } else {
    for (int k = 1; k <= max_iter; ++k) {
      x = step(x, schedule.graph_at(k - 1), values.at(k - 1));
      d = distance_to_target_set(x, robust_core, proj);
      traj.points.push_back({k, normalized(d), x.consensus_residual()});
      if (k % thin_every == 0) traj.snapshots.push_back({k, x});
      traj.iterations = k;
      if (normalized(d) <= stop_tol) {
        traj.status = RunStatus::converged;
        break;
      }
    }
  }

  traj.final_distance = d;
  traj.terminal_payoff = x.mean_block();
  traj.terminal_consensus = x.consensus_residual();
  traj.terminal_in_core = in_core(traj.terminal_payoff, v_bar, kTerminalMembershipTol);
  return traj;
}

}  // namespace detail

/// Runs the allocation dynamics until the normalized distance to the
/// consensual robust core drops to stop_tol or max_iter is reached.
/// Refuses to start when the robust core is empty.
inline Trajectory run_allocation(const AllocationConfig& cfg,
                                 const std::optional<StackedProfile>& x0 = std::nullopt) {
  cfg.validate();
  return detail::run_loop(
      cfg.game, cfg.schedule, cfg.value_mode, cfg.value_seed, cfg.stop_tol, cfg.max_iter,
      cfg.thin_every, cfg.projection, x0,
      [&cfg](const StackedProfile& x, const WeightedGraph& w, const ValueFunction& v) {
        return allocation_step(x, w, v, cfg.kind, cfg.beta, cfg.alpha, cfg.projection);
      });
}

/// Runs the bargaining dynamics (paracontractions over bounding sets).
inline Trajectory run_bargaining(const BargainConfig& cfg,
                                 const std::optional<StackedProfile>& x0 = std::nullopt) {
  cfg.validate();
  return detail::run_loop(
      cfg.game, cfg.schedule, cfg.value_mode, cfg.value_seed, cfg.stop_tol, cfg.max_iter,
      cfg.thin_every, cfg.projection, x0,
      [&cfg](const StackedProfile& x, const WeightedGraph& w, const ValueFunction& v) {
        return bargaining_step(x, w, v, cfg.kind, cfg.beta, cfg.projection);
      });
}

}  // namespace rcg
