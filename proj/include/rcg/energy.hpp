#pragma once

/// Cooperative energy-storage scenario. Each coalition schedules its members'
/// batteries against hourly buy/sell prices; the optimal dispatch cost defines
/// the coalitional value v(S) = sum_i c({i}) - c(S), and interval demand
/// envelopes induce conservative value bounds used to build a RobustGame.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rcg/coalition.hpp"
#include "rcg/detail/rng.hpp"
#include "rcg/game.hpp"
#include "rcg/lp.hpp"

namespace rcg {

struct ProsumerParams {
  double capacity = 0.0;         // usable battery energy, kWh
  double charge_limit = 0.0;     // max charging power, kW
  double discharge_limit = 0.0;  // max discharging power magnitude, kW
  double eta_ch = 0.95;          // charging efficiency
  double eta_dc = 0.95;          // discharging efficiency
  double soc0 = 0.5;             // initial state of charge, fraction of capacity

  void validate() const {
    if (!std::isfinite(capacity) || !std::isfinite(charge_limit) || !std::isfinite(discharge_limit))
      throw std::invalid_argument("ProsumerParams: non-finite battery parameter");
    if (capacity < 0.0 || charge_limit < 0.0 || discharge_limit < 0.0)
      throw std::invalid_argument("ProsumerParams: capacity and rate limits must be nonnegative");
    if (!(eta_ch > 0.0) || !(eta_ch < 1.0) || !(eta_dc > 0.0) || !(eta_dc < 1.0))
      throw std::invalid_argument("ProsumerParams: efficiencies must lie in (0, 1)");
    if (!(soc0 >= 0.0) || !(soc0 <= 1.0))
      throw std::invalid_argument("ProsumerParams: soc0 must lie in [0, 1]");
  }
};

/// Hourly market over a horizon of K intervals. demand[i][t] is agent i's
/// committed net demand (kWh, negative = surplus); demand_min/demand_max are
/// the uncertainty envelope around it.
struct MarketScenario {
  int horizon = 0;
  Vec price_buy;
  Vec price_sell;
  std::vector<ProsumerParams> prosumers;
  std::vector<Vec> demand;
  std::vector<Vec> demand_min;
  std::vector<Vec> demand_max;
  double grid_step = kGridStepDefault;

  int n_agents() const { return static_cast<int>(prosumers.size()); }

  void validate() const {
    if (horizon < 1) throw std::invalid_argument("MarketScenario: horizon must be positive");
    const std::size_t k = static_cast<std::size_t>(horizon);
    if (price_buy.size() != k || price_sell.size() != k)
      throw std::invalid_argument("MarketScenario: price vectors must have one entry per interval");
    for (std::size_t t = 0; t < k; ++t) {
      if (!std::isfinite(price_buy[t]) || !std::isfinite(price_sell[t]))
        throw std::invalid_argument("MarketScenario: non-finite price");
      // no riskless arbitrage against the grid within a single interval
      if (!(price_buy[t] >= price_sell[t]) || !(price_sell[t] >= 0.0))
        throw std::invalid_argument("MarketScenario: prices must satisfy buy >= sell >= 0");
    }
    check_agent_count(n_agents());
    const std::size_t n = prosumers.size();
    if (demand.size() != n || demand_min.size() != n || demand_max.size() != n)
      throw std::invalid_argument("MarketScenario: demand tables must have one row per prosumer");
    for (std::size_t i = 0; i < n; ++i) {
      prosumers[i].validate();
      if (demand[i].size() != k || demand_min[i].size() != k || demand_max[i].size() != k)
        throw std::invalid_argument("MarketScenario: demand rows must have one entry per interval");
      for (std::size_t t = 0; t < k; ++t) {
        if (!std::isfinite(demand_min[i][t]) || !std::isfinite(demand[i][t]) || !std::isfinite(demand_max[i][t]))
          throw std::invalid_argument("MarketScenario: non-finite demand");
        if (!(demand_min[i][t] <= demand[i][t]) || !(demand[i][t] <= demand_max[i][t]))
          throw std::invalid_argument("MarketScenario: demand envelope must satisfy min <= committed <= max");
      }
    }
    if (!(grid_step > 0.0)) throw std::invalid_argument("MarketScenario: grid_step must be positive");
  }
};

/// Optimal coalition dispatch. Member arrays follow ascending agent order.
struct Dispatch {
  LpStatus status = LpStatus::iteration_cap;
  double cost = 0.0;
  std::vector<Vec> b_plus;   // charging power per member per t
  std::vector<Vec> b_minus;  // discharging power per member per t (nonpositive)
  std::vector<Vec> l_plus;   // energy bought per member per t
  std::vector<Vec> l_minus;  // energy sold per member per t (nonpositive)
  std::vector<Vec> soc_kwh;  // stored energy after each interval
};

namespace detail {

// Variable layout: four blocks (b+, b-, L+, L-), each |S| * K wide,
// member-major then time. Rows: K balance equalities, |S| end-of-horizon
// state-of-charge restorations, K purchase-dominance inequalities, and
// 2 * |S| * K running state-of-charge prefix inequalities.
inline LinearProgram coalition_lp(const Coalition& s, const MarketScenario& sc,
                                  const std::vector<Vec>& q) {
  const std::vector<int> members = s.members();
  const std::size_t ns = members.size();
  const std::size_t k = static_cast<std::size_t>(sc.horizon);
  const std::size_t n = 4 * ns * k;
  auto id = [&](std::size_t block, std::size_t a, std::size_t t) {
    return (block * ns + a) * k + t;
  };

  LinearProgram lp;
  lp.c.assign(n, 0.0);
  lp.lower.assign(n, 0.0);
  lp.upper.assign(n, kInf);
  for (std::size_t a = 0; a < ns; ++a) {
    const ProsumerParams& p = sc.prosumers[static_cast<std::size_t>(members[a])];
    for (std::size_t t = 0; t < k; ++t) {
      lp.upper[id(0, a, t)] = p.charge_limit;
      lp.lower[id(1, a, t)] = -p.discharge_limit;
      lp.upper[id(1, a, t)] = 0.0;
      lp.lower[id(3, a, t)] = -kInf;
      lp.upper[id(3, a, t)] = 0.0;
      lp.c[id(2, a, t)] = sc.price_buy[t];
      lp.c[id(3, a, t)] = sc.price_sell[t];
    }
  }

  // balance: sum_i (b+ + b- + q) = sum_i (L+ + L-) per interval
  for (std::size_t t = 0; t < k; ++t) {
    Vec row(n, 0.0);
    double rhs = 0.0;
    for (std::size_t a = 0; a < ns; ++a) {
      row[id(0, a, t)] = 1.0;
      row[id(1, a, t)] = 1.0;
      row[id(2, a, t)] = -1.0;
      row[id(3, a, t)] = -1.0;
      rhs -= q[static_cast<std::size_t>(members[a])][t];
    }
    lp.eq_rows.push_back(std::move(row));
    lp.eq_rhs.push_back(rhs);
  }
  // end-of-horizon restoration: sum_t (eta_ch b+ + b- / eta_dc) = 0 per member
  for (std::size_t a = 0; a < ns; ++a) {
    const ProsumerParams& p = sc.prosumers[static_cast<std::size_t>(members[a])];
    Vec row(n, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
      row[id(0, a, t)] = p.eta_ch;
      row[id(1, a, t)] = 1.0 / p.eta_dc;
    }
    lp.eq_rows.push_back(std::move(row));
    lp.eq_rhs.push_back(0.0);
  }
  // purchases dominate net injection: sum_i (b+ + b- + q) <= sum_i L+ per interval
  for (std::size_t t = 0; t < k; ++t) {
    Vec row(n, 0.0);
    double rhs = 0.0;
    for (std::size_t a = 0; a < ns; ++a) {
      row[id(0, a, t)] = 1.0;
      row[id(1, a, t)] = 1.0;
      row[id(2, a, t)] = -1.0;
      rhs -= q[static_cast<std::size_t>(members[a])][t];
    }
    lp.le_rows.push_back(std::move(row));
    lp.le_rhs.push_back(rhs);
  }
  // running state of charge stays within [0, capacity] for every prefix
  for (std::size_t a = 0; a < ns; ++a) {
    const ProsumerParams& p = sc.prosumers[static_cast<std::size_t>(members[a])];
    for (std::size_t m = 1; m <= k; ++m) {
      Vec up(n, 0.0);
      for (std::size_t t = 0; t < m; ++t) {
        up[id(0, a, t)] = p.eta_ch;
        up[id(1, a, t)] = 1.0 / p.eta_dc;
      }
      Vec down(n, 0.0);
      for (std::size_t t = 0; t < m; ++t) {
        down[id(0, a, t)] = -up[id(0, a, t)];
        down[id(1, a, t)] = -up[id(1, a, t)];
      }
      lp.le_rows.push_back(std::move(up));
      lp.le_rhs.push_back(p.capacity * (1.0 - p.soc0));
      lp.le_rows.push_back(std::move(down));
      lp.le_rhs.push_back(p.capacity * p.soc0);
    }
  }
  return lp;
}

}  // namespace detail

/// Solves the coalition's dispatch LP. `demand` overrides the committed
/// demand table (same shape); used for envelope and Monte-Carlo evaluations.
inline Dispatch coalition_dispatch(const Coalition& s, const MarketScenario& sc,
                                   const std::vector<Vec>* demand = nullptr,
                                   const SimplexOptions& opts = {}) {
  if (s.empty()) throw std::invalid_argument("coalition_dispatch: empty coalition");
  const std::vector<Vec>& q = demand ? *demand : sc.demand;
  const LpOutcome out = solve(detail::coalition_lp(s, sc, q), opts);
  Dispatch d;
  d.status = out.status;
  d.cost = out.objective;
  if (out.status != LpStatus::optimal) return d;
  const std::vector<int> members = s.members();
  const std::size_t ns = members.size();
  const std::size_t k = static_cast<std::size_t>(sc.horizon);
  auto block = [&](std::size_t b, std::size_t a) {
    return Vec(out.z.begin() + static_cast<std::ptrdiff_t>((b * ns + a) * k),
               out.z.begin() + static_cast<std::ptrdiff_t>((b * ns + a + 1) * k));
  };
  for (std::size_t a = 0; a < ns; ++a) {
    d.b_plus.push_back(block(0, a));
    d.b_minus.push_back(block(1, a));
    d.l_plus.push_back(block(2, a));
    d.l_minus.push_back(block(3, a));
    const ProsumerParams& p = sc.prosumers[static_cast<std::size_t>(members[a])];
    Vec soc(k, 0.0);
    double level = p.capacity * p.soc0;
    for (std::size_t t = 0; t < k; ++t) {
      level += p.eta_ch * d.b_plus[a][t] + d.b_minus[a][t] / p.eta_dc;
      soc[t] = level;
    }
    d.soc_kwh.push_back(std::move(soc));
  }
  return d;
}

inline double coalition_cost(const Coalition& s, const MarketScenario& sc,
                             const std::vector<Vec>* demand = nullptr,
                             const SimplexOptions& opts = {}) {
  const Dispatch d = coalition_dispatch(s, sc, demand, opts);
  if (d.status != LpStatus::optimal)
    throw std::runtime_error("coalition_cost: solver returned " + std::string(to_string(d.status)) +
                             " for coalition {" + s.key() + "}");
  return d.cost;
}

/// v(S) = sum of stand-alone member costs minus the joint cost, all evaluated
/// on the same demand table.
inline double coalition_value(const Coalition& s, const MarketScenario& sc,
                              const std::vector<Vec>* demand = nullptr,
                              const SimplexOptions& opts = {}) {
  double singles = 0.0;
  for (int i : s.members()) singles += coalition_cost(Coalition::singleton(i), sc, demand, opts);
  return singles - coalition_cost(s, sc, demand, opts);
}

/// Conservative value interval under the demand envelope. Joint cost is
/// monotone in demand, so pairing individual costs at one extreme with the
/// coalition cost at the other brackets every realizable value; the lower end
/// is clamped at zero because v(S) >= 0 pointwise.
inline std::pair<double, double> value_bounds(const Coalition& s, const MarketScenario& sc,
                                              const SimplexOptions& opts = {}) {
  auto sum_singles = [&](const std::vector<Vec>& q) {
    double c = 0.0;
    for (int i : s.members()) c += coalition_cost(Coalition::singleton(i), sc, &q, opts);
    return c;
  };
  const double a = sum_singles(sc.demand_min) - coalition_cost(s, sc, &sc.demand_max, opts);
  const double b = sum_singles(sc.demand_max) - coalition_cost(s, sc, &sc.demand_min, opts);
  return {std::max(0.0, std::min(a, b)), std::max(a, b)};
}

/// Evaluates value bounds for every proper coalition, pins the grand value on
/// the committed demand, and assembles the RobustGame. Nondegenerate bounds
/// are aligned outward to the monetary grid: the admissible value set is
/// lower + j * grid_step, so the upper bound must itself be a drawable point
/// or no admissible value function attains it and the robust core would be
/// strictly smaller than the family's common fixed-point set.
inline RobustGame build_robust_game(const MarketScenario& sc, const SimplexOptions& opts = {}) {
  sc.validate();
  const int n = sc.n_agents();
  const std::size_t size = std::size_t{1} << n;
  const double step = sc.grid_step;
  // snap tolerance in grid units, so LP rounding noise does not widen a bound
  // that already sits on the grid by a full step
  const double snap = 1e-6;
  Vec lower(size, 0.0), upper(size, 0.0);
  for (CoalitionMask m : strict_masks(n)) {
    const auto [lo, hi] = value_bounds(Coalition(m), sc, opts);
    if (hi > lo) {
      lower[m] = std::max(0.0, std::floor(lo / step + snap) * step);
      upper[m] = std::ceil(hi / step - snap) * step;
    } else {
      lower[m] = lo;
      upper[m] = hi;
    }
  }
  const CoalitionMask grand = Coalition::grand(n).mask();
  lower[grand] = upper[grand] = coalition_value(Coalition::grand(n), sc, nullptr, opts);
  return RobustGame(ValueFunction(n, std::move(lower)), ValueFunction(n, std::move(upper)),
                    sc.grid_step);
}

/// Uniform per-(agent, interval) demand draw inside the envelope.
inline std::vector<Vec> sample_demands(const MarketScenario& sc, std::uint64_t seed) {
  detail::Rng rng(seed);
  std::vector<Vec> q(sc.demand_min.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i].resize(sc.demand_min[i].size());
    for (std::size_t t = 0; t < q[i].size(); ++t)
      q[i][t] = rng.uniform(sc.demand_min[i][t], sc.demand_max[i][t]);
  }
  return q;
}

/// Reference community: identical 7 kWh batteries with 3.5 kW limits, 0.95
/// efficiencies, half-charged start, a two-peak daily price profile, and
/// seeded mixed-sign demand envelopes.
inline MarketScenario benchmark_scenario(int n_agents = 6, int horizon = 6,
                                         std::uint64_t seed = 1) {
  check_agent_count(n_agents);
  if (horizon < 1) throw std::invalid_argument("benchmark_scenario: horizon must be positive");
  static constexpr double kDay[6] = {0.10, 0.12, 0.20, 0.26, 0.22, 0.14};
  MarketScenario sc;
  sc.horizon = horizon;
  for (int t = 0; t < horizon; ++t) {
    sc.price_buy.push_back(kDay[t % 6]);
    sc.price_sell.push_back(kDay[t % 6] / 2.0);
  }
  detail::Rng rng(detail::derive_seed(seed, 0x656e6572));
  for (int i = 0; i < n_agents; ++i) {
    ProsumerParams p;
    p.capacity = 7.0;
    p.charge_limit = 3.5;
    p.discharge_limit = 3.5;
    p.eta_ch = 0.95;
    p.eta_dc = 0.95;
    p.soc0 = 0.5;
    sc.prosumers.push_back(p);
    Vec q(static_cast<std::size_t>(horizon)), lo(q.size()), hi(q.size());
    for (std::size_t t = 0; t < q.size(); ++t) {
      q[t] = rng.uniform(-2.0, 3.0);
      lo[t] = q[t] - rng.uniform(0.0, 1.5);
      hi[t] = q[t] + rng.uniform(0.0, 1.5);
    }
    sc.demand.push_back(std::move(q));
    sc.demand_min.push_back(std::move(lo));
    sc.demand_max.push_back(std::move(hi));
  }
  sc.grid_step = kGridStepDefault;
  sc.validate();
  return sc;
}

}  // namespace rcg
