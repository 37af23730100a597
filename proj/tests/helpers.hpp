#pragma once

// Shared fixtures for the test suites: the three-firm illustrative game,
// small graphs, and seeded random generators for LPs, games, and schedules.

#include <cstdint>
#include <utility>
#include <vector>

#include "rcg/rcg.hpp"

namespace fixtures {

// Three firms; singleton values 1, pair intervals [2,4], [2,4], [3,5],
// grand value 8, integer grid.
inline rcg::RobustGame three_firm_game() {
  rcg::Vec lower(8, 0.0), upper(8, 0.0);
  lower[0b001] = upper[0b001] = 1.0;
  lower[0b010] = upper[0b010] = 1.0;
  lower[0b100] = upper[0b100] = 1.0;
  lower[0b011] = 2.0;
  upper[0b011] = 4.0;
  lower[0b101] = 2.0;
  upper[0b101] = 4.0;
  lower[0b110] = 3.0;
  upper[0b110] = 5.0;
  lower[0b111] = upper[0b111] = 8.0;
  return rcg::RobustGame(rcg::ValueFunction(3, lower), rcg::ValueFunction(3, upper), 1.0);
}

inline rcg::ValueFunction three_firm_vbar() { return rcg::grand_value_fixed_upper(three_firm_game()); }

inline rcg::WeightedGraph path3() {
  return rcg::metropolis_weights(rcg::adjacency_from_edges(3, {{0, 1}, {1, 2}}));
}

inline rcg::WeightedGraph complete(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return rcg::metropolis_weights(rcg::adjacency_from_edges(n, edges));
}

// Random LP with a finite box on every variable (never unbounded), mixing
// feasible and infeasible instances. Shapes stay within the vertex oracle's
// reach: 2..4 variables, at most one equality row.
struct RandomLp {
  rcg::LinearProgram lp;
};

inline RandomLp random_lp(rcg::detail::Rng& rng) {
  const std::size_t n = 2 + rng.uniform_index(3);
  RandomLp out;
  rcg::LinearProgram& lp = out.lp;
  lp.c.resize(n);
  lp.lower.resize(n);
  lp.upper.resize(n);
  rcg::Vec mid(n);
  for (std::size_t j = 0; j < n; ++j) {
    lp.c[j] = rng.uniform(-2.0, 2.0);
    lp.lower[j] = -1.0 - rng.uniform(0.0, 2.0);
    lp.upper[j] = 1.0 + rng.uniform(0.0, 2.0);
    mid[j] = 0.5 * (lp.lower[j] + lp.upper[j]);
  }
  auto int_row = [&] {
    rcg::Vec row(n, 0.0);
    bool nonzero = false;
    for (std::size_t j = 0; j < n; ++j) {
      row[j] = static_cast<double>(rng.uniform_index(5)) - 2.0;
      nonzero = nonzero || row[j] != 0.0;
    }
    if (!nonzero) row[rng.uniform_index(n)] = 1.0;
    return row;
  };
  if (rng.uniform_index(2) == 0) {
    rcg::Vec row = int_row();
    double rhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) rhs += row[j] * mid[j];
    rhs += rng.uniform(-1.0, 1.0);
    lp.eq_rows.push_back(std::move(row));
    lp.eq_rhs.push_back(rhs);
  }
  const std::size_t n_le = 1 + rng.uniform_index(4);
  for (std::size_t r = 0; r < n_le; ++r) {
    rcg::Vec row = int_row();
    rcg::Vec pt(n);
    for (std::size_t j = 0; j < n; ++j) pt[j] = rng.uniform(lp.lower[j], lp.upper[j]);
    double rhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) rhs += row[j] * pt[j];
    rhs += rng.uniform(-0.5, 1.5);
    lp.le_rows.push_back(std::move(row));
    lp.le_rhs.push_back(rhs);
  }
  return out;
}

// Robust game built around a known interior core point z: upper(S) is the
// members' share of z minus a positive margin, so z sits strictly inside the
// robust core. A few coalitions get 3-point value grids, the rest are fixed.
struct RandomGame {
  rcg::RobustGame game;
  rcg::Payoff z;
};

inline RandomGame random_core_game(rcg::detail::Rng& rng, int n, int uncertain = 3) {
  const std::size_t size = std::size_t{1} << n;
  rcg::Payoff z(static_cast<std::size_t>(n));
  for (auto& zi : z) zi = rng.uniform(0.5, 2.5);
  rcg::Vec lower(size, 0.0), upper(size, 0.0);
  double grand = 0.0;
  for (double zi : z) grand += zi;
  for (rcg::CoalitionMask m : rcg::strict_masks(n)) {
    double share = 0.0;
    for (int i = 0; i < n; ++i)
      if ((m >> i) & 1u) share += z[static_cast<std::size_t>(i)];
    upper[m] = share - rng.uniform(0.1, 0.6);
    lower[m] = upper[m];
  }
  const double step = 0.01;
  auto strict = rcg::strict_masks(n);
  for (int u = 0; u < uncertain; ++u) {
    const rcg::CoalitionMask m = strict[rng.uniform_index(strict.size())];
    lower[m] = upper[m] - 2.0 * step;  // three grid points
  }
  lower[size - 1] = upper[size - 1] = grand;
  return {rcg::RobustGame(rcg::ValueFunction(n, lower), rcg::ValueFunction(n, upper), step),
          std::move(z)};
}

// Family of graphs whose union over any window covering the family is
// strongly connected: the edges of a random ring are dealt round-robin
// across the members, plus occasional extras.
inline std::vector<rcg::WeightedGraph> random_connected_family(rcg::detail::Rng& rng, int n,
                                                               std::size_t members) {
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  rng.shuffle(order);
  std::vector<std::vector<std::pair<int, int>>> edge_sets(members);
  for (int i = 0; i < n; ++i) {
    const int a = order[static_cast<std::size_t>(i)];
    const int b = order[static_cast<std::size_t>((i + 1) % n)];
    if (a == b) continue;
    edge_sets[static_cast<std::size_t>(i) % members].push_back({a, b});
  }
  for (std::size_t g = 0; g < members; ++g) {
    if (rng.uniform_index(2) == 0) {
      const int a = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
      const int b = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(n)));
      if (a != b) edge_sets[g].push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::vector<rcg::WeightedGraph> family;
  for (const auto& edges : edge_sets)
    family.push_back(rcg::metropolis_weights(rcg::adjacency_from_edges(n, edges)));
  return family;
}

// Random profile with entries in [-span, span].
inline rcg::StackedProfile random_profile(rcg::detail::Rng& rng, int n, double span) {
  rcg::StackedProfile x(n);
  for (double& v : x.flat) v = rng.uniform(-span, span);
  return x;
}

}  // namespace fixtures
