#pragma once

/// A stacked profile holds one payoff proposal per agent: N blocks of
/// dimension N stored contiguously, block i being agent i's proposal.

#include <stdexcept>
#include <vector>

#include "rcg/coalition.hpp"
#include "rcg/detail/linalg.hpp"

namespace rcg {

struct StackedProfile {
  int n = 0;
  Vec flat;  // n blocks of length n

  StackedProfile() = default;
  explicit StackedProfile(int n_agents) : n(n_agents), flat(std::size_t(n_agents) * n_agents, 0.0) {
    check_agent_count(n_agents);
  }

  double* block(int i) { return flat.data() + std::size_t(i) * n; }
  const double* block(int i) const { return flat.data() + std::size_t(i) * n; }

  Vec block_vec(int i) const {
    return Vec(block(i), block(i) + n);
  }

  void set_block(int i, const Vec& v) {
    if (static_cast<int>(v.size()) != n) throw std::invalid_argument("StackedProfile: block size mismatch");
    for (int j = 0; j < n; ++j) block(i)[j] = v[j];
  }

  Vec mean_block() const {
    Vec m(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m[j] += block(i)[j];
    for (int j = 0; j < n; ++j) m[j] /= n;
    return m;
  }

  /// Largest block distance to the mean block (consensus residual).
  double consensus_residual() const {
    const Vec m = mean_block();
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) {
        const double d = block(i)[j] - m[j];
        s += d * d;
      }
      worst = std::max(worst, s);
    }
    return std::sqrt(worst);
  }

  bool finite() const { return detail::all_finite(flat); }

  /// The selfish start: agent i claims the whole grand value for itself.
  static StackedProfile selfish(int n_agents, double grand_value) {
    StackedProfile x(n_agents);
    for (int i = 0; i < n_agents; ++i) x.block(i)[i] = grand_value;
    return x;
  }

  friend bool operator==(const StackedProfile& a, const StackedProfile& b) {
    return a.n == b.n && a.flat == b.flat;
  }
};

}  // namespace rcg
