#pragma once

/// Time-varying communication networks. A WeightedGraph is a doubly
/// stochastic mixing matrix with positive diagonal; a NetworkSchedule picks
/// one family member per iteration, either block-cyclically (one seeded
/// permutation of the family repeated every period, so every window of
/// `family size` consecutive steps covers the whole family) or i.i.d.
/// (best effort: window coverage then holds only in probability).

#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rcg/coalition.hpp"
#include "rcg/detail/linalg.hpp"
#include "rcg/detail/rng.hpp"
#include "rcg/profile.hpp"

namespace rcg {

inline constexpr double kStochasticTol = 1e-12;

struct WeightedGraph {
  int n = 0;
  Vec w;  // row-major n x n

  WeightedGraph() = default;
  explicit WeightedGraph(int n_agents) : n(n_agents), w(std::size_t(n_agents) * n_agents, 0.0) {
    check_agent_count(n_agents);
  }

  double& at(int i, int j) { return w[std::size_t(i) * n + j]; }
  double at(int i, int j) const { return w[std::size_t(i) * n + j]; }

  /// Smallest positive entry (the gamma floor actually achieved).
  double min_positive() const {
    double m = kInf;
    for (double v : w)
      if (v > 0.0) m = std::min(m, v);
    return m;
  }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.n == b.n && a.w == b.w;
  }
};

struct GraphValidation {
  std::vector<int> bad_row_sums, bad_col_sums, bad_diagonal;
  std::vector<std::pair<int, int>> negative_entries, below_gamma;

  bool ok() const {
    return bad_row_sums.empty() && bad_col_sums.empty() && bad_diagonal.empty() &&
           negative_entries.empty() && below_gamma.empty();
  }

  std::string describe() const {
    if (ok()) return "ok";
    std::ostringstream s;
    auto list = [&s](const char* label, const std::vector<int>& idx) {
      if (idx.empty()) return;
      s << label << " {";
      for (std::size_t k = 0; k < idx.size(); ++k) s << (k ? "," : "") << idx[k];
      s << "} ";
    };
    list("row sums off at", bad_row_sums);
    list("column sums off at", bad_col_sums);
    list("nonpositive diagonal at", bad_diagonal);
    auto pairs = [&s](const char* label, const std::vector<std::pair<int, int>>& p) {
      if (p.empty()) return;
      s << label << " {";
      for (std::size_t k = 0; k < p.size(); ++k)
        s << (k ? "," : "") << "(" << p[k].first << "," << p[k].second << ")";
      s << "} ";
    };
    pairs("negative entries at", negative_entries);
    pairs("entries below gamma at", below_gamma);
    return s.str();
  }
};

/// Checks double stochasticity (sums within 1e-12), nonnegativity, positive
/// diagonal, and (when gamma > 0) the uniform floor on positive entries.
inline GraphValidation validate(const WeightedGraph& g, double gamma = 0.0) {
  GraphValidation out;
  for (int i = 0; i < g.n; ++i) {
    double rs = 0.0, cs = 0.0;
    for (int j = 0; j < g.n; ++j) {
      rs += g.at(i, j);
      cs += g.at(j, i);
      const double v = g.at(i, j);
      if (v < 0.0) out.negative_entries.push_back({i, j});
      if (gamma > 0.0 && v > 0.0 && v < gamma) out.below_gamma.push_back({i, j});
    }
    if (std::abs(rs - 1.0) > kStochasticTol) out.bad_row_sums.push_back(i);
    if (std::abs(cs - 1.0) > kStochasticTol) out.bad_col_sums.push_back(i);
    if (!(g.at(i, i) > 0.0)) out.bad_diagonal.push_back(i);
  }
  return out;
}

/// Metropolis weights for an undirected simple graph given as a symmetric
/// 0/1 adjacency matrix with zero diagonal:
///   w_ij = 1 / (1 + max(deg_i, deg_j)) on edges, w_ii absorbs the rest.
/// The result is doubly stochastic with positive diagonal by construction.
inline WeightedGraph metropolis_weights(const std::vector<std::vector<int>>& adjacency) {
  const int n = static_cast<int>(adjacency.size());
  check_agent_count(n);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(adjacency[i].size()) != n)
      throw std::invalid_argument("metropolis_weights: adjacency matrix is not square");
    if (adjacency[i][i] != 0)
      throw std::invalid_argument("metropolis_weights: adjacency diagonal must be zero");
    for (int j = 0; j < n; ++j) {
      if (adjacency[i][j] != 0 && adjacency[i][j] != 1)
        throw std::invalid_argument("metropolis_weights: adjacency entries must be 0 or 1");
      if (adjacency[i][j] != adjacency[j][i])
        throw std::invalid_argument("metropolis_weights: adjacency matrix is not symmetric");
    }
  }
  std::vector<int> deg(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) deg[i] += adjacency[i][j];
  WeightedGraph g(n);
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i || !adjacency[i][j]) continue;
      const double wij = 1.0 / (1.0 + std::max(deg[i], deg[j]));
      g.at(i, j) = wij;
      off += wij;
    }
    g.at(i, i) = 1.0 - off;
  }
  return g;
}

/// Adjacency matrix from an undirected edge list.
inline std::vector<std::vector<int>> adjacency_from_edges(
    int n, const std::vector<std::pair<int, int>>& edges) {
  check_agent_count(n);
  std::vector<std::vector<int>> a(n, std::vector<int>(n, 0));
  for (const auto& [i, j] : edges) {
    if (i < 0 || i >= n || j < 0 || j >= n) throw std::invalid_argument("edge endpoint out of range");
    if (i == j) throw std::invalid_argument("self-loop edges are not allowed");
    a[i][j] = a[j][i] = 1;
  }
  return a;
}

/// One round of gossip: block i of the result is sum_j w_ij x_j.
inline StackedProfile mix(const WeightedGraph& g, const StackedProfile& x) {
  if (g.n != x.n) throw std::invalid_argument("mix: graph and profile sizes differ");
  StackedProfile out(x.n);
  for (int i = 0; i < x.n; ++i) {
    double* oi = out.block(i);
    for (int j = 0; j < x.n; ++j) {
      const double wij = g.at(i, j);
      if (wij == 0.0) continue;
      const double* xj = x.block(j);
      for (int k = 0; k < x.n; ++k) oi[k] += wij * xj[k];
    }
  }
  return out;
}

class NetworkSchedule {
 public:
  enum class Mode { block_cyclic, iid };

  NetworkSchedule() = default;

  static NetworkSchedule block_cyclic(std::vector<WeightedGraph> family, std::uint64_t seed,
                                      std::size_t window = 0) {
    return NetworkSchedule(std::move(family), Mode::block_cyclic, seed, window);
  }

  static NetworkSchedule iid(std::vector<WeightedGraph> family, std::uint64_t seed,
                             std::size_t window = 0) {
    return NetworkSchedule(std::move(family), Mode::iid, seed, window);
  }

  NetworkSchedule(std::vector<WeightedGraph> family, Mode mode, std::uint64_t seed,
                  std::size_t window = 0)
      : family_(std::move(family)), mode_(mode), seed_(seed) {
    if (family_.empty()) throw std::invalid_argument("NetworkSchedule: family is empty");
    const int n = family_.front().n;
    for (const WeightedGraph& g : family_)
      if (g.n != n) throw std::invalid_argument("NetworkSchedule: family members have mixed sizes");
    window_ = window == 0 ? family_.size() : window;
    if (mode_ == Mode::block_cyclic) {
      perm_.resize(family_.size());
      for (std::size_t i = 0; i < perm_.size(); ++i) perm_[i] = i;
      detail::Rng rng(detail::derive_seed(seed_, 0x67726170));
      rng.shuffle(perm_);
    }
  }

  int n_agents() const { return family_.front().n; }
  std::size_t family_size() const { return family_.size(); }
  std::size_t window() const { return window_; }
  Mode mode() const { return mode_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<WeightedGraph>& family() const { return family_; }

  const WeightedGraph& graph_at(std::size_t k) const {
    if (mode_ == Mode::block_cyclic) return family_[perm_[k % perm_.size()]];
    detail::Rng rng(detail::derive_seed(seed_, k));
    return family_[rng.uniform_index(family_.size())];
  }

 private:
  std::vector<WeightedGraph> family_;
  Mode mode_ = Mode::block_cyclic;
  std::uint64_t seed_ = 0;
  std::size_t window_ = 1;
  std::vector<std::size_t> perm_;
};

namespace detail {

/// Strong connectivity of the directed graph {i -> j : w_ij > 0, i != j},
/// unioned over the given family members.
inline bool union_strongly_connected(const std::vector<const WeightedGraph*>& graphs) {
  if (graphs.empty()) return false;
  const int n = graphs.front()->n;
  std::vector<std::vector<int>> adj(n);
  for (const WeightedGraph* g : graphs)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j && g->at(i, j) > 0.0) adj[i].push_back(j);
  for (int s = 0; s < n; ++s) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{s};
    seen[s] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    if (count != n) return false;
  }
  return true;
}

}  // namespace detail

/// Window-connectivity certificate. For block-cyclic order the sequence is
/// periodic, so it suffices to union each window of `window()` consecutive
/// graphs starting within one period. For i.i.d. order the property can only
/// hold in probability; the whole-family union is checked instead.
inline bool q_connected(const NetworkSchedule& s) {
  std::vector<const WeightedGraph*> window;
  if (s.mode() == NetworkSchedule::Mode::iid) {
    for (const WeightedGraph& g : s.family()) window.push_back(&g);
    return detail::union_strongly_connected(window);
  }
  for (std::size_t start = 0; start < s.family_size(); ++start) {
    window.clear();
    for (std::size_t k = start; k < start + s.window(); ++k) window.push_back(&s.graph_at(k));
    if (!detail::union_strongly_connected(window)) return false;
  }
  return true;
}

}  // namespace rcg
