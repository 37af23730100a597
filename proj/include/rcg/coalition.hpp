#pragma once

/// Coalitions over agent sets of size N <= 16, represented as bitmasks.
/// Bit i set means agent i belongs to the coalition. The bitmask doubles
/// as the canonical index into per-coalition tables (index 0 is unused).

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcg {

inline constexpr int kMaxAgents = 16;

using CoalitionMask = std::uint32_t;

class Coalition {
 public:
  Coalition() = default;
  explicit Coalition(CoalitionMask mask) : mask_(mask) {}

  static Coalition of(const std::vector<int>& members, int n_agents) {
    CoalitionMask m = 0;
    for (int i : members) {
      if (i < 0 || i >= n_agents) throw std::invalid_argument("Coalition::of: agent index out of range");
      m |= (CoalitionMask{1} << i);
    }
    return Coalition(m);
  }

  static Coalition grand(int n_agents) {
    return Coalition((CoalitionMask{1} << n_agents) - 1);
  }

  static Coalition singleton(int i) { return Coalition(CoalitionMask{1} << i); }

  CoalitionMask mask() const { return mask_; }
  bool empty() const { return mask_ == 0; }
  bool contains(int i) const { return (mask_ >> i) & 1u; }
  bool subset_of(Coalition other) const { return (mask_ & ~other.mask_) == 0; }
  int size() const { return __builtin_popcount(mask_); }

  std::vector<int> members() const {
    std::vector<int> out;
    for (int i = 0; i < kMaxAgents; ++i)
      if (contains(i)) out.push_back(i);
    return out;
  }

  /// Canonical key "i,j,k" with ascending indices, used by the JSON format.
  std::string key() const {
    std::string out;
    for (int i : members()) {
      if (!out.empty()) out.push_back(',');
      out += std::to_string(i);
    }
    return out;
  }

  static Coalition from_key(const std::string& key, int n_agents) {
    if (key.empty()) throw std::invalid_argument("coalition key is empty");
    CoalitionMask m = 0;
    std::size_t pos = 0;
    while (pos < key.size()) {
      std::size_t next = key.find(',', pos);
      if (next == std::string::npos) next = key.size();
      const std::string tok = key.substr(pos, next - pos);
      if (tok.empty()) throw std::invalid_argument("coalition key has an empty index: '" + key + "'");
      int idx = 0;
      try {
        std::size_t used = 0;
        idx = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw std::invalid_argument("coalition key has a non-integer index: '" + key + "'");
      }
      if (idx < 0 || idx >= n_agents)
        throw std::invalid_argument("coalition key index out of range: '" + key + "'");
      const CoalitionMask bit = CoalitionMask{1} << idx;
      if (m & bit) throw std::invalid_argument("coalition key repeats an index: '" + key + "'");
      m |= bit;
      pos = next + 1;
    }
    return Coalition(m);
  }

  friend bool operator==(Coalition a, Coalition b) { return a.mask_ == b.mask_; }
  friend bool operator!=(Coalition a, Coalition b) { return a.mask_ != b.mask_; }

 private:
  CoalitionMask mask_ = 0;
};

inline void check_agent_count(int n) {
  if (n < 1 || n > kMaxAgents)
    throw std::invalid_argument("agent count must be in [1, " + std::to_string(kMaxAgents) + "]");
}

/// All nonempty coalition masks in ascending order.
inline std::vector<CoalitionMask> nonempty_masks(int n) {
  check_agent_count(n);
  std::vector<CoalitionMask> out;
  const CoalitionMask full = (CoalitionMask{1} << n) - 1;
  out.reserve(full);
  for (CoalitionMask m = 1; m <= full; ++m) out.push_back(m);
  return out;
}

/// Nonempty strict-subset masks (excludes the grand coalition), ascending.
inline std::vector<CoalitionMask> strict_masks(int n) {
  auto out = nonempty_masks(n);
  out.pop_back();
  return out;
}

}  // namespace rcg
