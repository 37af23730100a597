#pragma once

/// File formats: JSON for games, network schedules, and market scenarios;
/// CSV for trajectories. All text is UTF-8 with LF line endings and floats
/// carry 17 significant digits, so identical inputs yield identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rcg/dynamics.hpp"
#include "rcg/energy.hpp"
#include "rcg/game.hpp"
#include "rcg/network.hpp"

namespace rcg::io {

using json = nlohmann::ordered_json;

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return std::move(out).str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline json parse_text(const std::string& text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
}

inline json load_json(const std::filesystem::path& path) {
  return parse_text(read_file(path), path.string());
}

namespace detail {

inline const json& need(const json& j, const char* field, const std::string& where) {
  if (!j.is_object()) throw std::runtime_error(where + ": expected a JSON object");
  auto it = j.find(field);
  if (it == j.end()) throw std::runtime_error(where + ": missing field '" + field + "'");
  return *it;
}

inline double need_number(const json& j, const char* field, const std::string& where) {
  const json& v = need(j, field, where);
  if (!v.is_number()) throw std::runtime_error(where + ": field '" + field + "' must be a number");
  return v.get<double>();
}

inline Vec number_array(const json& v, const std::string& where) {
  if (!v.is_array()) throw std::runtime_error(where + ": expected an array of numbers");
  Vec out;
  out.reserve(v.size());
  for (const json& e : v) {
    if (!e.is_number()) throw std::runtime_error(where + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

// ---- robust games ----------------------------------------------------------
// {"n_agents": n, "lower": {"0": v, "0,1": v, ...}, "upper": {...}, "grid_step": s}

inline json game_to_json(const RobustGame& g) {
  json j;
  j["n_agents"] = g.n_agents();
  json lower = json::object(), upper = json::object();
  for (CoalitionMask m : nonempty_masks(g.n_agents())) {
    const std::string key = Coalition(m).key();
    lower[key] = g.lower().value(m);
    upper[key] = g.upper().value(m);
  }
  j["lower"] = std::move(lower);
  j["upper"] = std::move(upper);
  j["grid_step"] = g.grid_step();
  return j;
}

inline RobustGame game_from_json(const json& j, const std::string& where = "game") {
  const int n = [&] {
    const json& v = detail::need(j, "n_agents", where);
    if (!v.is_number_integer()) throw std::runtime_error(where + ": 'n_agents' must be an integer");
    return v.get<int>();
  }();
  check_agent_count(n);
  auto table = [&](const char* field) {
    const json& v = detail::need(j, field, where);
    if (!v.is_object()) throw std::runtime_error(where + ": '" + field + "' must be an object");
    std::map<std::string, double> m;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (!it.value().is_number())
        throw std::runtime_error(where + ": '" + std::string(field) + "." + it.key() + "' must be a number");
      m[it.key()] = it.value().get<double>();
    }
    try {
      return ValueFunction::from_map(n, m);
    } catch (const std::exception& e) {
      throw std::runtime_error(where + ": '" + field + "': " + e.what());
    }
  };
  ValueFunction lower = table("lower");
  ValueFunction upper = table("upper");
  const double step = detail::need_number(j, "grid_step", where);
  try {
    return RobustGame(std::move(lower), std::move(upper), step);
  } catch (const std::exception& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
}

// ---- network schedules ------------------------------------------------------
// {"graphs": [[[0,1],[1,2]], ...], "mode": "block_cyclic"|"iid", "seed": s, "Q": q}
// Each graph is an undirected edge list; weights are Metropolis.

struct NetworkConfig {
  int n_agents = 0;
  std::vector<std::vector<std::pair<int, int>>> edges;
  std::vector<WeightedGraph> family;
  NetworkSchedule::Mode mode = NetworkSchedule::Mode::block_cyclic;
  std::uint64_t seed = 0;
  std::size_t window = 0;  // 0 = family size

  NetworkSchedule make(std::uint64_t seed_override) const {
    return mode == NetworkSchedule::Mode::block_cyclic
               ? NetworkSchedule::block_cyclic(family, seed_override, window)
               : NetworkSchedule::iid(family, seed_override, window);
  }
  NetworkSchedule make() const { return make(seed); }
};

inline const char* to_string(NetworkSchedule::Mode m) {
  return m == NetworkSchedule::Mode::block_cyclic ? "block_cyclic" : "iid";
}

inline json network_to_json(const NetworkConfig& net) {
  json graphs = json::array();
  for (const auto& graph : net.edges) {
    json edges = json::array();
    for (const auto& [i, k] : graph) edges.push_back(json::array({i, k}));
    graphs.push_back(std::move(edges));
  }
  json j;
  j["graphs"] = std::move(graphs);
  j["mode"] = to_string(net.mode);
  j["seed"] = net.seed;
  j["Q"] = net.window;
  return j;
}

inline NetworkConfig network_from_json(const json& j, int n_agents,
                                       const std::string& where = "network") {
  NetworkConfig net;
  net.n_agents = n_agents;
  const json& graphs = detail::need(j, "graphs", where);
  if (!graphs.is_array() || graphs.empty())
    throw std::runtime_error(where + ": 'graphs' must be a nonempty array of edge lists");
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    const json& list = graphs[g];
    const std::string gw = where + ".graphs[" + std::to_string(g) + "]";
    if (!list.is_array()) throw std::runtime_error(gw + ": expected an edge list");
    std::vector<std::pair<int, int>> edges;
    for (const json& e : list) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
        throw std::runtime_error(gw + ": each edge must be a pair of agent indices");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    try {
      net.family.push_back(metropolis_weights(adjacency_from_edges(n_agents, edges)));
    } catch (const std::exception& ex) {
      throw std::runtime_error(gw + ": " + ex.what());
    }
    net.edges.push_back(std::move(edges));
  }
  if (auto it = j.find("mode"); it != j.end()) {
    const std::string m = it->get<std::string>();
    if (m == "block_cyclic")
      net.mode = NetworkSchedule::Mode::block_cyclic;
    else if (m == "iid")
      net.mode = NetworkSchedule::Mode::iid;
    else
      throw std::runtime_error(where + ": 'mode' must be \"block_cyclic\" or \"iid\"");
  }
  if (auto it = j.find("seed"); it != j.end()) net.seed = it->get<std::uint64_t>();
  if (auto it = j.find("Q"); it != j.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0)
      throw std::runtime_error(where + ": 'Q' must be a nonnegative integer");
    net.window = it->get<std::size_t>();
  }
  return net;
}

// ---- market scenarios -------------------------------------------------------
// {"K": k, "prices": {"buy": [...], "sell": [...]},
//  "prosumers": [{"e","b_max","b_min","eta_ch","eta_dc","soc0","q_min","q_max","q"}, ...],
//  "grid_step": s}

inline json scenario_to_json(const MarketScenario& sc) {
  json j;
  j["K"] = sc.horizon;
  j["prices"] = {{"buy", sc.price_buy}, {"sell", sc.price_sell}};
  json prosumers = json::array();
  for (std::size_t i = 0; i < sc.prosumers.size(); ++i) {
    const ProsumerParams& p = sc.prosumers[i];
    json e;
    e["e"] = p.capacity;
    e["b_max"] = p.charge_limit;
    e["b_min"] = p.discharge_limit;
    e["eta_ch"] = p.eta_ch;
    e["eta_dc"] = p.eta_dc;
    e["soc0"] = p.soc0;
    e["q_min"] = sc.demand_min[i];
    e["q_max"] = sc.demand_max[i];
    e["q"] = sc.demand[i];
    prosumers.push_back(std::move(e));
  }
  j["prosumers"] = std::move(prosumers);
  j["grid_step"] = sc.grid_step;
  return j;
}

inline MarketScenario scenario_from_json(const json& j, const std::string& where = "scenario") {
  MarketScenario sc;
  const json& k = detail::need(j, "K", where);
  if (!k.is_number_integer()) throw std::runtime_error(where + ": 'K' must be an integer");
  sc.horizon = k.get<int>();
  const json& prices = detail::need(j, "prices", where);
  sc.price_buy = detail::number_array(detail::need(prices, "buy", where + ".prices"), where + ".prices.buy");
  sc.price_sell = detail::number_array(detail::need(prices, "sell", where + ".prices"), where + ".prices.sell");
  const json& prosumers = detail::need(j, "prosumers", where);
  if (!prosumers.is_array() || prosumers.empty())
    throw std::runtime_error(where + ": 'prosumers' must be a nonempty array");
  for (std::size_t i = 0; i < prosumers.size(); ++i) {
    const json& e = prosumers[i];
    const std::string pw = where + ".prosumers[" + std::to_string(i) + "]";
    ProsumerParams p;
    p.capacity = detail::need_number(e, "e", pw);
    p.charge_limit = detail::need_number(e, "b_max", pw);
    p.discharge_limit = detail::need_number(e, "b_min", pw);
    p.eta_ch = detail::need_number(e, "eta_ch", pw);
    p.eta_dc = detail::need_number(e, "eta_dc", pw);
    p.soc0 = detail::need_number(e, "soc0", pw);
    sc.prosumers.push_back(p);
    sc.demand_min.push_back(detail::number_array(detail::need(e, "q_min", pw), pw + ".q_min"));
    sc.demand_max.push_back(detail::number_array(detail::need(e, "q_max", pw), pw + ".q_max"));
    sc.demand.push_back(detail::number_array(detail::need(e, "q", pw), pw + ".q"));
  }
  if (auto it = j.find("grid_step"); it != j.end()) sc.grid_step = it->get<double>();
  try {
    sc.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(where + ": " + e.what());
  }
  return sc;
}

// ---- trajectory CSV ---------------------------------------------------------

inline std::string trajectory_csv(const Trajectory& traj,
                                  const std::vector<std::string>& header_comments = {}) {
  std::string out;
  for (const std::string& line : header_comments) out += "# " + line + "\n";
  out += "k,normalized_distance,consensus_residual\n";
  for (const TrajectoryPoint& p : traj.points) {
    out += std::to_string(p.k);
    out += ',';
    out += format_g17(p.normalized_distance);
    out += ',';
    out += format_g17(p.consensus_residual);
    out += '\n';
  }
  return out;
}

/// Per-iteration mean/min/max of normalized distance across runs. Shorter
/// trajectories are padded with their final value so every row aggregates
/// the same number of runs.
inline std::string aggregate_csv(const std::vector<std::vector<TrajectoryPoint>>& runs,
                                 const std::vector<std::string>& header_comments = {}) {
  std::size_t length = 0;
  for (const auto& r : runs) length = std::max(length, r.size());
  std::string out;
  for (const std::string& line : header_comments) out += "# " + line + "\n";
  out += "k,mean,min,max\n";
  for (std::size_t k = 0; k < length; ++k) {
    double sum = 0.0, lo = kInf, hi = -kInf;
    for (const auto& r : runs) {
      const double v = r[std::min(k, r.size() - 1)].normalized_distance;
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    out += std::to_string(k);
    out += ',';
    out += format_g17(sum / static_cast<double>(runs.size()));
    out += ',';
    out += format_g17(lo);
    out += ',';
    out += format_g17(hi);
    out += '\n';
  }
  return out;
}

}  // namespace rcg::io
