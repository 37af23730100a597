#pragma once

/// Batch harness: seeded trajectory ensembles for both algorithms, CSV
/// output, aggregate statistics, and the assumption-certification report.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rcg/dynamics.hpp"
#include "rcg/io.hpp"

namespace rcg {

enum class Algorithm { allocate, bargain };

inline const char* to_string(Algorithm a) {
  return a == Algorithm::allocate ? "allocate" : "bargain";
}

// Per-run sub-seed derivation, fixed offsets from run_seed = base_seed + r.
inline constexpr std::uint64_t kValueSeedOffset = 1000003;
inline constexpr std::uint64_t kGraphSeedOffset = 2000003;
inline constexpr std::uint64_t kDemandSeedOffset = 3000003;

struct ExperimentSpec {
  RobustGame game;
  io::NetworkConfig network;
  Algorithm algorithm = Algorithm::allocate;
  OperatorKind op = OperatorKind::projection;
  double beta = 0.5;
  double alpha = 0.5;
  double epsilon = kEpsilonDefault;
  ValueSchedule::Mode value_mode = ValueSchedule::Mode::iid;
  int runs = 1;
  std::uint64_t base_seed = 1;
  int max_iter = kMaxIterDefault;
  double stop_tol = kStopTolDefault;
  int thin_every = kThinEveryDefault;
  std::filesystem::path output_dir;  // empty disables CSV output
  int jobs = 1;
  std::optional<Payoff> x0;  // consensual start override, one block

  void validate() const {
    if (runs < 1) throw std::invalid_argument("ExperimentSpec: runs must be at least 1");
    if (jobs < 1) throw std::invalid_argument("ExperimentSpec: jobs must be at least 1");
    if (algorithm == Algorithm::bargain &&
        (op == OperatorKind::over_projection || (op == OperatorKind::mixed && beta >= 1.0)))
      throw std::invalid_argument(
          "ExperimentSpec: bargain requires a paracontraction (proj or mixed with beta < 1)");
    if (x0 && static_cast<int>(x0->size()) != game.n_agents())
      throw std::invalid_argument("ExperimentSpec: x0 must have one entry per agent");
    if (game.n_agents() != network.n_agents)
      throw std::invalid_argument("ExperimentSpec: game and network sizes differ");
  }
};

struct RunTerminal {
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::max_iterations;
  int iterations = 0;
  Payoff payoff;
  bool in_core = false;
  double consensus = 0.0;
};

struct EnsembleSummary {
  std::vector<std::vector<TrajectoryPoint>> trajectories;  // one per run
  std::vector<RunTerminal> terminals;
  std::vector<double> mean, lo, hi;  // per iteration, short runs padded
  std::size_t converged = 0;
};

inline OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "proj") return OperatorKind::projection;
  if (s == "overproj") return OperatorKind::over_projection;
  if (s == "mixed") return OperatorKind::mixed;
  throw std::invalid_argument("unknown operator '" + s + "' (expected proj, overproj, or mixed)");
}

namespace detail {

inline Trajectory run_single(const ExperimentSpec& spec, std::uint64_t run_seed) {
  const std::uint64_t value_seed = run_seed + kValueSeedOffset;
  const std::uint64_t graph_seed = run_seed + kGraphSeedOffset;
  std::optional<StackedProfile> x0;
  if (spec.x0) {
    StackedProfile p(spec.game.n_agents());
    for (int i = 0; i < p.n; ++i) p.set_block(i, *spec.x0);
    x0 = std::move(p);
  }
  if (spec.algorithm == Algorithm::allocate) {
    AllocationConfig cfg{spec.game,    spec.network.make(graph_seed),
                         spec.op,      spec.beta,
                         spec.alpha,   spec.epsilon,
                         spec.value_mode, value_seed,
                         spec.stop_tol, spec.max_iter,
                         spec.thin_every, ProjectOptions{}};
    return run_allocation(cfg, x0);
  }
  BargainConfig cfg{spec.game,      spec.network.make(graph_seed),
                    spec.op,        spec.beta,
                    spec.value_mode, value_seed,
                    spec.stop_tol,  spec.max_iter,
                    spec.thin_every, ProjectOptions{}};
  return run_bargaining(cfg, x0);
}

inline std::vector<std::string> run_header(const ExperimentSpec& spec, std::uint64_t run_seed) {
  std::ostringstream line;
  line << "algorithm=" << to_string(spec.algorithm) << " operator=" << to_string(spec.op);
  if (spec.op == OperatorKind::mixed) line << " beta=" << io::format_g17(spec.beta);
  if (spec.algorithm == Algorithm::allocate) line << " alpha=" << io::format_g17(spec.alpha);
  std::ostringstream seeds;
  seeds << "run_seed=" << run_seed << " value_seed=" << run_seed + kValueSeedOffset
        << " graph_seed=" << run_seed + kGraphSeedOffset
        << " demand_seed=" << run_seed + kDemandSeedOffset
        << " (sub-seeds are run_seed plus fixed offsets " << kValueSeedOffset << ", "
        << kGraphSeedOffset << ", and " << kDemandSeedOffset << ")";
  return {line.str(), seeds.str()};
}

}  // namespace detail

/// Runs `spec.runs` seeded trajectories (seeds base_seed .. base_seed+runs-1),
/// optionally in parallel, writes run_<seed>.csv plus aggregate.csv when
/// output_dir is set, and returns the ensemble statistics. A hard failure in
/// any run aborts with that run's seed; non-convergence is recorded, not fatal.
inline EnsembleSummary run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  {
    const ValueFunction v_bar = grand_value_fixed_upper(spec.game);
    const CoreCertificate cert = core_nonempty(v_bar);
    if (!cert.feasible) throw EmptyCoreError("the robust core is empty; nothing to converge to");
  }

  const int runs = spec.runs;
  std::vector<Trajectory> results(static_cast<std::size_t>(runs));
  std::vector<std::string> failures(static_cast<std::size_t>(runs));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r; (r = next.fetch_add(1)) < runs;) {
      const std::uint64_t run_seed = spec.base_seed + static_cast<std::uint64_t>(r);
      try {
        results[static_cast<std::size_t>(r)] = detail::run_single(spec, run_seed);
      } catch (const std::exception& e) {
        failures[static_cast<std::size_t>(r)] =
            "run with seed " + std::to_string(run_seed) + " failed: " + e.what();
      }
    }
  };
  const int jobs = std::min(spec.jobs, runs);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::string& f : failures)
    if (!f.empty()) throw std::runtime_error(f);

  EnsembleSummary summary;
  std::size_t length = 0;
  for (int r = 0; r < runs; ++r) {
    const Trajectory& traj = results[static_cast<std::size_t>(r)];
    const std::uint64_t run_seed = spec.base_seed + static_cast<std::uint64_t>(r);
    summary.trajectories.push_back(traj.points);
    summary.terminals.push_back({run_seed, traj.status, traj.iterations, traj.terminal_payoff,
                                 traj.terminal_in_core, traj.terminal_consensus});
    if (traj.status == RunStatus::converged) ++summary.converged;
    length = std::max(length, traj.points.size());
  }
  summary.mean.reserve(length);
  summary.lo.reserve(length);
  summary.hi.reserve(length);
  for (std::size_t k = 0; k < length; ++k) {
    double sum = 0.0, lo = kInf, hi = -kInf;
    for (const auto& pts : summary.trajectories) {
      const double v = pts[std::min(k, pts.size() - 1)].normalized_distance;
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    summary.mean.push_back(sum / static_cast<double>(runs));
    summary.lo.push_back(lo);
    summary.hi.push_back(hi);
  }

  if (!spec.output_dir.empty()) {
    for (int r = 0; r < runs; ++r) {
      const std::uint64_t run_seed = spec.base_seed + static_cast<std::uint64_t>(r);
      io::write_file(spec.output_dir / ("run_" + std::to_string(run_seed) + ".csv"),
                     io::trajectory_csv(results[static_cast<std::size_t>(r)],
                                        detail::run_header(spec, run_seed)));
    }
    std::ostringstream meta;
    meta << "runs=" << runs << " base_seed=" << spec.base_seed;
    io::write_file(spec.output_dir / "aggregate.csv",
                   io::aggregate_csv(summary.trajectories,
                                     {detail::run_header(spec, spec.base_seed)[0], meta.str()}));
  }
  return summary;
}

struct CertifyReport {
  bool ok = false;
  std::string text;
};

/// Human-readable check of the standing assumptions: robust-core feasibility
/// (with witness), per-graph weight validation, and window connectivity.
inline CertifyReport certify(const RobustGame& game, const io::NetworkConfig& network) {
  std::ostringstream out;
  bool ok = true;

  const ValueFunction v_bar = grand_value_fixed_upper(game);
  const CoreCertificate cert = core_nonempty(v_bar);
  if (cert.feasible) {
    out << "robust core: NONEMPTY, witness [";
    for (std::size_t i = 0; i < cert.witness.size(); ++i)
      out << (i ? ", " : "") << io::format_g17(cert.witness[i]);
    out << "]\n";
  } else {
    ok = false;
    out << "robust core: "
        << (cert.solver_status == LpStatus::infeasible ? "EMPTY" : "UNCERTIFIED (solver trouble)")
        << "\n";
  }

  for (std::size_t g = 0; g < network.family.size(); ++g) {
    const GraphValidation v = validate(network.family[g]);
    if (!v.ok()) ok = false;
    out << "graph " << g << ": " << (v.ok() ? "doubly stochastic, positive diagonal" : v.describe())
        << "\n";
  }

  const NetworkSchedule schedule = network.make();
  const bool connected = q_connected(schedule);
  if (!connected) ok = false;
  out << "connectivity: ";
  if (schedule.mode() == NetworkSchedule::Mode::block_cyclic)
    out << "every window of " << schedule.window() << " consecutive graphs is "
        << (connected ? "" : "NOT ") << "strongly connected\n";
  else
    out << "the family union is " << (connected ? "" : "NOT ") << "strongly connected\n";

  out << (ok ? "all checks passed" : "CHECKS FAILED") << "\n";
  return {ok, std::move(out).str()};
}

/// Parses the experiment configuration. The scenario comes from exactly one
/// of "game", "game_file", "energy", "energy_file"; energy scenarios are
/// converted by building the robust game from their envelopes.
inline ExperimentSpec spec_from_json(const io::json& j, const std::string& where = "config") {
  using io::detail::need;
  ExperimentSpec spec;

  int sources = 0;
  for (const char* f : {"game", "game_file", "energy", "energy_file"})
    if (j.contains(f)) ++sources;
  if (sources != 1)
    throw std::runtime_error(where +
                             ": provide exactly one of game, game_file, energy, energy_file");
  if (j.contains("game")) {
    spec.game = io::game_from_json(j["game"], where + ".game");
  } else if (j.contains("game_file")) {
    const std::string path = j["game_file"].get<std::string>();
    spec.game = io::game_from_json(io::load_json(path), path);
  } else if (j.contains("energy")) {
    spec.game = build_robust_game(io::scenario_from_json(j["energy"], where + ".energy"));
  } else {
    const std::string path = j["energy_file"].get<std::string>();
    spec.game = build_robust_game(io::scenario_from_json(io::load_json(path), path));
  }

  spec.network = io::network_from_json(need(j, "network", where), spec.game.n_agents(),
                                       where + ".network");

  if (auto it = j.find("algorithm"); it != j.end()) {
    const std::string a = it->get<std::string>();
    if (a == "allocate")
      spec.algorithm = Algorithm::allocate;
    else if (a == "bargain")
      spec.algorithm = Algorithm::bargain;
    else
      throw std::runtime_error(where + ": 'algorithm' must be \"allocate\" or \"bargain\"");
  }
  if (auto it = j.find("operator"); it != j.end())
    spec.op = operator_kind_from_string(it->get<std::string>());
  if (auto it = j.find("beta"); it != j.end()) spec.beta = it->get<double>();
  if (auto it = j.find("alpha"); it != j.end()) spec.alpha = it->get<double>();
  if (auto it = j.find("epsilon"); it != j.end()) spec.epsilon = it->get<double>();
  if (auto it = j.find("value_mode"); it != j.end()) {
    const std::string m = it->get<std::string>();
    if (m == "iid")
      spec.value_mode = ValueSchedule::Mode::iid;
    else if (m == "block_cyclic")
      spec.value_mode = ValueSchedule::Mode::block_cyclic;
    else
      throw std::runtime_error(where + ": 'value_mode' must be \"iid\" or \"block_cyclic\"");
  }
  if (auto it = j.find("runs"); it != j.end()) spec.runs = it->get<int>();
  if (auto it = j.find("base_seed"); it != j.end()) spec.base_seed = it->get<std::uint64_t>();
  if (auto it = j.find("max_iter"); it != j.end()) spec.max_iter = it->get<int>();
  if (auto it = j.find("stop_tol"); it != j.end()) spec.stop_tol = it->get<double>();
  if (auto it = j.find("thin_every"); it != j.end()) spec.thin_every = it->get<int>();
  if (auto it = j.find("output_dir"); it != j.end())
    spec.output_dir = it->get<std::string>();
  if (auto it = j.find("jobs"); it != j.end()) spec.jobs = it->get<int>();
  if (auto it = j.find("x0"); it != j.end())
    spec.x0 = io::detail::number_array(*it, where + ".x0");

  spec.validate();
  return spec;
}

}  // namespace rcg
