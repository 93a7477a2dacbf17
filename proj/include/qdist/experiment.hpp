#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdist/network.hpp"
#include "qdist/scheduling.hpp"
#include "qdist/types.hpp"

namespace qdist {

// DP batching over a topological linearization of a partial order; falls
// through to plain dp_schedule when the order is already total.
Schedule dp_schedule_linearized(const ConsumptionOrder& order, const LatencyOracle& oracle,
                                Micros tau);

// Canonical algorithm names accepted by the driver.
inline const std::vector<std::string>& all_algorithms() {
  static const std::vector<std::string> a = {"greedy-tg", "dp-tg", "greedy-ce", "dp-ce",
                                             "disjoint-paths"};
  return a;
}

struct ExperimentConfig {
  // Circuit: a benchmark by name, or a random circuit when benchmark is empty.
  std::string benchmark;  // "", "ghz", "qft", "qpe"
  int num_qubits = 50;
  int gates_per_qubit = 50;
  double binary_fraction = 0.5;
  std::string gate_kind = "cz";  // binary gate kind for random circuits

  // Network.
  int num_nodes = 10;
  double area_km = 100.0;
  double waxman_beta = 0.6;
  double waxman_alpha = 0.2;
  int total_data_memories = -1;  // -1: one memory per qubit
  NetworkParams params;

  // Run matrix.
  std::vector<std::string> algorithms = all_algorithms();
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  int trials = 100;
  bool overlap = true;

  // Optional sweep annotation carried into every row.
  std::string sweep_name;
  double sweep_value = 0.0;

  void validate() const;  // throws std::invalid_argument
};

struct ExperimentRow {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string sweep_name;
  double sweep_value = 0.0;
  bool feasible = true;
  Micros analytic_total = 0.0;  // schedule total + local gate segments
  Micros sim_mean = 0.0;
  Micros sim_stddev = 0.0;
  int num_eps = 0;
  int num_batches = 0;
  int num_ces = 0;  // CE modes only
  double allocation_cost = 0.0;
  std::string diagnostic;
  double wall_clock_ms = 0.0;  // excluded from determinism guarantees
};

// One row per (algorithm, seed). The allocation is computed once per seed and
// shared by every algorithm. Infeasible cells are flagged, not fatal.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config);

// CSV with a header row; wall_clock_ms is the last column.
std::string rows_to_csv(const std::vector<ExperimentRow>& rows);

// Per-algorithm series over the sweep variable: mean and stddev of the
// analytic total across seeds at each sweep value. Rows must share one sweep
// name; feasible rows only.
std::string emit_plot_data(const std::vector<ExperimentRow>& rows);

ExperimentConfig experiment_config_from_json(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

}  // namespace qdist
