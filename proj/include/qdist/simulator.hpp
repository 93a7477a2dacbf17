#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdist/cat.hpp"
#include "qdist/circuit.hpp"
#include "qdist/entanglement.hpp"
#include "qdist/network.hpp"
#include "qdist/scheduling.hpp"
#include "qdist/types.hpp"

namespace qdist {

// Everything the event loop needs to realize a schedule: the swapping trees
// behind every EP (one per purification copy) and the local gate/swap work
// attributed to each batch once its EPs are consumed.
struct ExecutionPlan {
  std::vector<std::vector<SwappingTree>> ep_trees;  // by EP id, >= 1 tree each
  std::vector<Micros> gate_segments;                // per batch; empty means all zero
  Micros tau = 0.0;                                 // decoherence threshold
};

struct SimConfig {
  std::uint64_t seed = 12345;
  int trials = 100;
  bool overlap_next_batch = true;  // run batch i's gates during batch i+1's generation
  bool record_trace = false;       // keep per-event lines (first trial only)
};

struct SimResult {
  std::vector<Micros> per_trial_total;
  Micros mean = 0.0;
  Micros stddev = 0.0;
  long long decoherence_violations = 0;     // total over all trials
  std::vector<Micros> mean_ep_latency;      // per EP: mean realized generation time
  std::vector<std::string> trace;           // filled when record_trace is set
};

// Discrete-event execution of the schedule. Per trial: each batch's EPs are
// generated concurrently (links serve one attempt at a time, round-robin),
// swaps take t_swap and on failure destroy both child EPs, an EP older than
// tau at consumption is regenerated and counted as a violation. Deterministic
// for a fixed seed.
SimResult simulate(const Schedule& schedule, const ExecutionPlan& plan, const QuantumNetwork& net,
                   const SimConfig& config);

// Plan builders. Gate segments: a gate joins the segment of the highest batch
// index seen so far in circuit order; each gate costs t_gate, each remote
// gate (telegate mode) or CE (cat mode) adds one t_swap measurement.
ExecutionPlan make_telegate_plan(const Circuit& c, const DemandDerivation& derivation,
                                 const QuantumNetwork& net, const EntanglementEngine& engine,
                                 const Schedule& schedule);
ExecutionPlan make_ce_execution_plan(const Circuit& c, const CePlan& ce_plan,
                                     const QuantumNetwork& net, const EntanglementEngine& engine,
                                     const Schedule& schedule);

struct CalibrationRow {
  NodeId a = 0, b = 0;
  Micros analytic = 0.0;
  Micros simulated_mean = 0.0;
  double ratio = 0.0;  // simulated / analytic
};

// Monte-Carlo single-EP generation time per node pair against the analytic
// tree latency.
std::vector<CalibrationRow> calibrate(const QuantumNetwork& net, const EntanglementEngine& engine,
                                      const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                      int trials, std::uint64_t seed);

}  // namespace qdist
