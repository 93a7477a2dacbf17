#pragma once

#include <vector>

#include "qdist/allocation.hpp"
#include "qdist/circuit.hpp"
#include "qdist/entanglement.hpp"
#include "qdist/scheduling.hpp"
#include "qdist/simulator.hpp"
#include "qdist/types.hpp"

namespace qdist {

// Remote gates grouped into conservative time slots: a gate's slot is its
// longest-chain depth in the consumption order, so no two gates in a slot
// are order-related and slot index is monotone along every chain.
struct GateLayer {
  int slot = 0;
  std::vector<GateId> gates;
};

std::vector<GateLayer> layer_gates(const Circuit& c, const Allocation& alloc,
                                   const QuantumNetwork& net);

// Comparison baseline: per layer, repeatedly extract a maximal set of
// pairwise edge-disjoint shortest paths (shortest first, lowest id ties) for
// the layer's pending EP copies; a round lasts as long as its slowest EP and
// rounds add up. No link sharing within a round by construction.
struct BaselineResult {
  std::vector<GateLayer> layers;
  std::vector<EpDemand> demands;  // EP id per remote gate, circuit order
  std::vector<int> gate_to_ep;
  ConsumptionOrder order;
  Schedule schedule;  // batches = extraction rounds (an EP joins its last copy's round)
  std::vector<std::vector<SwappingTree>> ep_trees;  // per EP: one tree per routed copy
  Micros total_time = 0.0;                          // sum of round durations
};

BaselineResult run_disjoint_paths(const Circuit& c, const Allocation& alloc,
                                  const QuantumNetwork& net, const EntanglementEngine& engine);

// Execution plan over the baseline's own per-round paths.
ExecutionPlan make_baseline_plan(const Circuit& c, const BaselineResult& r,
                                 const QuantumNetwork& net, const EntanglementEngine& engine);

}  // namespace qdist
