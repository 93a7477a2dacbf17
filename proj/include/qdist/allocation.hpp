#pragma once

#include <string>
#include <vector>

#include "qdist/circuit.hpp"
#include "qdist/network.hpp"
#include "qdist/rng.hpp"
#include "qdist/types.hpp"

namespace qdist {

// Injective map from circuit qubits to data memories.
struct Allocation {
  std::vector<MemoryId> qubit_to_memory;

  int num_qubits() const { return static_cast<int>(qubit_to_memory.size()); }
  void validate(int num_memories) const;  // total + injective, throws std::invalid_argument
};

// Sum over qubit pairs of circuit weight times memory-pair cost.
Micros allocation_cost(const CircuitGraph& circuit, const NetworkCouplingGraph& mem,
                       const Allocation& alloc);

// Equal-size maximization form of the assignment problem: qubits are padded
// with dummies up to the memory count and circuit weights are complemented
// against a big constant, so minimizing cost equals maximizing profit.
struct MaxQapInstance {
  int size = 0;                 // one slot per memory
  int num_real_qubits = 0;
  double big_m = 0.0;           // complementation constant: total circuit weight
  std::vector<double> profit;   // dense size*size, row-major; dummy rows/cols are 0
};

MaxQapInstance pad_and_complement(const CircuitGraph& circuit, const NetworkCouplingGraph& mem);

// Steepest-descent local search (qubit-qubit swaps, single and pair moves to
// free memories, and shifts through a free memory) run from two deterministic
// seeds: a greedy matching of the heaviest interacting qubit pairs onto the
// cheapest memory pairs, and a build-up placement by descending interaction
// weight. The cheaper descent result wins; ties break on lowest qubit then
// memory id.
Allocation allocate(const CircuitGraph& circuit, const NetworkCouplingGraph& mem);

// Exhaustive search over all injective maps. Guard: memory count <= limit.
Allocation allocate_exact(const CircuitGraph& circuit, const NetworkCouplingGraph& mem,
                          int limit = 8);

Allocation random_allocation(int num_qubits, int num_memories, SplitMix64& rng);

std::string allocation_to_json(const Allocation& a, const QuantumNetwork& net);
Allocation allocation_from_json(const std::string& text, const QuantumNetwork& net);
void save_allocation(const Allocation& a, const QuantumNetwork& net, const std::string& path);
Allocation load_allocation(const std::string& path, const QuantumNetwork& net);

}  // namespace qdist
