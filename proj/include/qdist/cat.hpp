#pragma once

#include <string>
#include <vector>

#include "qdist/allocation.hpp"
#include "qdist/circuit.hpp"
#include "qdist/entanglement.hpp"
#include "qdist/scheduling.hpp"
#include "qdist/types.hpp"

namespace qdist {

// A cat-entanglement: one EP spent to project a copy of `qubit` onto an
// execution memory at `target`, live over [window_start, window_end); the
// copy survives until the qubit's next unary gate. All CZ gates on the qubit
// inside the window can consume the same copy.
struct CatEntanglement {
  QubitId qubit = -1;
  NodeId source = -1;  // node hosting the qubit's data memory
  NodeId target = -1;
  int window_start = 0;
  int window_end = 0;  // exclusive; INT_MAX-like sentinel for open windows
  std::vector<GateId> covered_gates;
};

// Densest-subgraph-with-vertex-costs instance. Vertex and edge weights count
// covered gates; vertex costs are EP latencies.
struct DsvcGraph {
  struct Edge {
    int u = 0, v = 0;
    double weight = 0.0;
  };
  int num_vertices = 0;
  std::vector<double> vertex_weight;
  std::vector<double> vertex_cost;  // strictly positive
  std::vector<Edge> edges;
};

struct DsvcResult {
  std::vector<int> vertices;  // ascending ids; empty if no positive-density subgraph
  double density = 0.0;
};

// Induced-subgraph density: (sum of vertex weights + weights of edges with
// both endpoints inside) / (sum of vertex costs).
double dsvc_density(const DsvcGraph& g, const std::vector<int>& vertices);

// Peeling 2-approximation: repeatedly removes the vertex minimizing
// (w(v) + incident edge weight) / c(v), returns the densest prefix suffix.
DsvcResult dsvc_greedy(const DsvcGraph& g);

// One CE option per (qubit, target node, unary-free window): the two direct
// options per remote gate plus third nodes with execution capacity within
// two hops of either endpoint. Cost is the EP latency source->target.
struct CeCandidate {
  QubitId qubit = -1;
  NodeId source = -1;
  NodeId target = -1;
  int window_start = 0;
  int window_end = 0;
  Micros cost = 0.0;
  std::vector<GateId> coverable;  // remote gates this option can serve
};

std::vector<CeCandidate> enumerate_ce_candidates(const Circuit& c, const Allocation& alloc,
                                                 const QuantumNetwork& net,
                                                 const EntanglementEngine& engine);

// Remote CZ gate coverage by a CE set: gate (a,b) is covered when one
// operand's copy sits at the other operand's node, or both operands' copies
// meet at a common third node, with the gate's instant inside both windows.
std::vector<char> ce_coverage(const Circuit& c, const Allocation& alloc, const QuantumNetwork& net,
                              const std::vector<CatEntanglement>& ces);

struct DsvcInstance {
  DsvcGraph graph;
  std::vector<int> vertex_candidate;  // graph vertex -> candidate index
};

// Gate weights: each uncovered gate contributes 1 to the lowest-id candidate
// covering it alone, or, failing that, to the lexicographically smallest
// covering pair as an edge weight.
DsvcInstance build_dsvc_instance(const std::vector<CeCandidate>& candidates,
                                 const std::vector<char>& gate_covered, const Circuit& c);

struct CePlan {
  std::vector<CatEntanglement> ces;
  std::vector<EpDemand> demands;  // demand i belongs to ces[i]
  ConsumptionOrder order;
  // Per gate: covering CE ids (one for direct coverage, two for a meeting
  // point), empty for unary/local gates.
  std::vector<std::vector<int>> gate_to_ces;
  std::vector<std::string> diagnostics;
};

// Iterated DSVC selection until every remote CZ gate is covered, followed by
// execution-memory liveness repair (splitting the longest-window CE at
// capacity overflow instants). Circuits containing CNOTs are rejected.
CePlan greedy_ce(const Circuit& c, const Allocation& alloc, const QuantumNetwork& net,
                 const EntanglementEngine& engine);

}  // namespace qdist
