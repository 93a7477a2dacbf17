#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qdist/types.hpp"

namespace qdist {

enum class GateKind { Unary, Cnot, Cz };

struct Gate {
  GateKind kind = GateKind::Unary;
  std::string label;  // unary gates only, e.g. "h", "rz"
  QubitId q0 = 0;
  QubitId q1 = -1;  // second operand, binary gates only
  int time = 0;     // discrete instant; strictly increasing within a circuit

  bool is_binary() const { return kind != GateKind::Unary; }
  bool acts_on(QubitId q) const { return q0 == q || (is_binary() && q1 == q); }
};

Gate make_unary(std::string label, QubitId q, int time);
Gate make_binary(GateKind kind, QubitId control, QubitId target, int time);

struct Circuit {
  int num_qubits = 0;
  std::vector<Gate> gates;  // ordered by time

  int num_binary_gates() const;
  // Throws std::invalid_argument on out-of-range operands, non-increasing
  // times, or a binary gate with identical operands.
  void validate() const;
};

enum class BenchmarkKind { Ghz, Qft, Qpe };

// nq*gates_per_qubit gates; each is binary with probability binary_fraction
// (operands uniform distinct), unary otherwise. One gate per time instant.
Circuit generate_random_circuit(int num_qubits, int gates_per_qubit, double binary_fraction,
                                GateKind binary_kind, std::uint64_t seed);

// Textbook constructions over the {unary, CNOT} gate set. Controlled-phase
// gates are decomposed into 2 CNOTs and 3 rotations.
Circuit generate_benchmark(BenchmarkKind kind, int num_qubits);

// Rewrites every CNOT(c, t) as H(t), CZ(c, t), H(t) and re-times the whole
// gate list to consecutive instants. Preserves binary-gate pair structure.
Circuit cnot_to_cz(const Circuit& c);

// Undirected interaction graph: weight(i, j) counts binary gates on {i, j}.
class CircuitGraph {
 public:
  CircuitGraph() = default;
  explicit CircuitGraph(int num_qubits) : n_(num_qubits), w_(std::size_t(num_qubits) * num_qubits, 0) {}

  int num_qubits() const { return n_; }
  long long weight(QubitId a, QubitId b) const { return w_[std::size_t(a) * n_ + b]; }
  void add_gate(QubitId a, QubitId b);
  long long total_weight() const;
  // Unordered pairs (a < b) with nonzero weight, lexicographically sorted.
  std::vector<std::pair<QubitId, QubitId>> edges() const;

 private:
  int n_ = 0;
  std::vector<long long> w_;
};

CircuitGraph build_circuit_graph(const Circuit& c);

// JSON round trip. Gate kinds serialize as "u:<label>", "cnot", "cz".
std::string circuit_to_json(const Circuit& c);
Circuit circuit_from_json(const std::string& text);
void save_circuit(const Circuit& c, const std::string& path);
Circuit load_circuit(const std::string& path);

}  // namespace qdist
