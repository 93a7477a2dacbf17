#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdist/types.hpp"

namespace qdist {

// Hardware and protocol parameters. Times in microseconds, lengths in km.
struct NetworkParams {
  double p_swap = 0.4;           // entanglement swap (BSM) success probability
  Micros t_swap = 10.0;          // entanglement swap duration
  double p_optical_bsm = 0.3;    // optical BSM success probability at the link midpoint
  double p_atom_photon = 0.33;   // atom-photon entanglement success, per end
  Micros t_atom_photon = 50.0;   // atom-photon generation time
  Micros tau = 1e6;              // decoherence threshold on EP waiting age
  Micros t_local_swap = 1.0;     // one hop on a node's coupling graph
  Micros t_gate = 0.1;           // local gate execution time
  double c_fiber_km_per_us = 0.2;  // signal speed in fiber: 2*10^5 km/s
  int purify_segment_hops = 3;   // one extra EP copy per this many path hops

  void validate() const;  // throws std::invalid_argument
};

struct GridDims {
  int rows = 0;
  int cols = 0;
};

struct NetworkNode {
  NodeId id = 0;
  double x_km = 0.0;
  double y_km = 0.0;
  // Data memories hosted here, as global memory ids (contiguous range).
  std::vector<MemoryId> memories;
  // The node's coupling graph is a row-major 2-D grid over its memories.
  GridDims grid;
  int exec_memory_capacity = 8;

  // Hops between two of this node's memories on the grid.
  int coupling_distance(MemoryId a, MemoryId b) const;
};

struct Link {
  NodeId a = 0;
  NodeId b = 0;
  double length_km = 0.0;
};

struct QuantumNetwork {
  NetworkParams params;
  std::vector<NetworkNode> nodes;  // ids are dense: nodes[i].id == i
  std::vector<Link> links;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int total_memories() const;
  NodeId node_of_memory(MemoryId m) const;
  // adjacency()[v] lists (neighbor, link index), sorted by neighbor id.
  std::vector<std::vector<std::pair<NodeId, int>>> adjacency() const;
  bool is_connected() const;
  void validate() const;  // throws std::invalid_argument
};

// Expected latency and success probability of one EP generation attempt
// across a physical link (atom-photon generation at both ends, photons meet
// at the midpoint for an optical BSM).
struct LinkEpParams {
  Micros attempt_latency = 0.0;
  double attempt_success = 0.0;
};
LinkEpParams link_ep_params(const Link& link, const NetworkParams& p);

// Waxman random topology: nodes uniform in a square of side area_km, a link
// between u,v with probability beta*exp(-alpha*dist/L) where L is the max
// pairwise distance. Disconnected outputs are patched by repeatedly adding
// the shortest missing inter-component link. Data memories are spread over
// nodes uniformly at random (multinomial).
QuantumNetwork generate_waxman(int num_nodes, double area_km, double beta, double alpha,
                               int total_data_memories, std::uint64_t seed,
                               const NetworkParams& params = NetworkParams{});

// Memory-level cost graph used by the allocator: inter-node weight is the
// EP latency between the host nodes; intra-node weight is the round-trip
// local routing cost 2 * grid_distance * t_local_swap.
struct NetworkCouplingGraph {
  int num_memories = 0;
  std::vector<Micros> w;  // dense row-major
  Micros weight(MemoryId a, MemoryId b) const { return w[std::size_t(a) * num_memories + b]; }
};

std::string network_to_json(const QuantumNetwork& n);
QuantumNetwork network_from_json(const std::string& text);
void save_network(const QuantumNetwork& n, const std::string& path);
QuantumNetwork load_network(const std::string& path);

}  // namespace qdist
