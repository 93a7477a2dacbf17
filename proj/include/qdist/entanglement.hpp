#pragma once

#include <map>
#include <vector>

#include "qdist/network.hpp"
#include "qdist/types.hpp"

namespace qdist {

// A demand for end-to-end EPs between two network nodes. `multiplicity`
// counts purification copies generated together; `origin` is caller context
// (gate id or CE id), carried through for diagnostics.
struct EpDemand {
  NodeId src = 0;
  NodeId dst = 0;
  int multiplicity = 1;
  int origin = -1;
};

// Entanglement-swapping tree over the links of a routing path. Leaves are
// physical-link EP generations, internal nodes are swaps at the node shared
// by their children's spans. Any complete binary tree over the path's links
// is executable; we store which one was chosen.
struct SwappingTree {
  // Node sequence of the path; path[i], path[i+1] are the endpoints of link
  // slot i. A node id may repeat when the route was composed through an
  // intermediate endpoint.
  std::vector<NodeId> path;

  struct Node {
    int lo = 0, hi = 0;        // covers link slots [lo, hi)
    int left = -1, right = -1;  // children; leaf iff hi == lo + 1
  };
  std::vector<Node> nodes;
  int root = -1;

  // Per link slot: one-attempt latency and success probability.
  std::vector<Micros> leaf_attempt_latency;
  std::vector<double> leaf_attempt_success;

  double swap_success = 1.0;  // p_swap at internal nodes
  Micros swap_time = 0.0;     // t_swap, used by the simulator

  int hops() const { return static_cast<int>(path.size()) - 1; }
  bool is_leaf(int node) const { return nodes[node].hi == nodes[node].lo + 1; }
  void validate() const;  // structural checks, throws std::logic_error
};

// Expected latency of the tree: a leaf takes attempt_latency/attempt_success,
// an internal node takes (3/(2*p_swap)) * max(left, right). When `leaf_scale`
// is non-null it multiplies each leaf's expected latency (link load sharing).
Micros tree_latency(const SwappingTree& t, const double* leaf_scale = nullptr);

// Minimum-latency complete binary tree over the given path, by interval DP.
// Ties prefer the most balanced split, so equal leaves yield the even-split
// tree (latency beta^ceil(log2 n) * leaf latency).
SwappingTree make_min_latency_tree(std::vector<NodeId> path, std::vector<Micros> leaf_latency,
                                   std::vector<double> leaf_success, const NetworkParams& p);

// Joins two trees sharing an endpoint (left ends where right starts) under a
// new root swap. The result spans the concatenated path.
SwappingTree join_trees(const SwappingTree& left, const SwappingTree& right,
                        const NetworkParams& p);

// Purification copy count for a path: one copy per purify_segment_hops hops,
// at least one.
int purification_copies(int path_hops, int purify_segment_hops);

struct BatchLatencyReport {
  Micros makespan = 0.0;          // min(max shared latency, full serialization)
  Micros sum_independent = 0.0;   // serialized generation of every copy
  std::vector<Micros> per_demand_latency;  // shared (load-adjusted) latency
  std::map<std::pair<NodeId, NodeId>, int> link_load;  // leaves per link
};

// Routes EPs and answers latency queries for one network. All-pairs routes
// are precomputed at construction: for every node pair we take the best
// min-latency tree over up to `max_candidate_paths` hop-shortest simple
// paths, then close the table under via-node composition so that
// ep_latency(a,c) <= (3/(2 p_swap)) * (ep_latency(a,b) + ep_latency(b,c))
// holds for every triple.
class EntanglementEngine {
 public:
  explicit EntanglementEngine(const QuantumNetwork& net, int max_candidate_paths = 8);

  const QuantumNetwork& network() const { return *net_; }

  const SwappingTree& route(NodeId src, NodeId dst) const;
  Micros ep_latency(NodeId src, NodeId dst) const;
  int copies_for(NodeId src, NodeId dst) const;

  // Latency of generating all demands (expanded by multiplicity) together:
  // per-link loads scale leaf latencies; capped by full serialization.
  BatchLatencyReport batch_latency(const std::vector<EpDemand>& demands) const;

 private:
  int pair_index(NodeId a, NodeId b) const { return a * n_ + b; }

  const QuantumNetwork* net_;
  int n_ = 0;
  std::vector<Micros> latency_;      // n*n
  std::vector<SwappingTree> trees_;  // n*n; empty path on diagonal
};

// Memory-level cost graph for the allocator (declared in network.hpp).
NetworkCouplingGraph build_network_coupling_graph(const QuantumNetwork& net,
                                                  const EntanglementEngine& engine);

}  // namespace qdist
