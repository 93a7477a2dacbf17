#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "qdist/allocation.hpp"
#include "qdist/bitset.hpp"
#include "qdist/circuit.hpp"
#include "qdist/entanglement.hpp"
#include "qdist/types.hpp"

namespace qdist {

// Strict partial order in which EPs are consumed: e precedes f when e's gate
// must execute before f's gate (they share an operand qubit, transitively).
class ConsumptionOrder {
 public:
  ConsumptionOrder() = default;
  explicit ConsumptionOrder(int n);

  int size() const { return n_; }
  void add_edge(EpId before, EpId after);
  // Transitive closure; after this the query methods are valid.
  void finalize();
  bool finalized() const { return finalized_; }

  bool precedes(EpId a, EpId b) const { return desc_[a].test(b); }
  const Bitset& descendants(EpId e) const { return desc_[e]; }
  const Bitset& ancestors(EpId e) const { return anc_[e]; }
  bool is_total() const;
  // Kahn order, lowest id first among ready elements.
  std::vector<EpId> topological_order() const;

 private:
  int n_ = 0;
  bool finalized_ = false;
  std::vector<std::vector<EpId>> succ_;  // base edges, cleared by finalize()
  std::vector<Bitset> desc_, anc_;
};

struct DemandDerivation {
  std::vector<EpDemand> demands;  // EP id = index
  std::vector<int> gate_to_ep;    // per gate index; -1 for unary/local gates
};

// One EP demand per remote binary gate (operands on different nodes), with
// purification multiplicity from the route's hop count.
DemandDerivation derive_ep_demands(const Circuit& c, const Allocation& alloc,
                                   const QuantumNetwork& net, const EntanglementEngine& engine);

// Base edges: consecutive remote gates per operand qubit; closed transitively.
ConsumptionOrder build_consumption_order(const Circuit& c, const std::vector<int>& gate_to_ep,
                                         int num_eps);

// Batch latency oracle. latency() must be order-invariant in its argument
// and is expected to be monotone under set extension.
class LatencyOracle {
 public:
  virtual ~LatencyOracle() = default;
  virtual int num_eps() const = 0;
  virtual Micros latency(const Bitset& eps) const = 0;
  Micros independent(EpId e) const {
    Bitset b(num_eps());
    b.set(e);
    return latency(b);
  }
};

// Engine-backed oracle: shared-load batch makespan over the demands' trees,
// capped by full serialization. Allocation-free in the hot path.
class BatchOracle final : public LatencyOracle {
 public:
  BatchOracle(const EntanglementEngine& engine, std::vector<EpDemand> demands);

  int num_eps() const override { return static_cast<int>(demands_.size()); }
  Micros latency(const Bitset& eps) const override;
  const std::vector<EpDemand>& demands() const { return demands_; }

 private:
  struct Leaf {
    int link_slot;
    Micros base;  // attempt_latency / attempt_success
  };
  struct TreeNode {
    int left, right;  // indices into per-demand node list; -1,-1 for leaves
    int leaf;         // index into leaves_ for leaf nodes
  };
  std::vector<EpDemand> demands_;
  double beta_ = 1.0;
  int num_links_ = 0;
  std::vector<int> leaf_begin_, node_begin_;  // per-demand slices (size m+1)
  std::vector<Leaf> leaves_;
  std::vector<TreeNode> nodes_;  // postorder per demand: root is last
  std::vector<Micros> indep_;    // unscaled tree latency per demand
  mutable std::vector<double> load_;   // scratch, sized num_links_
  mutable std::vector<Micros> stack_;  // scratch for tree evaluation
};

struct Schedule {
  std::vector<std::vector<EpId>> batches;
  std::vector<Micros> batch_latency;
  Micros total_latency = 0.0;
};

// Raised when some EP alone already exceeds the decoherence threshold, so no
// schedule can be feasible.
class InfeasibleScheduleError : public std::runtime_error {
 public:
  InfeasibleScheduleError(EpId ep, Micros latency, Micros tau);
  EpId ep;
};

// Optimal contiguous batching of the (total) consumption order: prefix DP
// best[j] = min over i of best[i] + latency(order[i..j)), slices over tau
// excluded. Requires a total order.
Schedule dp_schedule(const ConsumptionOrder& order, const LatencyOracle& oracle, Micros tau);

// Batch peeling for general partial orders: repeatedly evaluates removal of
// an EP together with its not-yet-scheduled descendants, keeping the
// tau-feasible candidate set with the best latency-per-EP average.
Schedule greedy_schedule(const ConsumptionOrder& order, const LatencyOracle& oracle, Micros tau);

// Exact minimum-total-latency no-wait schedule by DP over downward-closed
// subsets. Guard: at most `limit` EPs.
Schedule brute_force_schedule(const ConsumptionOrder& order, const LatencyOracle& oracle,
                              Micros tau, int limit = 10);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

// Checks partition of all EPs, per-batch latency <= tau, and the no-wait
// property (every predecessor scheduled in an earlier or the same batch).
ValidationReport validate_schedule(const Schedule& s, const ConsumptionOrder& order,
                                   const LatencyOracle& oracle, Micros tau);

}  // namespace qdist
