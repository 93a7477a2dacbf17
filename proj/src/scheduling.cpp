#include "qdist/scheduling.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace qdist {

ConsumptionOrder::ConsumptionOrder(int n)
    : n_(n), succ_(n), desc_(n, Bitset(n)), anc_(n, Bitset(n)) {}

void ConsumptionOrder::add_edge(EpId before, EpId after) {
  if (finalized_) throw std::logic_error("consumption order: add_edge after finalize");
  if (before < 0 || after < 0 || before >= n_ || after >= n_ || before == after)
    throw std::invalid_argument("consumption order: bad edge");
  succ_[before].push_back(after);
}

void ConsumptionOrder::finalize() {
  if (finalized_) return;
  // Kahn for a reverse-topological processing order (also rejects cycles).
  std::vector<int> indeg(n_, 0);
  for (int v = 0; v < n_; ++v)
    for (EpId u : succ_[v]) ++indeg[u];
  std::priority_queue<EpId, std::vector<EpId>, std::greater<>> ready;
  for (int v = 0; v < n_; ++v)
    if (indeg[v] == 0) ready.push(v);
  std::vector<EpId> topo;
  topo.reserve(n_);
  while (!ready.empty()) {
    EpId v = ready.top();
    ready.pop();
    topo.push_back(v);
    for (EpId u : succ_[v])
      if (--indeg[u] == 0) ready.push(u);
  }
  if (static_cast<int>(topo.size()) != n_)
    throw std::invalid_argument("consumption order: relation contains a cycle");
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const EpId v = *it;
    for (EpId u : succ_[v]) {
      desc_[v].set(u);
      desc_[v] |= desc_[u];
    }
  }
  for (int v = 0; v < n_; ++v) {
    if (desc_[v].test(v)) throw std::invalid_argument("consumption order: relation contains a cycle");
    desc_[v].for_each([&](int u) { anc_[u].set(v); });
  }
  succ_.clear();
  succ_.shrink_to_fit();
  finalized_ = true;
}

bool ConsumptionOrder::is_total() const {
  if (!finalized_) throw std::logic_error("consumption order: not finalized");
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b)
      if (!precedes(a, b) && !precedes(b, a)) return false;
  return true;
}

std::vector<EpId> ConsumptionOrder::topological_order() const {
  if (!finalized_) throw std::logic_error("consumption order: not finalized");
  std::vector<int> remaining_preds(n_);
  for (int v = 0; v < n_; ++v) remaining_preds[v] = anc_[v].count();
  std::priority_queue<EpId, std::vector<EpId>, std::greater<>> ready;
  for (int v = 0; v < n_; ++v)
    if (remaining_preds[v] == 0) ready.push(v);
  std::vector<EpId> topo;
  topo.reserve(n_);
  while (!ready.empty()) {
    EpId v = ready.top();
    ready.pop();
    topo.push_back(v);
    desc_[v].for_each([&](int u) {
      if (anc_[u].test(v) && --remaining_preds[u] == 0) ready.push(u);
    });
  }
  return topo;
}

DemandDerivation derive_ep_demands(const Circuit& c, const Allocation& alloc,
                                   const QuantumNetwork& net, const EntanglementEngine& engine) {
  c.validate();
  alloc.validate(net.total_memories());
  if (alloc.num_qubits() != c.num_qubits)
    throw std::invalid_argument("derive_ep_demands: allocation size mismatch");
  std::vector<NodeId> host(c.num_qubits);
  for (int q = 0; q < c.num_qubits; ++q) host[q] = net.node_of_memory(alloc.qubit_to_memory[q]);

  DemandDerivation out;
  out.gate_to_ep.assign(c.gates.size(), -1);
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    const Gate& gate = c.gates[g];
    if (!gate.is_binary()) continue;
    const NodeId a = host[gate.q0], b = host[gate.q1];
    if (a == b) continue;
    EpDemand d;
    d.src = a;
    d.dst = b;
    d.multiplicity = engine.copies_for(a, b);
    d.origin = g;
    out.gate_to_ep[g] = static_cast<int>(out.demands.size());
    out.demands.push_back(d);
  }
  return out;
}

ConsumptionOrder build_consumption_order(const Circuit& c, const std::vector<int>& gate_to_ep,
                                         int num_eps) {
  if (gate_to_ep.size() != c.gates.size())
    throw std::invalid_argument("consumption order: gate map size mismatch");
  ConsumptionOrder order(num_eps);
  // EP ancestors flow through every gate (unary and local binary included):
  // carry, per qubit, the EP-ancestor set of the last gate touching it.
  std::vector<Bitset> carried(c.num_qubits, Bitset(num_eps));
  std::vector<Bitset> rows(num_eps, Bitset(num_eps));
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    const Gate& gate = c.gates[g];
    Bitset anc = carried[gate.q0];
    if (gate.is_binary()) anc |= carried[gate.q1];
    const int ep = gate_to_ep[g];
    if (ep >= 0) {
      anc.for_each([&](int p) { rows[p].set(ep); });
      anc.set(ep);
    }
    carried[gate.q0] = anc;
    if (gate.is_binary()) carried[gate.q1] = std::move(anc);
  }
  for (int p = 0; p < num_eps; ++p)
    rows[p].for_each([&](int s) { order.add_edge(p, s); });
  order.finalize();
  return order;
}

BatchOracle::BatchOracle(const EntanglementEngine& engine, std::vector<EpDemand> demands)
    : demands_(std::move(demands)) {
  beta_ = 3.0 / (2.0 * engine.network().params.p_swap);
  std::map<std::pair<NodeId, NodeId>, int> slot_of;
  leaf_begin_.push_back(0);
  node_begin_.push_back(0);
  for (const EpDemand& d : demands_) {
    if (d.multiplicity < 1) throw std::invalid_argument("batch oracle: multiplicity must be >= 1");
    const SwappingTree& t = engine.route(d.src, d.dst);
    // Leaves in link-slot order.
    for (int i = 0; i < t.hops(); ++i) {
      auto key = std::minmax(t.path[i], t.path[i + 1]);
      auto [it, inserted] = slot_of.try_emplace({key.first, key.second}, num_links_);
      if (inserted) ++num_links_;
      leaves_.push_back({it->second, t.leaf_attempt_latency[i] / t.leaf_attempt_success[i]});
    }
    // Tree nodes in postorder; children indices are relative to the demand.
    std::vector<int> remap(t.nodes.size(), -1);
    auto emit = [&](auto&& self, int src_node) -> int {
      const SwappingTree::Node& nd = t.nodes[src_node];
      TreeNode out{-1, -1, -1};
      if (t.is_leaf(src_node)) {
        out.leaf = nd.lo;
      } else {
        out.left = self(self, nd.left);
        out.right = self(self, nd.right);
      }
      nodes_.push_back(out);
      const int local = static_cast<int>(nodes_.size()) - node_begin_.back() - 1;
      remap[src_node] = local;
      return local;
    };
    emit(emit, t.root);
    indep_.push_back(tree_latency(t));
    leaf_begin_.push_back(static_cast<int>(leaves_.size()));
    node_begin_.push_back(static_cast<int>(nodes_.size()));
  }
  load_.assign(num_links_, 0.0);
  stack_.reserve(64);
}

Micros BatchOracle::latency(const Bitset& eps) const {
  Micros sum_indep = 0.0;
  eps.for_each([&](int e) {
    const double mult = demands_[e].multiplicity;
    for (int i = leaf_begin_[e]; i < leaf_begin_[e + 1]; ++i) load_[leaves_[i].link_slot] += mult;
    sum_indep += mult * indep_[e];
  });
  Micros max_shared = 0.0;
  eps.for_each([&](int e) {
    stack_.clear();
    const int lb = leaf_begin_[e];
    for (int i = node_begin_[e]; i < node_begin_[e + 1]; ++i) {
      const TreeNode& nd = nodes_[i];
      if (nd.leaf >= 0) {
        const Leaf& lf = leaves_[lb + nd.leaf];
        stack_.push_back(lf.base * load_[lf.link_slot]);
      } else {
        const Micros r = stack_.back();
        stack_.pop_back();
        const Micros l = stack_.back();
        stack_.back() = beta_ * std::max(l, r);
      }
    }
    max_shared = std::max(max_shared, stack_.back());
  });
  eps.for_each([&](int e) {
    for (int i = leaf_begin_[e]; i < leaf_begin_[e + 1]; ++i) load_[leaves_[i].link_slot] = 0.0;
  });
  return std::min(max_shared, sum_indep);
}

InfeasibleScheduleError::InfeasibleScheduleError(EpId ep_, Micros latency, Micros tau)
    : std::runtime_error("EP " + std::to_string(ep_) + " alone needs " + std::to_string(latency) +
                         " us, above the decoherence threshold " + std::to_string(tau) + " us"),
      ep(ep_) {}

namespace {

void check_singletons(const LatencyOracle& oracle, Micros tau, std::vector<Micros>* indep_out) {
  const int n = oracle.num_eps();
  if (indep_out) indep_out->resize(n);
  for (int e = 0; e < n; ++e) {
    const Micros v = oracle.independent(e);
    if (v > tau) throw InfeasibleScheduleError(e, v, tau);
    if (indep_out) (*indep_out)[e] = v;
  }
}

Schedule finalize_schedule(std::vector<std::vector<EpId>> batches, const LatencyOracle& oracle) {
  Schedule s;
  s.batches = std::move(batches);
  for (const auto& batch : s.batches) {
    Bitset mask(oracle.num_eps());
    for (EpId e : batch) mask.set(e);
    const Micros v = oracle.latency(mask);
    s.batch_latency.push_back(v);
    s.total_latency += v;
  }
  return s;
}

}  // namespace

Schedule dp_schedule(const ConsumptionOrder& order, const LatencyOracle& oracle, Micros tau) {
  const int n = order.size();
  if (oracle.num_eps() != n) throw std::invalid_argument("dp_schedule: oracle size mismatch");
  if (n == 0) return {};
  if (!order.is_total())
    throw std::invalid_argument("dp_schedule: consumption order must be total");
  check_singletons(oracle, tau, nullptr);
  const std::vector<EpId> topo = order.topological_order();

  // best[j] = optimal total latency of the first j EPs; cut[j] = start of the
  // last batch. Small instances scan every slice so that exotic test oracles
  // (non-monotone) are handled exactly; large instances rely on the oracle's
  // monotonicity to stop extending an infeasible slice.
  const bool assume_monotone = n > 64;
  std::vector<Micros> best(n + 1, kInfiniteLatency);
  std::vector<int> cut(n + 1, -1);
  best[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    if (best[i] == kInfiniteLatency) continue;
    Bitset mask(n);
    for (int j = i + 1; j <= n; ++j) {
      mask.set(topo[j - 1]);
      const Micros v = oracle.latency(mask);
      if (v > tau) {
        if (assume_monotone) break;
        continue;
      }
      if (best[i] + v < best[j]) {
        best[j] = best[i] + v;
        cut[j] = i;
      }
    }
  }
  if (best[n] == kInfiniteLatency)
    throw InfeasibleScheduleError(topo[0], kInfiniteLatency, tau);  // unreachable after precheck

  std::vector<std::vector<EpId>> batches;
  for (int j = n; j > 0; j = cut[j])
    batches.push_back(std::vector<EpId>(topo.begin() + cut[j], topo.begin() + j));
  std::reverse(batches.begin(), batches.end());
  return finalize_schedule(std::move(batches), oracle);
}

Schedule greedy_schedule(const ConsumptionOrder& order, const LatencyOracle& oracle, Micros tau) {
  const int n = order.size();
  if (oracle.num_eps() != n) throw std::invalid_argument("greedy_schedule: oracle size mismatch");
  if (n == 0) return {};
  std::vector<Micros> indep;
  check_singletons(oracle, tau, &indep);

  Bitset remaining = Bitset::full(n);
  std::vector<std::vector<EpId>> batches;
  while (remaining.any()) {
    // Incumbent: cheapest minimal element as a singleton batch (always
    // feasible and downward-closed).
    EpId init = -1;
    remaining.for_each([&](int e) {
      if (order.ancestors(e).intersects(remaining)) return;
      if (init < 0 || indep[e] < indep[init]) init = e;
    });
    Bitset best_mask(n);
    best_mask.set(init);
    Micros best_avg = indep[init];

    // Peel the remaining set down to empty, tracking the tau-feasible
    // candidate with the best latency-per-EP average. Each step removes the
    // EP (with its not-yet-scheduled descendants) that minimizes that
    // average after removal, so candidates stay downward-closed.
    Bitset sp = remaining;
    while (sp.any()) {
      const Micros v = oracle.latency(sp);
      if (v <= tau) {
        const Micros avg = v / sp.count();
        if (avg < best_avg) {
          best_avg = avg;
          best_mask = sp;
        }
      }
      if (sp.count() == 1) break;
      Micros best_score = kInfiniteLatency;
      Bitset best_next;
      bool found = false;
      sp.for_each([&](int e) {
        Bitset next = sp;
        next.subtract(order.descendants(e));
        next.reset(e);
        if (next.none()) return;  // emptying removals are a last resort
        const Micros score = oracle.latency(next) / next.count();
        if (score < best_score) {
          best_score = score;
          best_next = std::move(next);
          found = true;
        }
      });
      if (!found) break;  // every removal empties the set (single chain head)
      sp = std::move(best_next);
    }

    batches.push_back(best_mask.to_vector());
    remaining.subtract(best_mask);
  }
  return finalize_schedule(std::move(batches), oracle);
}

Schedule brute_force_schedule(const ConsumptionOrder& order, const LatencyOracle& oracle,
                              Micros tau, int limit) {
  const int n = order.size();
  if (oracle.num_eps() != n) throw std::invalid_argument("brute_force_schedule: oracle size mismatch");
  const int effective_limit = std::min(limit, 24);  // 2^n state table
  if (n > effective_limit)
    throw std::invalid_argument("brute_force_schedule: " + std::to_string(n) +
                                " EPs exceed limit " + std::to_string(effective_limit));
  if (n == 0) return {};
  check_singletons(oracle, tau, nullptr);

  const std::uint32_t full = (n == 32) ? ~0u : ((1u << n) - 1);
  std::vector<std::uint32_t> anc_mask(n, 0);
  for (int e = 0; e < n; ++e)
    order.ancestors(e).for_each([&](int p) { anc_mask[e] |= 1u << p; });

  std::vector<Micros> lat(full + 1, 0.0);
  std::vector<char> feasible(full + 1, 0);
  for (std::uint32_t b = 1; b <= full; ++b) {
    Bitset mask(n);
    for (int e = 0; e < n; ++e)
      if (b & (1u << e)) mask.set(e);
    lat[b] = oracle.latency(mask);
    feasible[b] = lat[b] <= tau;
  }

  // f[r] = optimal total over the downward-closed remainder r. A batch b of r
  // must itself be downward-closed within r so no member waits for an EP
  // generated in a later batch.
  std::vector<Micros> f(full + 1, kInfiniteLatency);
  std::vector<std::uint32_t> choice(full + 1, 0);
  f[0] = 0.0;
  for (std::uint32_t r = 1; r <= full; ++r) {
    for (std::uint32_t b = r;; b = (b - 1) & r) {
      if (b == 0) break;
      if (feasible[b]) {
        bool closed = true;
        for (std::uint32_t rest = b; rest;) {
          const int e = std::countr_zero(rest);
          rest &= rest - 1;
          if (anc_mask[e] & r & ~b) {
            closed = false;
            break;
          }
        }
        if (closed && f[r & ~b] + lat[b] < f[r]) {
          f[r] = f[r & ~b] + lat[b];
          choice[r] = b;
        }
      }
    }
  }
  if (f[full] == kInfiniteLatency)
    throw InfeasibleScheduleError(0, kInfiniteLatency, tau);  // unreachable after precheck

  // choice[r] is a batch that can run first within r (its ancestors inside r
  // are its own members), so peeling from the full set yields chronological
  // batch order directly.
  std::vector<std::vector<EpId>> batches;
  for (std::uint32_t r = full; r;) {
    const std::uint32_t b = choice[r];
    std::vector<EpId> batch;
    for (int e = 0; e < n; ++e)
      if (b & (1u << e)) batch.push_back(e);
    batches.push_back(std::move(batch));
    r &= ~b;
  }
  return finalize_schedule(std::move(batches), oracle);
}

ValidationReport validate_schedule(const Schedule& s, const ConsumptionOrder& order,
                                   const LatencyOracle& oracle, Micros tau) {
  ValidationReport rep;
  auto violation = [&rep](std::string msg) {
    rep.ok = false;
    rep.violations.push_back(std::move(msg));
  };
  const int n = order.size();
  std::vector<int> batch_of(n, -1);
  for (int k = 0; k < static_cast<int>(s.batches.size()); ++k) {
    if (s.batches[k].empty()) violation("batch " + std::to_string(k) + " is empty");
    for (EpId e : s.batches[k]) {
      if (e < 0 || e >= n) {
        violation("unknown EP id " + std::to_string(e));
        continue;
      }
      if (batch_of[e] != -1)
        violation("EP " + std::to_string(e) + " scheduled twice");
      batch_of[e] = k;
    }
  }
  for (int e = 0; e < n; ++e)
    if (batch_of[e] == -1) violation("EP " + std::to_string(e) + " missing from schedule");
  for (int k = 0; k < static_cast<int>(s.batches.size()); ++k) {
    Bitset mask(n);
    bool usable = true;
    for (EpId e : s.batches[k]) {
      if (e < 0 || e >= n) {
        usable = false;
        break;
      }
      mask.set(e);
    }
    if (!usable || mask.none()) continue;
    const Micros v = oracle.latency(mask);
    if (v > tau)
      violation("batch " + std::to_string(k) + " latency " + std::to_string(v) +
                " us exceeds threshold " + std::to_string(tau) + " us");
  }
  if (rep.ok) {
    for (int e = 0; e < n; ++e) {
      order.ancestors(e).for_each([&](int p) {
        if (batch_of[p] > batch_of[e])
          violation("EP " + std::to_string(e) + " in batch " + std::to_string(batch_of[e]) +
                    " waits for EP " + std::to_string(p) + " generated in batch " +
                    std::to_string(batch_of[p]));
      });
    }
  }
  return rep;
}

}  // namespace qdist
