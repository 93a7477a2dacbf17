#include "qdist/baseline.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

namespace qdist {

namespace {

// Lex-smallest hop-shortest path avoiding banned links; empty if unreachable.
std::vector<NodeId> shortest_path_avoiding(const QuantumNetwork& net,
                                           const std::vector<std::vector<std::pair<NodeId, int>>>& adj,
                                           NodeId src, NodeId dst,
                                           const std::set<int>& banned) {
  const int n = net.num_nodes();
  std::vector<int> parent(n, -2);
  std::queue<NodeId> q;
  parent[src] = -1;
  q.push(src);
  while (!q.empty()) {
    const NodeId v = q.front();
    q.pop();
    if (v == dst) break;
    for (auto [u, li] : adj[v]) {
      if (banned.count(li) || parent[u] != -2) continue;
      parent[u] = v;
      q.push(u);
    }
  }
  if (parent[dst] == -2) return {};
  std::vector<NodeId> path;
  for (NodeId v = dst; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

std::vector<GateLayer> layer_gates(const Circuit& c, const Allocation& alloc,
                                   const QuantumNetwork& net) {
  c.validate();
  alloc.validate(net.total_memories());
  std::vector<NodeId> host(c.num_qubits);
  for (int q = 0; q < c.num_qubits; ++q) host[q] = net.node_of_memory(alloc.qubit_to_memory[q]);

  // Slots follow the consumption order, which also chains remote gates
  // through intervening local gates, so a slot never holds ordered gates.
  std::vector<int> gate_to_pseudo(c.gates.size(), -1);
  std::vector<GateId> remote;
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    const Gate& gate = c.gates[g];
    if (!gate.is_binary() || host[gate.q0] == host[gate.q1]) continue;
    gate_to_pseudo[g] = static_cast<int>(remote.size());
    remote.push_back(g);
  }
  const ConsumptionOrder order =
      build_consumption_order(c, gate_to_pseudo, static_cast<int>(remote.size()));
  std::vector<int> level(remote.size(), 0);
  for (int e : order.topological_order()) {
    int lv = 0;
    order.ancestors(e).for_each([&](int p) { lv = std::max(lv, level[p] + 1); });
    level[e] = lv;
  }

  std::map<int, GateLayer> by_slot;
  for (std::size_t e = 0; e < remote.size(); ++e) {
    by_slot[level[e]].slot = level[e];
    by_slot[level[e]].gates.push_back(remote[e]);
  }
  std::vector<GateLayer> layers;
  layers.reserve(by_slot.size());
  for (auto& [slot, layer] : by_slot) {
    (void)slot;
    layers.push_back(std::move(layer));
  }
  return layers;
}

BaselineResult run_disjoint_paths(const Circuit& c, const Allocation& alloc,
                                  const QuantumNetwork& net, const EntanglementEngine& engine) {
  BaselineResult r;
  r.layers = layer_gates(c, alloc, net);
  DemandDerivation derivation = derive_ep_demands(c, alloc, net, engine);
  r.demands = derivation.demands;
  r.gate_to_ep = derivation.gate_to_ep;
  r.order = build_consumption_order(c, r.gate_to_ep, static_cast<int>(r.demands.size()));
  r.ep_trees.resize(r.demands.size());

  const auto adj = net.adjacency();
  // Hop distance for the shortest-first processing order.
  std::vector<int> full_hops(r.demands.size(), 0);
  for (std::size_t e = 0; e < r.demands.size(); ++e)
    full_hops[e] = engine.route(r.demands[e].src, r.demands[e].dst).hops();

  Micros carried = 0.0;  // rounds that completed no EP roll their time forward
  for (const GateLayer& layer : r.layers) {
    struct Unit {
      int ep;
      int copy;
    };
    std::vector<Unit> pending;
    std::vector<int> copies_left(r.demands.size(), 0);
    for (GateId g : layer.gates) {
      const int e = r.gate_to_ep[g];
      copies_left[e] = r.demands[e].multiplicity;
      for (int k = 0; k < r.demands[e].multiplicity; ++k) pending.push_back({e, k});
    }
    std::stable_sort(pending.begin(), pending.end(), [&](const Unit& a, const Unit& b) {
      return std::tie(full_hops[a.ep], a.ep, a.copy) < std::tie(full_hops[b.ep], b.ep, b.copy);
    });

    while (!pending.empty()) {
      std::set<int> used_links;
      std::vector<Unit> next_pending;
      Micros round_latency = 0.0;
      std::vector<int> completed;
      for (const Unit& u : pending) {
        const EpDemand& d = r.demands[u.ep];
        const auto path = shortest_path_avoiding(net, adj, d.src, d.dst, used_links);
        if (path.empty()) {
          next_pending.push_back(u);
          continue;
        }
        std::vector<Micros> lat(path.size() - 1);
        std::vector<double> suc(path.size() - 1);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          int link_idx = -1;
          for (auto [nb, li] : adj[path[i]])
            if (nb == path[i + 1]) link_idx = li;
          used_links.insert(link_idx);
          const LinkEpParams lp = link_ep_params(net.links[link_idx], net.params);
          lat[i] = lp.attempt_latency;
          suc[i] = lp.attempt_success;
        }
        SwappingTree tree = make_min_latency_tree(path, lat, suc, net.params);
        round_latency = std::max(round_latency, tree_latency(tree));
        r.ep_trees[u.ep].push_back(std::move(tree));
        if (--copies_left[u.ep] == 0) completed.push_back(u.ep);
      }
      if (completed.empty() && next_pending.size() == pending.size())
        throw std::logic_error("disjoint-paths round routed nothing");
      r.total_time += round_latency;
      if (completed.empty()) {
        carried += round_latency;
      } else {
        std::sort(completed.begin(), completed.end());
        r.schedule.batches.push_back(completed);
        r.schedule.batch_latency.push_back(round_latency + carried);
        carried = 0.0;
      }
      pending = std::move(next_pending);
    }
  }
  for (Micros v : r.schedule.batch_latency) r.schedule.total_latency += v;
  return r;
}

ExecutionPlan make_baseline_plan(const Circuit& c, const BaselineResult& r,
                                 const QuantumNetwork& net, const EntanglementEngine& engine) {
  DemandDerivation d;
  d.demands = r.demands;
  d.gate_to_ep = r.gate_to_ep;
  ExecutionPlan plan = make_telegate_plan(c, d, net, engine, r.schedule);
  plan.ep_trees = r.ep_trees;  // the baseline's own per-round paths
  return plan;
}

}  // namespace qdist
