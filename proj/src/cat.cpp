#include "qdist/cat.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>

namespace qdist {

namespace {

constexpr int kOpenWindow = std::numeric_limits<int>::max();

// Unary-free window of qubit q around instant t: (last unary before t,
// first unary after t). unary_times must be sorted.
std::pair<int, int> window_around(const std::vector<int>& unary_times, int t) {
  auto it = std::upper_bound(unary_times.begin(), unary_times.end(), t);
  const int end = (it == unary_times.end()) ? kOpenWindow : *it;
  const int start = (it == unary_times.begin()) ? 0 : *(it - 1) + 1;
  return {start, end};
}

std::vector<std::vector<int>> unary_times_per_qubit(const Circuit& c) {
  std::vector<std::vector<int>> ut(c.num_qubits);
  for (const Gate& g : c.gates)
    if (!g.is_binary()) ut[g.q0].push_back(g.time);
  return ut;
}

std::vector<NodeId> qubit_hosts(const Circuit& c, const Allocation& alloc,
                                const QuantumNetwork& net) {
  std::vector<NodeId> host(c.num_qubits);
  for (int q = 0; q < c.num_qubits; ++q) host[q] = net.node_of_memory(alloc.qubit_to_memory[q]);
  return host;
}

// All-pairs hop distances on the node graph.
std::vector<std::vector<int>> hop_distances(const QuantumNetwork& net) {
  const int n = net.num_nodes();
  auto adj = net.adjacency();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, n + 1));
  for (int s = 0; s < n; ++s) {
    std::queue<int> q;
    dist[s][s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (auto [u, li] : adj[v]) {
        (void)li;
        if (dist[s][u] > dist[s][v] + 1) {
          dist[s][u] = dist[s][v] + 1;
          q.push(u);
        }
      }
    }
  }
  return dist;
}

void require_cz_only(const Circuit& c) {
  for (const Gate& g : c.gates)
    if (g.kind == GateKind::Cnot)
      throw std::invalid_argument(
          "cat-entanglement requires a CZ-only circuit; convert CNOTs first");
}

bool in_window(int start, int end, int t) { return start <= t && t < end; }

}  // namespace

double dsvc_density(const DsvcGraph& g, const std::vector<int>& vertices) {
  if (vertices.empty()) return 0.0;
  std::vector<char> in(g.num_vertices, 0);
  double w = 0.0, cost = 0.0;
  for (int v : vertices) {
    if (v < 0 || v >= g.num_vertices) throw std::invalid_argument("dsvc: vertex out of range");
    if (in[v]) throw std::invalid_argument("dsvc: duplicate vertex");
    in[v] = 1;
    w += g.vertex_weight[v];
    cost += g.vertex_cost[v];
  }
  for (const auto& e : g.edges)
    if (in[e.u] && in[e.v]) w += e.weight;
  if (cost <= 0.0) throw std::invalid_argument("dsvc: nonpositive subgraph cost");
  return w / cost;
}

DsvcResult dsvc_greedy(const DsvcGraph& g) {
  const int n = g.num_vertices;
  DsvcResult best;
  if (n == 0) return best;
  for (int v = 0; v < n; ++v)
    if (!(g.vertex_cost[v] > 0.0))
      throw std::invalid_argument("dsvc: vertex costs must be strictly positive");

  std::vector<char> alive(n, 1);
  std::vector<double> weff(g.vertex_weight);  // vertex weight + alive incident edges
  std::vector<std::vector<std::pair<int, double>>> inc(n);
  double total_w = 0.0, total_c = 0.0;
  for (int v = 0; v < n; ++v) {
    total_w += g.vertex_weight[v];
    total_c += g.vertex_cost[v];
  }
  for (const auto& e : g.edges) {
    if (e.u == e.v || e.u < 0 || e.v < 0 || e.u >= n || e.v >= n)
      throw std::invalid_argument("dsvc: bad edge");
    inc[e.u].emplace_back(e.v, e.weight);
    inc[e.v].emplace_back(e.u, e.weight);
    weff[e.u] += e.weight;
    weff[e.v] += e.weight;
    total_w += e.weight;
  }

  std::vector<int> removal_order;
  removal_order.reserve(n);
  double best_density = total_w / total_c;
  int best_removed = 0;
  int alive_count = n;
  while (alive_count > 1) {
    int pick = -1;
    double pick_score = 0.0;
    for (int v = 0; v < n; ++v) {
      if (!alive[v]) continue;
      const double score = weff[v] / g.vertex_cost[v];
      if (pick < 0 || score < pick_score) {
        pick = v;
        pick_score = score;
      }
    }
    alive[pick] = 0;
    --alive_count;
    removal_order.push_back(pick);
    total_w -= g.vertex_weight[pick];
    total_c -= g.vertex_cost[pick];
    for (auto [u, w] : inc[pick])
      if (alive[u]) {
        weff[u] -= w;
        total_w -= w;
      }
    const double density = total_w / total_c;
    if (density > best_density) {
      best_density = density;
      best_removed = static_cast<int>(removal_order.size());
    }
  }

  std::vector<char> removed(n, 0);
  for (int i = 0; i < best_removed; ++i) removed[removal_order[i]] = 1;
  for (int v = 0; v < n; ++v)
    if (!removed[v]) best.vertices.push_back(v);
  best.density = best_density;
  return best;
}

std::vector<CeCandidate> enumerate_ce_candidates(const Circuit& c, const Allocation& alloc,
                                                 const QuantumNetwork& net,
                                                 const EntanglementEngine& engine) {
  c.validate();
  require_cz_only(c);
  const auto host = qubit_hosts(c, alloc, net);
  const auto unary = unary_times_per_qubit(c);
  const auto hops = hop_distances(net);

  std::map<std::tuple<QubitId, NodeId, int>, CeCandidate> merged;
  auto add = [&](QubitId q, NodeId target, int t, GateId gate) {
    auto [ws, we] = window_around(unary[q], t);
    auto key = std::make_tuple(q, target, ws);
    auto it = merged.find(key);
    if (it == merged.end()) {
      CeCandidate cand;
      cand.qubit = q;
      cand.source = host[q];
      cand.target = target;
      cand.window_start = ws;
      cand.window_end = we;
      cand.cost = engine.ep_latency(host[q], target);
      cand.coverable = {gate};
      merged.emplace(key, std::move(cand));
    } else {
      it->second.coverable.push_back(gate);
    }
  };

  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    const Gate& gate = c.gates[g];
    if (gate.kind != GateKind::Cz) continue;
    const NodeId ha = host[gate.q0], hb = host[gate.q1];
    if (ha == hb) continue;
    add(gate.q0, hb, gate.time, g);
    add(gate.q1, ha, gate.time, g);
    for (int p = 0; p < net.num_nodes(); ++p) {
      if (p == ha || p == hb) continue;
      if (net.nodes[p].exec_memory_capacity < 1) continue;
      if (hops[p][ha] > 2 && hops[p][hb] > 2) continue;
      add(gate.q0, p, gate.time, g);
      add(gate.q1, p, gate.time, g);
    }
  }

  std::vector<CeCandidate> out;
  out.reserve(merged.size());
  for (auto& [key, cand] : merged) {
    (void)key;
    std::sort(cand.coverable.begin(), cand.coverable.end());
    cand.coverable.erase(std::unique(cand.coverable.begin(), cand.coverable.end()),
                         cand.coverable.end());
    out.push_back(std::move(cand));
  }
  return out;  // map iteration is already (qubit, target, window_start) sorted
}

std::vector<char> ce_coverage(const Circuit& c, const Allocation& alloc, const QuantumNetwork& net,
                              const std::vector<CatEntanglement>& ces) {
  const auto host = qubit_hosts(c, alloc, net);
  std::vector<char> covered(c.gates.size(), 0);
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    const Gate& gate = c.gates[g];
    if (!gate.is_binary() || host[gate.q0] == host[gate.q1]) {
      covered[g] = 1;  // needs no EP
      continue;
    }
    const int t = gate.time;
    std::set<NodeId> a_at, b_at;  // nodes holding a live copy of each operand
    bool direct = false;
    for (const CatEntanglement& ce : ces) {
      if (!in_window(ce.window_start, ce.window_end, t)) continue;
      if (ce.qubit == gate.q0) {
        if (ce.target == host[gate.q1]) direct = true;
        a_at.insert(ce.target);
      } else if (ce.qubit == gate.q1) {
        if (ce.target == host[gate.q0]) direct = true;
        b_at.insert(ce.target);
      }
    }
    if (direct) {
      covered[g] = 1;
      continue;
    }
    for (NodeId p : a_at)
      if (b_at.count(p)) {
        covered[g] = 1;
        break;
      }
  }
  return covered;
}

DsvcInstance build_dsvc_instance(const std::vector<CeCandidate>& candidates,
                                 const std::vector<char>& gate_covered, const Circuit& c) {
  if (gate_covered.size() != c.gates.size())
    throw std::invalid_argument("dsvc instance: coverage vector size mismatch");

  // Hosts are recoverable from the candidates themselves: a candidate's
  // source is the node of its qubit's data memory.
  std::vector<NodeId> host(c.num_qubits, -1);
  for (const CeCandidate& cd : candidates)
    if (cd.qubit >= 0 && cd.qubit < c.num_qubits) host[cd.qubit] = cd.source;

  // Assign each uncovered gate's unit weight: lowest-id single coverer, else
  // the lexicographically smallest covering pair.
  std::map<int, double> vertex_w;
  std::map<std::pair<int, int>, double> edge_w;
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    if (gate_covered[g]) continue;
    const Gate& gate = c.gates[g];
    const int t = gate.time;
    int single = -1;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
      const CeCandidate& cd = candidates[i];
      if (!in_window(cd.window_start, cd.window_end, t)) continue;
      const bool covers_alone = (cd.qubit == gate.q0 && cd.target == host[gate.q1]) ||
                                (cd.qubit == gate.q1 && cd.target == host[gate.q0]);
      if (covers_alone) {
        single = i;
        break;
      }
    }
    if (single >= 0) {
      vertex_w[single] += 1.0;
      continue;
    }
    std::pair<int, int> best_pair{-1, -1};
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
      const CeCandidate& ci = candidates[i];
      if (ci.qubit != gate.q0 || !in_window(ci.window_start, ci.window_end, t)) continue;
      for (int j = 0; j < static_cast<int>(candidates.size()); ++j) {
        const CeCandidate& cj = candidates[j];
        if (cj.qubit != gate.q1 || cj.target != ci.target) continue;
        if (!in_window(cj.window_start, cj.window_end, t)) continue;
        if (best_pair.first < 0 || std::pair{i, j} < best_pair) best_pair = {i, j};
      }
      if (best_pair.first == i) break;  // later i only yields larger pairs
    }
    if (best_pair.first < 0)
      throw std::invalid_argument("dsvc instance: gate " + std::to_string(g) +
                                  " has no covering candidate");
    edge_w[{std::min(best_pair.first, best_pair.second),
            std::max(best_pair.first, best_pair.second)}] += 1.0;
  }

  std::set<int> vertex_ids;
  for (const auto& [v, w] : vertex_w) {
    (void)w;
    vertex_ids.insert(v);
  }
  for (const auto& [uv, w] : edge_w) {
    (void)w;
    vertex_ids.insert(uv.first);
    vertex_ids.insert(uv.second);
  }

  DsvcInstance inst;
  std::map<int, int> to_vertex;
  for (int cand : vertex_ids) {
    to_vertex[cand] = static_cast<int>(inst.vertex_candidate.size());
    inst.vertex_candidate.push_back(cand);
  }
  inst.graph.num_vertices = static_cast<int>(inst.vertex_candidate.size());
  inst.graph.vertex_weight.assign(inst.graph.num_vertices, 0.0);
  inst.graph.vertex_cost.assign(inst.graph.num_vertices, 0.0);
  for (int v = 0; v < inst.graph.num_vertices; ++v)
    inst.graph.vertex_cost[v] = candidates[inst.vertex_candidate[v]].cost;
  for (const auto& [v, w] : vertex_w) inst.graph.vertex_weight[to_vertex[v]] = w;
  for (const auto& [uv, w] : edge_w)
    inst.graph.edges.push_back({to_vertex[uv.first], to_vertex[uv.second], w});
  return inst;
}

namespace {

// Stable gate assignment: direct coverage by the lowest-id CE, otherwise the
// lexicographically smallest meeting-point pair.
void assign_gates(const Circuit& c, const std::vector<NodeId>& host,
                  std::vector<CatEntanglement>& ces, std::vector<std::vector<int>>& gate_to_ces) {
  for (auto& ce : ces) ce.covered_gates.clear();
  gate_to_ces.assign(c.gates.size(), {});
  const int n = static_cast<int>(ces.size());
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    const Gate& gate = c.gates[g];
    if (!gate.is_binary() || host[gate.q0] == host[gate.q1]) continue;
    const int t = gate.time;
    int direct = -1;
    for (int i = 0; i < n && direct < 0; ++i) {
      const CatEntanglement& ce = ces[i];
      if (!in_window(ce.window_start, ce.window_end, t)) continue;
      if ((ce.qubit == gate.q0 && ce.target == host[gate.q1]) ||
          (ce.qubit == gate.q1 && ce.target == host[gate.q0]))
        direct = i;
    }
    if (direct >= 0) {
      gate_to_ces[g] = {direct};
      ces[direct].covered_gates.push_back(g);
      continue;
    }
    std::pair<int, int> best{-1, -1};
    for (int i = 0; i < n; ++i) {
      const CatEntanglement& ci = ces[i];
      if (ci.qubit != gate.q0 || !in_window(ci.window_start, ci.window_end, t)) continue;
      for (int j = 0; j < n; ++j) {
        const CatEntanglement& cj = ces[j];
        if (cj.qubit != gate.q1 || cj.target != ci.target) continue;
        if (!in_window(cj.window_start, cj.window_end, t)) continue;
        if (best.first < 0 || std::pair{i, j} < best) best = {i, j};
      }
      if (best.first == i) break;
    }
    if (best.first < 0)
      throw std::logic_error("cat-entanglement selection left gate " + std::to_string(g) +
                             " uncovered");
    gate_to_ces[g] = {best.first, best.second};
    ces[best.first].covered_gates.push_back(g);
    ces[best.second].covered_gates.push_back(g);
  }
}

}  // namespace

CePlan greedy_ce(const Circuit& c, const Allocation& alloc, const QuantumNetwork& net,
                 const EntanglementEngine& engine) {
  c.validate();
  require_cz_only(c);
  alloc.validate(net.total_memories());
  const auto host = qubit_hosts(c, alloc, net);
  const auto candidates = enumerate_ce_candidates(c, alloc, net, engine);

  CePlan plan;
  std::set<int> selected;
  auto materialize = [&](const std::set<int>& sel) {
    std::vector<CatEntanglement> v;
    for (int id : sel) {
      const CeCandidate& cd = candidates[id];
      CatEntanglement ce;
      ce.qubit = cd.qubit;
      ce.source = cd.source;
      ce.target = cd.target;
      ce.window_start = cd.window_start;
      ce.window_end = cd.window_end;
      v.push_back(ce);
    }
    return v;
  };

  std::vector<char> covered = ce_coverage(c, alloc, net, {});
  auto count_uncovered = [&] {
    return static_cast<int>(std::count(covered.begin(), covered.end(), 0));
  };
  int uncovered = count_uncovered();
  while (uncovered > 0) {
    const DsvcInstance inst = build_dsvc_instance(candidates, covered, c);
    const DsvcResult res = dsvc_greedy(inst.graph);
    std::vector<int> chosen = res.vertices;
    if (chosen.empty() || res.density <= 0.0) {
      // Degenerate instance: take the whole graph, which covers every
      // remaining gate by construction.
      chosen.resize(inst.graph.num_vertices);
      for (int v = 0; v < inst.graph.num_vertices; ++v) chosen[v] = v;
    }
    for (int v : chosen) selected.insert(inst.vertex_candidate[v]);
    covered = ce_coverage(c, alloc, net, materialize(selected));
    int now = count_uncovered();
    if (now >= uncovered) {
      // Last resort: select everything in the instance.
      for (int v = 0; v < inst.graph.num_vertices; ++v) selected.insert(inst.vertex_candidate[v]);
      covered = ce_coverage(c, alloc, net, materialize(selected));
      now = count_uncovered();
      if (now >= uncovered)
        throw std::logic_error("cat-entanglement selection made no progress");
    }
    uncovered = now;
  }

  std::vector<CatEntanglement> ces = materialize(selected);
  assign_gates(c, host, ces, plan.gate_to_ces);
  // Drop CEs whose every coverable gate preferred another CE.
  {
    std::vector<CatEntanglement> kept;
    for (auto& ce : ces)
      if (!ce.covered_gates.empty()) kept.push_back(std::move(ce));
    ces = std::move(kept);
  }

  // Execution-memory liveness repair. A CE occupies one execution memory at
  // its target over its window; where simultaneous copies exceed capacity,
  // split the longest live window at the overflow instant and trim both
  // halves to the span of the gates they keep.
  const int last_time = c.gates.empty() ? 0 : c.gates.back().time;
  auto effective_end = [&](const CatEntanglement& ce) {
    return std::min(ce.window_end, last_time + 1);
  };
  const int max_rounds = 10 * static_cast<int>(c.gates.size()) + 64;
  for (int round = 0; round < max_rounds; ++round) {
    // Overflow scan: per-node counts change only at window starts.
    int over_t = -1;
    NodeId over_node = -1;
    std::vector<std::pair<int, NodeId>> starts;
    starts.reserve(ces.size());
    for (const auto& ce : ces) starts.emplace_back(ce.window_start, ce.target);
    std::sort(starts.begin(), starts.end());
    starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
    for (const auto& [t, node] : starts) {
      int live = 0;
      for (const auto& ce : ces)
        if (ce.target == node && in_window(ce.window_start, effective_end(ce), t)) ++live;
      if (live > net.nodes[node].exec_memory_capacity) {
        over_t = t;
        over_node = node;
        break;
      }
    }
    if (over_t < 0) break;

    // Splitting a CE reduces liveness at over_t unless one of its own gates
    // sits exactly there.
    int pick = -1;
    int pick_len = -1;
    for (int i = 0; i < static_cast<int>(ces.size()); ++i) {
      const auto& ce = ces[i];
      if (ce.target != over_node || !in_window(ce.window_start, effective_end(ce), over_t))
        continue;
      bool gate_at = false;
      for (int g : ce.covered_gates)
        if (c.gates[g].time == over_t) gate_at = true;
      if (gate_at) continue;
      const int len = effective_end(ce) - ce.window_start;
      if (len > pick_len) {
        pick = i;
        pick_len = len;
      }
    }
    if (pick < 0) {
      plan.diagnostics.push_back("execution memory overflow at node " +
                                 std::to_string(over_node) + ", instant " +
                                 std::to_string(over_t) + " cannot be repaired by splitting");
      break;
    }

    CatEntanglement lo = ces[pick], hi = ces[pick];
    lo.covered_gates.clear();
    hi.covered_gates.clear();
    for (int g : ces[pick].covered_gates)
      (c.gates[g].time < over_t ? lo : hi).covered_gates.push_back(g);
    ces.erase(ces.begin() + pick);
    auto trim_and_keep = [&](CatEntanglement& ce) {
      if (ce.covered_gates.empty()) return;
      ce.window_start = c.gates[ce.covered_gates.front()].time;
      ce.window_end = c.gates[ce.covered_gates.back()].time + 1;
      ces.push_back(std::move(ce));
    };
    trim_and_keep(lo);
    trim_and_keep(hi);
    if (round + 1 == max_rounds)
      plan.diagnostics.push_back("execution memory repair hit the round limit");
  }

  std::sort(ces.begin(), ces.end(), [](const CatEntanglement& a, const CatEntanglement& b) {
    return std::tie(a.qubit, a.window_start, a.target) <
           std::tie(b.qubit, b.window_start, b.target);
  });
  // Rebuild the gate map from the carried assignments.
  plan.gate_to_ces.assign(c.gates.size(), {});
  for (int i = 0; i < static_cast<int>(ces.size()); ++i)
    for (int g : ces[i].covered_gates) plan.gate_to_ces[g].push_back(i);
  plan.ces = std::move(ces);

  plan.demands.clear();
  for (int i = 0; i < static_cast<int>(plan.ces.size()); ++i) {
    EpDemand d;
    d.src = plan.ces[i].source;
    d.dst = plan.ces[i].target;
    d.multiplicity = engine.copies_for(d.src, d.dst);
    d.origin = i;
    plan.demands.push_back(d);
  }

  // Consumption order: a CE precedes another when its earliest covered gate
  // precedes the other's earliest covered gate through the circuit's data
  // dependencies.
  std::vector<int> gate_to_pseudo(c.gates.size(), -1);
  int n_remote = 0;
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    const Gate& gate = c.gates[g];
    if (gate.is_binary() && host[gate.q0] != host[gate.q1]) gate_to_pseudo[g] = n_remote++;
  }
  const ConsumptionOrder gate_order = build_consumption_order(c, gate_to_pseudo, n_remote);
  plan.order = ConsumptionOrder(static_cast<int>(plan.ces.size()));
  for (int i = 0; i < static_cast<int>(plan.ces.size()); ++i) {
    for (int j = 0; j < static_cast<int>(plan.ces.size()); ++j) {
      if (i == j) continue;
      const int gi = gate_to_pseudo[plan.ces[i].covered_gates.front()];
      const int gj = gate_to_pseudo[plan.ces[j].covered_gates.front()];
      if (gi != gj && gate_order.precedes(gi, gj)) plan.order.add_edge(i, j);
    }
  }
  plan.order.finalize();
  return plan;
}

}  // namespace qdist
