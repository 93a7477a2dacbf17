#include "qdist/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "qdist/rng.hpp"

namespace qdist {

namespace {

constexpr std::uint64_t kSimSalt = 0x73696d2d73616c74ull;
constexpr int kMaxRegenRounds = 5;
constexpr std::size_t kMaxTraceLines = 20000;

struct NodeMeta {
  int parent = -1;
  int sibling = -1;
  int link = -1;  // physical link id for leaves
};

// Per (EP, copy): the tree plus everything the event loop needs about it.
struct CopyMeta {
  const SwappingTree* tree = nullptr;
  std::vector<NodeMeta> meta;
  std::vector<std::vector<int>> sub_nodes;   // subtree node lists, per node
  std::vector<std::vector<int>> sub_leaves;  // subtree leaf lists, per node
};

struct Event {
  Micros t = 0.0;
  std::uint64_t seq = 0;
  int kind = 0;  // 0 = link service completion, 1 = swap completion
  int link = -1;
  int ep = 0, copy = 0, node = 0;
};
struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    return std::tie(a.t, a.seq) > std::tie(b.t, b.seq);
  }
};

struct LinkState {
  bool busy = false;
  std::deque<std::array<int, 3>> waiting;  // (ep, copy, node)
};

CopyMeta build_copy_meta(const SwappingTree& t, const std::map<std::pair<NodeId, NodeId>, int>& link_of) {
  CopyMeta m;
  m.tree = &t;
  const int n = static_cast<int>(t.nodes.size());
  m.meta.resize(n);
  for (int i = 0; i < n; ++i) {
    if (t.is_leaf(i)) {
      const int slot = t.nodes[i].lo;
      const NodeId a = std::min(t.path[slot], t.path[slot + 1]);
      const NodeId b = std::max(t.path[slot], t.path[slot + 1]);
      auto it = link_of.find({a, b});
      if (it == link_of.end())
        throw std::invalid_argument("execution plan: tree path crosses nodes " +
                                    std::to_string(a) + "," + std::to_string(b) +
                                    " with no physical link");
      m.meta[i].link = it->second;
    } else {
      m.meta[t.nodes[i].left].parent = i;
      m.meta[t.nodes[i].right].parent = i;
      m.meta[t.nodes[i].left].sibling = t.nodes[i].right;
      m.meta[t.nodes[i].right].sibling = t.nodes[i].left;
    }
  }
  m.sub_nodes.resize(n);
  m.sub_leaves.resize(n);
  for (int i = 0; i < n; ++i) {
    std::vector<int> stack{i};
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      m.sub_nodes[i].push_back(v);
      if (t.is_leaf(v)) {
        m.sub_leaves[i].push_back(v);
      } else {
        stack.push_back(t.nodes[v].left);
        stack.push_back(t.nodes[v].right);
      }
    }
    std::sort(m.sub_leaves[i].begin(), m.sub_leaves[i].end());
  }
  return m;
}

}  // namespace

SimResult simulate(const Schedule& schedule, const ExecutionPlan& plan, const QuantumNetwork& net,
                   const SimConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");
  const int num_eps = static_cast<int>(plan.ep_trees.size());
  for (const auto& batch : schedule.batches)
    for (EpId e : batch) {
      if (e < 0 || e >= num_eps) throw std::invalid_argument("simulate: schedule names unknown EP");
      if (plan.ep_trees[e].empty())
        throw std::invalid_argument("simulate: no tree for EP " + std::to_string(e));
    }

  std::map<std::pair<NodeId, NodeId>, int> link_of;
  for (int i = 0; i < static_cast<int>(net.links.size()); ++i) {
    const NodeId a = std::min(net.links[i].a, net.links[i].b);
    const NodeId b = std::max(net.links[i].a, net.links[i].b);
    link_of[{a, b}] = i;
  }

  std::vector<std::vector<CopyMeta>> plans(num_eps);
  for (int e = 0; e < num_eps; ++e)
    for (const SwappingTree& t : plan.ep_trees[e]) plans[e].push_back(build_copy_meta(t, link_of));

  // Flat RNG-stream / node-state indexing per (ep, copy, node).
  std::vector<std::vector<int>> copy_base(num_eps);
  int total_streams = 0;
  for (int e = 0; e < num_eps; ++e) {
    copy_base[e].resize(plans[e].size());
    for (std::size_t k = 0; k < plans[e].size(); ++k) {
      copy_base[e][k] = total_streams;
      total_streams += static_cast<int>(plans[e][k].meta.size());
    }
  }
  auto idx = [&](int e, int k, int node) { return copy_base[e][k] + node; };

  SimResult result;
  result.per_trial_total.reserve(config.trials);
  result.mean_ep_latency.assign(num_eps, 0.0);
  std::vector<double> latency_sum(num_eps, 0.0);

  for (int trial = 0; trial < config.trials; ++trial) {
    std::vector<SplitMix64> rng;
    rng.reserve(total_streams);
    for (int e = 0; e < num_eps; ++e)
      for (std::size_t k = 0; k < plans[e].size(); ++k)
        for (std::size_t node = 0; node < plans[e][k].meta.size(); ++node)
          rng.emplace_back(mix_seed({config.seed, kSimSalt, static_cast<std::uint64_t>(trial),
                                     static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(k),
                                     static_cast<std::uint64_t>(node)}));

    std::vector<char> done(total_streams, 0);
    std::vector<int> copies_left(num_eps, 0);
    std::vector<Micros> completion(num_eps, 0.0), first_start(num_eps, 0.0);
    std::vector<LinkState> links(net.links.size());
    std::priority_queue<Event, std::vector<Event>, EventAfter> pq;
    std::uint64_t seq = 0;
    int gen_remaining = 0;
    const bool tracing = config.record_trace && trial == 0;

    auto trace = [&](Micros t, const char* kind, int subject, const char* outcome) {
      if (!tracing || result.trace.size() >= kMaxTraceLines) return;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.3f %s %d %s", t, kind, subject, outcome);
      result.trace.emplace_back(buf);
    };

    auto start_service = [&](int link, int e, int k, int node, Micros t) {
      const CopyMeta& m = plans[e][k];
      const int slot = m.tree->nodes[node].lo;
      pq.push({t + m.tree->leaf_attempt_latency[slot], seq++, 0, link, e, k, node});
    };
    auto request = [&](int e, int k, int node, Micros t) {
      const int link = plans[e][k].meta[node].link;
      LinkState& L = links[link];
      if (!L.busy) {
        L.busy = true;
        start_service(link, e, k, node, t);
      } else {
        L.waiting.push_back({e, k, node});
      }
    };
    auto on_node_done = [&](int e, int k, int node, Micros t) {
      done[idx(e, k, node)] = 1;
      const CopyMeta& m = plans[e][k];
      if (m.meta[node].parent < 0) {  // copy root
        if (--copies_left[e] == 0) {
          completion[e] = t;
          --gen_remaining;
          trace(t, "ep", e, "ready");
        }
        return;
      }
      if (done[idx(e, k, m.meta[node].sibling)])
        pq.push({t + m.tree->swap_time, seq++, 1, -1, e, k, m.meta[node].parent});
    };

    auto run_generation = [&](const std::vector<int>& eps, Micros start) -> Micros {
      gen_remaining = static_cast<int>(eps.size());
      Micros now = start;
      for (int e : eps) {
        copies_left[e] = static_cast<int>(plans[e].size());
        for (std::size_t k = 0; k < plans[e].size(); ++k) {
          const CopyMeta& m = plans[e][k];
          std::fill_n(done.begin() + copy_base[e][k], m.meta.size(), char(0));
          const int root = m.tree->root;
          for (int leaf : m.sub_leaves[root]) request(e, static_cast<int>(k), leaf, start);
        }
      }
      while (gen_remaining > 0) {
        const Event ev = pq.top();
        pq.pop();
        now = ev.t;
        const CopyMeta& m = plans[ev.ep][ev.copy];
        if (ev.kind == 0) {
          const int slot = m.tree->nodes[ev.node].lo;
          const bool ok =
              rng[idx(ev.ep, ev.copy, ev.node)].bernoulli(m.tree->leaf_attempt_success[slot]);
          trace(ev.t, "attempt", ev.link, ok ? "ok" : "fail");
          if (ok)
            on_node_done(ev.ep, ev.copy, ev.node, ev.t);
          else
            links[ev.link].waiting.push_back({ev.ep, ev.copy, ev.node});
          LinkState& L = links[ev.link];
          if (!L.waiting.empty()) {
            const auto s = L.waiting.front();
            L.waiting.pop_front();
            start_service(ev.link, s[0], s[1], s[2], ev.t);
          } else {
            L.busy = false;
          }
        } else {
          const bool ok = rng[idx(ev.ep, ev.copy, ev.node)].bernoulli(m.tree->swap_success);
          trace(ev.t, "swap", ev.ep, ok ? "ok" : "fail");
          if (ok) {
            on_node_done(ev.ep, ev.copy, ev.node, ev.t);
          } else {
            for (int child : {m.tree->nodes[ev.node].left, m.tree->nodes[ev.node].right}) {
              for (int v : m.sub_nodes[child]) done[idx(ev.ep, ev.copy, v)] = 0;
              for (int leaf : m.sub_leaves[child]) request(ev.ep, ev.copy, leaf, ev.t);
            }
          }
        }
      }
      return now;
    };

    Micros gen_start = 0.0, prev_seg_end = 0.0;
    for (std::size_t b = 0; b < schedule.batches.size(); ++b) {
      const std::vector<int>& batch = schedule.batches[b];
      if (batch.empty()) continue;
      for (int e : batch) first_start[e] = gen_start;
      Micros gen_end = run_generation(batch, gen_start);
      Micros consume = std::max(gen_end, prev_seg_end);
      if (plan.tau > 0.0) {
        for (int round = 0; round < kMaxRegenRounds; ++round) {
          std::vector<int> stale;
          for (int e : batch)
            if (consume - completion[e] > plan.tau) stale.push_back(e);
          if (stale.empty()) break;
          result.decoherence_violations += static_cast<long long>(stale.size());
          if (round + 1 == kMaxRegenRounds) break;
          gen_end = run_generation(stale, consume);
          consume = std::max(gen_end, prev_seg_end);
        }
      }
      const Micros seg =
          b < plan.gate_segments.size() ? plan.gate_segments[b] : 0.0;
      prev_seg_end = consume + seg;
      gen_start = config.overlap_next_batch ? gen_end : prev_seg_end;
      for (int e : batch) latency_sum[e] += completion[e] - first_start[e];
    }
    result.per_trial_total.push_back(prev_seg_end);
  }

  double sum = 0.0;
  for (Micros v : result.per_trial_total) sum += v;
  result.mean = sum / config.trials;
  double var = 0.0;
  for (Micros v : result.per_trial_total) var += (v - result.mean) * (v - result.mean);
  result.stddev = std::sqrt(var / config.trials);
  for (int e = 0; e < num_eps; ++e) result.mean_ep_latency[e] = latency_sum[e] / config.trials;
  return result;
}

namespace {

// A gate joins the segment of the highest batch seen so far in circuit order
// (its inputs cannot be ready earlier). Cost: t_gate per gate plus one t_swap
// per consuming measurement.
std::vector<Micros> gate_segments_from(const Circuit& c, const std::vector<int>& gate_batch,
                                       const std::vector<Micros>& extra_per_gate, int num_batches,
                                       const NetworkParams& p) {
  std::vector<Micros> seg(std::max(num_batches, 1), 0.0);
  int cur = 0;
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    if (gate_batch[g] >= 0) cur = std::max(cur, gate_batch[g]);
    seg[cur] += p.t_gate + extra_per_gate[g];
  }
  seg.resize(std::max(num_batches, 1));
  return seg;
}

std::vector<int> batch_of_eps(const Schedule& s, int num_eps) {
  std::vector<int> batch(num_eps, -1);
  for (int b = 0; b < static_cast<int>(s.batches.size()); ++b)
    for (EpId e : s.batches[b]) batch[e] = b;
  return batch;
}

}  // namespace

ExecutionPlan make_telegate_plan(const Circuit& c, const DemandDerivation& derivation,
                                 const QuantumNetwork& net, const EntanglementEngine& engine,
                                 const Schedule& schedule) {
  ExecutionPlan plan;
  plan.tau = net.params.tau;
  plan.ep_trees.resize(derivation.demands.size());
  for (std::size_t e = 0; e < derivation.demands.size(); ++e) {
    const EpDemand& d = derivation.demands[e];
    for (int k = 0; k < d.multiplicity; ++k) plan.ep_trees[e].push_back(engine.route(d.src, d.dst));
  }
  const auto ep_batch = batch_of_eps(schedule, static_cast<int>(derivation.demands.size()));
  std::vector<int> gate_batch(c.gates.size(), -1);
  std::vector<Micros> extra(c.gates.size(), 0.0);
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    const int e = derivation.gate_to_ep[g];
    if (e < 0) continue;
    gate_batch[g] = ep_batch[e];
    extra[g] = net.params.t_swap;  // telegate measurement
  }
  plan.gate_segments = gate_segments_from(c, gate_batch, extra,
                                          static_cast<int>(schedule.batches.size()), net.params);
  return plan;
}

ExecutionPlan make_ce_execution_plan(const Circuit& c, const CePlan& ce_plan,
                                     const QuantumNetwork& net, const EntanglementEngine& engine,
                                     const Schedule& schedule) {
  ExecutionPlan plan;
  plan.tau = net.params.tau;
  plan.ep_trees.resize(ce_plan.demands.size());
  for (std::size_t e = 0; e < ce_plan.demands.size(); ++e) {
    const EpDemand& d = ce_plan.demands[e];
    for (int k = 0; k < d.multiplicity; ++k) plan.ep_trees[e].push_back(engine.route(d.src, d.dst));
  }
  const auto ep_batch = batch_of_eps(schedule, static_cast<int>(ce_plan.demands.size()));
  std::vector<int> gate_batch(c.gates.size(), -1);
  std::vector<Micros> extra(c.gates.size(), 0.0);
  for (int g = 0; g < static_cast<int>(c.gates.size()); ++g) {
    for (int ce : ce_plan.gate_to_ces[g]) gate_batch[g] = std::max(gate_batch[g], ep_batch[ce]);
  }
  // One entangling measurement per CE, attributed to its first covered gate.
  for (const auto& ce : ce_plan.ces)
    if (!ce.covered_gates.empty()) extra[ce.covered_gates.front()] += net.params.t_swap;
  plan.gate_segments = gate_segments_from(c, gate_batch, extra,
                                          static_cast<int>(schedule.batches.size()), net.params);
  return plan;
}

std::vector<CalibrationRow> calibrate(const QuantumNetwork& net, const EntanglementEngine& engine,
                                      const std::vector<std::pair<NodeId, NodeId>>& pairs,
                                      int trials, std::uint64_t seed) {
  std::vector<CalibrationRow> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [a, b] = pairs[i];
    if (a == b) throw std::invalid_argument("calibrate: src == dst");
    ExecutionPlan plan;
    plan.ep_trees = {{engine.route(a, b)}};
    plan.tau = 0.0;  // single EP, no consumption deadline
    Schedule s;
    s.batches = {{0}};
    s.batch_latency = {0.0};
    SimConfig cfg;
    cfg.seed = mix_seed({seed, static_cast<std::uint64_t>(i)});
    cfg.trials = trials;
    cfg.overlap_next_batch = false;
    const SimResult r = simulate(s, plan, net, cfg);
    CalibrationRow row;
    row.a = a;
    row.b = b;
    row.analytic = tree_latency(engine.route(a, b));
    row.simulated_mean = r.mean;
    row.ratio = row.analytic > 0.0 ? r.mean / row.analytic : 1.0;
    out.push_back(row);
  }
  return out;
}

}  // namespace qdist
