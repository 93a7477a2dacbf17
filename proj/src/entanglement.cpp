#include "qdist/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

namespace qdist {

void SwappingTree::validate() const {
  const int h = hops();
  if (h < 1) throw std::logic_error("swapping tree: path must have at least one link");
  if (static_cast<int>(leaf_attempt_latency.size()) != h ||
      static_cast<int>(leaf_attempt_success.size()) != h)
    throw std::logic_error("swapping tree: leaf parameter arrays must match hop count");
  if (root < 0 || root >= static_cast<int>(nodes.size()))
    throw std::logic_error("swapping tree: bad root");
  if (nodes[root].lo != 0 || nodes[root].hi != h)
    throw std::logic_error("swapping tree: root must cover the whole path");
  int leaves = 0;
  std::vector<int> stack = {root};
  while (!stack.empty()) {
    const Node& nd = nodes[stack.back()];
    stack.pop_back();
    if (nd.hi <= nd.lo) throw std::logic_error("swapping tree: empty span");
    if (nd.hi == nd.lo + 1) {
      if (nd.left != -1 || nd.right != -1)
        throw std::logic_error("swapping tree: leaf with children");
      ++leaves;
      continue;
    }
    if (nd.left < 0 || nd.right < 0) throw std::logic_error("swapping tree: internal node missing child");
    const Node& l = nodes[nd.left];
    const Node& r = nodes[nd.right];
    if (l.lo != nd.lo || r.hi != nd.hi || l.hi != r.lo)
      throw std::logic_error("swapping tree: children must split the parent span");
    stack.push_back(nd.left);
    stack.push_back(nd.right);
  }
  if (leaves != h) throw std::logic_error("swapping tree: leaf count must equal hop count");
}

namespace {

Micros eval_node(const SwappingTree& t, int idx, const double* leaf_scale, double beta) {
  const SwappingTree::Node& nd = t.nodes[idx];
  if (nd.hi == nd.lo + 1) {
    const double scale = leaf_scale ? leaf_scale[nd.lo] : 1.0;
    return t.leaf_attempt_latency[nd.lo] * scale / t.leaf_attempt_success[nd.lo];
  }
  const Micros l = eval_node(t, nd.left, leaf_scale, beta);
  const Micros r = eval_node(t, nd.right, leaf_scale, beta);
  return beta * std::max(l, r);
}

}  // namespace

Micros tree_latency(const SwappingTree& t, const double* leaf_scale) {
  const double beta = 3.0 / (2.0 * t.swap_success);
  return eval_node(t, t.root, leaf_scale, beta);
}

SwappingTree make_min_latency_tree(std::vector<NodeId> path, std::vector<Micros> leaf_latency,
                                   std::vector<double> leaf_success, const NetworkParams& p) {
  const int h = static_cast<int>(path.size()) - 1;
  if (h < 1) throw std::invalid_argument("tree path needs at least one link");
  if (static_cast<int>(leaf_latency.size()) != h || static_cast<int>(leaf_success.size()) != h)
    throw std::invalid_argument("leaf parameter arrays must match hop count");

  const double beta = 3.0 / (2.0 * p.p_swap);
  // cost[i][j]: best latency over complete binary trees spanning links [i, j).
  std::vector<std::vector<Micros>> cost(h + 1, std::vector<Micros>(h + 1, 0.0));
  std::vector<std::vector<int>> split(h + 1, std::vector<int>(h + 1, -1));
  for (int i = 0; i < h; ++i) cost[i][i + 1] = leaf_latency[i] / leaf_success[i];
  for (int span = 2; span <= h; ++span) {
    for (int i = 0; i + span <= h; ++i) {
      const int j = i + span;
      Micros best = kInfiniteLatency;
      int best_m = -1, best_imbalance = 0;
      for (int m = i + 1; m < j; ++m) {
        const Micros v = beta * std::max(cost[i][m], cost[m][j]);
        const int imbalance = std::abs(2 * m - (i + j));
        if (v < best || (v == best && imbalance < best_imbalance)) {
          best = v;
          best_m = m;
          best_imbalance = imbalance;
        }
      }
      cost[i][j] = best;
      split[i][j] = best_m;
    }
  }

  SwappingTree t;
  t.path = std::move(path);
  t.leaf_attempt_latency = std::move(leaf_latency);
  t.leaf_attempt_success = std::move(leaf_success);
  t.swap_success = p.p_swap;
  t.swap_time = p.t_swap;

  // Materialize the chosen splits.
  auto build = [&](auto&& self, int i, int j) -> int {
    SwappingTree::Node nd;
    nd.lo = i;
    nd.hi = j;
    if (j > i + 1) {
      const int m = split[i][j];
      nd.left = self(self, i, m);
      nd.right = self(self, m, j);
    }
    t.nodes.push_back(nd);
    return static_cast<int>(t.nodes.size()) - 1;
  };
  t.root = build(build, 0, h);
  return t;
}

SwappingTree join_trees(const SwappingTree& left, const SwappingTree& right,
                        const NetworkParams& p) {
  if (left.path.back() != right.path.front())
    throw std::invalid_argument("join_trees: paths do not share an endpoint");
  SwappingTree t;
  t.path = left.path;
  t.path.insert(t.path.end(), right.path.begin() + 1, right.path.end());
  t.leaf_attempt_latency = left.leaf_attempt_latency;
  t.leaf_attempt_latency.insert(t.leaf_attempt_latency.end(), right.leaf_attempt_latency.begin(),
                                right.leaf_attempt_latency.end());
  t.leaf_attempt_success = left.leaf_attempt_success;
  t.leaf_attempt_success.insert(t.leaf_attempt_success.end(), right.leaf_attempt_success.begin(),
                                right.leaf_attempt_success.end());
  t.swap_success = p.p_swap;
  t.swap_time = p.t_swap;

  const int offset_links = left.hops();
  t.nodes = left.nodes;
  const int right_base = static_cast<int>(t.nodes.size());
  for (SwappingTree::Node nd : right.nodes) {
    nd.lo += offset_links;
    nd.hi += offset_links;
    if (nd.left >= 0) nd.left += right_base;
    if (nd.right >= 0) nd.right += right_base;
    t.nodes.push_back(nd);
  }
  SwappingTree::Node root;
  root.lo = 0;
  root.hi = t.hops();
  root.left = left.root;
  root.right = right_base + right.root;
  t.nodes.push_back(root);
  t.root = static_cast<int>(t.nodes.size()) - 1;
  return t;
}

int purification_copies(int path_hops, int purify_segment_hops) {
  if (path_hops < 1) return 1;
  return std::max(1, (path_hops + purify_segment_hops - 1) / purify_segment_hops);
}

namespace {

SwappingTree reverse_tree(const SwappingTree& t) {
  SwappingTree r;
  const int h = t.hops();
  r.path.assign(t.path.rbegin(), t.path.rend());
  r.leaf_attempt_latency.assign(t.leaf_attempt_latency.rbegin(), t.leaf_attempt_latency.rend());
  r.leaf_attempt_success.assign(t.leaf_attempt_success.rbegin(), t.leaf_attempt_success.rend());
  r.swap_success = t.swap_success;
  r.swap_time = t.swap_time;
  r.nodes.reserve(t.nodes.size());
  for (SwappingTree::Node nd : t.nodes) {
    const int lo = h - nd.hi, hi = h - nd.lo;
    nd.lo = lo;
    nd.hi = hi;
    std::swap(nd.left, nd.right);  // keep children ordered left-to-right
    r.nodes.push_back(nd);
  }
  r.root = t.root;
  return r;
}

// Lexicographically smallest hop-shortest path from src to dst avoiding the
// given nodes/edges. Returns an empty vector when dst is unreachable.
std::vector<NodeId> shortest_path(const std::vector<std::vector<std::pair<NodeId, int>>>& adj,
                                  NodeId src, NodeId dst, const std::vector<char>& banned_node,
                                  const std::vector<std::vector<char>>& banned_edge) {
  const int n = static_cast<int>(adj.size());
  const int kUnreached = n + 1;
  auto bfs = [&](NodeId from, std::vector<int>& dist) {
    dist.assign(n, kUnreached);
    if (banned_node[from]) return;
    std::queue<NodeId> q;
    dist[from] = 0;
    q.push(from);
    while (!q.empty()) {
      NodeId v = q.front();
      q.pop();
      for (auto [u, li] : adj[v]) {
        (void)li;
        if (banned_node[u] || banned_edge[v][u]) continue;
        if (dist[u] > dist[v] + 1) {
          dist[u] = dist[v] + 1;
          q.push(u);
        }
      }
    }
  };
  std::vector<int> dist_src, dist_dst;
  bfs(src, dist_src);
  bfs(dst, dist_dst);
  if (dist_src[dst] >= kUnreached) return {};
  const int total = dist_src[dst];
  std::vector<NodeId> path = {src};
  NodeId cur = src;
  while (cur != dst) {
    for (auto [u, li] : adj[cur]) {
      (void)li;
      if (banned_node[u] || banned_edge[cur][u]) continue;
      if (dist_src[u] == dist_src[cur] + 1 && dist_src[u] + dist_dst[u] == total) {
        path.push_back(u);
        cur = u;
        break;  // adjacency is sorted, so this is the smallest valid next hop
      }
    }
  }
  return path;
}

// Yen's algorithm, hop metric, deterministic tie-breaks.
std::vector<std::vector<NodeId>> k_shortest_paths(
    const std::vector<std::vector<std::pair<NodeId, int>>>& adj, NodeId src, NodeId dst, int k) {
  const int n = static_cast<int>(adj.size());
  std::vector<char> no_banned_nodes(n, 0);
  std::vector<std::vector<char>> no_banned_edges(n, std::vector<char>(n, 0));
  std::vector<std::vector<NodeId>> result;
  auto first = shortest_path(adj, src, dst, no_banned_nodes, no_banned_edges);
  if (first.empty()) return result;
  result.push_back(first);

  auto cmp = [](const std::vector<NodeId>& a, const std::vector<NodeId>& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  };
  std::vector<std::vector<NodeId>> candidates;

  while (static_cast<int>(result.size()) < k) {
    const auto& prev = result.back();
    for (int i = 0; i + 1 < static_cast<int>(prev.size()); ++i) {
      std::vector<NodeId> root(prev.begin(), prev.begin() + i + 1);
      auto banned_node = no_banned_nodes;
      auto banned_edge = no_banned_edges;
      for (const auto& p : result) {
        if (static_cast<int>(p.size()) > i + 1 &&
            std::equal(root.begin(), root.end(), p.begin())) {
          banned_edge[p[i]][p[i + 1]] = banned_edge[p[i + 1]][p[i]] = 1;
        }
      }
      for (int j = 0; j < i; ++j) banned_node[root[j]] = 1;
      auto spur = shortest_path(adj, prev[i], dst, banned_node, banned_edge);
      if (spur.empty()) continue;
      root.insert(root.end(), spur.begin() + 1, spur.end());
      if (std::find(candidates.begin(), candidates.end(), root) == candidates.end() &&
          std::find(result.begin(), result.end(), root) == result.end())
        candidates.push_back(std::move(root));
    }
    if (candidates.empty()) break;
    auto best = std::min_element(candidates.begin(), candidates.end(), cmp);
    result.push_back(*best);
    candidates.erase(best);
  }
  return result;
}

}  // namespace

EntanglementEngine::EntanglementEngine(const QuantumNetwork& net, int max_candidate_paths)
    : net_(&net), n_(net.num_nodes()) {
  net.validate();
  if (max_candidate_paths < 1) throw std::invalid_argument("max_candidate_paths must be >= 1");
  const NetworkParams& p = net.params;
  const double beta = 3.0 / (2.0 * p.p_swap);
  auto adj = net.adjacency();

  // With parallel links, routing always uses the shortest one per node pair.
  std::vector<std::vector<int>> best_link(n_, std::vector<int>(n_, -1));
  for (int i = 0; i < static_cast<int>(net.links.size()); ++i) {
    const Link& l = net.links[i];
    for (auto [a, b] : {std::pair{l.a, l.b}, std::pair{l.b, l.a}}) {
      int& cur = best_link[a][b];
      if (cur < 0 || net.links[cur].length_km > l.length_km) cur = i;
    }
  }

  latency_.assign(std::size_t(n_) * n_, kInfiniteLatency);
  trees_.resize(std::size_t(n_) * n_);
  std::vector<int> via(std::size_t(n_) * n_, -1);
  for (int a = 0; a < n_; ++a) latency_[pair_index(a, a)] = 0.0;

  // Best direct tree per pair over the k hop-shortest candidate paths.
  for (int a = 0; a < n_; ++a) {
    for (int b = a + 1; b < n_; ++b) {
      auto paths = k_shortest_paths(adj, a, b, max_candidate_paths);
      Micros best = kInfiniteLatency;
      SwappingTree best_tree;
      for (auto& path : paths) {
        std::vector<Micros> lat(path.size() - 1);
        std::vector<double> suc(path.size() - 1);
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
          const LinkEpParams lp = link_ep_params(net.links[best_link[path[i]][path[i + 1]]], p);
          lat[i] = lp.attempt_latency;
          suc[i] = lp.attempt_success;
        }
        SwappingTree t = make_min_latency_tree(path, std::move(lat), std::move(suc), p);
        const Micros v = tree_latency(t);
        if (v < best) {
          best = v;
          best_tree = std::move(t);
        }
      }
      latency_[pair_index(a, b)] = latency_[pair_index(b, a)] = best;
      trees_[pair_index(a, b)] = best_tree;
      trees_[pair_index(b, a)] = reverse_tree(best_tree);
    }
  }

  // Close the latency table under via-node composition, cheapest pairs first
  // (a composed value strictly exceeds both components, so this settles pairs
  // in Dijkstra order).
  using Entry = std::pair<Micros, std::pair<int, int>>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  std::vector<char> settled(std::size_t(n_) * n_, 0);
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (a != b && latency_[pair_index(a, b)] < kInfiniteLatency)
        heap.push({latency_[pair_index(a, b)], {a, b}});

  auto relax = [&](int a, int c, Micros v, int via_node) {
    const int idx = pair_index(a, c);
    if (v < latency_[idx]) {
      latency_[idx] = v;
      via[idx] = via_node;
      heap.push({v, {a, c}});
    }
  };
  while (!heap.empty()) {
    auto [v, ab] = heap.top();
    heap.pop();
    const auto [a, b] = ab;
    const int idx = pair_index(a, b);
    if (settled[idx] || v > latency_[idx]) continue;
    settled[idx] = 1;
    for (int c = 0; c < n_; ++c) {
      if (c == a || c == b) continue;
      if (settled[pair_index(b, c)])
        relax(a, c, beta * std::max(latency_[idx], latency_[pair_index(b, c)]), b);
      if (settled[pair_index(c, a)])
        relax(c, b, beta * std::max(latency_[pair_index(c, a)], latency_[idx]), a);
    }
  }

  // Materialize trees for pairs improved by composition. Components always
  // have strictly smaller latency, so building in ascending latency order
  // only ever joins already-built trees.
  std::vector<std::pair<Micros, int>> order;
  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (a != b) order.push_back({latency_[pair_index(a, b)], pair_index(a, b)});
  std::sort(order.begin(), order.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  for (auto& [v, idx] : order) {
    (void)v;
    if (via[idx] < 0) continue;  // direct tree already in place
    const int a = idx / n_, c = idx % n_, b = via[idx];
    trees_[idx] = join_trees(trees_[pair_index(a, b)], trees_[pair_index(b, c)], p);
  }

  for (int a = 0; a < n_; ++a)
    for (int b = 0; b < n_; ++b)
      if (a != b && !(latency_[pair_index(a, b)] < kInfiniteLatency))
        throw std::logic_error("entanglement engine: unreachable node pair in connected network");
}

const SwappingTree& EntanglementEngine::route(NodeId src, NodeId dst) const {
  if (src < 0 || dst < 0 || src >= n_ || dst >= n_ || src == dst)
    throw std::invalid_argument("route: bad node pair");
  return trees_[pair_index(src, dst)];
}

Micros EntanglementEngine::ep_latency(NodeId src, NodeId dst) const {
  if (src < 0 || dst < 0 || src >= n_ || dst >= n_)
    throw std::invalid_argument("ep_latency: bad node pair");
  return latency_[pair_index(src, dst)];
}

int EntanglementEngine::copies_for(NodeId src, NodeId dst) const {
  return purification_copies(route(src, dst).hops(), net_->params.purify_segment_hops);
}

BatchLatencyReport EntanglementEngine::batch_latency(const std::vector<EpDemand>& demands) const {
  if (demands.empty()) throw std::invalid_argument("batch_latency: empty demand set");
  BatchLatencyReport rep;
  for (const EpDemand& d : demands) {
    if (d.multiplicity < 1) throw std::invalid_argument("batch_latency: multiplicity must be >= 1");
    if (d.src == d.dst) throw std::invalid_argument("batch_latency: demand endpoints coincide");
    const SwappingTree& t = route(d.src, d.dst);
    for (int i = 0; i < t.hops(); ++i) {
      auto key = std::minmax(t.path[i], t.path[i + 1]);
      rep.link_load[{key.first, key.second}] += d.multiplicity;
    }
  }
  rep.per_demand_latency.reserve(demands.size());
  Micros max_shared = 0.0;
  for (const EpDemand& d : demands) {
    const SwappingTree& t = route(d.src, d.dst);
    std::vector<double> scale(t.hops());
    for (int i = 0; i < t.hops(); ++i) {
      auto key = std::minmax(t.path[i], t.path[i + 1]);
      scale[i] = rep.link_load.at({key.first, key.second});
    }
    const Micros shared = tree_latency(t, scale.data());
    rep.per_demand_latency.push_back(shared);
    max_shared = std::max(max_shared, shared);
    rep.sum_independent += d.multiplicity * tree_latency(t);
  }
  rep.makespan = std::min(max_shared, rep.sum_independent);
  return rep;
}

NetworkCouplingGraph build_network_coupling_graph(const QuantumNetwork& net,
                                                  const EntanglementEngine& engine) {
  NetworkCouplingGraph g;
  const int m = net.total_memories();
  g.num_memories = m;
  g.w.assign(std::size_t(m) * m, 0.0);
  std::vector<NodeId> host(m);
  for (const NetworkNode& node : net.nodes)
    for (MemoryId mem : node.memories) host[mem] = node.id;
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      Micros w;
      if (host[a] == host[b]) {
        w = 2.0 * net.nodes[host[a]].coupling_distance(a, b) * net.params.t_local_swap;
      } else {
        w = engine.ep_latency(host[a], host[b]);
      }
      g.w[std::size_t(a) * m + b] = g.w[std::size_t(b) * m + a] = w;
    }
  }
  return g;
}

}  // namespace qdist
