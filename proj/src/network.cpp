#include "qdist/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qdist/rng.hpp"

namespace qdist {

void NetworkParams::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument(std::string("network params: ") + name + " must be in (0, 1]");
  };
  prob(p_swap, "p_swap");
  prob(p_optical_bsm, "p_optical_bsm");
  prob(p_atom_photon, "p_atom_photon");
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0.0))
      throw std::invalid_argument(std::string("network params: ") + name + " must be non-negative");
  };
  nonneg(t_swap, "t_swap");
  nonneg(t_atom_photon, "t_atom_photon");
  nonneg(t_local_swap, "t_local_swap");
  nonneg(t_gate, "t_gate");
  if (!(tau > 0.0)) throw std::invalid_argument("network params: tau must be positive");
  if (!(c_fiber_km_per_us > 0.0))
    throw std::invalid_argument("network params: c_fiber_km_per_us must be positive");
  if (purify_segment_hops < 1)
    throw std::invalid_argument("network params: purify_segment_hops must be >= 1");
}

int NetworkNode::coupling_distance(MemoryId a, MemoryId b) const {
  auto index_of = [&](MemoryId m) {
    auto it = std::find(memories.begin(), memories.end(), m);
    if (it == memories.end())
      throw std::invalid_argument("memory " + std::to_string(m) + " not hosted by node " +
                                  std::to_string(id));
    return static_cast<int>(it - memories.begin());
  };
  const int ia = index_of(a), ib = index_of(b);
  const int ra = ia / grid.cols, ca = ia % grid.cols;
  const int rb = ib / grid.cols, cb = ib % grid.cols;
  return std::abs(ra - rb) + std::abs(ca - cb);
}

int QuantumNetwork::total_memories() const {
  int m = 0;
  for (const NetworkNode& n : nodes) m += static_cast<int>(n.memories.size());
  return m;
}

NodeId QuantumNetwork::node_of_memory(MemoryId m) const {
  for (const NetworkNode& n : nodes)
    if (std::find(n.memories.begin(), n.memories.end(), m) != n.memories.end()) return n.id;
  throw std::invalid_argument("memory " + std::to_string(m) + " not hosted by any node");
}

std::vector<std::vector<std::pair<NodeId, int>>> QuantumNetwork::adjacency() const {
  std::vector<std::vector<std::pair<NodeId, int>>> adj(nodes.size());
  for (int i = 0; i < static_cast<int>(links.size()); ++i) {
    adj[links[i].a].emplace_back(links[i].b, i);
    adj[links[i].b].emplace_back(links[i].a, i);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

bool QuantumNetwork::is_connected() const {
  if (nodes.empty()) return true;
  auto adj = adjacency();
  std::vector<char> seen(nodes.size(), 0);
  std::queue<NodeId> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    NodeId v = q.front();
    q.pop();
    for (auto [u, li] : adj[v]) {
      (void)li;
      if (!seen[u]) {
        seen[u] = 1;
        ++reached;
        q.push(u);
      }
    }
  }
  return reached == static_cast<int>(nodes.size());
}

void QuantumNetwork::validate() const {
  params.validate();
  if (nodes.empty()) throw std::invalid_argument("network: no nodes");
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (nodes[i].id != i) throw std::invalid_argument("network: node ids must be dense 0..N-1");
    const auto& n = nodes[i];
    const int k = static_cast<int>(n.memories.size());
    if (k > 0) {
      if (n.grid.rows < 1 || n.grid.cols < 1 || n.grid.rows * n.grid.cols < k)
        throw std::invalid_argument("network: node " + std::to_string(i) + " grid too small");
    }
    if (n.exec_memory_capacity < 0)
      throw std::invalid_argument("network: negative execution memory capacity");
  }
  std::vector<MemoryId> all;
  for (const auto& n : nodes) all.insert(all.end(), n.memories.begin(), n.memories.end());
  std::vector<MemoryId> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i)
    if (sorted[i] != i)
      throw std::invalid_argument("network: memory ids must be dense 0..M-1 across nodes");
  for (const Link& l : links) {
    if (l.a < 0 || l.b < 0 || l.a >= num_nodes() || l.b >= num_nodes() || l.a == l.b)
      throw std::invalid_argument("network: bad link endpoints");
    if (!(l.length_km >= 0.0)) throw std::invalid_argument("network: negative link length");
  }
  if (!is_connected()) throw std::invalid_argument("network: graph is not connected");
}

LinkEpParams link_ep_params(const Link& link, const NetworkParams& p) {
  LinkEpParams out;
  out.attempt_latency = p.t_atom_photon + link.length_km / p.c_fiber_km_per_us + p.t_swap;
  out.attempt_success = p.p_atom_photon * p.p_atom_photon * p.p_optical_bsm;
  return out;
}

QuantumNetwork generate_waxman(int num_nodes, double area_km, double beta, double alpha,
                               int total_data_memories, std::uint64_t seed,
                               const NetworkParams& params) {
  if (num_nodes < 1) throw std::invalid_argument("waxman: need at least one node");
  if (area_km <= 0.0) throw std::invalid_argument("waxman: area must be positive");
  if (beta <= 0.0 || beta > 1.0 || alpha <= 0.0)
    throw std::invalid_argument("waxman: beta in (0,1], alpha > 0 required");
  if (total_data_memories < 0) throw std::invalid_argument("waxman: negative memory count");

  SplitMix64 rng(mix_seed({seed, 0x6e6574ULL}));
  QuantumNetwork net;
  net.params = params;
  net.nodes.resize(num_nodes);
  for (int i = 0; i < num_nodes; ++i) {
    net.nodes[i].id = i;
    net.nodes[i].x_km = rng.next_real(0.0, area_km);
    net.nodes[i].y_km = rng.next_real(0.0, area_km);
  }

  auto dist = [&](int a, int b) {
    const double dx = net.nodes[a].x_km - net.nodes[b].x_km;
    const double dy = net.nodes[a].y_km - net.nodes[b].y_km;
    return std::sqrt(dx * dx + dy * dy);
  };

  double max_dist = 0.0;
  for (int a = 0; a < num_nodes; ++a)
    for (int b = a + 1; b < num_nodes; ++b) max_dist = std::max(max_dist, dist(a, b));
  if (max_dist <= 0.0) max_dist = 1.0;

  std::vector<std::vector<char>> linked(num_nodes, std::vector<char>(num_nodes, 0));
  for (int a = 0; a < num_nodes; ++a)
    for (int b = a + 1; b < num_nodes; ++b) {
      const double p = beta * std::exp(-alpha * dist(a, b) / max_dist);
      if (rng.bernoulli(p)) {
        net.links.push_back({a, b, dist(a, b)});
        linked[a][b] = linked[b][a] = 1;
      }
    }

  // Patch connectivity: repeatedly add the shortest missing link that joins
  // two components (deterministic tie-break on node ids).
  std::vector<int> comp(num_nodes);
  auto recompute_components = [&]() {
    std::iota(comp.begin(), comp.end(), 0);
    bool changed = true;
    while (changed) {
      changed = false;
      for (const Link& l : net.links) {
        int ca = comp[l.a], cb = comp[l.b];
        if (ca != cb) {
          int lo = std::min(ca, cb);
          for (int& c : comp)
            if (c == ca || c == cb) c = lo;
          changed = true;
        }
      }
    }
    return std::count(comp.begin(), comp.end(), 0) == num_nodes &&
           *std::max_element(comp.begin(), comp.end()) == 0;
  };
  while (!recompute_components()) {
    double best = std::numeric_limits<double>::infinity();
    int ba = -1, bb = -1;
    for (int a = 0; a < num_nodes; ++a)
      for (int b = a + 1; b < num_nodes; ++b) {
        if (comp[a] == comp[b] || linked[a][b]) continue;
        const double d = dist(a, b);
        if (d < best) {
          best = d;
          ba = a;
          bb = b;
        }
      }
    net.links.push_back({ba, bb, best});
    linked[ba][bb] = linked[bb][ba] = 1;
  }

  // Multinomial memory placement, then contiguous global ids node by node.
  std::vector<int> count(num_nodes, 0);
  for (int m = 0; m < total_data_memories; ++m) ++count[rng.next_int(0, num_nodes - 1)];
  int next_id = 0;
  for (int i = 0; i < num_nodes; ++i) {
    auto& node = net.nodes[i];
    for (int k = 0; k < count[i]; ++k) node.memories.push_back(next_id++);
    if (count[i] > 0) {
      node.grid.rows = std::max(1, static_cast<int>(std::floor(std::sqrt(double(count[i])))));
      node.grid.cols = (count[i] + node.grid.rows - 1) / node.grid.rows;
    }
  }

  net.validate();
  return net;
}

std::string network_to_json(const QuantumNetwork& n) {
  nlohmann::json j;
  auto& jp = j["params"];
  jp["p_swap"] = n.params.p_swap;
  jp["t_swap_us"] = n.params.t_swap;
  jp["p_optical_bsm"] = n.params.p_optical_bsm;
  jp["p_atom_photon"] = n.params.p_atom_photon;
  jp["t_atom_photon_us"] = n.params.t_atom_photon;
  jp["tau_us"] = n.params.tau;
  jp["t_local_swap_us"] = n.params.t_local_swap;
  jp["t_gate_us"] = n.params.t_gate;
  jp["c_fiber_km_per_us"] = n.params.c_fiber_km_per_us;
  jp["purify_segment_hops"] = n.params.purify_segment_hops;
  auto& jn = j["nodes"] = nlohmann::json::array();
  for (const NetworkNode& node : n.nodes) {
    nlohmann::json v;
    v["id"] = node.id;
    v["x_km"] = node.x_km;
    v["y_km"] = node.y_km;
    v["memories"] = node.memories;
    v["grid_dims"] = {node.grid.rows, node.grid.cols};
    v["exec_memory_capacity"] = node.exec_memory_capacity;
    jn.push_back(std::move(v));
  }
  auto& jl = j["links"] = nlohmann::json::array();
  for (const Link& l : n.links) jl.push_back({{"a", l.a}, {"b", l.b}, {"length_km", l.length_km}});
  return j.dump(2);
}

QuantumNetwork network_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("network: invalid JSON: ") + e.what());
  }
  QuantumNetwork n;
  try {
    const auto& jp = j.at("params");
    n.params.p_swap = jp.at("p_swap").get<double>();
    n.params.t_swap = jp.at("t_swap_us").get<double>();
    n.params.p_optical_bsm = jp.at("p_optical_bsm").get<double>();
    n.params.p_atom_photon = jp.at("p_atom_photon").get<double>();
    n.params.t_atom_photon = jp.at("t_atom_photon_us").get<double>();
    n.params.tau = jp.at("tau_us").get<double>();
    n.params.t_local_swap = jp.value("t_local_swap_us", n.params.t_local_swap);
    n.params.t_gate = jp.value("t_gate_us", n.params.t_gate);
    n.params.c_fiber_km_per_us = jp.at("c_fiber_km_per_us").get<double>();
    n.params.purify_segment_hops = jp.value("purify_segment_hops", n.params.purify_segment_hops);
    for (const auto& jv : j.at("nodes")) {
      NetworkNode node;
      node.id = jv.at("id").get<int>();
      node.x_km = jv.at("x_km").get<double>();
      node.y_km = jv.at("y_km").get<double>();
      node.memories = jv.at("memories").get<std::vector<int>>();
      const auto& gd = jv.at("grid_dims");
      node.grid.rows = gd.at(0).get<int>();
      node.grid.cols = gd.at(1).get<int>();
      node.exec_memory_capacity = jv.value("exec_memory_capacity", 8);
      n.nodes.push_back(std::move(node));
    }
    for (const auto& jl : j.at("links"))
      n.links.push_back(
          {jl.at("a").get<int>(), jl.at("b").get<int>(), jl.at("length_km").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("network: malformed field: ") + e.what());
  }
  n.validate();
  return n;
}

void save_network(const QuantumNetwork& n, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << network_to_json(n) << '\n';
}

QuantumNetwork load_network(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return network_from_json(ss.str());
}

}  // namespace qdist
