#include "qdist/allocation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qdist {

void Allocation::validate(int num_memories) const {
  std::vector<char> used(num_memories, 0);
  for (MemoryId m : qubit_to_memory) {
    if (m < 0 || m >= num_memories)
      throw std::invalid_argument("allocation: memory id out of range");
    if (used[m]) throw std::invalid_argument("allocation: memory assigned twice");
    used[m] = 1;
  }
}

Micros allocation_cost(const CircuitGraph& circuit, const NetworkCouplingGraph& mem,
                       const Allocation& alloc) {
  const int n = circuit.num_qubits();
  if (alloc.num_qubits() != n)
    throw std::invalid_argument("allocation: qubit count mismatch with circuit");
  Micros cost = 0.0;
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const long long w = circuit.weight(a, b);
      if (w > 0) cost += double(w) * mem.weight(alloc.qubit_to_memory[a], alloc.qubit_to_memory[b]);
    }
  return cost;
}

MaxQapInstance pad_and_complement(const CircuitGraph& circuit, const NetworkCouplingGraph& mem) {
  const int nq = circuit.num_qubits();
  const int m = mem.num_memories;
  if (nq > m)
    throw std::invalid_argument("allocation: more qubits (" + std::to_string(nq) +
                                ") than data memories (" + std::to_string(m) + ")");
  MaxQapInstance inst;
  inst.size = m;
  inst.num_real_qubits = nq;
  inst.big_m = double(circuit.total_weight());
  inst.profit.assign(std::size_t(m) * m, 0.0);
  // Dummy-incident entries stay 0: dummies must remain cost-neutral rather
  // than attract dense placements.
  for (int a = 0; a < nq; ++a)
    for (int b = 0; b < nq; ++b)
      if (a != b) inst.profit[std::size_t(a) * m + b] = inst.big_m - double(circuit.weight(a, b));
  return inst;
}

namespace {

struct Neighbor {
  int qubit;
  double weight;
};

// Steepest-descent over transpositions of the padded assignment: qubit-qubit
// swaps and qubit moves to free memories. Evaluates the true cost delta.
void local_search(const CircuitGraph& circuit, const NetworkCouplingGraph& mem,
                  std::vector<MemoryId>& q2m) {
  const int nq = circuit.num_qubits();
  const int m = mem.num_memories;
  std::vector<std::vector<Neighbor>> nbr(nq);
  for (int a = 0; a < nq; ++a)
    for (int b = 0; b < nq; ++b)
      if (a != b && circuit.weight(a, b) > 0) nbr[a].push_back({b, double(circuit.weight(a, b))});

  std::vector<char> memory_free(m, 1);
  for (MemoryId mm : q2m) memory_free[mm] = 0;

  auto swap_delta = [&](int i, int j) {
    const MemoryId mi = q2m[i], mj = q2m[j];
    double d = 0.0;
    for (const Neighbor& x : nbr[i]) {
      if (x.qubit == j) continue;
      const MemoryId mk = q2m[x.qubit];
      d += x.weight * (mem.weight(mj, mk) - mem.weight(mi, mk));
    }
    for (const Neighbor& x : nbr[j]) {
      if (x.qubit == i) continue;
      const MemoryId mk = q2m[x.qubit];
      d += x.weight * (mem.weight(mi, mk) - mem.weight(mj, mk));
    }
    return d;
  };
  auto move_delta = [&](int i, MemoryId f) {
    const MemoryId mi = q2m[i];
    double d = 0.0;
    for (const Neighbor& x : nbr[i]) {
      const MemoryId mk = q2m[x.qubit];
      d += x.weight * (mem.weight(f, mk) - mem.weight(mi, mk));
    }
    return d;
  };
  // Joint relocation of an interacting pair onto two free memories. Single
  // moves cannot migrate a co-located pair across nodes (each step alone
  // makes the pair remote), so without this the search wedges whenever a
  // cluster must move as a unit.
  auto pair_move_delta = [&](int i, int j, MemoryId f, MemoryId g) {
    const MemoryId mi = q2m[i], mj = q2m[j];
    double d = 0.0;
    for (const Neighbor& x : nbr[i]) {
      if (x.qubit == j) continue;
      const MemoryId mk = q2m[x.qubit];
      d += x.weight * (mem.weight(f, mk) - mem.weight(mi, mk));
    }
    for (const Neighbor& x : nbr[j]) {
      if (x.qubit == i) continue;
      const MemoryId mk = q2m[x.qubit];
      d += x.weight * (mem.weight(g, mk) - mem.weight(mj, mk));
    }
    d += double(circuit.weight(i, j)) * (mem.weight(f, g) - mem.weight(mi, mj));
    return d;
  };

  std::vector<MemoryId> free_list;

  enum class Step { None, Swap, Move, PairMove, Shift };
  constexpr double kMinGain = 1e-7;  // strict decrease per step guarantees termination
  for (int iter = 0; iter < 10000; ++iter) {
    double best = -kMinGain;
    Step kind = Step::None;
    int best_i = -1, best_j = -1;
    MemoryId best_f = -1, best_g = -1;
    for (int i = 0; i < nq; ++i)
      for (int j = i + 1; j < nq; ++j) {
        const double d = swap_delta(i, j);
        if (d < best) {
          best = d;
          kind = Step::Swap;
          best_i = i;
          best_j = j;
        }
      }
    free_list.clear();
    for (MemoryId f = 0; f < m; ++f)
      if (memory_free[f]) free_list.push_back(f);
    for (int i = 0; i < nq; ++i)
      for (MemoryId f : free_list) {
        const double d = move_delta(i, f);
        if (d < best) {
          best = d;
          kind = Step::Move;
          best_i = i;
          best_f = f;
        }
      }
    for (int i = 0; i < nq; ++i)
      for (const Neighbor& x : nbr[i]) {
        if (x.qubit < i) continue;  // each interacting pair once
        for (MemoryId f : free_list)
          for (MemoryId g : free_list) {
            if (f == g) continue;
            const double d = pair_move_delta(i, x.qubit, f, g);
            if (d < best) {
              best = d;
              kind = Step::PairMove;
              best_i = i;
              best_j = x.qubit;
              best_f = f;
              best_g = g;
            }
          }
      }
    // Shift: i takes j's memory while j retreats to a free one. Covers the
    // two-step escapes whose intermediate state is uphill.
    if (!free_list.empty())
      for (int i = 0; i < nq; ++i)
        for (int j = 0; j < nq; ++j) {
          if (i == j) continue;
          for (MemoryId f : free_list) {
            const double d = pair_move_delta(i, j, q2m[j], f);
            if (d < best) {
              best = d;
              kind = Step::Shift;
              best_i = i;
              best_j = j;
              best_f = f;
            }
          }
        }
    if (kind == Step::None) break;
    switch (kind) {
      case Step::Swap:
        std::swap(q2m[best_i], q2m[best_j]);
        break;
      case Step::Move:
        memory_free[q2m[best_i]] = 1;
        memory_free[best_f] = 0;
        q2m[best_i] = best_f;
        break;
      case Step::PairMove:
        memory_free[q2m[best_i]] = 1;
        memory_free[q2m[best_j]] = 1;
        memory_free[best_f] = 0;
        memory_free[best_g] = 0;
        q2m[best_i] = best_f;
        q2m[best_j] = best_g;
        break;
      case Step::Shift:
        memory_free[q2m[best_i]] = 1;
        memory_free[best_f] = 0;
        q2m[best_i] = q2m[best_j];
        q2m[best_j] = best_f;
        break;
      case Step::None:
        break;
    }
  }
}

// Build-up seed: qubits by descending total interaction weight, each onto
// the free memory that is cheapest against the neighbors placed so far.
std::vector<MemoryId> construction_seed(const CircuitGraph& circuit,
                                        const NetworkCouplingGraph& mem) {
  const int nq = circuit.num_qubits();
  const int m = mem.num_memories;
  std::vector<int> order(nq);
  std::iota(order.begin(), order.end(), 0);
  std::vector<long long> degree(nq, 0);
  for (int a = 0; a < nq; ++a)
    for (int b = 0; b < nq; ++b)
      if (a != b) degree[a] += circuit.weight(a, b);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return degree[a] > degree[b]; });

  std::vector<MemoryId> q2m(nq, -1);
  std::vector<char> m_used(m, 0);
  for (int q : order) {
    MemoryId pick = -1;
    double pick_cost = 0.0;
    for (MemoryId f = 0; f < m; ++f) {
      if (m_used[f]) continue;
      double c = 0.0;
      for (int x = 0; x < nq; ++x)
        if (x != q && q2m[x] >= 0 && circuit.weight(q, x) > 0)
          c += double(circuit.weight(q, x)) * mem.weight(f, q2m[x]);
      if (pick < 0 || c < pick_cost) {
        pick = f;
        pick_cost = c;
      }
    }
    q2m[q] = pick;
    m_used[pick] = 1;
  }
  return q2m;
}

}  // namespace

Allocation allocate(const CircuitGraph& circuit, const NetworkCouplingGraph& mem) {
  const int nq = circuit.num_qubits();
  const int m = mem.num_memories;
  if (nq > m)
    throw std::invalid_argument("allocation: more qubits (" + std::to_string(nq) +
                                ") than data memories (" + std::to_string(m) + ")");

  // Greedy matching seed on the original cost objective: interacting qubit
  // pairs by descending circuit weight onto unused memory pairs by ascending
  // coupling cost. The complemented max form is cost-equivalent only on
  // equal-size instances; under padding its profits collapse (a two-qubit
  // circuit complements to all zeros), so seeding there can plant the
  // heaviest pair on the most expensive memories.
  struct Pair {
    double key;
    int a, b;
  };
  std::vector<Pair> qpairs, mpairs;
  for (int a = 0; a < nq; ++a)
    for (int b = a + 1; b < nq; ++b)
      if (circuit.weight(a, b) > 0) qpairs.push_back({double(circuit.weight(a, b)), a, b});
  mpairs.reserve(std::size_t(m) * (m - 1) / 2);
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) mpairs.push_back({mem.weight(a, b), a, b});
  auto desc = [](const Pair& x, const Pair& y) {
    if (x.key != y.key) return x.key > y.key;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  };
  auto asc = [](const Pair& x, const Pair& y) {
    if (x.key != y.key) return x.key < y.key;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  };
  std::sort(qpairs.begin(), qpairs.end(), desc);
  std::sort(mpairs.begin(), mpairs.end(), asc);

  std::vector<MemoryId> q2m(nq, -1);
  std::vector<char> q_used(nq, 0), m_used(m, 0);
  std::size_t mp = 0;
  for (const Pair& qp : qpairs) {
    if (q_used[qp.a] || q_used[qp.b]) continue;
    while (mp < mpairs.size() && (m_used[mpairs[mp].a] || m_used[mpairs[mp].b])) ++mp;
    if (mp == mpairs.size()) break;
    q2m[qp.a] = mpairs[mp].a;
    q2m[qp.b] = mpairs[mp].b;
    q_used[qp.a] = q_used[qp.b] = 1;
    m_used[mpairs[mp].a] = m_used[mpairs[mp].b] = 1;
    ++mp;
  }
  // Leftovers (odd matchings, isolated qubits) take the lowest free
  // memories; the local search moves them where they help.
  for (int q = 0; q < nq; ++q) {
    if (q_used[q]) continue;
    for (MemoryId f = 0; f < m; ++f)
      if (!m_used[f]) {
        q2m[q] = f;
        m_used[f] = 1;
        break;
      }
    q_used[q] = 1;
  }

  local_search(circuit, mem, q2m);

  // Second deterministic start; the matching seed and the build-up seed get
  // wedged in different local optima, so descend from both and keep the
  // cheaper result.
  std::vector<MemoryId> q2m_b = construction_seed(circuit, mem);
  local_search(circuit, mem, q2m_b);

  Allocation a;
  a.qubit_to_memory = std::move(q2m);
  a.validate(m);
  Allocation b;
  b.qubit_to_memory = std::move(q2m_b);
  b.validate(m);
  if (allocation_cost(circuit, mem, b) < allocation_cost(circuit, mem, a)) return b;
  return a;
}

Allocation allocate_exact(const CircuitGraph& circuit, const NetworkCouplingGraph& mem, int limit) {
  const int nq = circuit.num_qubits();
  const int m = mem.num_memories;
  if (nq > m) throw std::invalid_argument("allocation: more qubits than data memories");
  if (m > limit)
    throw std::invalid_argument("allocate_exact: padded instance size " + std::to_string(m) +
                                " exceeds limit " + std::to_string(limit));

  std::vector<MemoryId> cur(nq, -1), best_map;
  std::vector<char> used(m, 0);
  double best = kInfiniteLatency;
  // Depth-first over injective maps with an admissible partial-cost bound.
  auto rec = [&](auto&& self, int q, double partial) -> void {
    if (partial >= best) return;
    if (q == nq) {
      best = partial;
      best_map = cur;
      return;
    }
    for (MemoryId f = 0; f < m; ++f) {
      if (used[f]) continue;
      double add = 0.0;
      for (int prev = 0; prev < q; ++prev) {
        const long long w = circuit.weight(prev, q);
        if (w > 0) add += double(w) * mem.weight(cur[prev], f);
      }
      used[f] = 1;
      cur[q] = f;
      self(self, q + 1, partial + add);
      used[f] = 0;
      cur[q] = -1;
    }
  };
  rec(rec, 0, 0.0);

  Allocation a;
  a.qubit_to_memory = std::move(best_map);
  a.validate(m);
  return a;
}

Allocation random_allocation(int num_qubits, int num_memories, SplitMix64& rng) {
  if (num_qubits > num_memories)
    throw std::invalid_argument("allocation: more qubits than data memories");
  std::vector<MemoryId> pool(num_memories);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < num_qubits; ++i) {
    const int j = rng.next_int(i, num_memories - 1);
    std::swap(pool[i], pool[j]);
  }
  Allocation a;
  a.qubit_to_memory.assign(pool.begin(), pool.begin() + num_qubits);
  return a;
}

std::string allocation_to_json(const Allocation& a, const QuantumNetwork& net) {
  nlohmann::json rows = nlohmann::json::array();
  for (int q = 0; q < a.num_qubits(); ++q) {
    const MemoryId m = a.qubit_to_memory[q];
    rows.push_back({{"qubit", q}, {"node", net.node_of_memory(m)}, {"memory", m}});
  }
  nlohmann::json j;
  j["qubit_to_memory"] = std::move(rows);
  return j.dump(2);
}

Allocation allocation_from_json(const std::string& text, const QuantumNetwork& net) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("allocation: invalid JSON: ") + e.what());
  }
  Allocation a;
  try {
    const auto& rows = j.at("qubit_to_memory");
    a.qubit_to_memory.assign(rows.size(), -1);
    for (const auto& r : rows) {
      const int q = r.at("qubit").get<int>();
      const MemoryId m = r.at("memory").get<int>();
      if (q < 0 || q >= static_cast<int>(rows.size()))
        throw std::invalid_argument("allocation: qubit ids must be dense 0..n-1");
      if (a.qubit_to_memory[q] != -1)
        throw std::invalid_argument("allocation: duplicate qubit id");
      if (net.node_of_memory(m) != r.at("node").get<int>())
        throw std::invalid_argument("allocation: node does not host the claimed memory");
      a.qubit_to_memory[q] = m;
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("allocation: malformed field: ") + e.what());
  }
  a.validate(net.total_memories());
  return a;
}

void save_allocation(const Allocation& a, const QuantumNetwork& net, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << allocation_to_json(a, net) << '\n';
}

Allocation load_allocation(const std::string& path, const QuantumNetwork& net) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return allocation_from_json(ss.str(), net);
}

}  // namespace qdist
