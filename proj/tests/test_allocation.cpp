#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <vector>

#include "qdist/allocation.hpp"
#include "qdist/entanglement.hpp"
#include "qdist/rng.hpp"

using namespace qdist;

namespace {

NetworkCouplingGraph random_mem_graph(int n, SplitMix64& rng) {
  NetworkCouplingGraph g;
  g.num_memories = n;
  g.w.assign(std::size_t(n) * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const Micros w = rng.next_real(1.0, 50.0);
      g.w[std::size_t(a) * n + b] = w;
      g.w[std::size_t(b) * n + a] = w;
    }
  return g;
}

CircuitGraph random_circuit_graph(int q, SplitMix64& rng) {
  CircuitGraph g(q);
  for (int a = 0; a < q; ++a)
    for (int b = a + 1; b < q; ++b)
      for (int k = rng.next_int(0, 3); k > 0; --k) g.add_gate(a, b);
  return g;
}

// Every injective map of the qubits into the memories, by reference cost.
Micros exhaustive_min_cost(const CircuitGraph& c, const NetworkCouplingGraph& m) {
  std::vector<MemoryId> mems(m.num_memories);
  std::iota(mems.begin(), mems.end(), 0);
  Micros best = kInfiniteLatency;
  std::vector<MemoryId> perm = mems;
  do {
    Allocation a;
    a.qubit_to_memory.assign(perm.begin(), perm.begin() + c.num_qubits());
    best = std::min(best, allocation_cost(c, m, a));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

TEST_CASE("allocation validation") {
  Allocation a{{0, 2, 1}};
  CHECK_NOTHROW(a.validate(4));
  SUBCASE("duplicate memory rejected") {
    a.qubit_to_memory = {0, 2, 2};
    CHECK_THROWS_AS(a.validate(4), std::invalid_argument);
  }
  SUBCASE("out-of-range memory rejected") {
    a.qubit_to_memory = {0, 2, 4};
    CHECK_THROWS_AS(a.validate(4), std::invalid_argument);
  }
}

TEST_CASE("allocation cost") {
  SUBCASE("zero-weight circuit costs zero") {
    const CircuitGraph c(3);
    SplitMix64 rng(1);
    const NetworkCouplingGraph m = random_mem_graph(5, rng);
    CHECK(allocation_cost(c, m, Allocation{{0, 1, 2}}) == doctest::Approx(0.0));
  }
  SUBCASE("co-located adjacent gates cost two local swaps each") {
    CircuitGraph c(2);
    for (int i = 0; i < 7; ++i) c.add_gate(0, 1);
    NetworkCouplingGraph m;
    m.num_memories = 2;
    m.w = {0.0, 2.0, 2.0, 0.0};  // adjacent memories at t_local_swap = 1 us
    CHECK(allocation_cost(c, m, Allocation{{0, 1}}) == doctest::Approx(2.0 * 7));
  }
  SUBCASE("matches a direct recomputation on a 4-qubit instance") {
    SplitMix64 rng(7);
    const CircuitGraph c = random_circuit_graph(4, rng);
    const NetworkCouplingGraph m = random_mem_graph(6, rng);
    const Allocation a{{3, 0, 5, 2}};
    Micros expected = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        expected += c.weight(i, j) * m.weight(a.qubit_to_memory[i], a.qubit_to_memory[j]);
    CHECK(allocation_cost(c, m, a) == doctest::Approx(expected));
  }
}

TEST_CASE("pad and complement") {
  SUBCASE("three qubits into five memories add two dummies") {
    SplitMix64 rng(11);
    const CircuitGraph c = random_circuit_graph(3, rng);
    const NetworkCouplingGraph m = random_mem_graph(5, rng);
    const MaxQapInstance inst = pad_and_complement(c, m);
    CHECK(inst.size == 5);
    CHECK(inst.num_real_qubits == 3);
    CHECK(inst.big_m == doctest::Approx(static_cast<double>(c.total_weight())));
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        const double p = inst.profit[std::size_t(i) * 5 + j];
        if (i == j) {
          CHECK(p == doctest::Approx(0.0));
        } else if (i < 3 && j < 3) {
          CHECK(p == doctest::Approx(inst.big_m - c.weight(i, j)));
        } else {
          CHECK(p == doctest::Approx(0.0));  // dummy rows and columns
        }
      }
  }
  SUBCASE("zero-weight equal-size instance is all zeros") {
    const CircuitGraph c(4);
    SplitMix64 rng(12);
    const NetworkCouplingGraph m = random_mem_graph(4, rng);
    const MaxQapInstance inst = pad_and_complement(c, m);
    for (double p : inst.profit) CHECK(p == doctest::Approx(0.0));
  }
  SUBCASE("profit maximizers are cost minimizers on equal-size instances") {
    // With no dummies the complemented objective differs from -2*cost by the
    // constant M * (sum of all memory-pair weights), so the argopts coincide.
    SplitMix64 rng(13);
    for (int rep = 0; rep < 10; ++rep) {
      const CircuitGraph c = random_circuit_graph(5, rng);
      const NetworkCouplingGraph m = random_mem_graph(5, rng);
      const MaxQapInstance inst = pad_and_complement(c, m);
      std::vector<MemoryId> perm(5);
      std::iota(perm.begin(), perm.end(), 0);
      double best_profit = -1.0;
      Micros cost_at_best = 0.0, min_cost = kInfiniteLatency;
      do {
        double profit = 0.0;
        for (int i = 0; i < 5; ++i)
          for (int j = 0; j < 5; ++j)
            profit += inst.profit[std::size_t(i) * 5 + j] * m.weight(perm[i], perm[j]);
        Allocation a;
        a.qubit_to_memory.assign(perm.begin(), perm.end());
        const Micros cost = allocation_cost(c, m, a);
        min_cost = std::min(min_cost, cost);
        if (profit > best_profit) {
          best_profit = profit;
          cost_at_best = cost;
        }
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(cost_at_best == doctest::Approx(min_cost));
    }
  }
}

TEST_CASE("heuristic allocation") {
  SUBCASE("a single binary pair is co-located when local swaps are cheaper") {
    QuantumNetwork net;
    net.nodes.resize(2);
    net.nodes[0].id = 0;
    net.nodes[0].memories = {0, 1};
    net.nodes[0].grid = {1, 2};
    net.nodes[1].id = 1;
    net.nodes[1].x_km = 50.0;
    net.nodes[1].memories = {2};
    net.nodes[1].grid = {1, 1};
    net.links.push_back({0, 1, 50.0});
    const EntanglementEngine engine(net);
    const NetworkCouplingGraph m = build_network_coupling_graph(net, engine);
    CircuitGraph c(2);
    c.add_gate(0, 1);
    const Allocation a = allocate(c, m);
    CHECK(net.node_of_memory(a.qubit_to_memory[0]) == 0);
    CHECK(net.node_of_memory(a.qubit_to_memory[1]) == 0);
    CHECK(allocation_cost(c, m, a) == doctest::Approx(2.0));
  }
  SUBCASE("within 1.25x of the exhaustive optimum on 6x6 instances") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      SplitMix64 rng(mix_seed({seed, 21}));
      const CircuitGraph c = random_circuit_graph(6, rng);
      const NetworkCouplingGraph m = random_mem_graph(6, rng);
      const Allocation a = allocate(c, m);
      CHECK_NOTHROW(a.validate(6));
      const Micros best = exhaustive_min_cost(c, m);
      CHECK(allocation_cost(c, m, a) <= 1.25 * best + 1e-9);
    }
  }
  SUBCASE("output is stable under single swaps and moves") {
    SplitMix64 rng(23);
    const CircuitGraph c = random_circuit_graph(5, rng);
    const NetworkCouplingGraph m = random_mem_graph(7, rng);
    const Allocation a = allocate(c, m);
    const Micros base = allocation_cost(c, m, a);
    std::vector<char> used(7, 0);
    for (MemoryId mm : a.qubit_to_memory) used[mm] = 1;
    for (int i = 0; i < 5; ++i) {
      for (int j = i + 1; j < 5; ++j) {
        Allocation swapped = a;
        std::swap(swapped.qubit_to_memory[i], swapped.qubit_to_memory[j]);
        CHECK(allocation_cost(c, m, swapped) >= base - 1e-9);
      }
      for (MemoryId free = 0; free < 7; ++free) {
        if (used[free]) continue;
        Allocation moved = a;
        moved.qubit_to_memory[i] = free;
        CHECK(allocation_cost(c, m, moved) >= base - 1e-9);
      }
    }
  }
}

TEST_CASE("exact allocation") {
  SUBCASE("matches a test-local brute force") {
    SplitMix64 rng(31);
    for (int rep = 0; rep < 10; ++rep) {
      const CircuitGraph c = random_circuit_graph(4, rng);
      const NetworkCouplingGraph m = random_mem_graph(5, rng);
      const Allocation a = allocate_exact(c, m);
      CHECK(allocation_cost(c, m, a) == doctest::Approx(exhaustive_min_cost(c, m)));
    }
  }
  SUBCASE("never worse than the heuristic") {
    SplitMix64 rng(37);
    for (int rep = 0; rep < 10; ++rep) {
      const CircuitGraph c = random_circuit_graph(5, rng);
      const NetworkCouplingGraph m = random_mem_graph(6, rng);
      CHECK(allocation_cost(c, m, allocate_exact(c, m)) <=
            allocation_cost(c, m, allocate(c, m)) + 1e-9);
    }
  }
  SUBCASE("guard on instance size") {
    const CircuitGraph c(3);
    SplitMix64 rng(41);
    const NetworkCouplingGraph m = random_mem_graph(9, rng);
    CHECK_THROWS_AS(allocate_exact(c, m, 8), std::invalid_argument);
  }
}

TEST_CASE("random allocation is injective and seed-stable") {
  SplitMix64 rng(43);
  for (int rep = 0; rep < 20; ++rep) {
    const Allocation a = random_allocation(6, 10, rng);
    CHECK_NOTHROW(a.validate(10));
  }
  SplitMix64 r1(99), r2(99);
  CHECK(random_allocation(5, 8, r1).qubit_to_memory == random_allocation(5, 8, r2).qubit_to_memory);
}

TEST_CASE("allocation json round trip") {
  const QuantumNetwork net = generate_waxman(4, 60.0, 0.6, 0.2, 10, 3);
  SplitMix64 rng(5);
  const Allocation a = random_allocation(6, 10, rng);
  const Allocation back = allocation_from_json(allocation_to_json(a, net), net);
  CHECK(back.qubit_to_memory == a.qubit_to_memory);
}
