#include "qdist/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "qdist/allocation.hpp"
#include "qdist/baseline.hpp"
#include "qdist/cat.hpp"
#include "qdist/circuit.hpp"
#include "qdist/entanglement.hpp"
#include "qdist/rng.hpp"
#include "qdist/scheduling.hpp"
#include "qdist/simulator.hpp"

namespace qdist {

namespace {

constexpr std::uint64_t kCircuitSalt = 0x636972632d73656dull;
constexpr std::uint64_t kNetworkSalt = 0x6e65742d73656564ull;
constexpr std::uint64_t kSimSeedSalt = 0x73696d2d73656564ull;

int algorithm_index(const std::string& name) {
  const auto& all = all_algorithms();
  for (int i = 0; i < static_cast<int>(all.size()); ++i)
    if (all[i] == name) return i;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n') ch = ';';
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (algorithms.empty()) throw std::invalid_argument("experiment: no algorithms");
  if (seeds.empty()) throw std::invalid_argument("experiment: no seeds");
  for (const auto& a : algorithms) algorithm_index(a);
  if (num_qubits < 1) throw std::invalid_argument("experiment: num_qubits must be >= 1");
  if (num_nodes < 1) throw std::invalid_argument("experiment: num_nodes must be >= 1");
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (!benchmark.empty() && benchmark != "ghz" && benchmark != "qft" && benchmark != "qpe")
    throw std::invalid_argument("experiment: unknown benchmark " + benchmark);
  if (gate_kind != "cz" && gate_kind != "cnot")
    throw std::invalid_argument("experiment: gate_kind must be cz or cnot");
  const int mems = total_data_memories < 0 ? num_qubits : total_data_memories;
  if (mems < num_qubits)
    throw std::invalid_argument("experiment: fewer data memories than qubits");
  params.validate();
}

// DP needs a total order; general circuits give a partial one. We schedule
// contiguous slices of a fixed linear extension, which still satisfies the
// no-wait property against the true order.
Schedule dp_schedule_linearized(const ConsumptionOrder& order, const LatencyOracle& oracle,
                                Micros tau) {
  if (order.is_total()) return dp_schedule(order, oracle, tau);
  const std::vector<EpId> seq = order.topological_order();
  ConsumptionOrder chain(order.size());
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) chain.add_edge(seq[i], seq[i + 1]);
  chain.finalize();
  return dp_schedule(chain, oracle, tau);
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config) {
  config.validate();
  std::vector<ExperimentRow> rows;

  const bool wants_ce = std::any_of(config.algorithms.begin(), config.algorithms.end(),
                                    [](const std::string& a) { return a.ends_with("-ce"); });

  for (std::uint64_t seed : config.seeds) {
    Circuit circuit;
    if (config.benchmark == "ghz") {
      circuit = generate_benchmark(BenchmarkKind::Ghz, config.num_qubits);
    } else if (config.benchmark == "qft") {
      circuit = generate_benchmark(BenchmarkKind::Qft, config.num_qubits);
    } else if (config.benchmark == "qpe") {
      circuit = generate_benchmark(BenchmarkKind::Qpe, config.num_qubits);
    } else {
      circuit = generate_random_circuit(
          config.num_qubits, config.gates_per_qubit, config.binary_fraction,
          config.gate_kind == "cz" ? GateKind::Cz : GateKind::Cnot, mix_seed({seed, kCircuitSalt}));
    }
    const int mems = config.total_data_memories < 0 ? config.num_qubits
                                                    : config.total_data_memories;
    const QuantumNetwork net =
        generate_waxman(config.num_nodes, config.area_km, config.waxman_beta, config.waxman_alpha,
                        mems, mix_seed({seed, kNetworkSalt}), config.params);
    const EntanglementEngine engine(net);
    const NetworkCouplingGraph coupling = build_network_coupling_graph(net, engine);
    const CircuitGraph cg = build_circuit_graph(circuit);
    const Allocation alloc = allocate(cg, coupling);
    const double alloc_cost = allocation_cost(cg, coupling, alloc);

    // CE planning needs a CZ-only circuit; the conversion keeps the binary
    // pair structure, so the shared allocation stays valid.
    Circuit circuit_cz;
    bool have_cz = false;
    if (wants_ce) {
      bool has_cnot = false;
      for (const Gate& g : circuit.gates) has_cnot |= g.kind == GateKind::Cnot;
      circuit_cz = has_cnot ? cnot_to_cz(circuit) : circuit;
      have_cz = true;
    }

    for (const std::string& algo : config.algorithms) {
      const auto t0 = std::chrono::steady_clock::now();
      ExperimentRow row;
      row.algorithm = algo;
      row.seed = seed;
      row.sweep_name = config.sweep_name;
      row.sweep_value = config.sweep_value;
      row.allocation_cost = alloc_cost;
      try {
        Schedule schedule;
        ExecutionPlan plan;
        const ConsumptionOrder* order = nullptr;
        ConsumptionOrder tg_order;
        std::unique_ptr<BatchOracle> oracle;

        if (algo == "greedy-tg" || algo == "dp-tg") {
          DemandDerivation d = derive_ep_demands(circuit, alloc, net, engine);
          tg_order = build_consumption_order(circuit, d.gate_to_ep,
                                             static_cast<int>(d.demands.size()));
          order = &tg_order;
          oracle = std::make_unique<BatchOracle>(engine, d.demands);
          schedule = algo == "greedy-tg"
                         ? greedy_schedule(tg_order, *oracle, net.params.tau)
                         : dp_schedule_linearized(tg_order, *oracle, net.params.tau);
          plan = make_telegate_plan(circuit, d, net, engine, schedule);
          row.num_eps = static_cast<int>(d.demands.size());
        } else if (algo == "greedy-ce" || algo == "dp-ce") {
          if (!have_cz) throw std::logic_error("CE algorithm without CZ circuit");
          CePlan cp = greedy_ce(circuit_cz, alloc, net, engine);
          oracle = std::make_unique<BatchOracle>(engine, cp.demands);
          schedule = algo == "greedy-ce"
                         ? greedy_schedule(cp.order, *oracle, net.params.tau)
                         : dp_schedule_linearized(cp.order, *oracle, net.params.tau);
          plan = make_ce_execution_plan(circuit_cz, cp, net, engine, schedule);
          row.num_eps = static_cast<int>(cp.demands.size());
          row.num_ces = static_cast<int>(cp.ces.size());
          tg_order = cp.order;
          order = &tg_order;
        } else {  // disjoint-paths
          BaselineResult br = run_disjoint_paths(circuit, alloc, net, engine);
          oracle = std::make_unique<BatchOracle>(engine, br.demands);
          schedule = br.schedule;
          plan = make_baseline_plan(circuit, br, net, engine);
          row.num_eps = static_cast<int>(br.demands.size());
          tg_order = br.order;
          order = &tg_order;
        }

        const ValidationReport vr = validate_schedule(schedule, *order, *oracle, net.params.tau);
        if (!vr.ok)
          throw std::logic_error("schedule failed validation: " + vr.violations.front());

        row.num_batches = static_cast<int>(schedule.batches.size());
        row.analytic_total = schedule.total_latency;
        for (Micros s : plan.gate_segments) row.analytic_total += s;

        SimConfig sim_cfg;
        sim_cfg.seed = mix_seed({kSimSeedSalt, seed,
                                 static_cast<std::uint64_t>(algorithm_index(algo))});
        sim_cfg.trials = config.trials;
        sim_cfg.overlap_next_batch = config.overlap;
        const SimResult sim = simulate(schedule, plan, net, sim_cfg);
        row.sim_mean = sim.mean;
        row.sim_stddev = sim.stddev;
      } catch (const std::exception& e) {
        row.feasible = false;
        row.diagnostic = e.what();
      }
      row.wall_clock_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string rows_to_csv(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << "algorithm,seed,sweep,sweep_value,feasible,analytic_total_us,sim_mean_us,"
         "sim_stddev_us,num_eps,num_batches,num_ces,allocation_cost,diagnostic,wall_clock_ms\n";
  for (const auto& r : rows) {
    out << r.algorithm << ',' << r.seed << ',' << sanitize(r.sweep_name) << ','
        << fmt(r.sweep_value) << ',' << (r.feasible ? 1 : 0) << ',' << fmt(r.analytic_total) << ','
        << fmt(r.sim_mean) << ',' << fmt(r.sim_stddev) << ',' << r.num_eps << ',' << r.num_batches
        << ',' << r.num_ces << ',' << fmt(r.allocation_cost) << ',' << sanitize(r.diagnostic)
        << ',' << fmt(r.wall_clock_ms) << '\n';
  }
  return out.str();
}

std::string emit_plot_data(const std::vector<ExperimentRow>& rows) {
  std::ostringstream out;
  out << "algorithm,sweep,sweep_value,mean_analytic_us,stddev_analytic_us,samples\n";
  if (rows.empty()) return out.str();
  const std::string& sweep = rows.front().sweep_name;
  for (const auto& r : rows)
    if (r.sweep_name != sweep)
      throw std::invalid_argument("plot data: rows mix sweeps '" + sweep + "' and '" +
                                  r.sweep_name + "'");

  std::vector<std::string> algo_order;
  std::map<std::string, std::map<double, std::vector<double>>> series;
  for (const auto& r : rows) {
    if (!r.feasible) continue;
    if (!series.count(r.algorithm)) algo_order.push_back(r.algorithm);
    series[r.algorithm][r.sweep_value].push_back(r.analytic_total);
  }
  for (const auto& algo : algo_order) {
    for (const auto& [value, samples] : series[algo]) {
      double mean = 0.0;
      for (double v : samples) mean += v;
      mean /= static_cast<double>(samples.size());
      double var = 0.0;
      for (double v : samples) var += (v - mean) * (v - mean);
      const double stddev = std::sqrt(var / static_cast<double>(samples.size()));
      out << algo << ',' << sanitize(sweep) << ',' << fmt(value) << ',' << fmt(mean) << ','
          << fmt(stddev) << ',' << samples.size() << '\n';
    }
  }
  return out.str();
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
  ExperimentConfig c;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  try {
    c.benchmark = j.value("benchmark", c.benchmark);
    c.num_qubits = j.value("num_qubits", c.num_qubits);
    c.gates_per_qubit = j.value("gates_per_qubit", c.gates_per_qubit);
    c.binary_fraction = j.value("binary_fraction", c.binary_fraction);
    c.gate_kind = j.value("gate_kind", c.gate_kind);
    c.num_nodes = j.value("num_nodes", c.num_nodes);
    c.area_km = j.value("area_km", c.area_km);
    c.waxman_beta = j.value("waxman_beta", c.waxman_beta);
    c.waxman_alpha = j.value("waxman_alpha", c.waxman_alpha);
    c.total_data_memories = j.value("total_data_memories", c.total_data_memories);
    c.trials = j.value("trials", c.trials);
    c.overlap = j.value("overlap", c.overlap);
    c.sweep_name = j.value("sweep_name", c.sweep_name);
    c.sweep_value = j.value("sweep_value", c.sweep_value);
    if (j.contains("algorithms")) c.algorithms = j["algorithms"].get<std::vector<std::string>>();
    if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    if (j.contains("params")) {
      const auto& jp = j["params"];
      c.params.p_swap = jp.value("p_swap", c.params.p_swap);
      c.params.t_swap = jp.value("t_swap_us", c.params.t_swap);
      c.params.p_optical_bsm = jp.value("p_optical_bsm", c.params.p_optical_bsm);
      c.params.p_atom_photon = jp.value("p_atom_photon", c.params.p_atom_photon);
      c.params.t_atom_photon = jp.value("t_atom_photon_us", c.params.t_atom_photon);
      c.params.tau = jp.value("tau_us", c.params.tau);
      c.params.t_local_swap = jp.value("t_local_swap_us", c.params.t_local_swap);
      c.params.t_gate = jp.value("t_gate_us", c.params.t_gate);
      c.params.c_fiber_km_per_us = jp.value("c_fiber_km_per_us", c.params.c_fiber_km_per_us);
      c.params.purify_segment_hops = jp.value("purify_segment_hops", c.params.purify_segment_hops);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return experiment_config_from_json(ss.str());
}

}  // namespace qdist
