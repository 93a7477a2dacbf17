#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qdist/allocation.hpp"
#include "qdist/baseline.hpp"
#include "qdist/cat.hpp"
#include "qdist/circuit.hpp"
#include "qdist/entanglement.hpp"
#include "qdist/experiment.hpp"
#include "qdist/network.hpp"
#include "qdist/scheduling.hpp"
#include "qdist/simulator.hpp"

namespace {

using namespace qdist;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open output file: " + path);
  out << content;
}

std::string schedule_to_json(const Schedule& s) {
  nlohmann::json j;
  j["batches"] = s.batches;
  j["batch_latency_us"] = s.batch_latency;
  j["total_latency_us"] = s.total_latency;
  return j.dump(2) + "\n";
}

// Builds the full planning pipeline for one (mode, algo) choice.
struct Planned {
  Schedule schedule;
  ExecutionPlan plan;
  int num_eps = 0;
  int num_ces = 0;
};

Planned plan_pipeline(const Circuit& circuit, const QuantumNetwork& net, const Allocation& alloc,
                      const EntanglementEngine& engine, const std::string& mode,
                      const std::string& algo) {
  Planned out;
  if (mode == "tg") {
    DemandDerivation d = derive_ep_demands(circuit, alloc, net, engine);
    ConsumptionOrder order =
        build_consumption_order(circuit, d.gate_to_ep, static_cast<int>(d.demands.size()));
    BatchOracle oracle(engine, d.demands);
    if (algo == "greedy")
      out.schedule = greedy_schedule(order, oracle, net.params.tau);
    else if (algo == "dp")
      out.schedule = dp_schedule_linearized(order, oracle, net.params.tau);
    else if (algo == "bf")
      out.schedule = brute_force_schedule(order, oracle, net.params.tau);
    else
      throw std::invalid_argument("unknown scheduling algorithm: " + algo);
    out.plan = make_telegate_plan(circuit, d, net, engine, out.schedule);
    out.num_eps = static_cast<int>(d.demands.size());
  } else if (mode == "ce") {
    CePlan cp = greedy_ce(circuit, alloc, net, engine);
    BatchOracle oracle(engine, cp.demands);
    if (algo == "greedy")
      out.schedule = greedy_schedule(cp.order, oracle, net.params.tau);
    else if (algo == "dp")
      out.schedule = dp_schedule_linearized(cp.order, oracle, net.params.tau);
    else if (algo == "bf")
      out.schedule = brute_force_schedule(cp.order, oracle, net.params.tau);
    else
      throw std::invalid_argument("unknown scheduling algorithm: " + algo);
    out.plan = make_ce_execution_plan(circuit, cp, net, engine, out.schedule);
    out.num_eps = static_cast<int>(cp.demands.size());
    out.num_ces = static_cast<int>(cp.ces.size());
  } else if (mode == "baseline") {
    BaselineResult br = run_disjoint_paths(circuit, alloc, net, engine);
    out.schedule = br.schedule;
    out.plan = make_baseline_plan(circuit, br, net, engine);
    out.num_eps = static_cast<int>(br.demands.size());
  } else {
    throw std::invalid_argument("unknown mode: " + mode + " (expected tg, ce, or baseline)");
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed quantum circuit planning and simulation"};
  app.require_subcommand(1);

  // generate-circuit
  auto* gc = app.add_subcommand("generate-circuit", "Write a random or benchmark circuit as JSON");
  int gc_qubits = 50, gc_gpq = 50;
  double gc_bf = 0.5;
  std::string gc_kind = "cz", gc_benchmark, gc_out;
  std::uint64_t gc_seed = 1;
  gc->add_option("--qubits", gc_qubits, "Number of qubits");
  gc->add_option("--gates-per-qubit", gc_gpq, "Random circuit size factor");
  gc->add_option("--binary-fraction", gc_bf, "Probability a random gate is binary");
  gc->add_option("--kind", gc_kind, "Binary gate kind: cz or cnot");
  gc->add_option("--benchmark", gc_benchmark, "ghz, qft, or qpe (overrides random params)");
  gc->add_option("--seed", gc_seed, "Random seed");
  gc->add_option("--out", gc_out, "Output path")->required();

  // generate-network
  auto* gn = app.add_subcommand("generate-network", "Write a Waxman network as JSON");
  int gn_nodes = 10, gn_memories = 50;
  double gn_area = 100.0, gn_beta = 0.6, gn_alpha = 0.2;
  std::uint64_t gn_seed = 1;
  std::string gn_out;
  gn->add_option("--nodes", gn_nodes, "Node count");
  gn->add_option("--area", gn_area, "Square side, km");
  gn->add_option("--beta", gn_beta, "Waxman beta");
  gn->add_option("--alpha", gn_alpha, "Waxman alpha");
  gn->add_option("--memories", gn_memories, "Total data memories");
  gn->add_option("--seed", gn_seed, "Random seed");
  gn->add_option("--out", gn_out, "Output path")->required();

  // allocate
  auto* al = app.add_subcommand("allocate", "Map circuit qubits to network memories");
  std::string al_circuit, al_network, al_out;
  bool al_exact = false;
  int al_limit = 8;
  al->add_option("--circuit", al_circuit, "Circuit JSON")->required();
  al->add_option("--network", al_network, "Network JSON")->required();
  al->add_flag("--exact", al_exact, "Exhaustive search (small instances)");
  al->add_option("--limit", al_limit, "Memory-count guard for --exact");
  al->add_option("--out", al_out, "Output path")->required();

  // schedule
  auto* sc = app.add_subcommand("schedule", "Batch EP generations under the decoherence threshold");
  std::string sc_circuit, sc_network, sc_alloc, sc_mode = "tg", sc_algo = "greedy", sc_out;
  double sc_tau = -1.0;
  sc->add_option("--circuit", sc_circuit, "Circuit JSON")->required();
  sc->add_option("--network", sc_network, "Network JSON")->required();
  sc->add_option("--allocation", sc_alloc, "Allocation JSON")->required();
  sc->add_option("--mode", sc_mode, "tg (telegates), ce (cat-entanglements), or baseline");
  sc->add_option("--algo", sc_algo, "greedy, dp, or bf");
  sc->add_option("--tau", sc_tau, "Decoherence threshold override, microseconds");
  sc->add_option("--out", sc_out, "Output path")->required();

  // simulate
  auto* si = app.add_subcommand("simulate", "Replan and run the stochastic simulator");
  std::string si_circuit, si_network, si_alloc, si_mode = "tg", si_algo = "greedy", si_out;
  int si_trials = 100;
  std::uint64_t si_seed = 12345;
  bool si_no_overlap = false;
  si->add_option("--circuit", si_circuit, "Circuit JSON")->required();
  si->add_option("--network", si_network, "Network JSON")->required();
  si->add_option("--allocation", si_alloc, "Allocation JSON")->required();
  si->add_option("--mode", si_mode, "tg, ce, or baseline");
  si->add_option("--algo", si_algo, "greedy or dp");
  si->add_option("--trials", si_trials, "Trial count");
  si->add_option("--seed", si_seed, "Simulation seed");
  si->add_flag("--no-overlap", si_no_overlap, "Serialize gate work and next-batch generation");
  si->add_option("--out", si_out, "Output path")->required();

  // experiment
  auto* ex = app.add_subcommand("experiment", "Run the full evaluation matrix to CSV");
  std::string ex_config, ex_out, ex_plot;
  ex->add_option("--config", ex_config, "Experiment config JSON");
  ex->add_option("--out", ex_out, "CSV output path")->required();
  ex->add_option("--plot-out", ex_plot, "Optional grouped plot-data output path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gc) {
      Circuit c;
      if (gc_benchmark == "ghz")
        c = generate_benchmark(BenchmarkKind::Ghz, gc_qubits);
      else if (gc_benchmark == "qft")
        c = generate_benchmark(BenchmarkKind::Qft, gc_qubits);
      else if (gc_benchmark == "qpe")
        c = generate_benchmark(BenchmarkKind::Qpe, gc_qubits);
      else if (gc_benchmark.empty())
        c = generate_random_circuit(gc_qubits, gc_gpq, gc_bf,
                                    gc_kind == "cnot" ? GateKind::Cnot : GateKind::Cz, gc_seed);
      else
        throw std::invalid_argument("unknown benchmark: " + gc_benchmark);
      save_circuit(c, gc_out);
    } else if (*gn) {
      save_network(generate_waxman(gn_nodes, gn_area, gn_beta, gn_alpha, gn_memories, gn_seed),
                   gn_out);
    } else if (*al) {
      const Circuit c = load_circuit(al_circuit);
      const QuantumNetwork net = load_network(al_network);
      const EntanglementEngine engine(net);
      const NetworkCouplingGraph coupling = build_network_coupling_graph(net, engine);
      const CircuitGraph cg = build_circuit_graph(c);
      const Allocation a =
          al_exact ? allocate_exact(cg, coupling, al_limit) : allocate(cg, coupling);
      save_allocation(a, net, al_out);
      std::cout << "allocation cost: " << allocation_cost(cg, coupling, a) << " us\n";
    } else if (*sc) {
      const Circuit c = load_circuit(sc_circuit);
      QuantumNetwork net = load_network(sc_network);
      if (sc_tau > 0.0) net.params.tau = sc_tau;
      const Allocation a = load_allocation(sc_alloc, net);
      const EntanglementEngine engine(net);
      const Planned p = plan_pipeline(c, net, a, engine, sc_mode, sc_algo);
      write_file(sc_out, schedule_to_json(p.schedule));
      std::cout << "batches: " << p.schedule.batches.size()
                << ", total latency: " << p.schedule.total_latency << " us\n";
    } else if (*si) {
      const Circuit c = load_circuit(si_circuit);
      const QuantumNetwork net = load_network(si_network);
      const Allocation a = load_allocation(si_alloc, net);
      const EntanglementEngine engine(net);
      const Planned p = plan_pipeline(c, net, a, engine, si_mode, si_algo);
      SimConfig cfg;
      cfg.seed = si_seed;
      cfg.trials = si_trials;
      cfg.overlap_next_batch = !si_no_overlap;
      const SimResult r = simulate(p.schedule, p.plan, net, cfg);
      nlohmann::json j;
      j["trials"] = si_trials;
      j["mean_us"] = r.mean;
      j["stddev_us"] = r.stddev;
      j["decoherence_violations"] = r.decoherence_violations;
      j["per_trial_us"] = r.per_trial_total;
      write_file(si_out, j.dump(2) + "\n");
      std::cout << "simulated mean: " << r.mean << " us over " << si_trials << " trials\n";
    } else if (*ex) {
      ExperimentConfig cfg;
      if (!ex_config.empty()) cfg = load_experiment_config(ex_config);
      const std::vector<ExperimentRow> rows = run_experiment(cfg);
      write_file(ex_out, rows_to_csv(rows));
      if (!ex_plot.empty()) write_file(ex_plot, emit_plot_data(rows));
      std::cout << rows.size() << " rows written to " << ex_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
