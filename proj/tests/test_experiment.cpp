#include "doctest.h"

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qdist/experiment.hpp"

using namespace qdist;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.num_qubits = 10;
  cfg.gates_per_qubit = 6;
  cfg.num_nodes = 4;
  cfg.area_km = 60.0;
  cfg.seeds = {1, 2};
  cfg.trials = 5;
  return cfg;
}

std::vector<std::string> split_lines(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) fields.push_back(f);
  return fields;
}

std::string strip_wall_clock(const std::string& csv) {
  std::string out;
  for (const std::string& line : split_lines(csv))
    out += line.substr(0, line.find_last_of(',')) + "\n";
  return out;
}

ExperimentRow plot_row(const std::string& algo, std::uint64_t seed, double sweep_value,
                       Micros analytic) {
  ExperimentRow r;
  r.algorithm = algo;
  r.seed = seed;
  r.sweep_name = "num_qubits";
  r.sweep_value = sweep_value;
  r.analytic_total = analytic;
  return r;
}

}  // namespace

TEST_CASE("experiment run matrix") {
  const ExperimentConfig cfg = small_config();
  const auto rows = run_experiment(cfg);
  REQUIRE(rows.size() == cfg.seeds.size() * all_algorithms().size());

  std::map<std::uint64_t, std::map<std::string, const ExperimentRow*>> by_cell;
  for (const auto& r : rows) {
    CHECK(!by_cell[r.seed].count(r.algorithm));
    by_cell[r.seed][r.algorithm] = &r;
  }
  for (std::uint64_t seed : cfg.seeds) {
    REQUIRE(by_cell.count(seed));
    REQUIRE(by_cell[seed].size() == all_algorithms().size());
    double alloc_cost = -1.0;
    for (const auto& name : all_algorithms()) {
      REQUIRE(by_cell[seed].count(name));
      const ExperimentRow& r = *by_cell[seed][name];
      CHECK(r.feasible);
      CHECK(r.analytic_total > 0.0);
      CHECK(r.sim_mean > 0.0);
      CHECK(r.num_eps > 0);
      CHECK(r.num_batches >= 1);
      if (name == "greedy-ce" || name == "dp-ce") {
        CHECK(r.num_ces > 0);
        CHECK(r.num_ces == r.num_eps);
      } else {
        CHECK(r.num_ces == 0);
      }
      // One allocation is shared by every algorithm of a seed.
      if (alloc_cost < 0.0)
        alloc_cost = r.allocation_cost;
      else
        CHECK(r.allocation_cost == doctest::Approx(alloc_cost));
    }
  }
}

TEST_CASE("experiment repetition is deterministic") {
  const ExperimentConfig cfg = small_config();
  const std::string a = strip_wall_clock(rows_to_csv(run_experiment(cfg)));
  const std::string b = strip_wall_clock(rows_to_csv(run_experiment(cfg)));
  CHECK(a == b);
}

TEST_CASE("csv layout") {
  SUBCASE("no rows emit only the header") {
    const auto lines = split_lines(rows_to_csv({}));
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].rfind("algorithm,seed,", 0) == 0);
    CHECK(split_fields(lines[0]).size() == 14);
  }
  SUBCASE("one line per row with matching field count") {
    std::vector<ExperimentRow> rows = {plot_row("greedy-tg", 1, 10.0, 123.0),
                                       plot_row("dp-tg", 2, 10.0, 456.0)};
    rows[1].diagnostic = "note, with a comma";
    const auto lines = split_lines(rows_to_csv(rows));
    REQUIRE(lines.size() == 3);
    for (const auto& line : lines) CHECK(split_fields(line).size() == 14);
  }
}

TEST_CASE("plot data aggregation") {
  SUBCASE("empty rows give just the header") {
    const auto lines = split_lines(emit_plot_data({}));
    REQUIRE(lines.size() == 1);
    CHECK(lines[0] == "algorithm,sweep,sweep_value,mean_analytic_us,stddev_analytic_us,samples");
  }
  SUBCASE("series per algorithm per sweep point, means recomputed by hand") {
    std::vector<ExperimentRow> rows;
    const std::vector<double> points = {10.0, 20.0, 30.0};
    for (const auto& algo : all_algorithms())
      for (double v : points)
        for (std::uint64_t seed = 1; seed <= 2; ++seed)
          rows.push_back(plot_row(algo, seed, v, v * 100.0 + 10.0 * static_cast<double>(seed)));
    const auto lines = split_lines(emit_plot_data(rows));
    REQUIRE(lines.size() == 1 + all_algorithms().size() * points.size());
    for (std::size_t i = 1; i < lines.size(); ++i) {
      const auto f = split_fields(lines[i]);
      REQUIRE(f.size() == 6);
      const double v = std::stod(f[2]);
      // Seeds 1 and 2 contribute v*100+10 and v*100+20.
      CHECK(std::stod(f[3]) == doctest::Approx(v * 100.0 + 15.0));
      CHECK(std::stod(f[4]) == doctest::Approx(5.0));
      CHECK(f[5] == "2");
    }
  }
  SUBCASE("infeasible rows are dropped from the aggregation") {
    std::vector<ExperimentRow> rows = {plot_row("greedy-tg", 1, 10.0, 100.0),
                                       plot_row("greedy-tg", 2, 10.0, 300.0)};
    rows[1].feasible = false;
    const auto lines = split_lines(emit_plot_data(rows));
    REQUIRE(lines.size() == 2);
    const auto f = split_fields(lines[1]);
    CHECK(std::stod(f[3]) == doctest::Approx(100.0));
    CHECK(f[5] == "1");
  }
  SUBCASE("mixed sweeps are rejected") {
    std::vector<ExperimentRow> rows = {plot_row("greedy-tg", 1, 10.0, 100.0),
                                       plot_row("greedy-tg", 2, 10.0, 300.0)};
    rows[1].sweep_name = "num_nodes";
    CHECK_THROWS_AS(emit_plot_data(rows), std::invalid_argument);
  }
}

TEST_CASE("config parsing and validation") {
  SUBCASE("json overrides with defaults preserved") {
    const ExperimentConfig c = experiment_config_from_json(R"({
      "num_qubits": 12,
      "gate_kind": "cnot",
      "algorithms": ["greedy-tg", "disjoint-paths"],
      "seeds": [7, 8, 9],
      "params": {"p_swap": 0.5, "tau_us": 2000000.0}
    })");
    CHECK(c.num_qubits == 12);
    CHECK(c.gate_kind == "cnot");
    CHECK(c.algorithms == std::vector<std::string>{"greedy-tg", "disjoint-paths"});
    CHECK(c.seeds == std::vector<std::uint64_t>{7, 8, 9});
    CHECK(c.params.p_swap == doctest::Approx(0.5));
    CHECK(c.gates_per_qubit == 50);  // untouched default
    CHECK_NOTHROW(c.validate());
  }
  SUBCASE("bad inputs are rejected") {
    CHECK_THROWS_AS(experiment_config_from_json("{nope"), std::invalid_argument);
    ExperimentConfig c;
    c.algorithms = {"warp-drive"};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ExperimentConfig{};
    c.seeds.clear();
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = ExperimentConfig{};
    c.benchmark = "shor";
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  }
}
