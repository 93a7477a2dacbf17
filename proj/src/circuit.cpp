#include "qdist/circuit.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qdist/rng.hpp"

namespace qdist {

Gate make_unary(std::string label, QubitId q, int time) {
  Gate g;
  g.kind = GateKind::Unary;
  g.label = std::move(label);
  g.q0 = q;
  g.time = time;
  return g;
}

Gate make_binary(GateKind kind, QubitId control, QubitId target, int time) {
  Gate g;
  g.kind = kind;
  g.q0 = control;
  g.q1 = target;
  g.time = time;
  return g;
}

int Circuit::num_binary_gates() const {
  int n = 0;
  for (const Gate& g : gates) n += g.is_binary() ? 1 : 0;
  return n;
}

void Circuit::validate() const {
  if (num_qubits <= 0) throw std::invalid_argument("circuit: num_qubits must be positive");
  int prev_time = -1;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const Gate& g = gates[i];
    auto fail = [&](const std::string& why) {
      throw std::invalid_argument("circuit: gate " + std::to_string(i) + ": " + why);
    };
    if (g.q0 < 0 || g.q0 >= num_qubits) fail("operand out of range");
    if (g.is_binary()) {
      if (g.q1 < 0 || g.q1 >= num_qubits) fail("operand out of range");
      if (g.q0 == g.q1) fail("binary gate with identical operands");
    } else if (g.label.empty()) {
      fail("unary gate without a label");
    }
    if (g.time <= prev_time) fail("gate times must be strictly increasing");
    prev_time = g.time;
  }
}

Circuit generate_random_circuit(int num_qubits, int gates_per_qubit, double binary_fraction,
                                GateKind binary_kind, std::uint64_t seed) {
  if (num_qubits < 2) throw std::invalid_argument("random circuit needs at least 2 qubits");
  if (gates_per_qubit < 0) throw std::invalid_argument("gates_per_qubit must be non-negative");
  if (binary_fraction < 0.0 || binary_fraction > 1.0)
    throw std::invalid_argument("binary_fraction must be in [0, 1]");
  if (binary_kind == GateKind::Unary)
    throw std::invalid_argument("binary_kind must be cnot or cz");

  static const char* kUnaryLabels[] = {"h", "t", "s", "x", "rz"};
  SplitMix64 rng(mix_seed({seed, 0x636972637569ULL}));
  Circuit c;
  c.num_qubits = num_qubits;
  const long long total = static_cast<long long>(num_qubits) * gates_per_qubit;
  c.gates.reserve(total);
  for (long long i = 0; i < total; ++i) {
    const int t = static_cast<int>(i);
    if (rng.bernoulli(binary_fraction)) {
      int a = rng.next_int(0, num_qubits - 1);
      int b = rng.next_int(0, num_qubits - 2);
      if (b >= a) ++b;
      c.gates.push_back(make_binary(binary_kind, a, b, t));
    } else {
      const char* label = kUnaryLabels[rng.next_int(0, 4)];
      c.gates.push_back(make_unary(label, rng.next_int(0, num_qubits - 1), t));
    }
  }
  return c;
}

namespace {

// Appends gates at consecutive instants starting from `next_time`.
class CircuitBuilder {
 public:
  explicit CircuitBuilder(int num_qubits) { c_.num_qubits = num_qubits; }

  void unary(const std::string& label, QubitId q) { c_.gates.push_back(make_unary(label, q, next_time_++)); }
  void binary(GateKind kind, QubitId control, QubitId target) {
    c_.gates.push_back(make_binary(kind, control, target, next_time_++));
  }
  // Controlled-phase over {unary, CNOT}: Rz(t) CNOT(c,t) Rz(t) CNOT(c,t) Rz(c).
  void controlled_phase(QubitId c, QubitId t) {
    unary("rz", t);
    binary(GateKind::Cnot, c, t);
    unary("rz", t);
    binary(GateKind::Cnot, c, t);
    unary("rz", c);
  }

  Circuit take() { return std::move(c_); }

 private:
  Circuit c_;
  int next_time_ = 0;
};

}  // namespace

Circuit generate_benchmark(BenchmarkKind kind, int num_qubits) {
  const int n = num_qubits;
  switch (kind) {
    case BenchmarkKind::Ghz: {
      if (n < 2) throw std::invalid_argument("ghz needs at least 2 qubits");
      CircuitBuilder b(n);
      b.unary("h", 0);
      for (int i = 1; i < n; ++i) b.binary(GateKind::Cnot, 0, i);
      return b.take();
    }
    case BenchmarkKind::Qft: {
      if (n < 2) throw std::invalid_argument("qft needs at least 2 qubits");
      CircuitBuilder b(n);
      for (int i = 0; i < n; ++i) {
        b.unary("h", i);
        for (int j = i + 1; j < n; ++j) b.controlled_phase(j, i);
      }
      return b.take();
    }
    case BenchmarkKind::Qpe: {
      // One target qubit (the last) plus n-1 counting qubits.
      if (n < 3) throw std::invalid_argument("qpe needs at least 3 qubits");
      CircuitBuilder b(n);
      const int target = n - 1;
      for (int k = 0; k < n - 1; ++k) b.unary("h", k);
      // Controlled powers of the phase unitary.
      for (int k = 0; k < n - 1; ++k) b.controlled_phase(k, target);
      // Inverse QFT on the counting register.
      for (int i = n - 2; i >= 0; --i) {
        for (int j = n - 2; j > i; --j) b.controlled_phase(j, i);
        b.unary("h", i);
      }
      return b.take();
    }
  }
  throw std::invalid_argument("unknown benchmark kind");
}

Circuit cnot_to_cz(const Circuit& c) {
  Circuit out;
  out.num_qubits = c.num_qubits;
  int t = 0;
  for (const Gate& g : c.gates) {
    if (g.kind == GateKind::Cnot) {
      out.gates.push_back(make_unary("h", g.q1, t++));
      out.gates.push_back(make_binary(GateKind::Cz, g.q0, g.q1, t++));
      out.gates.push_back(make_unary("h", g.q1, t++));
    } else {
      Gate copy = g;
      copy.time = t++;
      out.gates.push_back(copy);
    }
  }
  return out;
}

void CircuitGraph::add_gate(QubitId a, QubitId b) {
  w_[std::size_t(a) * n_ + b] += 1;
  w_[std::size_t(b) * n_ + a] += 1;
}

long long CircuitGraph::total_weight() const {
  long long s = 0;
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b) s += weight(a, b);
  return s;
}

std::vector<std::pair<QubitId, QubitId>> CircuitGraph::edges() const {
  std::vector<std::pair<QubitId, QubitId>> e;
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b)
      if (weight(a, b) > 0) e.emplace_back(a, b);
  return e;
}

CircuitGraph build_circuit_graph(const Circuit& c) {
  CircuitGraph g(c.num_qubits);
  for (const Gate& gate : c.gates)
    if (gate.is_binary()) g.add_gate(gate.q0, gate.q1);
  return g;
}

namespace {

std::string kind_to_string(const Gate& g) {
  switch (g.kind) {
    case GateKind::Unary:
      return "u:" + g.label;
    case GateKind::Cnot:
      return "cnot";
    case GateKind::Cz:
      return "cz";
  }
  return {};
}

}  // namespace

std::string circuit_to_json(const Circuit& c) {
  nlohmann::json j;
  j["num_qubits"] = c.num_qubits;
  auto& arr = j["gates"] = nlohmann::json::array();
  for (const Gate& g : c.gates) {
    nlohmann::json jg;
    jg["kind"] = kind_to_string(g);
    if (g.is_binary())
      jg["operands"] = {g.q0, g.q1};
    else
      jg["operands"] = {g.q0};
    jg["time"] = g.time;
    arr.push_back(std::move(jg));
  }
  return j.dump(2);
}

Circuit circuit_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("circuit: invalid JSON: ") + e.what());
  }
  Circuit c;
  try {
    c.num_qubits = j.at("num_qubits").get<int>();
    for (const auto& jg : j.at("gates")) {
      const std::string kind = jg.at("kind").get<std::string>();
      const auto& ops = jg.at("operands");
      const int time = jg.at("time").get<int>();
      if (kind == "cnot" || kind == "cz") {
        if (ops.size() != 2) throw std::invalid_argument("circuit: binary gate needs 2 operands");
        c.gates.push_back(make_binary(kind == "cnot" ? GateKind::Cnot : GateKind::Cz,
                                      ops[0].get<int>(), ops[1].get<int>(), time));
      } else if (kind.rfind("u:", 0) == 0) {
        if (ops.size() != 1) throw std::invalid_argument("circuit: unary gate needs 1 operand");
        c.gates.push_back(make_unary(kind.substr(2), ops[0].get<int>(), time));
      } else {
        throw std::invalid_argument("circuit: unknown gate kind '" + kind + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("circuit: malformed field: ") + e.what());
  }
  c.validate();
  return c;
}

void save_circuit(const Circuit& c, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f << circuit_to_json(c) << '\n';
}

Circuit load_circuit(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return circuit_from_json(ss.str());
}

}  // namespace qdist
