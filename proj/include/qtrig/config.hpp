#pragma once

// JSON run configuration.
//
//   {
//     "graph": {"n": 6, "edges": [[1, 2], [2, 4]]},   // 1-based ids
//     "initial_states": [..] | "seed": 7,
//     "E0": 1.0, "R": 19,
//     "gamma": 1.0, "omega": 0.2, "dtilde": 3,         // optional
//     "delta": 0.05 | [..], "tau_max": 1.0 | [..],
//     "gamma_inf_mode": "numeric" | "upper_bound",     // optional
//     "horizon": 16, "grid_dt": 0.001, "output_dir": "out"
//   }

#include <cstdint>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qtrig/errors.hpp"
#include "qtrig/graph.hpp"
#include "qtrig/protocol.hpp"

namespace qtrig {

struct RunConfig {
  int n = 0;
  std::vector<std::pair<int, int>> edges;  // 1-based
  std::optional<std::vector<double>> initial_states;
  std::uint64_t seed = 0;
  double e0 = 1.0;
  int levels = 1;
  std::optional<double> gamma;
  std::optional<double> omega;
  std::optional<int> dtilde;
  std::vector<double> delta;
  std::vector<double> tau_max;
  GammaInfMode gamma_inf_mode = GammaInfMode::Numeric;
  double horizon = 10.0;
  double grid_dt = 1e-3;
  std::optional<std::string> output_dir;

  [[nodiscard]] Graph graph() const { return Graph::from_one_based(n, edges); }

  [[nodiscard]] DesignInputs design_inputs() const {
    DesignInputs in;
    in.e0 = e0;
    in.levels = levels;
    in.gamma = gamma;
    in.omega = omega;
    in.dtilde = dtilde;
    in.gamma_inf_mode = gamma_inf_mode;
    for (int i = 0; i < n; ++i) in.agents.push_back({delta[i], tau_max[i]});
    return in;
  }
};

/// Uniform doubles in [lo, hi] from the top 53 bits of a 64-bit Mersenne
/// Twister, so the sequence is the same on every standard library.
inline std::vector<double> seeded_states(std::uint64_t seed, int n, double lo, double hi) {
  std::mt19937_64 rng(seed);
  std::vector<double> x(n);
  for (double& v : x) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = lo + (hi - lo) * u;
  }
  return x;
}

/// Explicit states, or a seeded draw in [-E0/2, E0/2] (any two such states
/// differ by at most E0, so the initial-deviation bound holds).
inline std::vector<double> initial_states(const RunConfig& c) {
  if (c.initial_states) return *c.initial_states;
  return seeded_states(c.seed, c.n, -0.5 * c.e0, 0.5 * c.e0);
}

namespace config_detail {

using nlohmann::json;

inline std::pair<std::size_t, std::size_t> line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

[[noreturn]] inline void fail(const std::string& field, const std::string& what) {
  throw ConfigError("config field '" + field + "': " + what);
}

inline double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

inline int integer(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

// Scalar broadcast to every agent, or one value per agent.
inline std::vector<double> per_agent(const json& j, const std::string& field, int n) {
  if (j.is_number()) return std::vector<double>(n, j.get<double>());
  if (!j.is_array()) fail(field, "expected a number or an array of " + std::to_string(n));
  if (static_cast<int>(j.size()) != n)
    fail(field, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace config_detail

/// Parses and validates a configuration document. Errors name the field, or
/// the line and column for malformed JSON.
inline RunConfig parse_config(const std::string& text) {
  using namespace config_detail;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ConfigError("malformed JSON at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  RunConfig c;
  if (!j.contains("graph")) fail("graph", "missing");
  const auto& g = j["graph"];
  if (!g.is_object() || !g.contains("n") || !g.contains("edges"))
    fail("graph", "expected {\"n\": .., \"edges\": [[i, j], ..]}");
  c.n = integer(g["n"], "graph.n");
  if (c.n < 2) fail("graph.n", "need at least two agents");
  if (!g["edges"].is_array()) fail("graph.edges", "expected an array of pairs");
  for (std::size_t e = 0; e < g["edges"].size(); ++e) {
    const auto& pr = g["edges"][e];
    const std::string f = "graph.edges[" + std::to_string(e) + "]";
    if (!pr.is_array() || pr.size() != 2) fail(f, "expected a pair [i, j]");
    const int a = integer(pr[0], f);
    const int b = integer(pr[1], f);
    if (a < 1 || a > c.n || b < 1 || b > c.n) fail(f, "agent id out of range 1.." + std::to_string(c.n));
    c.edges.emplace_back(a, b);
  }

  if (j.contains("initial_states")) {
    if (!j["initial_states"].is_array()) fail("initial_states", "expected an array");
    c.initial_states = per_agent(j["initial_states"], "initial_states", c.n);
  } else if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  } else {
    fail("initial_states", "give either initial_states or seed");
  }

  if (!j.contains("E0")) fail("E0", "missing");
  c.e0 = number(j["E0"], "E0");
  if (!(c.e0 > 0.0)) fail("E0", "must be positive");

  if (!j.contains("R")) fail("R", "missing");
  c.levels = integer(j["R"], "R");
  if (c.levels < 1 || c.levels % 2 == 0) fail("R", "must be a positive odd integer");

  if (j.contains("gamma") && !j["gamma"].is_null()) c.gamma = number(j["gamma"], "gamma");
  if (j.contains("omega") && !j["omega"].is_null()) c.omega = number(j["omega"], "omega");
  if (j.contains("dtilde") && !j["dtilde"].is_null()) {
    c.dtilde = integer(j["dtilde"], "dtilde");
    if (*c.dtilde < 1) fail("dtilde", "must be at least 1");
  }

  if (!j.contains("delta")) fail("delta", "missing");
  c.delta = per_agent(j["delta"], "delta", c.n);
  if (!j.contains("tau_max")) fail("tau_max", "missing");
  c.tau_max = per_agent(j["tau_max"], "tau_max", c.n);
  for (int i = 0; i < c.n; ++i) {
    if (!(c.delta[i] > 0.0)) fail("delta", "must be positive");
    if (!(c.tau_max[i] > 0.0)) fail("tau_max", "must be positive");
  }

  if (j.contains("gamma_inf_mode")) {
    if (!j["gamma_inf_mode"].is_string()) fail("gamma_inf_mode", "expected a string");
    const auto m = j["gamma_inf_mode"].get<std::string>();
    if (m == "numeric") c.gamma_inf_mode = GammaInfMode::Numeric;
    else if (m == "upper_bound") c.gamma_inf_mode = GammaInfMode::UpperBound;
    else fail("gamma_inf_mode", "expected \"numeric\" or \"upper_bound\"");
  }

  if (j.contains("horizon")) {
    c.horizon = number(j["horizon"], "horizon");
    if (!(c.horizon >= 0.0)) fail("horizon", "must be nonnegative");
  }
  if (j.contains("grid_dt")) {
    c.grid_dt = number(j["grid_dt"], "grid_dt");
    if (!(c.grid_dt > 0.0)) fail("grid_dt", "must be positive");
  }
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail("output_dir", "expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }

  try {
    (void)c.graph();
  } catch (const DomainError& e) {
    fail("graph", e.what());
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qtrig
