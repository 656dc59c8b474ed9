#pragma once

// Design constants of the quantized self-triggered protocol: the zooming
// quantization range E(t), kappa(omega), the largest admissible decay rate
// omega_tilde, the inter-event lower bound tau_min_tilde, the smallest odd
// level count, and a design report that checks every standing assumption.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qtrig/errors.hpp"
#include "qtrig/graph.hpp"
#include "qtrig/lambert_w.hpp"
#include "qtrig/quantizer.hpp"
#include "qtrig/seminorm.hpp"

namespace qtrig {

/// E(t) = 2 Gamma_inf E0 exp(-omega t).
struct QuantRange {
  double gamma_inf = 1.0;
  double e0 = 1.0;
  double omega = 1.0;

  [[nodiscard]] double at(double t) const { return 2.0 * gamma_inf * e0 * std::exp(-omega * t); }
  double operator()(double t) const { return at(t); }
};

/// Per-agent threshold and inter-event cap.
struct AgentTuning {
  double delta = 0.0;
  double tau_max = 0.0;
};

enum class GammaInfMode { Numeric, UpperBound };

/// Inputs of a design; unset optionals take their defaults
/// (gamma = lambda2, omega = omega_tilde, dtilde = max degree).
struct DesignInputs {
  double e0 = 1.0;
  int levels = 1;
  std::optional<double> gamma;
  std::optional<double> omega;
  std::optional<int> dtilde;
  std::vector<AgentTuning> agents;
  GammaInfMode gamma_inf_mode = GammaInfMode::Numeric;
};

/// Fully resolved design constants.
struct ProtocolParams {
  double gamma = 0.0;
  double gamma_inf = 0.0;
  double gamma_inf_t_star = 0.0;
  double e0 = 0.0;
  double omega = 0.0;
  double omega_tilde = 0.0;
  int levels = 1;
  int dtilde = 1;
  std::vector<int> degrees;
  std::vector<std::vector<int>> neighbors;
  std::vector<double> delta;
  std::vector<double> tau_max;
  std::vector<double> tau_min_tilde;
  std::vector<double> xi;
  std::vector<double> eta;

  [[nodiscard]] int agents() const { return static_cast<int>(delta.size()); }
  [[nodiscard]] QuantRange range() const { return {gamma_inf, e0, omega}; }
  [[nodiscard]] double quant_range(double t) const { return range().at(t); }
  [[nodiscard]] double consensus_constant() const { return 2.0 * gamma_inf; }
};

/// max_i { delta_i + d_i exp(omega tau_max_i) / R }.
inline double kappa(std::span<const AgentTuning> agents, std::span<const int> degrees,
                    int levels, double omega) {
  if (!(omega > 0.0)) throw DomainError("kappa: omega must be positive");
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < agents.size(); ++i)
    best = std::max(best, agents[i].delta +
                              degrees[i] * std::exp(omega * agents[i].tau_max) / levels);
  return best;
}

/// Lower bound on inter-event times of one agent: the positive root of
/// tau (d_i^2 + sum_j d_j exp(omega tau_max_j)) = delta_i exp(-omega tau).
///
/// `neighbor_load` is sum over neighbours j of d_j exp(omega tau_max_j).
inline double tau_min_tilde(double delta, int degree, double neighbor_load, double omega) {
  if (!(omega > 0.0) || !(delta > 0.0))
    throw DomainError("tau_min_tilde: delta and omega must be positive");
  const double slope = static_cast<double>(degree) * degree + neighbor_load;
  if (!(slope > 0.0)) throw DomainError("tau_min_tilde: isolated agent");
  return lambert_w0(omega * delta / slope) / omega;
}

inline double neighbor_load(const Graph& g, int i, std::span<const AgentTuning> agents,
                            double omega) {
  double s = 0.0;
  for (int j : g.neighbors(i)) s += g.degree(j) * std::exp(omega * agents[j].tau_max);
  return s;
}

/// Margin of the threshold condition delta_i + d_i/R < gamma/(2 Gamma_inf);
/// positive when it holds.
inline double threshold_margin(const AgentTuning& a, int degree, int levels, double gamma,
                               double gamma_inf) {
  return gamma / (2.0 * gamma_inf) - (a.delta + static_cast<double>(degree) / levels);
}

/// Largest omega with omega <= gamma - 2 Gamma_inf kappa(omega):
/// min_i { eta_i - W(xi_i tau_i exp(eta_i tau_i)) / tau_i }.
///
/// Throws InfeasibleDesign when the threshold condition fails for some agent.
inline double omega_tilde(double gamma, double gamma_inf, int levels,
                          std::span<const AgentTuning> agents, std::span<const int> degrees) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (!(threshold_margin(agents[i], degrees[i], levels, gamma, gamma_inf) > 0.0))
      throw InfeasibleDesign("threshold condition delta_i + d_i/R < gamma/(2 Gamma_inf) fails for agent " +
                             std::to_string(i + 1));
    if (!(agents[i].tau_max > 0.0))
      throw InfeasibleDesign("tau_max must be positive for agent " + std::to_string(i + 1));
    const double xi = 2.0 * gamma_inf * degrees[i] / levels;
    const double eta = gamma - 2.0 * gamma_inf * agents[i].delta;
    const double tau = agents[i].tau_max;
    // W(xi tau exp(eta tau)) through its logarithm so large eta*tau stays finite.
    const double w = xi > 0.0 ? lambert_w0_exp(std::log(xi * tau) + eta * tau) : 0.0;
    best = std::min(best, eta - w / tau);
  }
  return best;
}

/// Smallest odd R with delta_i + d_i/R < gamma/(2 Gamma_inf) for every agent.
inline int min_feasible_levels(double gamma, double gamma_inf, std::span<const AgentTuning> agents,
                               std::span<const int> degrees) {
  const double bound = gamma / (2.0 * gamma_inf);
  double need = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const double room = bound - agents[i].delta;
    if (!(room > 0.0))
      throw InfeasibleDesign("threshold of agent " + std::to_string(i + 1) +
                             " leaves no room for any finite R");
    need = std::max(need, degrees[i] / room);
  }
  if (need > 1e9) throw InfeasibleDesign("required level count exceeds 1e9");
  auto feasible = [&](int r) {
    for (std::size_t i = 0; i < agents.size(); ++i)
      if (!(threshold_margin(agents[i], degrees[i], r, gamma, gamma_inf) > 0.0)) return false;
    return true;
  };
  int r = static_cast<int>(std::floor(need));
  if (r % 2 == 0) ++r;
  r = std::max(r, 1);
  // The floating-point check is authoritative; step to the exact boundary.
  while (r > 1 && feasible(r - 2)) r -= 2;
  while (!feasible(r)) r += 2;
  return r;
}

/// Resolves defaults and computes every derived constant.
///
/// Never rejects a design: constants that do not exist (Gamma_inf for a
/// disconnected graph, omega_tilde when the threshold condition fails) come
/// back as NaN, and validate() turns them into failed verdicts.
inline ProtocolParams make_params(const Graph& g, const Spectrum& spec, const DesignInputs& in) {
  const int n = g.size();
  if (static_cast<int>(in.agents.size()) != n)
    throw DomainError("need one (delta, tau_max) pair per agent");
  ProtocolParams p;
  p.e0 = in.e0;
  p.levels = in.levels;
  p.degrees = g.degrees();
  p.neighbors.resize(n);
  for (int i = 0; i < n; ++i) p.neighbors[i] = g.neighbors(i);
  p.dtilde = in.dtilde.value_or(g.max_degree());
  p.gamma = in.gamma.value_or(spec.lambda2());

  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (in.gamma_inf_mode == GammaInfMode::UpperBound) {
    p.gamma_inf = static_cast<double>(n - 1);
    p.gamma_inf_t_star = nan;
  } else {
    try {
      const auto gi = gamma_infinity(spec, p.gamma);
      p.gamma_inf = gi.value;
      p.gamma_inf_t_star = gi.t_star;
    } catch (const DomainError&) {
      // gamma outside (0, lambda2], e.g. a disconnected graph.
      p.gamma_inf = nan;
      p.gamma_inf_t_star = nan;
    }
  }

  for (const auto& a : in.agents) {
    p.delta.push_back(a.delta);
    p.tau_max.push_back(a.tau_max);
  }
  for (int i = 0; i < n; ++i) {
    p.xi.push_back(2.0 * p.gamma_inf * p.degrees[i] / p.levels);
    p.eta.push_back(p.gamma - 2.0 * p.gamma_inf * p.delta[i]);
  }

  try {
    p.omega_tilde = omega_tilde(p.gamma, p.gamma_inf, p.levels, in.agents, p.degrees);
  } catch (const InfeasibleDesign&) {
    p.omega_tilde = nan;
  }
  p.omega = in.omega.value_or(p.omega_tilde);

  for (int i = 0; i < n; ++i) {
    double tm = nan;
    if (p.omega > 0.0 && std::isfinite(p.omega) && p.delta[i] > 0.0 && p.degrees[i] > 0)
      tm = tau_min_tilde(p.delta[i], p.degrees[i], neighbor_load(g, i, in.agents, p.omega),
                         p.omega);
    p.tau_min_tilde.push_back(tm);
  }
  return p;
}

/// One checked condition of a design.
struct Verdict {
  std::string condition;
  bool pass = false;
  std::string detail;
};

struct DesignReport {
  double lambda2 = 0.0;
  ProtocolParams params;
  std::optional<int> min_levels;
  double kappa_at_omega = 0.0;
  long long alphabet_size = 0;
  int alphabet_bits = 0;
  std::vector<Verdict> verdicts;

  [[nodiscard]] bool feasible() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
  }
  [[nodiscard]] std::vector<const Verdict*> failures() const {
    std::vector<const Verdict*> out;
    for (const auto& v : verdicts)
      if (!v.pass) out.push_back(&v);
    return out;
  }
};

/// Checks connectivity, the initial-deviation bound (when initial states are
/// known), the degree bound, odd R, the threshold condition, positivity of
/// tau_min_tilde, and 0 < omega <= omega_tilde.
inline DesignReport validate(const Graph& g, const Spectrum& spec, const ProtocolParams& p,
                             std::span<const double> initial_states = {}) {
  DesignReport rep;
  rep.lambda2 = spec.lambda2();
  rep.params = p;
  const int n = g.size();
  auto add = [&](std::string cond, bool ok, std::string detail) {
    rep.verdicts.push_back({std::move(cond), ok, std::move(detail)});
  };

  const bool connected = is_connected(g);
  add("connected graph", connected,
      connected ? "lambda2 = " + std::to_string(rep.lambda2) : "graph has several components");

  if (!initial_states.empty()) {
    const double dev = norm_inf(deviation(initial_states));
    add("initial deviation bound", dev <= p.e0,
        "max |x_i0 - ave| = " + std::to_string(dev) + ", E0 = " + std::to_string(p.e0));
  } else {
    add("initial deviation bound", p.e0 > 0.0, "E0 = " + std::to_string(p.e0));
  }

  add("degree bound", p.dtilde >= g.max_degree(),
      "dtilde = " + std::to_string(p.dtilde) + ", max degree = " + std::to_string(g.max_degree()));

  const bool odd = p.levels >= 1 && p.levels % 2 == 1;
  add("odd level count", odd, "R = " + std::to_string(p.levels));

  const bool gamma_ok = p.gamma > 0.0 && p.gamma <= rep.lambda2 + 1e-12;
  add("gamma range 0 < gamma <= lambda2", gamma_ok,
      "gamma = " + std::to_string(p.gamma) + ", lambda2 = " + std::to_string(rep.lambda2));

  std::vector<AgentTuning> tuning;
  for (int i = 0; i < n; ++i) tuning.push_back({p.delta[i], p.tau_max[i]});

  std::string bad;
  for (int i = 0; i < n; ++i) {
    if (!(p.delta[i] > 0.0) || !(p.tau_max[i] > 0.0) ||
        !(threshold_margin(tuning[i], p.degrees[i], p.levels, p.gamma, p.gamma_inf) > 0.0))
      bad += (bad.empty() ? "" : ",") + std::to_string(i + 1);
  }
  add("threshold condition", bad.empty(),
      bad.empty() ? "delta_i + d_i/R < gamma/(2 Gamma_inf) for all agents"
                  : "violated by agents " + bad);

  bool tau_ok = true;
  for (int i = 0; i < n; ++i)
    tau_ok = tau_ok && p.tau_min_tilde[i] > 0.0 && std::isfinite(p.tau_min_tilde[i]);
  add("positive inter-event lower bound", tau_ok,
      "tau_min = min(tau_min_tilde_i, tau_max_i) > 0");

  const bool omega_ok =
      std::isfinite(p.omega_tilde) && p.omega > 0.0 && p.omega <= p.omega_tilde;
  add("decay rate 0 < omega <= omega_tilde", omega_ok,
      "omega = " + std::to_string(p.omega) + ", omega_tilde = " + std::to_string(p.omega_tilde));

  try {
    if (!std::isfinite(p.gamma_inf)) throw InfeasibleDesign("Gamma_inf undefined");
    rep.min_levels = min_feasible_levels(p.gamma, p.gamma_inf, tuning, p.degrees);
  } catch (const InfeasibleDesign&) {
    rep.min_levels.reset();
  }
  rep.kappa_at_omega = p.omega > 0.0 && std::isfinite(p.omega)
                           ? kappa(tuning, p.degrees, p.levels, p.omega)
                           : std::numeric_limits<double>::quiet_NaN();
  if (odd && p.dtilde >= 1) {
    rep.alphabet_size = index_alphabet_size(Levels(p.levels), p.dtilde);
    rep.alphabet_bits = index_bits(rep.alphabet_size);
  }
  return rep;
}

}  // namespace qtrig
