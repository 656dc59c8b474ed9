#pragma once

// Property suites run by `qtrig check` against one configuration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtrig/config.hpp"
#include "qtrig/graph.hpp"
#include "qtrig/protocol.hpp"
#include "qtrig/quantizer.hpp"
#include "qtrig/report.hpp"
#include "qtrig/seminorm.hpp"
#include "qtrig/simulation.hpp"
#include "qtrig/trigger.hpp"

namespace qtrig {

struct SuiteResult {
  std::string name;
  bool pass = true;
  long checked = 0;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    ++checked;
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

namespace check_detail {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

// First tau > 0 with |a tau + c| >= b exp(-omega tau), by bisection on the
// concave pieces of |a tau + c| - b exp(-omega tau). Assumes |c| < b.
inline double crossing_by_bisection(double a, double b, double c, double omega) {
  auto h = [&](double t) { return std::abs(a * t + c) - b * std::exp(-omega * t); };
  auto bisect = [&](double lo, double hi) {
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (h(mid) >= 0.0 ? hi : lo) = mid;
    }
    return hi;
  };
  if (a == 0.0) {
    if (c == 0.0) return kNever;
    double hi = 1.0;
    while (h(hi) < 0.0) hi *= 2.0;
    return bisect(0.0, hi);
  }
  const double root = -c / a;  // sign change of a tau + c
  if (root > 0.0) {
    // Concave on [0, root]: locate the maximum, then the first crossing.
    double lo = 0.0;
    double hi = root;
    for (int it = 0; it < 300; ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (h(m1) < h(m2)) lo = m1;
      else hi = m2;
    }
    const double peak = 0.5 * (lo + hi);
    if (h(peak) >= 0.0) return bisect(0.0, peak);
  }
  const double start = std::max(root, 0.0);
  double hi = start + (b + std::abs(c)) / std::abs(a) + 1.0;
  return bisect(start, hi);
}

}  // namespace check_detail

/// Bounds, axioms and contraction of the semi-norm on random vectors for the
/// configured graph.
inline SuiteResult check_seminorm(const Graph& g, double gamma, int samples, std::uint64_t seed) {
  SuiteResult s{"seminorm"};
  const auto spec = eigendecompose(build_laplacian(g));
  const int n = g.size();
  if (!is_connected(g)) {
    s.expect(false, "graph is not connected");
    return s;
  }
  const auto gi = gamma_infinity(spec, gamma);
  s.expect(gi.value >= 2.0 - 2.0 / n - 1e-9 && gi.value <= n - 1 + 1e-9,
           "Gamma_inf outside [2 - 2/N, N - 1]");
  std::mt19937_64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) {
      v[i] = check_detail::uniform(rng, -1.0, 1.0);
      w[i] = check_detail::uniform(rng, -1.0, 1.0);
    }
    const double sv = seminorm_inf(spec, gamma, v);
    const double dev = norm_inf(deviation(v));
    s.expect(dev <= sv * (1 + 1e-12) && sv <= gi.value * dev * (1 + 1e-9) + 1e-12,
             "deviation <= seminorm <= Gamma_inf * deviation fails");
    std::vector<double> shifted(v);
    for (double& x : shifted) x += 3.0;
    s.expect(std::abs(seminorm_inf(spec, gamma, shifted) - sv) <= 1e-9 * std::max(1.0, sv),
             "seminorm not invariant under constant shifts");
    std::vector<double> sum(n), scaled(n);
    for (int i = 0; i < n; ++i) {
      sum[i] = v[i] + w[i];
      scaled[i] = -2.5 * v[i];
    }
    s.expect(seminorm_inf(spec, gamma, sum) <=
                 sv + seminorm_inf(spec, gamma, w) + 1e-9,
             "triangle inequality fails");
    s.expect(std::abs(seminorm_inf(spec, gamma, scaled) - 2.5 * sv) <= 1e-9 * std::max(1.0, sv),
             "homogeneity fails");
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      const auto ev = heat_semigroup(spec, t).apply(v);
      s.expect(seminorm_inf(spec, gamma, ev) <= std::exp(-gamma * t) * sv + 1e-9,
               "semi-contraction fails at t=" + std::to_string(t));
    }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        s.expect(std::abs(v[i] - v[j]) <= 2.0 * sv + 1e-9, "pairwise gap exceeds 2 * seminorm");
  }
  return s;
}

/// |Q(z) - z| <= E/R on [-E, E], odd symmetry, and the index alphabet bound.
inline SuiteResult check_quantizer(int levels, int dtilde, double e) {
  SuiteResult s{"quantizer"};
  const QuantizerSpec q(e, Levels(levels));
  const int steps = 20000;
  for (int m = 0; m <= steps; ++m) {
    const double z = -e + 2.0 * e * m / steps;
    const double qz = quantize(q, z);
    s.expect(std::abs(qz - z) <= e / levels * (1 + 1e-12), "error bound fails at z=" + fmt(z));
    s.expect(std::abs(qz) <= e, "output outside [-E, E]");
    // Bins are half-open, so Q(-z) = -Q(z) only away from the edges.
    const double m_edge = std::abs(z) * levels / e;
    const bool on_edge = std::abs(m_edge - std::round(m_edge)) < 1e-9 &&
                         static_cast<long long>(std::round(m_edge)) % 2 == 1;
    if (!on_edge) s.expect(quantize(q, -z) == -qz, "Q(-z) != -Q(z) at z=" + fmt(z));
  }
  const Levels r(levels);
  s.expect(index_alphabet_size(r, dtilde) == 2LL * dtilde * r.half() + 1, "alphabet size");
  bool overflow = false;
  try {
    (void)encode_bins(static_cast<long long>(dtilde) * r.half() + 1, r, dtilde);
  } catch (const DomainError&) {
    overflow = true;
  }
  s.expect(overflow, "index beyond the alphabet was accepted");
  return s;
}

/// Closed-form phi against bisection on random triples with |c| < b.
inline SuiteResult check_phi(int samples, std::uint64_t seed) {
  SuiteResult s{"phi_oracle"};
  std::mt19937_64 rng(seed);
  for (int k = 0; k < samples; ++k) {
    const double omega = check_detail::uniform(rng, 0.05, 2.0);
    const double b = check_detail::uniform(rng, 0.01, 5.0);
    const double c = check_detail::uniform(rng, -b, b) * 0.999;
    const double a = check_detail::uniform(rng, -10.0, 10.0);
    const double got = phi(a, b, c, omega);
    const double want = check_detail::crossing_by_bisection(a, b, c, omega);
    const bool ok = (std::isinf(got) && std::isinf(want)) || std::abs(got - want) <= 1e-7;
    s.expect(ok, "phi(" + fmt(a) + ", " + fmt(b) + ", " + fmt(c) + ", " + fmt(omega) + ") = " +
                     fmt(got) + ", bisection " + fmt(want));
  }
  return s;
}

/// Bookkeeping properties of the event ledger of a run.
inline SuiteResult check_ledger_replay(const RunResult& r) {
  SuiteResult s{"ledger_replay"};
  const auto bad = check_ledger(r.ledger, r.events, r.params);
  s.expect(bad.empty(), bad.empty() ? "" : bad.front());
  s.checked = static_cast<long>(r.ledger.size());
  return s;
}

/// Consensus and semi-norm envelopes on a run, plus inter-event bounds.
inline SuiteResult check_envelope(const RunResult& r, const Spectrum& spec) {
  SuiteResult s{"envelope"};
  for (const auto& v : check_run(r)) s.expect(false, v);
  const double step = std::max(r.horizon / 40.0, 1e-9);
  for (double t = 0.0; t <= r.horizon; t += step) {
    const auto x = r.trajectory.state_at(t);
    const double sn = seminorm_inf(spec, r.params.gamma, x);
    s.expect(sn <= 0.5 * r.params.quant_range(t) * (1 + 1e-9),
             "seminorm exceeds E(t)/2 at t=" + fmt(t));
  }
  return s;
}

/// All suites for a configuration; the envelope suites use a short run.
inline std::vector<SuiteResult> run_checks(const RunConfig& cfg, double short_horizon = 4.0) {
  std::vector<SuiteResult> out;
  const Graph g = cfg.graph();
  const auto spec = eigendecompose(build_laplacian(g));
  const auto params = make_params(g, spec, cfg.design_inputs());
  const int dtilde = params.dtilde;

  const double gamma = params.gamma;
  if (gamma > 0.0 && gamma <= spec.lambda2() + 1e-12)
    out.push_back(check_seminorm(g, gamma, 50, 1));
  else
    out.push_back({"seminorm", false, 0, "gamma outside (0, lambda2]"});
  out.push_back(check_quantizer(cfg.levels, dtilde, cfg.e0));
  out.push_back(check_phi(2000, 2));

  try {
    RunOptions opt;
    opt.horizon = std::min(cfg.horizon, short_horizon);
    opt.grid_dt = cfg.grid_dt;
    opt.enforce = false;
    const auto r = run(params, initial_states(cfg), opt);
    out.push_back(check_ledger_replay(r));
    out.push_back(check_envelope(r, spec));
  } catch (const Error& e) {
    out.push_back({"ledger_replay", false, 0, e.what()});
    out.push_back({"envelope", false, 0, e.what()});
  }
  return out;
}

inline nlohmann::json checks_json(const std::vector<SuiteResult>& suites) {
  nlohmann::json j;
  auto arr = nlohmann::json::array();
  bool all = true;
  for (const auto& s : suites) {
    arr.push_back({{"suite", s.name}, {"pass", s.pass}, {"checked", s.checked}, {"detail", s.detail}});
    all = all && s.pass;
  }
  j["suites"] = arr;
  j["passed"] = all;
  return j;
}

}  // namespace qtrig
