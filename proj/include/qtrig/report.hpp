#pragma once

// CSV and JSON exports of design reports and simulation runs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtrig/errors.hpp"
#include "qtrig/protocol.hpp"
#include "qtrig/simulation.hpp"

namespace qtrig {

/// Shortest round-trip decimal; the same double always prints the same text.
inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no NaN or infinity; both become null.
inline nlohmann::json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::json jnums(const std::vector<double>& v) {
  auto a = nlohmann::json::array();
  for (double x : v) a.push_back(jnum(x));
  return a;
}

inline nlohmann::json design_json(const DesignReport& r) {
  const auto& p = r.params;
  nlohmann::json j;
  j["lambda2"] = jnum(r.lambda2);
  j["gamma"] = jnum(p.gamma);
  j["gamma_inf"] = jnum(p.gamma_inf);
  j["gamma_inf_t_star"] = jnum(p.gamma_inf_t_star);
  j["gamma_inf_attained_at_infinity"] = std::isinf(p.gamma_inf_t_star);
  j["E0"] = p.e0;
  j["R"] = p.levels;
  j["dtilde"] = p.dtilde;
  j["omega"] = jnum(p.omega);
  j["omega_tilde"] = jnum(p.omega_tilde);
  j["kappa_at_omega"] = jnum(r.kappa_at_omega);
  j["xi"] = jnums(p.xi);
  j["eta"] = jnums(p.eta);
  j["delta"] = p.delta;
  j["tau_max"] = p.tau_max;
  j["tau_min_tilde"] = jnums(p.tau_min_tilde);
  j["degrees"] = p.degrees;
  j["min_R"] = r.min_levels ? nlohmann::json(*r.min_levels) : nlohmann::json(nullptr);
  j["index_alphabet_size"] = r.alphabet_size;
  j["index_bits"] = r.alphabet_bits;
  auto v = nlohmann::json::array();
  for (const auto& x : r.verdicts)
    v.push_back({{"condition", x.condition}, {"pass", x.pass}, {"detail", x.detail}});
  j["verdicts"] = v;
  j["feasible"] = r.feasible();
  return j;
}

/// Final gap, per-agent event counts and observed inter-event extremes.
inline nlohmann::json summary_json(const RunResult& r) {
  const int n = r.params.agents();
  nlohmann::json j;
  j["horizon"] = r.horizon;
  j["final_max_gap"] = r.max_gap(r.horizon);
  j["envelope_at_horizon"] = r.params.quant_range(r.horizon);
  j["ledger_events"] = r.ledger.size();
  j["samples_total"] = r.events.size();
  auto agents = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    const auto ev = r.agent_events(i);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
      const double tau = ev[k + 1]->t_k - ev[k]->t_k;
      lo = std::min(lo, tau);
      hi = std::max(hi, tau);
    }
    agents.push_back({{"agent", i + 1},
                      {"events", ev.size()},
                      {"min_inter_event", jnum(lo)},
                      {"max_inter_event", ev.size() > 1 ? jnum(hi) : nlohmann::json(nullptr)},
                      {"tau_min_tilde", jnum(r.params.tau_min_tilde[i])},
                      {"tau_max", r.params.tau_max[i]}});
  }
  j["agents"] = agents;
  j["violations"] = r.violations;
  j["passed"] = r.violations.empty();
  return j;
}

namespace report_detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace report_detail

inline std::string trajectory_csv(const RunResult& r) {
  const int n = r.params.agents();
  std::ostringstream s;
  s << 't';
  for (int i = 1; i <= n; ++i) s << ",x" << i;
  for (int i = 1; i <= n; ++i) s << ",u" << i;
  s << '\n';
  for (double t : r.grid) {
    s << fmt(t);
    for (double x : r.trajectory.state_at(t)) s << ',' << fmt(x);
    for (double u : r.trajectory.input_at(t)) s << ',' << fmt(u);
    s << '\n';
  }
  return s.str();
}

inline std::string events_csv(const RunResult& r) {
  std::ostringstream s;
  s << "agent,k,t_k,q_index,recompute_count\n";
  for (const auto& e : r.events)
    s << e.agent + 1 << ',' << e.k << ',' << fmt(e.t_k) << ',' << e.q_index << ','
      << e.recompute_count << '\n';
  return s.str();
}

inline std::string ledger_csv(const RunResult& r) {
  std::ostringstream s;
  s << "ell,t_ell,I_ell\n";
  for (std::size_t l = 0; l < r.ledger.entries.size(); ++l) {
    const auto& e = r.ledger.entries[l];
    s << l << ',' << fmt(e.t) << ',';
    for (std::size_t f = 0; f < e.fired.size(); ++f) s << (f ? ";" : "") << e.fired[f] + 1;
    s << '\n';
  }
  return s.str();
}

inline std::string candidates_csv(const RunResult& r) {
  std::ostringstream s;
  s << "agent,k,p,t_update,a,b,c,candidate\n";
  for (const auto& c : r.candidates)
    s << c.agent + 1 << ',' << c.k << ',' << c.p << ',' << fmt(c.t_update) << ',' << fmt(c.a)
      << ',' << fmt(c.b) << ',' << fmt(c.c) << ',' << fmt(c.candidate) << '\n';
  return s.str();
}

/// States only, on the export grid.
inline std::string plot_trajectories_csv(const RunResult& r) {
  const int n = r.params.agents();
  std::ostringstream s;
  s << 't';
  for (int i = 1; i <= n; ++i) s << ",x" << i;
  s << '\n';
  for (double t : r.grid) {
    s << fmt(t);
    for (double x : r.trajectory.state_at(t)) s << ',' << fmt(x);
    s << '\n';
  }
  return s.str();
}

/// One row per sample: agent id against sampling time.
inline std::string plot_sampling_csv(const RunResult& r) {
  std::ostringstream s;
  s << "agent,t\n";
  for (int i = 0; i < r.params.agents(); ++i)
    for (const auto* e : r.agent_events(i)) s << i + 1 << ',' << fmt(e->t_k) << '\n';
  return s.str();
}

inline void write_design(const std::filesystem::path& dir, const DesignReport& rep) {
  std::filesystem::create_directories(dir);
  report_detail::write_text(dir / "design.json", design_json(rep).dump(2) + "\n");
}

/// trajectory.csv, events.csv, ledger.csv, candidates.csv, summary.json, and
/// with `plot_data` also fig_trajectories.csv and fig_sampling_times.csv.
inline void write_run(const std::filesystem::path& dir, const RunResult& r, bool plot_data) {
  using report_detail::write_text;
  std::filesystem::create_directories(dir);
  write_text(dir / "trajectory.csv", trajectory_csv(r));
  write_text(dir / "events.csv", events_csv(r));
  write_text(dir / "ledger.csv", ledger_csv(r));
  write_text(dir / "candidates.csv", candidates_csv(r));
  write_text(dir / "summary.json", summary_json(r).dump(2) + "\n");
  if (plot_data) {
    write_text(dir / "fig_trajectories.csv", plot_trajectories_csv(r));
    write_text(dir / "fig_sampling_times.csv", plot_sampling_csv(r));
  }
}

}  // namespace qtrig
