#pragma once

// Event-driven simulation of the quantized self-triggered consensus loop.
//
// Inputs are piecewise constant, so every state is piecewise linear and the
// engine moves from one sampling instant to the next without integrating.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qtrig/errors.hpp"
#include "qtrig/protocol.hpp"
#include "qtrig/quantizer.hpp"
#include "qtrig/trigger.hpp"

namespace qtrig {

/// Candidates closer than this to the earliest one fire in the same instant.
inline constexpr double kSimultaneity = 1e-12;
/// Slack allowed on the post-run inequalities.
inline constexpr double kCheckSlack = 1e-12;

struct Breakpoint {
  double t = 0.0;
  double x = 0.0;
  double u = 0.0;  // input from t until the next breakpoint
};

/// Per-agent breakpoint lists; the state between breakpoints is linear.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::size_t n) : agents_(n) {}

  void add(int agent, double t, double x, double u) { agents_[agent].push_back({t, x, u}); }
  void set_horizon(double t) { horizon_ = t; }

  [[nodiscard]] std::size_t size() const { return agents_.size(); }
  [[nodiscard]] double horizon() const { return horizon_; }
  [[nodiscard]] const std::vector<Breakpoint>& breakpoints(int agent) const {
    return agents_.at(agent);
  }

  [[nodiscard]] double state_at(int agent, double t) const { return locate(agent, t).second; }
  [[nodiscard]] double input_at(int agent, double t) const { return locate(agent, t).first->u; }

  [[nodiscard]] std::vector<double> state_at(double t) const {
    std::vector<double> x(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) x[i] = state_at(static_cast<int>(i), t);
    return x;
  }
  [[nodiscard]] std::vector<double> input_at(double t) const {
    std::vector<double> u(agents_.size());
    for (std::size_t i = 0; i < agents_.size(); ++i) u[i] = input_at(static_cast<int>(i), t);
    return u;
  }

 private:
  std::pair<const Breakpoint*, double> locate(int agent, double t) const {
    if (!(t >= 0.0) || t > horizon_)
      throw DomainError("trajectory queried at t=" + std::to_string(t) + " outside [0, " +
                        std::to_string(horizon_) + "]");
    const auto& bp = agents_.at(agent);
    auto it = std::upper_bound(bp.begin(), bp.end(), t,
                               [](double v, const Breakpoint& b) { return v < b.t; });
    if (it == bp.begin()) throw DomainError("trajectory has no breakpoint before t");
    const Breakpoint& b = *(it - 1);
    return {&b, b.x + b.u * (t - b.t)};
  }

  std::vector<std::vector<Breakpoint>> agents_;
  double horizon_ = 0.0;
};

/// One sample of one agent.
struct EventRecord {
  int agent = 0;
  long k = 0;
  double t_k = 0.0;
  long long q_index = 0;
  double q_value = 0.0;
  int recompute_count = 0;  // neighbour updates received before the next sample
};

/// One entry of the candidate audit log; p = 0 is the initial candidate.
struct RecomputeRecord {
  int agent = 0;
  long k = 0;
  int p = 0;
  double t_update = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double candidate = 0.0;
};

/// Distinct global event times with the agents that fired and the sample
/// counters right after each instant.
struct LedgerEntry {
  double t = 0.0;
  std::vector<int> fired;
  std::vector<long> k;
};

struct EventLedger {
  std::vector<LedgerEntry> entries;

  [[nodiscard]] std::size_t size() const { return entries.size(); }
};

/// Step-by-step engine. Call step() until it returns false.
class Engine {
 public:
  Engine(const ProtocolParams& params, std::vector<double> x0, double horizon)
      : p_(params), horizon_(horizon), n_(params.agents()), levels_(params.levels) {
    if (static_cast<int>(x0.size()) != n_) throw DomainError("need one initial state per agent");
    if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be >= 0");
    if (!(p_.omega > 0.0) || !std::isfinite(p_.omega) || !std::isfinite(p_.gamma_inf))
      throw DomainError("design constants are undefined; cannot simulate");
    x_ = std::move(x0);
    u_.assign(n_, 0.0);
    q_.assign(n_, 0.0);
    k_.assign(n_, -1);
    cand_.resize(n_);
    open_event_.assign(n_, -1);
    traj_ = Trajectory(n_);
    for (int i = 0; i < n_; ++i) {
      sched_.push_back(SchedulerParams::of(p_, i));
      cand_[i].candidate = 0.0;  // every agent samples at t = 0
    }
  }

  /// Processes the next sampling instant; false once it lies past the horizon.
  bool step() {
    double t_star = std::numeric_limits<double>::infinity();
    for (const auto& c : cand_) t_star = std::min(t_star, c.candidate);
    if (!(t_star <= horizon_)) return false;
    if (events_.size() > kMaxEvents)
      throw AssertionFailure("event count exceeded " + std::to_string(kMaxEvents) +
                             " (accumulating sampling times)");

    std::vector<int> fired;
    for (int i = 0; i < n_; ++i)
      if (cand_[i].candidate - t_star <= kSimultaneity) fired.push_back(i);

    for (int i = 0; i < n_; ++i) x_[i] += u_[i] * (t_star - t_now_);
    t_now_ = t_star;

    // Every firing agent measures before any input changes.
    const double e_now = p_.quant_range(t_star);
    const QuantizerSpec qs(e_now, levels_);
    std::vector<long long> bins(fired.size());
    for (std::size_t f = 0; f < fired.size(); ++f) {
      const int i = fired[f];
      long long sum = 0;
      for (int j : p_.neighbors[i]) {
        const double z = x_[i] - x_[j];
        if (!(std::abs(z) <= e_now))
          throw SaturationError("unsaturation condition violated at t=" + std::to_string(t_star) +
                                ": |x" + std::to_string(i + 1) + " - x" + std::to_string(j + 1) +
                                "| = " + std::to_string(std::abs(z)) +
                                " > E(t) = " + std::to_string(e_now));
        sum += quantize_index(qs, z);
      }
      bins[f] = sum;
    }

    // Broadcast: neighbours decode the index with the shared E(t).
    for (std::size_t f = 0; f < fired.size(); ++f) {
      const int i = fired[f];
      const QuantIndex idx = encode_bins(bins[f], levels_, p_.dtilde);
      q_[i] = decode_sum(idx, e_now, levels_);
      u_[i] = -q_[i];
      ++k_[i];
      if (open_event_[i] >= 0) events_[open_event_[i]].recompute_count = cand_[i].p;
      open_event_[i] = static_cast<long>(events_.size());
      events_.push_back({i, k_[i], t_star, bins[f], q_[i], 0});
      traj_.add(i, t_star, x_[i], u_[i]);
    }

    std::vector<char> is_fired(n_, 0);
    for (int i : fired) is_fired[i] = 1;
    for (int i = 0; i < n_; ++i) {
      if (is_fired[i]) {
        cand_[i] = initial_candidate(i, k_[i], t_star, own_sum(i), neighbor_sum(i), sched_[i]);
      } else if (std::any_of(p_.neighbors[i].begin(), p_.neighbors[i].end(),
                             [&](int j) { return is_fired[j] != 0; })) {
        cand_[i] = recompute_candidate(cand_[i], own_sum(i), neighbor_sum(i), t_star, sched_[i]);
      } else {
        continue;
      }
      const auto& c = cand_[i];
      log_.push_back({i, c.k, c.p, c.t_update, c.a, c.b, c.c, c.candidate});
    }

    ledger_.entries.push_back({t_star, fired, k_});
    return true;
  }

  /// Runs to the horizon and closes the trajectory there.
  void finish() {
    while (step()) {
    }
    for (int i = 0; i < n_; ++i) {
      if (open_event_[i] >= 0) events_[open_event_[i]].recompute_count = cand_[i].p;
      const double x_end = x_[i] + u_[i] * (horizon_ - t_now_);
      if (traj_.breakpoints(i).empty() || traj_.breakpoints(i).back().t < horizon_)
        traj_.add(i, horizon_, x_end, u_[i]);
    }
    traj_.set_horizon(horizon_);
  }

  [[nodiscard]] const Trajectory& trajectory() const { return traj_; }
  [[nodiscard]] const EventLedger& ledger() const { return ledger_; }
  [[nodiscard]] const std::vector<EventRecord>& events() const { return events_; }
  [[nodiscard]] const std::vector<RecomputeRecord>& candidate_log() const { return log_; }
  [[nodiscard]] const std::vector<CandidateState>& candidates() const { return cand_; }
  [[nodiscard]] double now() const { return t_now_; }

 private:
  static constexpr std::size_t kMaxEvents = 20'000'000;

  double own_sum(int i) const { return p_.degrees[i] * q_[i]; }
  double neighbor_sum(int i) const {
    double s = 0.0;
    for (int j : p_.neighbors[i]) s += q_[j];
    return s;
  }

  ProtocolParams p_;
  double horizon_;
  int n_;
  Levels levels_;
  std::vector<SchedulerParams> sched_;
  double t_now_ = 0.0;
  std::vector<double> x_, u_, q_;
  std::vector<long> k_;
  std::vector<CandidateState> cand_;
  std::vector<long> open_event_;
  Trajectory traj_;
  EventLedger ledger_;
  std::vector<EventRecord> events_;
  std::vector<RecomputeRecord> log_;
};

/// Export grid: m*dt for m*dt <= T, the horizon itself, and every event time,
/// sorted with near-duplicates (within 1e-12) collapsed.
inline std::vector<double> dense_grid(double horizon, double dt, const EventLedger& ledger) {
  if (!(dt > 0.0)) throw DomainError("grid dt must be positive");
  std::vector<double> g;
  const auto m_max = static_cast<long long>(std::floor(horizon / dt + 1e-9));
  for (long long m = 0; m <= m_max; ++m) g.push_back(std::min(horizon, m * dt));
  g.push_back(horizon);
  for (const auto& e : ledger.entries) g.push_back(e.t);
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  for (double t : g)
    if (out.empty() || t - out.back() > 1e-12) out.push_back(t);
  return out;
}

/// Sampling and quantization errors of every agent at one time.
struct ErrorDecomposition {
  std::vector<double> f;
  std::vector<double> g;
};

struct RunOptions {
  double horizon = 16.0;
  double grid_dt = 1e-3;
  bool enforce = true;  // throw AssertionFailure on the first violation
};

struct RunResult {
  ProtocolParams params;
  std::vector<double> x0;
  double horizon = 0.0;
  Trajectory trajectory;
  EventLedger ledger;
  std::vector<EventRecord> events;
  std::vector<RecomputeRecord> candidates;
  std::vector<double> grid;
  std::vector<std::string> violations;

  std::vector<std::vector<std::size_t>> by_agent;  // indices into events

  void index_events() {
    by_agent.assign(params.agents(), {});
    for (std::size_t e = 0; e < events.size(); ++e) by_agent[events[e].agent].push_back(e);
  }

  /// Events of one agent, in time order.
  [[nodiscard]] std::vector<const EventRecord*> agent_events(int agent) const {
    std::vector<const EventRecord*> out;
    for (std::size_t e : by_agent.at(agent)) out.push_back(&events[e]);
    return out;
  }

  /// Last sample of `agent` at or before t.
  [[nodiscard]] const EventRecord& last_sample(int agent, double t) const {
    const auto& idx = by_agent.at(agent);
    auto it = std::upper_bound(idx.begin(), idx.end(), t,
                               [&](double v, std::size_t e) { return v < events[e].t_k; });
    if (it == idx.begin()) throw DomainError("no sample before t=" + std::to_string(t));
    return events[*(it - 1)];
  }

  [[nodiscard]] double max_gap(double t) const {
    const auto x = trajectory.state_at(t);
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *hi - *lo;
  }
};

/// f_i(t) and g_i(t) from the stored samples.
inline ErrorDecomposition error_decomposition(const RunResult& r, double t) {
  const int n = r.params.agents();
  ErrorDecomposition d;
  const auto x = r.trajectory.state_at(t);
  for (int i = 0; i < n; ++i) {
    const auto& ev = r.last_sample(i, t);
    const auto xk = r.trajectory.state_at(ev.t_k);
    double now = 0.0;
    double then = 0.0;
    for (int j : r.params.neighbors[i]) {
      now += x[i] - x[j];
      then += xk[i] - xk[j];
    }
    d.f.push_back(now - then);
    d.g.push_back(then - ev.q_value);
  }
  return d;
}

/// Replays the ledger against the sampling-time bookkeeping properties:
/// monotone unit-step counters, increments exactly on firing, ordering of
/// last samples and ledger times, the tau_max bound, and steady advance.
inline std::vector<std::string> check_ledger(const EventLedger& ledger,
                                             std::span<const EventRecord> events,
                                             const ProtocolParams& p) {
  std::vector<std::string> bad;
  const int n = p.agents();
  const auto& L = ledger.entries;
  if (L.empty()) return bad;
  if (L.front().t != 0.0 || static_cast<int>(L.front().fired.size()) != n)
    bad.push_back("ledger: every agent must sample at t = 0");

  // Sample times by agent and counter.
  std::vector<std::vector<double>> sample_t(n);
  for (const auto& e : events) {
    if (e.k != static_cast<long>(sample_t[e.agent].size()))
      bad.push_back("ledger: sample counters of agent " + std::to_string(e.agent + 1) +
                    " are not consecutive");
    sample_t[e.agent].push_back(e.t_k);
  }

  for (std::size_t l = 0; l + 1 < L.size(); ++l) {
    const auto& cur = L[l];
    const auto& nxt = L[l + 1];
    const std::string at = " at ell=" + std::to_string(l);
    if (!(cur.t < nxt.t)) bad.push_back("ledger (c): event times not strictly increasing" + at);
    for (int i = 0; i < n; ++i) {
      const long ki = cur.k[i];
      const long kn = nxt.k[i];
      if (kn < ki || kn > ki + 1) bad.push_back("ledger (a): counter jump for agent " +
                                                std::to_string(i + 1) + at);
      const bool in_set = std::find(nxt.fired.begin(), nxt.fired.end(), i) != nxt.fired.end();
      if ((kn == ki + 1) != in_set)
        bad.push_back("ledger (b): increment/firing mismatch for agent " + std::to_string(i + 1) + at);
      if (ki < 0 || ki >= static_cast<long>(sample_t[i].size())) {
        bad.push_back("ledger: unknown sample of agent " + std::to_string(i + 1) + at);
        continue;
      }
      const double tk = sample_t[i][ki];
      if (!(tk <= cur.t)) bad.push_back("ledger (c): last sample after t_ell for agent " +
                                        std::to_string(i + 1) + at);
      if (nxt.t > tk + p.tau_max[i] + kCheckSlack)
        bad.push_back("ledger (e): t_ell+1 exceeds last sample + tau_max for agent " +
                      std::to_string(i + 1) + at);
    }
  }

  double tau_floor = std::numeric_limits<double>::infinity();
  for (double v : p.tau_min_tilde) tau_floor = std::min(tau_floor, v);
  if (std::isfinite(tau_floor) && tau_floor > 0.0) {
    const std::size_t step = static_cast<std::size_t>(n);
    for (std::size_t l = 0; l + step < L.size(); ++l)
      if (L[l + step].t - L[l].t < tau_floor / n - kCheckSlack) {
        bad.push_back("ledger (f): fewer than min tau_min/N time units over N events at ell=" +
                      std::to_string(l));
        break;
      }
  }
  return bad;
}

/// Envelope, inter-event and ledger checks on a finished run.
inline std::vector<std::string> check_run(const RunResult& r) {
  std::vector<std::string> bad;
  const auto& p = r.params;
  const int n = p.agents();

  for (double t : r.grid) {
    const double gap = r.max_gap(t);
    const double env = p.quant_range(t);
    if (gap > env * (1.0 + kCheckSlack)) {
      bad.push_back("consensus envelope: max |x_i - x_j| = " + std::to_string(gap) +
                    " > E(t) = " + std::to_string(env) + " at t=" + std::to_string(t));
      break;
    }
  }

  for (int i = 0; i < n; ++i) {
    const auto ev = r.agent_events(i);
    for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
      const double tau = ev[k + 1]->t_k - ev[k]->t_k;
      const double lo = p.tau_min_tilde[i];
      if (tau > p.tau_max[i] + kCheckSlack || (std::isfinite(lo) && tau < lo - kCheckSlack)) {
        bad.push_back("inter-event time " + std::to_string(tau) + " of agent " +
                      std::to_string(i + 1) + " outside [tau_min_tilde, tau_max]");
        break;
      }
    }
  }

  double bound = n;
  for (int i = 0; i < n; ++i)
    if (p.tau_min_tilde[i] > 0.0) bound += std::ceil(r.horizon / p.tau_min_tilde[i]);
  if (static_cast<double>(r.events.size()) > bound)
    bad.push_back("event count " + std::to_string(r.events.size()) + " exceeds " +
                  std::to_string(bound));

  for (auto& s : check_ledger(r.ledger, r.events, p)) bad.push_back(std::move(s));
  return bad;
}

/// Simulates from x0 to the horizon and checks the run.
///
/// Saturation always aborts. Other violations are collected and, when
/// `enforce` is set, the first one is thrown as AssertionFailure.
inline RunResult run(const ProtocolParams& params, std::vector<double> x0,
                     const RunOptions& opt = {}) {
  Engine eng(params, x0, opt.horizon);
  eng.finish();
  RunResult r;
  r.params = params;
  r.x0 = std::move(x0);
  r.horizon = opt.horizon;
  r.trajectory = eng.trajectory();
  r.ledger = eng.ledger();
  r.events = eng.events();
  r.candidates = eng.candidate_log();
  r.index_events();
  r.grid = dense_grid(opt.horizon, opt.grid_dt, r.ledger);
  r.violations = check_run(r);
  if (opt.enforce && !r.violations.empty()) throw AssertionFailure(r.violations.front());
  return r;
}

}  // namespace qtrig
