#pragma once

// Closed-form sampling-time candidates of the self-triggered rule.
//
// Between its own samples an agent's sampling error is the piecewise-linear
// function f(tau) with slope a on the current piece and offset c at the start
// of that piece. The next sample is the first tau with |a tau + c| reaching the
// decaying threshold b exp(-omega tau); phi0 and phi return that first
// crossing through the Lambert W-function.

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "qtrig/errors.hpp"
#include "qtrig/lambert_w.hpp"
#include "qtrig/protocol.hpp"

namespace qtrig {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// First crossing when the error does not change sign before it grows:
/// the root of |a| tau + c sgn(a) = b exp(-omega tau), log form for a = 0,
/// and +inf when a = c = 0.
inline double phi0(double a, double b, double c, double omega) {
  if (!(b > 0.0) || !(omega > 0.0)) throw DomainError("phi0: requires b > 0 and omega > 0");
  if (a != 0.0) {
    // W(omega b/|a| exp(omega c/a)) evaluated through its logarithm.
    const double z = std::log(omega * b / std::abs(a)) + omega * c / a;
    return lambert_w0_exp(z) / omega - c / a;
  }
  if (c != 0.0) return std::log(b / std::abs(c)) / omega;
  return kNever;
}

/// Membership in the set where |a tau + c| meets the threshold while still
/// shrinking toward its sign change: ac < 0 and 1 < omega b/|a| <= exp(-1 - omega c/a).
inline bool in_secondary_region(double a, double b, double c, double omega) {
  if (!(a * c < 0.0)) return false;
  const double ratio = omega * b / std::abs(a);
  if (!(ratio > 1.0)) return false;
  return std::log(ratio) <= -1.0 - omega * c / a;
}

/// inf { tau > 0 : |a tau + c| >= b exp(-omega tau) }, assuming |c| < b.
inline double phi(double a, double b, double c, double omega) {
  if (!(b > 0.0) || !(omega > 0.0)) throw DomainError("phi: requires b > 0 and omega > 0");
  if (in_secondary_region(a, b, c, omega)) {
    const double y = -std::exp(std::log(omega * b / std::abs(a)) + omega * c / a);
    return lambert_wm1(y) / omega - c / a;
  }
  return phi0(a, b, c, omega);
}

/// inf { tau > 0 : -tau + c >= b exp(-tau) } for 0 < c < b, via the secondary
/// branch when 1 < b <= exp(c - 1) and +inf otherwise.
inline double shrinking_error_crossing(double b, double c) {
  if (!(c > 0.0) || !(b > c)) throw DomainError("shrinking_error_crossing: requires 0 < c < b");
  if (b > 1.0 && std::log(b) <= c - 1.0) return lambert_wm1(-std::exp(std::log(b) - c)) + c;
  return kNever;
}

/// The trigger threshold delta_i E(t_ref) exp(-omega tau) as a function of tau.
struct TriggerThreshold {
  double delta = 0.0;
  double omega = 0.0;
  double e_ref = 0.0;

  [[nodiscard]] double at(double tau) const { return delta * e_ref * std::exp(-omega * tau); }
};

/// Constants one agent's scheduler needs.
struct SchedulerParams {
  int degree = 0;
  double delta = 0.0;
  double tau_max = 0.0;
  QuantRange range;

  [[nodiscard]] double omega() const { return range.omega; }

  static SchedulerParams of(const ProtocolParams& p, int agent) {
    return {p.degrees.at(agent), p.delta.at(agent), p.tau_max.at(agent), p.range()};
  }
};

/// Planned next sample of one agent within its current sampling interval.
///
/// `a` is d_i q_i(t_k) minus the latest neighbour sums, `b` the threshold at
/// the last update, `c` the sampling error accumulated up to that update.
struct CandidateState {
  int agent = 0;
  long k = 0;
  double t_k = 0.0;
  int p = 0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double t_update = 0.0;  // time of the p-th update
  double tau = 0.0;       // candidate inter-event time
  double candidate = 0.0;
};

/// Candidate right after the agent samples at t_k.
///
/// `own_sum` is d_i q_i(t_k) and `neighbor_sums` the sum of the neighbours'
/// latest transmitted values (including those sent at t_k).
inline CandidateState initial_candidate(int agent, long k, double t_k, double own_sum,
                                        double neighbor_sums, const SchedulerParams& sp) {
  CandidateState s;
  s.agent = agent;
  s.k = k;
  s.t_k = t_k;
  s.p = 0;
  s.a = own_sum - neighbor_sums;
  s.b = sp.delta * sp.range.at(t_k);
  s.c = 0.0;
  s.t_update = t_k;
  s.tau = std::min(phi0(s.a, s.b, s.c, sp.omega()), sp.tau_max);
  s.candidate = t_k + s.tau;
  return s;
}

/// Candidate after neighbour data arrives at t_new, strictly inside the
/// current window (t_update, candidate).
inline CandidateState recompute_candidate(const CandidateState& prev, double own_sum,
                                          double neighbor_sums, double t_new,
                                          const SchedulerParams& sp) {
  if (!(t_new > prev.t_update) || !(t_new < prev.candidate))
    throw LedgerError("agent " + std::to_string(prev.agent + 1) + ": update at t=" +
                      std::to_string(t_new) + " outside window (" +
                      std::to_string(prev.t_update) + ", " + std::to_string(prev.candidate) + ")");
  CandidateState s = prev;
  s.p = prev.p + 1;
  s.c = prev.c + (t_new - prev.t_update) * prev.a;
  s.a = own_sum - neighbor_sums;
  s.b = sp.delta * sp.range.at(t_new);
  s.t_update = t_new;
  // Holds while the trigger has not fired; a debug check only.
  assert(std::abs(s.c) < s.b * (1.0 + 1e-9));
  s.tau = std::min(phi(s.a, s.b, s.c, sp.omega()) + (t_new - prev.t_k), sp.tau_max);
  s.candidate = prev.t_k + s.tau;
  return s;
}

}  // namespace qtrig
