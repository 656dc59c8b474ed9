#pragma once

// Heat semigroup exp(-Lt), the weighted max-norm semi-norm, and its constant
// Gamma_inf(gamma) = sup_t || exp(gamma t) (exp(-Lt) - 1 1bar) ||_inf.
//
// Everything is evaluated through the Laplacian spectrum. Subtracting the
// consensus projector removes the zero mode exactly, so the weighted
// semigroup is sum_{k>=2} exp((gamma - lambda_k) t) v_k v_k^T and never
// multiplies a large exp(gamma t) into a cancelling difference.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qtrig/errors.hpp"
#include "qtrig/graph.hpp"

namespace qtrig {

inline double average(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// v - ave(v) 1.
inline std::vector<double> deviation(std::span<const double> v) {
  const double m = average(v);
  std::vector<double> out(v.begin(), v.end());
  for (double& x : out) x -= m;
  return out;
}

/// V exp(-Lambda t) V^T.
inline Matrix heat_semigroup(const Spectrum& spec, double t) {
  if (!(t >= 0.0)) throw DomainError("heat_semigroup: t must be nonnegative");
  const std::size_t n = spec.size();
  Matrix out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::exp(-spec.values[k] * t);
    for (std::size_t i = 0; i < n; ++i) {
      const double vik = w * spec.eigvec(i, k);
      for (std::size_t j = 0; j < n; ++j) out(i, j) += vik * spec.eigvec(j, k);
    }
  }
  return out;
}

/// Supremum of a scanned function of time plus where it was reached.
struct ScanResult {
  double value = 0.0;
  double t_star = 0.0;  // +inf when the supremum is the t -> inf limit
};

namespace seminorm_detail {

inline constexpr int kGridPoints = 2000;
inline constexpr double kDecayHorizons = 20.0;
inline constexpr double kRefineTol = 1e-6;

// Eigenvalues within this distance of gamma are treated as equal to it; their
// modes neither grow nor decay in the weighted semigroup.
inline double equal_tolerance(const Spectrum& spec) {
  return 1e-9 * std::max(1.0, spec.values.back());
}

inline void check_gamma(const Spectrum& spec, double gamma, const char* who) {
  if (spec.size() < 2) throw DomainError(std::string(who) + ": spectrum too small");
  const double l2 = spec.lambda2();
  if (!(gamma > 0.0) || gamma > l2 + 1e-12)
    throw DomainError(std::string(who) + ": gamma must satisfy 0 < gamma <= lambda2 (" +
                      std::to_string(l2) + "), got " + std::to_string(gamma));
}

// Per-mode weights exp((gamma - lambda_k) t) for k >= 1 (0-based, skipping
// the consensus mode). Modes equal to gamma get weight 1.
struct ModeRates {
  std::vector<double> rate;  // lambda_k - gamma >= 0, zero for "equal" modes
  std::vector<char> steady;
  double scan_horizon = 0.0;
};

inline ModeRates mode_rates(const Spectrum& spec, double gamma) {
  const double tol = equal_tolerance(spec);
  ModeRates m;
  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < spec.size(); ++k) {
    const double gap = spec.values[k] - gamma;
    const bool steady = std::abs(gap) <= tol;
    m.rate.push_back(steady ? 0.0 : std::max(gap, 0.0));
    m.steady.push_back(steady ? 1 : 0);
    if (!steady && gap > 0.0) min_gap = std::min(min_gap, gap);
  }
  m.scan_horizon = kDecayHorizons / spec.lambda2();
  if (std::isfinite(min_gap)) m.scan_horizon = std::max(m.scan_horizon, kDecayHorizons / min_gap);
  return m;
}

inline std::vector<double> scan_grid(double horizon) {
  const int half = kGridPoints / 2;
  std::vector<double> g;
  g.reserve(kGridPoints + 1);
  g.push_back(0.0);
  for (int i = 1; i <= half; ++i) g.push_back(horizon * i / half);
  const double lo = horizon * 1e-6;
  const double ratio = std::pow(horizon / lo, 1.0 / (half - 1));
  for (int i = 0; i < half; ++i) g.push_back(lo * std::pow(ratio, i));
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

inline ScanResult scan_supremum(const std::function<double(double)>& f, double horizon,
                                double limit) {
  const auto grid = scan_grid(horizon);
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best) {
      best = v;
      arg = i;
    }
  }
  ScanResult res{best, grid[arg]};
  // Golden-section refinement on the bracket around the grid maximiser.
  double lo = grid[arg == 0 ? 0 : arg - 1];
  double hi = grid[std::min(arg + 1, grid.size() - 1)];
  if (hi > lo) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    while (hi - lo > kRefineTol) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = f(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = f(x1);
      }
    }
    for (auto [x, v] : {std::pair{x1, f1}, std::pair{x2, f2}})
      if (v > res.value) res = {v, x};
  }
  if (limit > res.value) res = {limit, std::numeric_limits<double>::infinity()};
  return res;
}

}  // namespace seminorm_detail

/// Gamma_inf(gamma) together with the time at which the supremum is reached.
struct GammaInfinity {
  double gamma = 0.0;
  double value = 0.0;
  double t_star = 0.0;

  [[nodiscard]] bool attained_at_infinity() const { return std::isinf(t_star); }
};

/// Numeric supremum over t >= 0 of || exp(gamma t)(exp(-Lt) - 1 1bar) ||_inf.
///
/// Scans a uniform-plus-geometric grid, refines around the best grid point,
/// and when gamma coincides with an eigenvalue also compares against the
/// t -> inf limit (the max-norm of the projector onto those modes).
inline GammaInfinity gamma_infinity(const Spectrum& spec, double gamma) {
  using namespace seminorm_detail;
  check_gamma(spec, gamma, "gamma_infinity");
  const std::size_t n = spec.size();
  const auto modes = mode_rates(spec, gamma);

  std::vector<double> w(n - 1);
  auto weighted_norm = [&](double t, bool steady_only) {
    for (std::size_t k = 0; k + 1 < n; ++k)
      w[k] = steady_only ? (modes.steady[k] ? 1.0 : 0.0) : std::exp(-modes.rate[k] * t);
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t k = 1; k < n; ++k) s += w[k - 1] * spec.eigvec(i, k) * spec.eigvec(j, k);
        row += std::abs(s);
      }
      best = std::max(best, row);
    }
    return best;
  };

  const bool any_steady = std::any_of(modes.steady.begin(), modes.steady.end(),
                                      [](char c) { return c != 0; });
  const double limit = any_steady ? weighted_norm(0.0, true) : 0.0;
  const auto r = scan_supremum([&](double t) { return weighted_norm(t, false); },
                               modes.scan_horizon, limit);
  return {gamma, r.value, r.t_star};
}

/// The semi-norm sup_t || exp(gamma t) exp(-Lt)(v - ave(v) 1) ||_inf, on the
/// same grid and refinement as gamma_infinity.
inline double seminorm_inf(const Spectrum& spec, double gamma, std::span<const double> v) {
  using namespace seminorm_detail;
  check_gamma(spec, gamma, "seminorm_inf");
  const std::size_t n = spec.size();
  if (v.size() != n) throw DomainError("seminorm_inf: vector size mismatch");
  const auto modes = mode_rates(spec, gamma);

  // Modal coordinates of the deviation, so constant vectors give exactly 0
  // rather than the eigenvectors' rounding against 1.
  const auto dev = deviation(v);
  std::vector<double> coeff(n - 1, 0.0);
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) coeff[k - 1] += spec.eigvec(i, k) * dev[i];

  std::vector<double> wc(n - 1);
  auto weighted = [&](double t, bool steady_only) {
    for (std::size_t k = 0; k + 1 < n; ++k)
      wc[k] = coeff[k] * (steady_only ? (modes.steady[k] ? 1.0 : 0.0) : std::exp(-modes.rate[k] * t));
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t k = 1; k < n; ++k) s += wc[k - 1] * spec.eigvec(i, k);
      best = std::max(best, std::abs(s));
    }
    return best;
  };

  // The t = 0 value is the plain deviation norm; computing it directly keeps
  // the lower bound ||v - ave(v)1|| <= |||v||| exact.
  const double at_zero = norm_inf(dev);
  const bool any_steady = std::any_of(modes.steady.begin(), modes.steady.end(),
                                      [](char c) { return c != 0; });
  const double limit = any_steady ? weighted(0.0, true) : 0.0;
  const auto r = scan_supremum([&](double t) { return weighted(t, false); }, modes.scan_horizon,
                               limit);
  return std::max(r.value, at_zero);
}

}  // namespace qtrig
