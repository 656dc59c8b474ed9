#pragma once

// Reference computations for the tests. None of them calls the library's
// Lambert W, spectral or scheduling code; they use bisection, dense scans,
// power series and brute-force time stepping instead.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline double inf() { return std::numeric_limits<double>::infinity(); }

/// Root of f on [lo, hi] given a sign change, to ~1e-15 relative.
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Lambert W by bisection on x exp(x) - y; branch 0 searches [-1, hi],
/// branch -1 searches [lo, -1].
inline double lambert_bisect(double y, int branch) {
  auto f = [y](double x) { return x * std::exp(x) - y; };
  if (branch == 0) {
    double hi = std::max(1.0, std::log1p(std::abs(y)) + 1.0);
    return bisect(f, -1.0, hi);
  }
  double lo = -2.0;
  while (f(lo) < 0.0) lo *= 2.0;  // x exp(x) -> 0- as x -> -inf
  return bisect(f, lo, -1.0);
}

/// First tau in (0, cap] with h(tau) >= 0 on a uniform grid of step dt,
/// refined by bisection inside the bracketing step; +inf when none.
inline double first_crossing_scan(const std::function<double(double)>& h, double cap, double dt) {
  double prev = 0.0;
  for (long m = 1;; ++m) {
    double t = m * dt;
    if (t > cap) t = cap;
    if (h(t) >= 0.0) return bisect([&](double s) { return h(s) >= 0.0 ? 1.0 : -1.0; }, prev, t);
    if (t >= cap) return inf();
    prev = t;
  }
}

/// Dense product of square matrices.
inline Mat mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

/// exp(A) by scaling and squaring with a 30-term Taylor series.
inline Mat expm(Mat a) {
  const std::size_t n = a.size();
  double norm = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    norm = std::max(norm, s);
  }
  int squarings = 0;
  while (norm > 0.5) {
    norm /= 2.0;
    ++squarings;
  }
  const double scale = std::ldexp(1.0, -squarings);
  for (auto& row : a)
    for (double& v : row) v *= scale;
  Mat result(n, std::vector<double>(n, 0.0));
  Mat term(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) result[i][i] = term[i][i] = 1.0;
  for (int k = 1; k <= 30; ++k) {
    term = mul(term, a);
    for (auto& row : term)
      for (double& v : row) v /= k;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
  }
  for (int s = 0; s < squarings; ++s) result = mul(result, result);
  return result;
}

/// Laplacian from 0-based edges.
inline Mat laplacian(int n, const std::vector<std::pair<int, int>>& edges) {
  Mat l(n, std::vector<double>(n, 0.0));
  for (auto [a, b] : edges) {
    l[a][a] += 1;
    l[b][b] += 1;
    l[a][b] -= 1;
    l[b][a] -= 1;
  }
  return l;
}

/// Random connected graph: a random spanning tree plus extra edges.
inline std::vector<std::pair<int, int>> random_connected(int n, std::mt19937_64& rng, double extra) {
  std::vector<std::pair<int, int>> e;
  std::vector<std::vector<char>> has(n, std::vector<char>(n, 0));
  for (int v = 1; v < n; ++v) {
    const int u = static_cast<int>(rng() % static_cast<std::uint64_t>(v));
    e.emplace_back(u, v);
    has[u][v] = has[v][u] = 1;
  }
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (!has[a][b] && U(rng) < extra) e.emplace_back(a, b);
  return e;
}

/// Q_{E,R} straight from its bin definition, by linear search over bins.
inline double quantize_direct(double z, double e, int r) {
  const int r0 = (r - 1) / 2;
  const double mag = std::abs(z);
  if (mag <= e / r) return 0.0;
  for (int p = 1; p <= r0; ++p)
    if ((2.0 * p - 1.0) * e / r < mag && mag <= (2.0 * p + 1.0) * e / r)
      return (z < 0 ? -1.0 : 1.0) * 2.0 * p * e / r;
  return std::numeric_limits<double>::quiet_NaN();
}

/// Brute-force closed loop: fixed steps of dt, each agent monitoring
/// |f_i(t)| >= delta_i E(t) directly and the tau_max cap; a crossing inside a
/// step is located by bisection and every agent is stepped to it.
struct BruteForce {
  int n = 0;
  std::vector<std::vector<int>> nbr;
  std::vector<double> delta, tau_max;
  double gamma_inf = 1, e0 = 1, omega = 1;
  int levels = 1;

  struct Sample {
    int agent;
    double t;
  };
  struct Result {
    std::vector<Sample> samples;
    std::vector<std::pair<double, std::vector<double>>> checkpoints;
  };

  double range(double t) const { return 2.0 * gamma_inf * e0 * std::exp(-omega * t); }

  double rel_sum(const std::vector<double>& x, int i) const {
    double s = 0.0;
    for (int j : nbr[i]) s += x[i] - x[j];
    return s;
  }

  Result simulate(std::vector<double> x, double horizon, double dt,
                  const std::vector<double>& checkpoints) const {
    Result res;
    std::vector<double> u(n, 0.0), tk(n, 0.0), sk(n, 0.0);
    auto sample = [&](int i, double t) {
      double q = 0.0;
      const double e = range(t);
      for (int j : nbr[i]) q += quantize_direct(x[i] - x[j], e, levels);
      sk[i] = rel_sum(x, i);
      tk[i] = t;
      res.samples.push_back({i, t});
      return -q;
    };
    std::vector<double> new_u(n);
    for (int i = 0; i < n; ++i) new_u[i] = sample(i, 0.0);
    u = new_u;

    std::size_t next_cp = 0;
    double t = 0.0;
    while (t < horizon) {
      const double h = std::min(dt, horizon - t);
      auto x_at = [&](double s) {
        std::vector<double> y(x);
        for (int i = 0; i < n; ++i) y[i] += u[i] * s;
        return y;
      };
      auto trig = [&](int i, double s) {
        return std::abs(rel_sum(x_at(s), i) - sk[i]) - delta[i] * range(t + s);
      };
      double first = inf();
      for (int i = 0; i < n; ++i) {
        double cand = inf();
        if (trig(i, h) >= 0.0)
          cand = bisect([&](double s) { return trig(i, s) >= 0.0 ? 1.0 : -1.0; }, 0.0, h);
        const double cap = tk[i] + tau_max[i] - t;
        if (cap <= h) cand = std::min(cand, std::max(cap, 0.0));
        first = std::min(first, cand);
      }
      const double step = std::min(first, h);
      while (next_cp < checkpoints.size() && checkpoints[next_cp] <= t + step) {
        res.checkpoints.emplace_back(checkpoints[next_cp], x_at(checkpoints[next_cp] - t));
        ++next_cp;
      }
      x = x_at(step);
      t += step;
      if (first <= h) {
        std::vector<int> fire;
        for (int i = 0; i < n; ++i) {
          const bool capped = tk[i] + tau_max[i] - t <= 1e-12;
          if (capped || std::abs(rel_sum(x, i) - sk[i]) >= delta[i] * range(t) * (1 - 1e-12))
            fire.push_back(i);
        }
        for (int i : fire) new_u[i] = sample(i, t);
        for (int i : fire) u[i] = new_u[i];
      }
    }
    while (next_cp < checkpoints.size() && checkpoints[next_cp] <= horizon) {
      res.checkpoints.emplace_back(checkpoints[next_cp], x);
      ++next_cp;
    }
    return res;
  }
};

}  // namespace oracle
