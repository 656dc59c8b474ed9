#pragma once

// Real branches W0 and W-1 of the Lambert W-function, the inverse of x*exp(x).

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qtrig/errors.hpp"

namespace qtrig {

namespace lambert_detail {

inline constexpr double kInvE = 0.36787944117144232159552377016146086744581113103176;
inline constexpr double kBranchClamp = 1e-14;
inline constexpr int kMaxIterations = 50;

// Branch-point expansion in p = sqrt(2(e*y + 1)); sign +1 for W0, -1 for W-1.
inline double branch_series(double y, double sign) {
  const double p = sign * std::sqrt(std::max(0.0, 2.0 * (std::numbers::e * y + 1.0)));
  return -1.0 + p * (1.0 + p * (-1.0 / 3.0 + p * (11.0 / 72.0 + p * (-43.0 / 540.0))));
}

// Halley iteration on x*exp(x) - y. Stops on a negligible step or a residual
// at rounding level, which is what happens first next to the branch point.
inline double halley(double y, double x, const char* name) {
  for (int it = 0; it < kMaxIterations; ++it) {
    const double ex = std::exp(x);
    const double f = x * ex - y;
    const double scale = std::max(std::abs(y), std::abs(x * ex));
    if (std::abs(f) <= 2.0 * std::numeric_limits<double>::epsilon() * scale) return x;
    const double xp1 = x + 1.0;
    if (xp1 == 0.0) return x;
    const double denom = ex * xp1 - (x + 2.0) * f / (2.0 * xp1);
    const double step = f / denom;
    x -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(x)))
      return x;
  }
  throw NumericError(std::string(name) + ": Halley iteration did not converge for y=" +
                     std::to_string(y));
}

inline double clamp_to_branch_point(double y, const char* name) {
  if (y < -kInvE) {
    if (y < -kInvE - kBranchClamp)
      throw DomainError(std::string(name) + ": argument below -1/e: " + std::to_string(y));
    return -kInvE;
  }
  return y;
}

}  // namespace lambert_detail

/// Principal branch: x >= -1 with x*exp(x) = y, for y >= -1/e.
inline double lambert_w0(double y) {
  using namespace lambert_detail;
  if (std::isnan(y)) throw DomainError("lambert_w0: NaN argument");
  y = clamp_to_branch_point(y, "lambert_w0");
  if (y == -kInvE) return -1.0;
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return y;

  double x0;
  if (std::numbers::e * y + 1.0 < 0.3) {
    x0 = branch_series(y, +1.0);
  } else if (y <= std::numbers::e) {
    x0 = std::log1p(y);
  } else {
    const double l1 = std::log(y);
    const double l2 = std::log(l1);
    x0 = l1 - l2 + l2 / l1;
  }
  return halley(y, x0, "lambert_w0");
}

/// Secondary branch: x <= -1 with x*exp(x) = y, for -1/e <= y < 0.
inline double lambert_wm1(double y) {
  using namespace lambert_detail;
  if (std::isnan(y) || y >= 0.0)
    throw DomainError("lambert_wm1: argument must lie in [-1/e, 0): " + std::to_string(y));
  y = clamp_to_branch_point(y, "lambert_wm1");
  if (y == -kInvE) return -1.0;

  double x0;
  if (std::numbers::e * y + 1.0 < 0.25) {
    x0 = branch_series(y, -1.0);
  } else {
    const double l1 = std::log(-y);
    const double l2 = std::log(-l1);
    x0 = l1 - l2 + l2 / l1;
  }
  const double x = halley(y, x0, "lambert_wm1");
  return std::min(x, -1.0);
}

/// W0(exp(z)) without forming exp(z); stays finite for any real z.
inline double lambert_w0_exp(double z) {
  if (std::isnan(z)) throw DomainError("lambert_w0_exp: NaN argument");
  if (z < 500.0) return lambert_w0(std::exp(z));
  // Newton on w + log(w) = z; w is large here so the map is nearly linear.
  double w = z - std::log(z);
  for (int it = 0; it < lambert_detail::kMaxIterations; ++it) {
    const double step = (w + std::log(w) - z) / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * w) return w;
  }
  throw NumericError("lambert_w0_exp: Newton iteration did not converge");
}

/// The unique x >= c solving a*(x - c) = exp(-omega*x), for a, omega > 0.
inline double solve_linear_exp(double a, double c, double omega) {
  if (!(a > 0.0) || !(omega > 0.0))
    throw DomainError("solve_linear_exp: requires a > 0 and omega > 0");
  return lambert_w0_exp(std::log(omega / a) - omega * c) / omega + c;
}

}  // namespace qtrig
