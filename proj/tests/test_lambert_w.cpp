#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qtrig/lambert_w.hpp"

using namespace qtrig;
using Catch::Approx;

TEST_CASE("principal branch at known points") {
  CHECK(lambert_w0(0.0) == 0.0);
  CHECK(lambert_w0(std::numbers::e) == Approx(1.0).epsilon(1e-15));
  CHECK(lambert_w0(1.0) == Approx(oracle::lambert_bisect(1.0, 0)).margin(1e-14));
  CHECK(lambert_w0(1.0) == Approx(0.5671432904097838).margin(1e-14));
  CHECK(lambert_w0(-1.0 / std::numbers::e) == -1.0);
}

TEST_CASE("secondary branch at known points") {
  const double inv_e = 1.0 / std::numbers::e;
  CHECK(lambert_wm1(-inv_e) == -1.0);
  CHECK(lambert_wm1(-2.0 * std::exp(-2.0)) == Approx(-2.0).margin(1e-12));
  CHECK(lambert_wm1(-0.1) == Approx(oracle::lambert_bisect(-0.1, -1)).margin(1e-12));
  CHECK(lambert_wm1(-0.1) == Approx(-3.577152063957297).margin(1e-10));
}

TEST_CASE("domain errors and branch-point clamping") {
  const double inv_e = 1.0 / std::numbers::e;
  CHECK_THROWS_AS(lambert_w0(-0.5), DomainError);
  CHECK_THROWS_AS(lambert_wm1(0.0), DomainError);
  CHECK_THROWS_AS(lambert_wm1(0.5), DomainError);
  CHECK_THROWS_AS(lambert_wm1(-0.5), DomainError);
  CHECK_THROWS_AS(lambert_w0(std::nan("")), DomainError);
  CHECK(lambert_w0(-inv_e - 5e-15) == -1.0);
  CHECK(lambert_wm1(-inv_e - 5e-15) == -1.0);
  CHECK_THROWS_AS(lambert_w0(-inv_e - 1e-12), DomainError);
}

TEST_CASE("round trip x -> x e^x -> W on both branches") {
  for (int m = 0; m <= 400; ++m) {
    const double x = -1.0 + 21.0 * m / 400.0;  // [-1, 20]
    const double y = x * std::exp(x);
    CHECK(lambert_w0(y) == Approx(x).epsilon(1e-11).margin(1e-7));
  }
  for (int m = 0; m <= 400; ++m) {
    const double x = -20.0 + 19.0 * m / 400.0;  // [-20, -1]
    const double y = x * std::exp(x);
    // Near the branch point W is a square-root function of y, so a tiny
    // residual in y becomes a larger error in x.
    const double tol = x > -1.05 ? 1e-6 : 1e-10;
    CHECK(lambert_wm1(y) == Approx(x).epsilon(tol));
  }
}

TEST_CASE("branch ordering and monotonicity") {
  const double inv_e = 1.0 / std::numbers::e;
  double prev0 = -2.0;
  double prevm1 = 0.0;
  for (int m = 1; m < 500; ++m) {
    const double y = -inv_e + inv_e * m / 500.0;
    const double w0 = lambert_w0(y);
    const double wm = lambert_wm1(y);
    CHECK(wm <= -1.0);
    CHECK(w0 >= -1.0);
    CHECK(w0 > prev0);
    if (m > 1) CHECK(wm < prevm1);
    prev0 = w0;
    prevm1 = wm;
  }
}

TEST_CASE("residual bound on documented grids") {
  const double inv_e = 1.0 / std::numbers::e;
  auto residual = [](double w, double y) { return std::abs(w * std::exp(w) - y); };
  for (int m = 0; m <= 2000; ++m) {
    const double y = -inv_e + (inv_e + 10.0) * m / 2000.0;
    CHECK(residual(lambert_w0(y), y) <= 1e-13 * std::max(1.0, std::abs(y)));
  }
  for (int m = 1; m <= 2000; ++m) {
    const double y = -inv_e * m / 2000.0;
    CHECK(residual(lambert_wm1(y), y) <= 1e-13 * std::max(1.0, std::abs(y)));
  }
  for (int e = -300; e <= 300; e += 5) {
    const double y = std::pow(10.0, e);
    CHECK(residual(lambert_w0(y), y) <= 1e-13 * std::max(1.0, std::abs(y)));
  }
}

TEST_CASE("W0 of an exponential stays finite for huge exponents") {
  CHECK(lambert_w0_exp(0.0) == Approx(lambert_w0(1.0)).epsilon(1e-15));
  CHECK(lambert_w0_exp(100.0) == Approx(lambert_w0(std::exp(100.0))).epsilon(1e-14));
  const double w = lambert_w0_exp(2000.0);
  CHECK(std::isfinite(w));
  CHECK(w + std::log(w) == Approx(2000.0).epsilon(1e-15));
  CHECK(lambert_w0_exp(-50.0) == Approx(std::exp(-50.0)).epsilon(1e-12));
}

TEST_CASE("linear-exponential crossing") {
  auto check_root = [](double a, double c, double omega) {
    const double x = solve_linear_exp(a, c, omega);
    CHECK(x >= c);
    CHECK(std::abs(a * (x - c) - std::exp(-omega * x)) <= 1e-12);
    const double want =
        oracle::bisect([&](double s) { return a * (s - c) - std::exp(-omega * s); }, c, c + 1.0 / a + 1.0);
    CHECK(x == Approx(want).margin(1e-12));
  };
  CHECK(solve_linear_exp(1.0, 0.0, 1.0) == Approx(0.5671432904097838).margin(1e-12));
  CHECK(solve_linear_exp(std::numbers::e, 0.0, 1.0) == Approx(0.2784645427610738).margin(1e-12));
  CHECK(solve_linear_exp(1.0, 1.0, 1.0) == Approx(1.2784645427610738).margin(1e-12));
  check_root(1.0, 0.0, 1.0);
  check_root(3.0, -2.0, 0.5);
  check_root(0.01, 4.0, 2.0);
  CHECK_THROWS_AS(solve_linear_exp(0.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(solve_linear_exp(1.0, 0.0, -1.0), DomainError);
}
