#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "qtrig/seminorm.hpp"
#include "qtrig/simulation.hpp"

using namespace qtrig;
using Catch::Approx;

namespace {

Graph reference_graph() {
  return Graph::from_one_based(6, {{1, 2}, {2, 4}, {4, 6}, {6, 5}, {5, 3}, {3, 1}, {1, 6}});
}

ProtocolParams reference_params(double e0 = 1.0) {
  DesignInputs in;
  in.e0 = e0;
  in.levels = 19;
  in.gamma = 1.0;
  in.dtilde = 3;
  in.agents = {{0.04, 1.0}, {0.09, 1.5}, {0.09, 1.5}, {0.09, 1.5}, {0.09, 1.5}, {0.04, 1.0}};
  const auto g = reference_graph();
  return make_params(g, eigendecompose(build_laplacian(g)), in);
}

std::vector<double> sin_states() {
  std::vector<double> x;
  for (int i = 1; i <= 6; ++i) x.push_back(std::sin(i));
  return x;
}

ProtocolParams params_for(const Graph& g, double e0, int levels, std::vector<AgentTuning> tun) {
  DesignInputs in;
  in.e0 = e0;
  in.levels = levels;
  in.agents = std::move(tun);
  const auto s = eigendecompose(build_laplacian(g));
  const auto p = make_params(g, s, in);
  REQUIRE(validate(g, s, p).feasible());
  return p;
}

oracle::BruteForce brute_force_for(const ProtocolParams& p) {
  oracle::BruteForce bf;
  bf.n = p.agents();
  bf.nbr = p.neighbors;
  bf.delta = p.delta;
  bf.tau_max = p.tau_max;
  bf.gamma_inf = p.gamma_inf;
  bf.e0 = p.e0;
  bf.omega = p.omega;
  bf.levels = p.levels;
  return bf;
}

// Sample times of the engine and the brute-force loop agree one for one.
void compare_with_brute_force(const ProtocolParams& p, const std::vector<double>& x0, double horizon) {
  RunOptions opt;
  opt.horizon = horizon;
  const auto r = run(p, x0, opt);

  std::vector<double> cps;
  for (int m = 1; m <= 20; ++m) cps.push_back(horizon * m / 20.0);
  const auto bf = brute_force_for(p).simulate(x0, horizon, 1e-3, cps);

  std::vector<std::vector<double>> mine(p.agents()), theirs(p.agents());
  for (const auto& e : r.events) mine[e.agent].push_back(e.t_k);
  for (const auto& s : bf.samples) theirs[s.agent].push_back(s.t);
  for (int i = 0; i < p.agents(); ++i) {
    INFO("agent " << i + 1);
    REQUIRE(mine[i].size() == theirs[i].size());
    for (std::size_t k = 0; k < mine[i].size(); ++k) CHECK(mine[i][k] == Approx(theirs[i][k]).margin(1e-8));
  }
  REQUIRE(bf.checkpoints.size() == cps.size());
  for (const auto& [t, x] : bf.checkpoints) {
    const auto y = r.trajectory.state_at(t);
    for (int i = 0; i < p.agents(); ++i) CHECK(y[i] == Approx(x[i]).margin(1e-8));
  }
}

}  // namespace

TEST_CASE("two agents agree with a brute-force closed loop") {
  const auto g = Graph::from_one_based(2, {{1, 2}});
  const auto p = params_for(g, 2.0, 11, {{0.1, 0.8}, {0.1, 0.8}});
  compare_with_brute_force(p, {1.0, -1.0}, 6.0);
}

TEST_CASE("a path with unequal tuning agrees with a brute-force closed loop") {
  const auto g = Graph::from_one_based(4, {{1, 2}, {2, 3}, {3, 4}});
  const auto p = params_for(g, 1.0, 61, {{0.02, 0.5}, {0.03, 0.7}, {0.015, 0.4}, {0.025, 0.6}});
  compare_with_brute_force(p, {0.3, -0.2, 0.1, -0.15}, 4.0);
}

TEST_CASE("reference run satisfies every runtime check") {
  const auto p = reference_params();
  RunOptions opt;
  opt.horizon = 16.0;
  RunResult r;
  REQUIRE_NOTHROW(r = run(p, sin_states(), opt));
  CHECK(r.violations.empty());
  CHECK(r.max_gap(16.0) <= p.quant_range(16.0));
  CHECK(r.max_gap(16.0) < 10.0 / 3.0 * std::exp(-0.2145 * 16.0));

  SECTION("inter-event times and the event-count bound") {
    double bound = 6;
    for (int i = 0; i < 6; ++i) {
      bound += std::ceil(16.0 / p.tau_min_tilde[i]);
      const auto ev = r.agent_events(i);
      for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
        const double tau = ev[k + 1]->t_k - ev[k]->t_k;
        CHECK(tau >= p.tau_min_tilde[i] - 1e-12);
        CHECK(tau <= p.tau_max[i] + 1e-12);
      }
    }
    CHECK(static_cast<double>(r.events.size()) <= bound);
  }

  SECTION("zero transmitted value freezes the state") {
    int zero_segments = 0;
    for (int i = 0; i < 6; ++i) {
      const auto ev = r.agent_events(i);
      for (std::size_t k = 0; k < ev.size(); ++k) {
        if (ev[k]->q_value != 0.0) continue;
        const double t1 = k + 1 < ev.size() ? ev[k + 1]->t_k : 16.0;
        CHECK(r.trajectory.state_at(i, t1) == r.trajectory.state_at(i, ev[k]->t_k));
        if (i == 1 || i == 4) ++zero_segments;
      }
    }
    CHECK(zero_segments > 0);
  }

  SECTION("sampling and quantization error decomposition") {
    for (std::size_t m = 0; m < r.grid.size(); m += 97) {
      const double t = r.grid[m];
      const auto d = error_decomposition(r, t);
      const auto x = r.trajectory.state_at(t);
      for (int i = 0; i < 6; ++i) {
        const auto& ev = r.last_sample(i, t);
        double rel = 0.0;
        for (int j : p.neighbors[i]) rel += x[i] - x[j];
        CHECK(rel == Approx(ev.q_value + d.f[i] + d.g[i]).margin(1e-12));
        CHECK(std::abs(d.f[i]) <= p.delta[i] * p.quant_range(t) * (1 + 1e-9));
        CHECK(std::abs(d.g[i]) <= p.degrees[i] * p.quant_range(ev.t_k) / p.levels * (1 + 1e-12));
      }
    }
  }

  SECTION("ledger replay") {
    CHECK(check_ledger(r.ledger, r.events, p).empty());
    auto broken = r.ledger;
    broken.entries[5].k[0] += 2;
    CHECK_FALSE(check_ledger(broken, r.events, p).empty());
    auto late = r.ledger;
    late.entries[3].t = late.entries[2].t;
    CHECK_FALSE(check_ledger(late, r.events, p).empty());
  }
}

TEST_CASE("trajectory is piecewise linear with u = -q") {
  const auto p = reference_params();
  RunOptions opt;
  opt.horizon = 5.0;
  const auto r = run(p, sin_states(), opt);
  for (int i = 0; i < 6; ++i) {
    const auto& bp = r.trajectory.breakpoints(i);
    REQUIRE(bp.front().t == 0.0);
    CHECK(bp.front().x == std::sin(i + 1));
    for (std::size_t b = 0; b + 1 < bp.size(); ++b)
      CHECK(bp[b + 1].x == Approx(bp[b].x + bp[b].u * (bp[b + 1].t - bp[b].t)).margin(1e-14));
    for (const auto* e : r.agent_events(i)) CHECK(r.trajectory.input_at(i, e->t_k) == -e->q_value);
  }
  CHECK_THROWS_AS(r.trajectory.state_at(5.5), DomainError);
}

TEST_CASE("all agents sample at t = 0 and the horizon closes the run") {
  const auto p = reference_params();
  RunOptions opt;
  opt.horizon = 0.0;
  const auto r = run(p, sin_states(), opt);
  REQUIRE(r.ledger.size() == 1);
  CHECK(r.ledger.entries[0].fired.size() == 6);
  CHECK(r.grid == std::vector<double>{0.0});
}

TEST_CASE("saturation aborts the run") {
  const auto p = reference_params(0.1);
  CHECK_THROWS_AS(run(p, sin_states()), SaturationError);
}

TEST_CASE("runs are deterministic") {
  const auto p = reference_params();
  RunOptions opt;
  opt.horizon = 6.0;
  const auto a = run(p, sin_states(), opt);
  const auto b = run(p, sin_states(), opt);
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t e = 0; e < a.events.size(); ++e) {
    CHECK(a.events[e].t_k == b.events[e].t_k);
    CHECK(a.events[e].q_index == b.events[e].q_index);
  }
}

TEST_CASE("random connected graphs stay inside the envelope") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 6);
    const Graph g(n, oracle::random_connected(n, rng, 0.3));
    // delta takes 30% of the threshold budget lambda2/(2 Gamma_inf) and the
    // quantization term at most 25%.
    const auto s = eigendecompose(build_laplacian(g));
    const double budget = s.lambda2() / (2.0 * gamma_infinity(s, s.lambda2()).value);
    const int r0 = static_cast<int>(std::ceil(2.0 * g.max_degree() / budget));
    std::vector<AgentTuning> tun(n, {0.3 * budget, 0.5});
    const auto p = params_for(g, 1.0, 2 * r0 + 1, tun);
    std::uniform_real_distribution<double> U(-0.5, 0.5);
    std::vector<double> x0(n);
    for (double& x : x0) x = U(rng);
    RunOptions opt;
    opt.horizon = 3.0;
    opt.grid_dt = 1e-2;
    RunResult r;
    REQUIRE_NOTHROW(r = run(p, x0, opt));
    CHECK(r.violations.empty());
  }
}

TEST_CASE("dense grid") {
  EventLedger l;
  l.entries.push_back({0.0, {0}, {0}});
  l.entries.push_back({0.25 + 1e-13, {0}, {1}});
  l.entries.push_back({0.33, {0}, {2}});
  const auto g = dense_grid(1.0, 0.25, l);
  CHECK(g == std::vector<double>{0.0, 0.25, 0.33, 0.5, 0.75, 1.0});
  CHECK_THROWS_AS(dense_grid(1.0, 0.0, l), DomainError);
}
