// qtrig: design, simulate and check quantized self-triggered consensus runs.
//
// Exit status: 0 success, 1 I/O error, 2 infeasible design, 3 runtime
// assertion or failed check suite, 4 malformed configuration.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qtrig/qtrig.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kIo = 1, kInfeasible = 2, kRuntime = 3, kParse = 4 };

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<double> horizon;
  std::optional<double> grid_dt;
  std::optional<std::uint64_t> seed;
  bool force = false;
  bool plot = false;
  int sweep = 0;
};

fs::path output_dir(const Options& o, const qtrig::RunConfig& c) {
  if (o.out) return *o.out;
  if (c.output_dir) return *c.output_dir;
  if (const char* env = std::getenv("QTRIG_OUT"); env != nullptr && *env != '\0') return env;
  return "qtrig_out";
}

qtrig::RunConfig load(const Options& o) {
  auto c = qtrig::load_config(o.config);
  if (o.horizon) {
    if (!(*o.horizon >= 0.0)) throw qtrig::ConfigError("--horizon must be nonnegative");
    c.horizon = *o.horizon;
  }
  if (o.grid_dt) {
    if (!(*o.grid_dt > 0.0)) throw qtrig::ConfigError("--grid-dt must be positive");
    c.grid_dt = *o.grid_dt;
  }
  if (o.seed) {
    c.seed = *o.seed;
    c.initial_states.reset();
  }
  return c;
}

qtrig::DesignReport design_of(const qtrig::RunConfig& c, const std::vector<double>& x0) {
  const auto g = c.graph();
  const auto spec = qtrig::eigendecompose(qtrig::build_laplacian(g));
  const auto params = qtrig::make_params(g, spec, c.design_inputs());
  return qtrig::validate(g, spec, params, x0);
}

void print_verdicts(const qtrig::DesignReport& rep) {
  for (const auto& v : rep.verdicts)
    std::cout << (v.pass ? "ok   " : "FAIL ") << v.condition << ": " << v.detail << '\n';
}

int cmd_design(const Options& o) {
  const auto c = load(o);
  const auto rep = design_of(c, qtrig::initial_states(c));
  const auto dir = output_dir(o, c);
  qtrig::write_design(dir, rep);
  const auto& p = rep.params;
  std::cout << "lambda2      " << qtrig::fmt(rep.lambda2) << '\n'
            << "gamma_inf    " << qtrig::fmt(p.gamma_inf) << '\n'
            << "omega_tilde  " << qtrig::fmt(p.omega_tilde) << '\n'
            << "omega        " << qtrig::fmt(p.omega) << '\n'
            << "min_R        " << (rep.min_levels ? std::to_string(*rep.min_levels) : "none") << '\n';
  print_verdicts(rep);
  std::cout << "wrote " << (dir / "design.json").string() << '\n';
  return rep.feasible() ? kOk : kInfeasible;
}

// One simulation into `dir`; returns the exit status.
int simulate_one(const Options& o, const qtrig::RunConfig& c, const fs::path& dir,
                 std::ostream& log) {
  const auto x0 = qtrig::initial_states(c);
  const auto rep = design_of(c, x0);
  qtrig::write_design(dir, rep);
  if (!rep.feasible()) {
    for (const auto* v : rep.failures()) log << "design: " << v->condition << ": " << v->detail << '\n';
    if (!o.force) return kInfeasible;
    log << "continuing because of --force\n";
  }
  qtrig::RunOptions ro;
  ro.horizon = c.horizon;
  ro.grid_dt = c.grid_dt;
  ro.enforce = false;
  try {
    const auto r = qtrig::run(rep.params, x0, ro);
    qtrig::write_run(dir, r, o.plot);
    log << "simulated [0, " << qtrig::fmt(c.horizon) << "]: " << r.events.size() << " samples, "
        << r.ledger.size() << " event times, final gap " << qtrig::fmt(r.max_gap(c.horizon))
        << '\n';
    for (const auto& v : r.violations) log << "violation: " << v << '\n';
    log << "wrote " << dir.string() << '\n';
    return r.violations.empty() ? kOk : kRuntime;
  } catch (const qtrig::SaturationError& e) {
    log << "runtime: " << e.what() << '\n';
    return kRuntime;
  } catch (const qtrig::LedgerError& e) {
    log << "runtime: " << e.what() << '\n';
    return kRuntime;
  } catch (const qtrig::DomainError& e) {
    log << "runtime: " << e.what() << '\n';
    return kRuntime;
  }
}

int cmd_simulate(const Options& o) {
  const auto c = load(o);
  const auto dir = output_dir(o, c);
  if (o.sweep <= 0) return simulate_one(o, c, dir, std::cout);

  // Independent seeds, one thread each; every run owns its config copy.
  const std::uint64_t base = o.seed.value_or(c.seed);
  std::vector<int> status(o.sweep, kOk);
  std::vector<std::ostringstream> logs(o.sweep);
  std::vector<std::thread> workers;
  for (int s = 0; s < o.sweep; ++s) {
    workers.emplace_back([&, s] {
      qtrig::RunConfig cs = c;
      cs.seed = base + static_cast<std::uint64_t>(s);
      cs.initial_states.reset();
      try {
        status[s] = simulate_one(o, cs, dir / ("seed_" + std::to_string(cs.seed)), logs[s]);
      } catch (const std::exception& e) {
        logs[s] << "error: " << e.what() << '\n';
        status[s] = kIo;
      }
    });
  }
  for (auto& w : workers) w.join();
  int worst = kOk;
  for (int s = 0; s < o.sweep; ++s) {
    std::cout << "[seed " << base + s << "] " << logs[s].str();
    worst = std::max(worst, status[s]);
  }
  return worst;
}

int cmd_check(const Options& o) {
  const auto c = load(o);
  const auto suites = qtrig::run_checks(c);
  const auto dir = output_dir(o, c);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "checks.json", std::ios::binary);
    if (!out) throw qtrig::IoError("cannot write " + (dir / "checks.json").string());
    out << qtrig::checks_json(suites).dump(2) << '\n';
  }
  bool all = true;
  for (const auto& s : suites) {
    std::cout << (s.pass ? "PASS " : "FAIL ") << s.name << " (" << s.checked << " checks)";
    if (!s.pass) std::cout << ": " << s.detail;
    std::cout << '\n';
    all = all && s.pass;
  }
  return all ? kOk : kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantized self-triggered consensus: design, simulate, check"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON configuration file")->required();
    sub->add_option("--out", o.out, "output directory (default: config output_dir, $QTRIG_OUT)");
    sub->add_option("--horizon", o.horizon, "simulation horizon T");
    sub->add_option("--grid-dt", o.grid_dt, "export grid spacing");
    sub->add_option("--seed", o.seed, "draw initial states from this seed");
  };
  auto* design = app.add_subcommand("design", "compute design constants and verdicts");
  common(design);
  auto* simulate = app.add_subcommand("simulate", "run the closed loop and export CSVs");
  common(simulate);
  simulate->add_flag("--force", o.force, "simulate even when a design verdict fails");
  simulate->add_flag("--emit-plot-data", o.plot, "also write per-figure CSVs");
  simulate->add_option("--sweep", o.sweep, "run K consecutive seeds in parallel")
      ->check(CLI::NonNegativeNumber);
  auto* check = app.add_subcommand("check", "run the property suites");
  common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kParse;
  }

  try {
    if (*design) return cmd_design(o);
    if (*simulate) return cmd_simulate(o);
    return cmd_check(o);
  } catch (const qtrig::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kParse;
  } catch (const qtrig::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const qtrig::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
