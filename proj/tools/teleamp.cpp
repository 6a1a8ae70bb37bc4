// Command-line front end: parameter sweeps, μ calibration, validation and figure data.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "teleamp/config.hpp"
#include "teleamp/errors.hpp"
#include "teleamp/harness.hpp"
#include "teleamp/validation.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kUsageError = 2;

using teleamp::Config;
namespace harness = teleamp::harness;

// Resolves the series to run: the named one, the only one, or none.
Config select_series(const Config& cfg, const std::string& series) {
  const auto names = cfg.series_names();
  if (!series.empty()) return cfg.with_series(series);
  if (names.size() == 1) return cfg.with_series(names.front());
  return cfg;
}

int run_sweep(const std::string& config_path, const std::string& out_path, const std::string& series,
              const std::string& fidelity_target) {
  Config cfg = Config::load(config_path);
  if (!fidelity_target.empty()) cfg.set("model.fidelity_target", fidelity_target);

  std::vector<std::string> names;
  if (series.empty() && cfg.series_names().size() > 1) names = cfg.series_names();

  std::ofstream file;
  if (out_path != "-") {
    file.open(out_path);
    if (!file) throw teleamp::ConfigError(fmt::format("cannot write '{}'", out_path));
  }
  std::ostream& out = out_path == "-" ? std::cout : file;

  int failed_rows = 0;
  auto count_errors = [&](const std::vector<harness::SweepRow>& rows) {
    for (const auto& r : rows) failed_rows += r.error.empty() ? 0 : 1;
  };
  if (names.empty()) {
    const auto rows = harness::run_sweep(harness::sweep_spec_from_config(select_series(cfg, series)));
    harness::write_csv_header(out, false);
    harness::write_csv_rows(out, rows);
    count_errors(rows);
  } else {
    harness::write_csv_header(out, true);
    for (const auto& name : names) {
      const auto rows = harness::run_sweep(harness::sweep_spec_from_config(cfg.with_series(name)));
      harness::write_csv_rows(out, rows, name);
      count_errors(rows);
    }
  }
  if (failed_rows > 0) fmt::print(stderr, "warning: {} row(s) carry an error message\n", failed_rows);
  return kOk;
}

int run_solve(const std::string& config_path, const std::string& series, std::optional<double> target,
              std::optional<double> lo, std::optional<double> hi, std::optional<double> tol) {
  const Config cfg = select_series(Config::load(config_path), series);
  const harness::SweepSpec sweep = harness::sweep_spec_from_config(cfg);
  harness::SolveSpec spec = harness::solve_spec_from_config(cfg);
  if (target) spec.target_g_eff = *target;
  if (lo) spec.mu_lo = *lo;
  if (hi) spec.mu_hi = *hi;
  if (tol) spec.tolerance = *tol;
  try {
    const harness::SolveResult r = harness::solve_mu(spec, sweep.model, sweep.params);
    fmt::print("mu = {:.17g}\ngain = {:.17g}\niterations = {}\n", r.mu, r.gain, r.iterations);
    return kOk;
  } catch (const harness::BracketError& e) {
    fmt::print(stderr, "error: {}\nsampled small-amplitude gain:\n  mu, gain\n", e.what());
    for (const auto& s : e.samples()) fmt::print(stderr, "  {:.6g}, {:.10g}\n", s.mu, s.gain);
    return kUsageError;
  }
}

int run_validate(const teleamp::validation::Options& options, bool list) {
  if (list) {
    for (const auto& name : teleamp::validation::check_names()) fmt::print("{}\n", name);
    return kOk;
  }
  const auto report = teleamp::validation::run(options);
  if (report.checks.empty()) {
    fmt::print(stderr, "error: no check matches filter '{}'\n", options.filter);
    return kUsageError;
  }
  fmt::print("{}\n", report.to_json());
  for (const auto& c : report.checks) {
    fmt::print(stderr, "{} {} (measured {:.3e}, tolerance {:.1e})\n", c.passed ? "PASS" : "FAIL", c.name, c.measured,
               c.tolerance);
  }
  return report.all_passed() ? kOk : kValidationFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Teleportation-based noiseless amplifier simulator"};
  app.require_subcommand(1);

  std::string config_path, out_path, series, fidelity_target;
  auto* sweep = app.add_subcommand("sweep", "Evaluate metrics on an amplitude grid and write CSV");
  sweep->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_path, "Output CSV path ('-' for stdout)")->required();
  sweep->add_option("--series", series, "Series of a multi-series config");
  sweep->add_option("--fidelity-target", fidelity_target, "Fidelity reference: gain_alpha or g_eff")
      ->check(CLI::IsMember({"gain_alpha", "g_eff"}));

  std::optional<double> target, lo, hi, tol;
  auto* solve = app.add_subcommand("solve-mu", "Find the auxiliary squeezing mu that gives a target small-amplitude gain");
  solve->add_option("--config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
  solve->add_option("--target", target, "Target effective gain (default: solve.target)");
  solve->add_option("--series", series, "Series of a multi-series config");
  solve->add_option("--lo", lo, "Lower bracket end for mu");
  solve->add_option("--hi", hi, "Upper bracket end for mu");
  solve->add_option("--tol", tol, "Required |gain - target|");

  teleamp::validation::Options vopts;
  bool list = false;
  auto* validate = app.add_subcommand("validate", "Run cross-model invariant checks and print a JSON report");
  validate->add_option("--filter", vopts.filter, "Only run checks whose name contains this text");
  validate->add_option("--fock-dim", vopts.fock_dim, "Fock truncation for the truncation and oracle checks")
      ->check(CLI::PositiveNumber);
  validate->add_flag("--mutate-bs-sign", vopts.mutate_bs_sign, "Use the mirrored beam-splitter sign on (B,D)");
  validate->add_flag("--list", list, "List check names");

  int figure_id = 0;
  std::string out_dir, config_dir = "configs";
  auto* figure = app.add_subcommand("figure", "Write per-panel CSVs for a committed figure config");
  figure->add_option("--id", figure_id, "Figure number")->required()->check(CLI::IsMember({4, 5, 6}));
  figure->add_option("--out-dir", out_dir, "Output directory")->required();
  figure->add_option("--config-dir", config_dir, "Directory holding fig<id>.cfg")->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (sweep->parsed()) return run_sweep(config_path, out_path, series, fidelity_target);
    if (solve->parsed()) return run_solve(config_path, series, target, lo, hi, tol);
    if (validate->parsed()) return run_validate(vopts, list);
    if (figure->parsed()) {
      for (const auto& p : harness::write_figure(figure_id, config_dir, out_dir)) fmt::print("{}\n", p.string());
      return kOk;
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kUsageError;
  }
  return kUsageError;
}
