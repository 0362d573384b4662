// Command-line front end: SNR sweeps, validation suites and beamformer design.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "statbeam/statbeam.hpp"

namespace {

using namespace statbeam;

int run_sweep_command(const std::string& config_path, const std::string& out_path, std::optional<unsigned> workers) {
  ScenarioConfig cfg = load_scenario_config(config_path);
  if (workers) cfg.workers = *workers;
  const SweepResult result = run_sweep(cfg);
  write_text_file(out_path, result.csv);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << result.rows << " rows written to " << out_path << "\n";
  return result.complete() ? 0 : 1;
}

int run_validate_command(const std::string& suite, const std::string& out_path, std::optional<unsigned> workers,
                         std::optional<std::uint64_t> seed) {
  ValidationOptions options;
  if (workers) options.workers = *workers;
  if (seed) options.seed = *seed;
  const ValidationReport report = run_validation(suite, options);
  for (const auto& c : report.checks) {
    std::printf("%s  %s: measured %.6g, threshold %s %.6g%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.measured, c.comparison.c_str(), c.threshold, c.detail.empty() ? "" : " | ", c.detail.c_str());
  }
  std::printf("suite %s: %s\n", suite.c_str(), report.passed() ? "PASS" : "FAIL");
  if (!out_path.empty()) write_text_file(out_path, report_to_json(report).dump(2) + "\n");
  return report.passed() ? 0 : 1;
}

int run_design_command(const std::string& config_path, const std::string& method_tag, const std::string& out_path,
                       std::optional<double> snr_db, bool high_snr, std::optional<unsigned> workers) {
  const ScenarioConfig cfg = load_scenario_config(config_path);
  const auto method = parse_design_method(method_tag);
  if (!method) throw ConfigError("method", "unknown design method '" + method_tag + "'");
  const std::span<const CovarianceMatrix> sigmas(cfg.covariances);

  std::optional<double> rho;
  if (snr_db) {
    rho = snr_db_to_rho(*snr_db);
  } else if (!cfg.snr_grid_db.empty()) {
    rho = snr_db_to_rho(cfg.snr_grid_db.front());
  }
  auto need_two_users = [&] {
    if (cfg.users != 2) throw ConfigError("users", "method " + method_tag + " needs users = 2");
  };

  DesignResult result;
  switch (*method) {
    case DesignMethod::low_snr: result = design_low_snr(sigmas); break;
    case DesignMethod::high_snr_gev:
      need_two_users();
      result = design_high_snr_m2(sigmas[0], sigmas[1]);
      break;
    case DesignMethod::common_basis:
      need_two_users();
      result = design_common_basis(sigmas[0], sigmas[1]);
      break;
    case DesignMethod::grid_oracle: {
      need_two_users();
      GridOracleOptions options;
      if (!high_snr) options.rho = rho;
      options.resolution = cfg.grid_resolution;
      options.workers = workers.value_or(cfg.workers);
      result = grid_search_oracle_m2(sigmas[0], sigmas[1], options);
      break;
    }
    case DesignMethod::fixed_point: {
      if (!rho) throw ConfigError("snr_grid_db", "fixed-point design needs --snr-db or a nonempty snr_grid_db");
      FixedPointOptions options = cfg.fixed_point;
      options.workers = workers.value_or(cfg.workers);
      result = fixed_point_design(sigmas, *rho, options);
      break;
    }
  }
  if (rho && *method != DesignMethod::low_snr && !(high_snr && *method == DesignMethod::grid_oracle)) {
    result.diagnostics["rho"] = *rho;
  }
  write_text_file(out_path, design_to_json(result).dump(2) + "\n");
  std::cerr << to_string(result.method) << ": objective " << result.objective << " nats"
            << (result.converged ? "" : " (not converged)") << "\n";
  return result.converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ergodic sum-rates and statistical beamformer design for correlated MISO broadcast channels"};
  app.require_subcommand(1);

  std::string config_path, out_path, suite, method;
  std::optional<unsigned> workers;
  std::optional<std::uint64_t> seed;
  std::optional<double> snr_db;
  bool high_snr = false;

  auto* sweep = app.add_subcommand("sweep", "Evaluate rate methods over an SNR grid and write CSV");
  sweep->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_path, "Output CSV path")->required();
  sweep->add_option("--workers", workers, "Worker threads (0 = hardware)");

  auto* validate = app.add_subcommand("validate", "Run a validation suite");
  validate->add_option("--suite", suite, "Suite tag")->required()->check(CLI::IsMember(validation_suites()));
  validate->add_option("--out", out_path, "Optional JSON report path");
  validate->add_option("--workers", workers, "Worker threads (0 = hardware)");
  validate->add_option("--seed", seed, "Override the suite seed");

  auto* design = app.add_subcommand("design", "Compute beamformers and write JSON");
  design->add_option("--config", config_path, "Scenario JSON")->required()->check(CLI::ExistingFile);
  design->add_option("--method", method, "low-snr | high-snr-gev | common-basis | grid-oracle | fixed-point")
      ->required();
  design->add_option("--out", out_path, "Output JSON path")->required();
  design->add_option("--snr-db", snr_db, "Design SNR in dB (default: first entry of snr_grid_db)");
  design->add_flag("--high-snr", high_snr, "grid-oracle: maximize the high-SNR asymptote");
  design->add_option("--workers", workers, "Worker threads (0 = hardware)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return run_sweep_command(config_path, out_path, workers);
    if (*validate) return run_validate_command(suite, out_path, workers, seed);
    return run_design_command(config_path, method, out_path, snr_db, high_snr, workers);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
