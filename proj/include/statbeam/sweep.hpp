#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "statbeam/channel.hpp"
#include "statbeam/design.hpp"
#include "statbeam/error.hpp"
#include "statbeam/io.hpp"
#include "statbeam/montecarlo.hpp"
#include "statbeam/parallel.hpp"
#include "statbeam/rates.hpp"

namespace statbeam {

enum class BeamformerChoice { standard_basis, low_snr, high_snr, given };

struct ScenarioConfig {
  std::size_t users = 0;
  std::vector<CovarianceMatrix> covariances;
  std::vector<double> snr_grid_db;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 1;
  std::vector<std::string> methods;
  BeamformerChoice beamformers = BeamformerChoice::standard_basis;
  std::vector<Beamformer> given_beamformers;
  unsigned workers = 0;
  FixedPointOptions fixed_point;
  int grid_resolution = 96;
};

inline const std::vector<std::string>& sweep_methods() {
  static const std::vector<std::string> tags{
      "closed-form",      "closed-form-general", "monte-carlo",         "low-snr",
      "high-snr",         "large-M",             "design-low-snr",      "design-high-snr",
      "design-common-basis", "design-fixed-point", "design-grid-oracle"};
  return tags;
}

inline double snr_db_to_rho(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

namespace detail {

inline std::uint64_t json_count(const Json& j, const std::string& field) {
  const double v = json_number(j, field);
  if (v < 0 || v != std::floor(v) || v > 9.0e15) throw ConfigError(field, "expected a nonnegative integer");
  return static_cast<std::uint64_t>(v);
}

inline CovarianceMatrix covariance_spec(const Json& j, std::size_t users, const std::string& field) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  const std::string kind = j.value("kind", std::string("matrix"));
  const auto m = static_cast<Index>(users);
  try {
    if (kind == "matrix") return covariance_from_json(j, field);
    if (kind == "exponential") {
      if (!j.contains("r")) throw ConfigError(field + ".r", "required for kind exponential");
      const double r = json_number(j["r"], field + ".r");
      const double scale = j.contains("scale") ? json_number(j["scale"], field + ".scale") : 1.0;
      const double angle = j.contains("angle") ? json_number(j["angle"], field + ".angle") : 0.0;
      return steered_exponential_correlation(m, r, scale, angle);
    }
    if (kind == "random-spectrum") {
      if (!j.contains("eigenvalues")) throw ConfigError(field + ".eigenvalues", "required for kind random-spectrum");
      const auto ev = json_numbers(j["eigenvalues"], field + ".eigenvalues");
      const std::uint64_t seed = j.contains("seed") ? json_count(j["seed"], field + ".seed") : 1;
      return random_spectrum_covariance(ev, seed);
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field + ".kind", "unknown kind '" + kind + "' (matrix | exponential | random-spectrum)");
}

}  // namespace detail

/// Parses and validates a scenario document. Errors name the offending field.
inline ScenarioConfig parse_scenario_config(const Json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  ScenarioConfig cfg;
  if (!j.contains("users")) throw ConfigError("users", "required");
  cfg.users = detail::json_count(j["users"], "users");
  if (cfg.users < 1) throw ConfigError("users", "must be at least 1");

  if (!j.contains("covariances") || !j["covariances"].is_array()) throw ConfigError("covariances", "required array");
  if (j["covariances"].size() != cfg.users) throw ConfigError("covariances", "count must equal users");
  for (std::size_t i = 0; i < cfg.users; ++i) {
    const std::string field = "covariances[" + std::to_string(i) + "]";
    cfg.covariances.push_back(detail::covariance_spec(j["covariances"][i], cfg.users, field));
    if (cfg.covariances.back().dim() != static_cast<Index>(cfg.users)) throw ConfigError(field, "must be users x users");
  }

  if (j.contains("snr_grid_db")) cfg.snr_grid_db = detail::json_numbers(j["snr_grid_db"], "snr_grid_db");
  for (double s : cfg.snr_grid_db) {
    if (!std::isfinite(s) || snr_db_to_rho(s) <= 0.0 || !std::isfinite(snr_db_to_rho(s))) {
      throw ConfigError("snr_grid_db", "entries must give a positive finite rho");
    }
  }
  if (j.contains("mc_samples")) cfg.mc_samples = detail::json_count(j["mc_samples"], "mc_samples");
  if (j.contains("seed")) cfg.seed = detail::json_count(j["seed"], "seed");
  if (j.contains("workers")) cfg.workers = static_cast<unsigned>(detail::json_count(j["workers"], "workers"));
  if (j.contains("grid_resolution")) {
    cfg.grid_resolution = static_cast<int>(detail::json_count(j["grid_resolution"], "grid_resolution"));
    if (cfg.grid_resolution < 8) throw ConfigError("grid_resolution", "must be >= 8");
  }

  if (j.contains("methods")) {
    if (!j["methods"].is_array()) throw ConfigError("methods", "expected an array of tags");
    for (const auto& m : j["methods"]) {
      if (!m.is_string()) throw ConfigError("methods", "expected strings");
      const auto tag = m.get<std::string>();
      const auto& known = sweep_methods();
      if (std::find(known.begin(), known.end(), tag) == known.end()) {
        throw ConfigError("methods", "unknown method '" + tag + "'");
      }
      if (std::find(cfg.methods.begin(), cfg.methods.end(), tag) != cfg.methods.end()) {
        throw ConfigError("methods", "duplicate method '" + tag + "'");
      }
      cfg.methods.push_back(tag);
    }
  }
  const bool wants_mc = std::find(cfg.methods.begin(), cfg.methods.end(), "monte-carlo") != cfg.methods.end();
  if (wants_mc && cfg.mc_samples < mc_min_samples) throw ConfigError("mc_samples", "must be >= 1000 for monte-carlo");

  if (j.contains("beamformers")) {
    const Json& b = j["beamformers"];
    if (b.is_string()) {
      const auto tag = b.get<std::string>();
      if (tag == "standard-basis") {
        cfg.beamformers = BeamformerChoice::standard_basis;
      } else if (tag == "low-snr") {
        cfg.beamformers = BeamformerChoice::low_snr;
      } else if (tag == "high-snr") {
        cfg.beamformers = BeamformerChoice::high_snr;
      } else {
        throw ConfigError("beamformers", "unknown choice '" + tag + "' (standard-basis | low-snr | high-snr)");
      }
    } else if (b.is_array()) {
      if (b.size() != cfg.users) throw ConfigError("beamformers", "need one vector per user");
      for (std::size_t i = 0; i < b.size(); ++i) {
        const std::string field = "beamformers[" + std::to_string(i) + "]";
        cfg.given_beamformers.push_back(beamformer_from_json(b[i], field));
        if (cfg.given_beamformers.back().size() != static_cast<Index>(cfg.users)) {
          throw ConfigError(field, "length must equal users");
        }
      }
      cfg.beamformers = BeamformerChoice::given;
    } else {
      throw ConfigError("beamformers", "expected a tag or an array of vectors");
    }
  }

  if (j.contains("fixed_point")) {
    const Json& f = j["fixed_point"];
    if (!f.is_object()) throw ConfigError("fixed_point", "expected an object");
    if (f.contains("tol")) cfg.fixed_point.tol = detail::json_number(f["tol"], "fixed_point.tol");
    if (f.contains("max_iter")) cfg.fixed_point.max_iter = static_cast<int>(detail::json_count(f["max_iter"], "fixed_point.max_iter"));
    if (f.contains("restarts")) cfg.fixed_point.restarts = static_cast<int>(detail::json_count(f["restarts"], "fixed_point.restarts"));
    if (f.contains("seed")) cfg.fixed_point.seed = detail::json_count(f["seed"], "fixed_point.seed");
    if (!(cfg.fixed_point.tol > 0.0)) throw ConfigError("fixed_point.tol", "must be positive");
    if (cfg.fixed_point.max_iter < 1) throw ConfigError("fixed_point.max_iter", "must be >= 1");
  }
  return cfg;
}

inline ScenarioConfig load_scenario_config(const std::string& path) { return parse_scenario_config(read_json_file(path)); }

/// Beamformers used by the rate methods of a sweep.
inline BeamformerSet sweep_beamformers(const ScenarioConfig& cfg) {
  switch (cfg.beamformers) {
    case BeamformerChoice::standard_basis: return BeamformerSet::standard_basis(static_cast<Index>(cfg.users));
    case BeamformerChoice::low_snr: return design_low_snr(cfg.covariances).ws;
    case BeamformerChoice::high_snr: {
      if (cfg.users != 2) throw ConfigError("beamformers", "high-snr beamformers need users = 2");
      return design_high_snr_m2(cfg.covariances[0], cfg.covariances[1]).ws;
    }
    case BeamformerChoice::given: return BeamformerSet::normalized(cfg.given_beamformers);
  }
  return {};
}

struct SweepResult {
  std::string csv;
  std::vector<std::string> warnings;
  std::size_t rows = 0;
  [[nodiscard]] bool complete() const { return warnings.empty(); }
};

namespace detail {

struct SweepCell {
  std::vector<double> rates;
  std::vector<double> errors;  // empty unless Monte Carlo
  std::string warning;
};

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Closed-form rates of a design's beamformers at rho.
inline SweepCell design_cell(const ScenarioConfig& cfg, const std::string& method, double rho) {
  const std::span<const CovarianceMatrix> sigmas(cfg.covariances);
  BeamformerSet ws;
  if (method == "design-low-snr") {
    ws = design_low_snr(sigmas).ws;
  } else if (method == "design-high-snr") {
    if (cfg.users != 2) throw DimensionError("requires M = 2");
    ws = design_high_snr_m2(sigmas[0], sigmas[1]).ws;
  } else if (method == "design-common-basis") {
    if (cfg.users != 2) throw DimensionError("requires M = 2");
    ws = design_common_basis(sigmas[0], sigmas[1]).ws;
  } else if (method == "design-grid-oracle") {
    if (cfg.users != 2) throw DimensionError("requires M = 2");
    GridOracleOptions options;
    options.rho = rho;
    options.resolution = cfg.grid_resolution;
    options.workers = 1;
    ws = grid_search_oracle_m2(sigmas[0], sigmas[1], options).ws;
  } else {
    FixedPointOptions options = cfg.fixed_point;
    options.workers = 1;
    const DesignResult r = fixed_point_design(sigmas, rho, options);
    if (!r.converged) throw InvariantError("fixed-point iteration did not converge");
    ws = r.ws;
  }
  return {closed_form_rates(sigmas, ws, rho).per_user, {}, {}};
}

inline SweepCell sweep_cell(const ScenarioConfig& cfg, const BeamformerSet& ws, const std::string& method,
                            double rho) {
  const std::span<const CovarianceMatrix> sigmas(cfg.covariances);
  if (method == "closed-form") {
    if (cfg.users != 2) throw DimensionError("requires M = 2 (use closed-form-general)");
    return {closed_form_rates(sigmas, ws, rho).per_user, {}, {}};
  }
  if (method == "closed-form-general") {
    std::vector<double> rates;
    for (std::size_t i = 0; i < cfg.users; ++i) rates.push_back(ergodic_rate_general(sigmas[i], ws, i, rho));
    return {rates, {}, {}};
  }
  if (method == "low-snr") return {low_snr_rates(sigmas, ws, rho).per_user, {}, {}};
  if (method == "high-snr") return {high_snr_rates(sigmas, ws).per_user, {}, {}};
  if (method == "large-M") return {large_m_rates(sigmas, ws, rho).per_user, {}, {}};
  return design_cell(cfg, method, rho);
}

}  // namespace detail

/// Evaluates every (snr, method) pair. Rows are ordered by SNR (grid order),
/// then user, then method (config order). A method that does not apply to
/// the scenario is skipped with a "# warning:" line; such a sweep is not
/// complete. Output is byte-identical for a fixed config and any worker count.
inline SweepResult run_sweep(const ScenarioConfig& cfg) {
  if (cfg.snr_grid_db.empty()) throw ConfigError("snr_grid_db", "must be nonempty");
  if (cfg.methods.empty()) throw ConfigError("methods", "must be nonempty");
  if (cfg.covariances.size() != cfg.users) throw ConfigError("covariances", "count must equal users");
  const BeamformerSet ws = sweep_beamformers(cfg);
  const std::size_t n_snr = cfg.snr_grid_db.size(), n_methods = cfg.methods.size();
  std::vector<double> rhos;
  for (double s : cfg.snr_grid_db) rhos.push_back(snr_db_to_rho(s));

  std::vector<detail::SweepCell> cells(n_snr * n_methods);
  parallel_for(cells.size(), cfg.workers, [&](std::size_t k) {
    const std::size_t s = k / n_methods, m = k % n_methods;
    if (cfg.methods[m] == "monte-carlo") return;
    try {
      cells[k] = detail::sweep_cell(cfg, ws, cfg.methods[m], rhos[s]);
    } catch (const std::exception& e) {
      cells[k].warning = cfg.methods[m] + " skipped at snr_db=" + detail::format_number(cfg.snr_grid_db[s]) + ": " +
                         e.what();
    }
  });

  const auto mc = std::find(cfg.methods.begin(), cfg.methods.end(), "monte-carlo");
  if (mc != cfg.methods.end()) {
    const auto m = static_cast<std::size_t>(mc - cfg.methods.begin());
    for (std::size_t s = 0; s < n_snr; ++s) {
      cells[s * n_methods + m].rates.assign(cfg.users, 0.0);
      cells[s * n_methods + m].errors.assign(cfg.users, 0.0);
    }
    for (std::size_t i = 0; i < cfg.users; ++i) {
      const auto est = mc_ergodic_rates(cfg.covariances, ws, i, rhos, cfg.mc_samples, cfg.seed, cfg.workers);
      for (std::size_t s = 0; s < n_snr; ++s) {
        cells[s * n_methods + m].rates[i] = est[s].mean;
        cells[s * n_methods + m].errors[i] = est[s].standard_error;
      }
    }
  }

  SweepResult out;
  std::string body;
  for (std::size_t s = 0; s < n_snr; ++s) {
    for (std::size_t i = 0; i < cfg.users; ++i) {
      for (std::size_t m = 0; m < n_methods; ++m) {
        const auto& cell = cells[s * n_methods + m];
        if (!cell.warning.empty()) continue;
        double sum = 0.0;
        for (double r : cell.rates) sum += r;
        body += detail::format_number(cfg.snr_grid_db[s]) + "," + std::to_string(i) + "," + cfg.methods[m] + "," +
                detail::format_number(cell.rates[i]) + "," +
                (cell.errors.empty() ? std::string() : detail::format_number(cell.errors[i])) + "," +
                detail::format_number(sum) + "\n";
        ++out.rows;
      }
    }
  }
  for (const auto& cell : cells)
    if (!cell.warning.empty()) out.warnings.push_back(cell.warning);

  out.csv = "# rho = 10^(snr_db/10) is the linear total transmit power (unit noise variance); rates in nats\n";
  out.csv += "# users are indexed from 0; stderr is empty for non-Monte-Carlo methods\n";
  for (const auto& w : out.warnings) out.csv += "# warning: " + w + "\n";
  out.csv += "snr_db,user,method,rate_nats,stderr,sum_rate_nats\n";
  out.csv += body;
  return out;
}

}  // namespace statbeam
