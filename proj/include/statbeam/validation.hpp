#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "statbeam/channel.hpp"
#include "statbeam/design.hpp"
#include "statbeam/error.hpp"
#include "statbeam/fixtures.hpp"
#include "statbeam/io.hpp"
#include "statbeam/montecarlo.hpp"
#include "statbeam/rates.hpp"
#include "statbeam/sweep.hpp"

namespace statbeam {

struct ValidationCheck {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  std::string comparison;  // how measured relates to threshold when passing, e.g. "<="
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::string suite;
  std::vector<ValidationCheck> checks;

  [[nodiscard]] bool passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

struct ValidationOptions {
  std::uint64_t seed = 20240601;
  unsigned workers = 0;
  std::size_t mc_samples = 1000000;
  std::size_t density_samples = 100000;
  std::size_t asymptotic_samples = 100000;
  int grid_resolution = 96;
};

inline const std::vector<std::string>& validation_suites() {
  static const std::vector<std::string> tags{"closed-form-vs-mc", "density-uniform", "optimality-oracle",
                                             "asymptotic-M", "fixed-point"};
  return tags;
}

inline Json report_to_json(const ValidationReport& report) {
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"threshold", c.threshold},
                      {"comparison", c.comparison},
                      {"passed", c.passed},
                      {"detail", c.detail}});
  }
  return {{"suite", report.suite}, {"passed", report.passed()}, {"checks", checks}};
}

namespace detail {

inline ValidationCheck at_most(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), measured, threshold, "<=", measured <= threshold, std::move(detail)};
}

inline ValidationCheck at_least(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), measured, threshold, ">=", measured >= threshold, std::move(detail)};
}

inline constexpr double validation_rhos[] = {0.1, 1.0, 10.0, 100.0, 1e4};

// Fraction of (scenario, rho, user) cells where closed form and MC agree
// within three standard errors.
inline double three_sigma_fraction(Index m, std::uint32_t scenarios, const ValidationOptions& opt,
                                   std::uint32_t first_index, bool require_distinct) {
  std::size_t cells = 0, inside = 0;
  std::uint32_t used = 0;
  for (std::uint32_t index = first_index; used < scenarios; ++index) {
    const Scenario sc = random_scenario(m, opt.seed, index);
    if (require_distinct) {
      bool distinct = true;
      for (std::size_t i = 0; i < sc.ws.size(); ++i) {
        const RealVector ev = effective_spectrum_general(sc.sigmas[i], sc.ws, i).signal_plus_interference;
        for (Index k = 1; k < ev.size(); ++k) distinct = distinct && ev(k - 1) - ev(k) > 1e-3 * ev(0);
      }
      if (!distinct) continue;
    }
    ++used;
    for (std::size_t i = 0; i < sc.ws.size(); ++i) {
      const auto est = mc_ergodic_rates(sc.sigmas, sc.ws, i, validation_rhos, opt.mc_samples, opt.seed + index,
                                        opt.workers);
      for (std::size_t r = 0; r < std::size(validation_rhos); ++r) {
        const double exact = m == 2 ? ergodic_rate_m2(sc.sigmas[i], sc.ws[i], sc.ws[1 - i], validation_rhos[r])
                                    : ergodic_rate_general(sc.sigmas[i], sc.ws, i, validation_rhos[r]);
        ++cells;
        if (std::abs(exact - est[r].mean) <= 3.0 * est[r].standard_error) ++inside;
      }
    }
  }
  return static_cast<double>(inside) / static_cast<double>(cells);
}

inline ValidationReport validate_closed_form(const ValidationOptions& opt) {
  ValidationReport rep{"closed-form-vs-mc", {}};
  rep.checks.push_back(at_least("two-user closed form within 3 stderr of MC (fraction of cells)",
                                three_sigma_fraction(2, 20, opt, 0, false), 0.97));
  for (Index m : {3, 4}) {
    rep.checks.push_back(at_least("M=" + std::to_string(m) + " partial fractions within 3 stderr of MC (fraction)",
                                  three_sigma_fraction(m, 10, opt, 1000 * static_cast<std::uint32_t>(m), true), 0.97));
  }
  double worst = 0.0;
  for (std::uint32_t k = 0; k < 50; ++k) {
    const Scenario sc = random_scenario(2, opt.seed, 5000 + k);
    for (double rho : validation_rhos) {
      for (std::size_t i = 0; i < 2; ++i) {
        worst = std::max(worst, std::abs(ergodic_rate_general(sc.sigmas[i], sc.ws, i, rho) -
                                         ergodic_rate_m2(sc.sigmas[i], sc.ws[i], sc.ws[1 - i], rho)));
      }
    }
  }
  rep.checks.push_back(at_most("general formula reduces to the two-user formula (max abs diff)", worst, 1e-9));
  return rep;
}

inline ValidationReport validate_density(const ValidationOptions& opt) {
  ValidationReport rep{"density-uniform", {}};
  const double critical = 1.63 / std::sqrt(static_cast<double>(opt.density_samples));
  int passing = 0;
  std::string values;
  for (std::uint32_t k = 0; k < 10; ++k) {
    RandomStream rs(opt.seed, stream_id(StreamPurpose::fixture, 7000 + k));
    const std::vector<double> spectrum = random_distinct_spectrum(2, rs);
    const EmpiricalCdf cdf = mc_quadratic_form_density(spectrum, opt.density_samples, opt.seed + 7000 + k, opt.workers);
    const double ks = ks_distance_uniform(cdf, spectrum[1], spectrum[0]);
    if (ks < critical) ++passing;
    values += (values.empty() ? "KS = " : ", ") + format_number(ks);
  }
  rep.checks.push_back(at_least("spectra with KS distance below 1.63/sqrt(n) (of 10)", passing, 9,
                                values + "; critical " + format_number(critical)));
  return rep;
}

inline ValidationReport validate_optimality(const ValidationOptions& opt) {
  ValidationReport rep{"optimality-oracle", {}};
  const double rho_low = 1e-4;
  double worst_angle = 0.0, worst_rel = -1.0;
  for (std::uint32_t k = 0; k < 10; ++k) {
    const auto s = random_pd_pair(opt.seed, 8000 + k);
    const DesignResult low = design_low_snr(s);
    GridOracleOptions go;
    go.rho = rho_low;
    go.resolution = opt.grid_resolution;
    go.workers = opt.workers;
    const DesignResult oracle = grid_search_oracle_m2(s[0], s[1], go);
    const double design_value = closed_form_rates(s, low.ws, rho_low).sum;
    worst_rel = std::max(worst_rel, (oracle.objective - design_value) / design_value);
    for (std::size_t i = 0; i < 2; ++i) worst_angle = std::max(worst_angle, principal_angle(oracle.ws[i], low.ws[i]));
  }
  rep.checks.push_back(at_most("low-SNR oracle argmax vs dominant eigenvectors (max principal angle)", worst_angle,
                               std::numbers::pi / 96.0));
  rep.checks.push_back(at_most("low-SNR oracle objective excess over design (relative)", worst_rel, 1e-3));

  double worst_gap = 0.0;
  for (std::uint32_t k = 0; k < 10; ++k) {
    const auto s = random_pd_pair(opt.seed, 9000 + k);
    const DesignResult gev = design_high_snr_m2(s[0], s[1]);
    GridOracleOptions go;
    go.resolution = opt.grid_resolution;
    go.workers = opt.workers;
    const DesignResult oracle = grid_search_oracle_m2(s[0], s[1], go);
    worst_gap = std::max(worst_gap, std::abs(oracle.objective - gev.objective));
  }
  rep.checks.push_back(at_most("high-SNR oracle vs generalized-eigenvector design (max gap, nats)", worst_gap, 1e-3));

  double worst_common = 0.0;
  const double kappas[][2] = {{4.0, 2.0}, {4.0, 0.5}, {2.0, 4.0}, {3.0, 1.0}, {6.0, 1.5}, {1.5, 8.0}};
  std::uint32_t index = 0;
  for (const auto& kk : kappas) {
    const auto s = commuting_pair(kk[0], kk[1], opt.seed, 9500 + index++);
    const double expected = high_snr_sum_rate_common_basis(kk[0], kk[1]);
    const DesignResult common = design_common_basis(s[0], s[1]);
    const DesignResult gev = design_high_snr_m2(s[0], s[1]);
    worst_common = std::max(worst_common, std::abs(high_snr_sum_rate_m2(s[0], s[1], common.ws[0], common.ws[1]) - expected));
    worst_common = std::max(worst_common, std::abs(high_snr_sum_rate_m2(s[0], s[1], gev.ws[0], gev.ws[1]) - expected));
  }
  rep.checks.push_back(at_most("commuting fixtures: achieved high-SNR sum-rate vs closed form (max abs diff)",
                               worst_common, 1e-6));
  return rep;
}

inline ValidationReport validate_asymptotic(const ValidationOptions& opt) {
  ValidationReport rep{"asymptotic-M", {}};
  double previous = std::numeric_limits<double>::infinity();
  for (Index m : {4, 8, 16, 32}) {
    const auto sigmas = steered_exponential_family(m, 0.5);
    const BeamformerSet ws = design_low_snr(sigmas).ws;
    double worst = 0.0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const McEstimate e = mc_ergodic_rate(sigmas, ws, i, 10.0, opt.asymptotic_samples, opt.seed, opt.workers);
      worst = std::max(worst, std::abs(e.mean - asymptotic_sinr(sigmas, ws, i, 10.0).rate));
    }
    rep.checks.push_back({"M=" + std::to_string(m) + ": max |MC - log(1+SINR)| strictly below the previous M", worst,
                          previous, "<", worst < previous, {}});
    previous = worst;
  }
  return rep;
}

// Central differences of the asymptotic sum-rate in the real coordinates.
inline std::vector<Vector> finite_difference_gradient(std::span<const CovarianceMatrix> sigmas,
                                                      const std::vector<Vector>& ws, double rho, double h = 1e-6) {
  std::vector<Vector> out;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    Vector g(ws[i].size());
    for (Index k = 0; k < ws[i].size(); ++k) {
      double parts[2];
      for (int part = 0; part < 2; ++part) {
        const Complex step = part == 0 ? Complex(h, 0.0) : Complex(0.0, h);
        std::vector<Vector> plus = ws, minus = ws;
        plus[i](k) += step;
        minus[i](k) -= step;
        parts[part] = (asymptotic_sum_rate(sigmas, std::span<const Vector>(plus), rho) -
                       asymptotic_sum_rate(sigmas, std::span<const Vector>(minus), rho)) /
                      (2.0 * h);
      }
      g(k) = Complex(parts[0], parts[1]);
    }
    out.push_back(g);
  }
  return out;
}

inline double gradient_relative_error(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]).squaredNorm();
    norm += a[i].squaredNorm();
  }
  return std::sqrt(diff / norm);
}

inline ValidationReport validate_fixed_point(const ValidationOptions& opt) {
  ValidationReport rep{"fixed-point", {}};
  const double rho = 10.0;
  const Index dims[] = {2, 4, 8};
  int converged = 0;
  double worst_pg = 0.0, worst_fd = 0.0, worst_margin = std::numeric_limits<double>::infinity();
  for (std::uint32_t k = 0; k < 10; ++k) {
    const Scenario sc = random_scenario(dims[k % 3], opt.seed, 11000 + k);
    FixedPointOptions fo;
    fo.workers = opt.workers;
    fo.seed = opt.seed;
    const DesignResult r = fixed_point_design(sc.sigmas, rho, fo);
    if (!r.converged || r.diagnostics.at("iterations") > 500) continue;
    ++converged;
    worst_pg = std::max(worst_pg, projected_gradient_norm(sc.sigmas, r.ws, rho));
    const auto analytic = sum_rate_gradient(sc.sigmas, std::span(r.ws.vectors()), rho);
    worst_fd = std::max(worst_fd, gradient_relative_error(analytic, finite_difference_gradient(sc.sigmas, r.ws.vectors(), rho)));
    const double low = asymptotic_sum_rate(sc.sigmas, design_low_snr(sc.sigmas).ws, rho);
    worst_margin = std::min(worst_margin, r.objective - low);
  }
  rep.checks.push_back(at_least("fixtures converged within 500 sweeps", converged, 8));
  rep.checks.push_back(at_most("projected gradient norm at converged points (max)", worst_pg, 1e-5));
  rep.checks.push_back(at_most("analytic vs finite-difference gradient (max relative error)", worst_fd, 1e-5));
  rep.checks.push_back(at_least("converged objective minus low-SNR design objective (min)", worst_margin, 0.0));
  return rep;
}

}  // namespace detail

/// Runs one named validation suite; unknown names are a PreconditionError.
inline ValidationReport run_validation(const std::string& suite, const ValidationOptions& options = {}) {
  if (suite == "closed-form-vs-mc") return detail::validate_closed_form(options);
  if (suite == "density-uniform") return detail::validate_density(options);
  if (suite == "optimality-oracle") return detail::validate_optimality(options);
  if (suite == "asymptotic-M") return detail::validate_asymptotic(options);
  if (suite == "fixed-point") return detail::validate_fixed_point(options);
  throw PreconditionError("run_validation: unknown suite '" + suite + "'");
}

}  // namespace statbeam
