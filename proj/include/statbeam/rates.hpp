#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "statbeam/channel.hpp"
#include "statbeam/error.hpp"
#include "statbeam/numerics.hpp"

namespace statbeam {

enum class RateMethod {
  closed_form,
  monte_carlo,
  high_snr_asymptote,
  low_snr_asymptote,
  large_m_asymptote,
};

inline std::string to_string(RateMethod m) {
  switch (m) {
    case RateMethod::closed_form: return "closed-form";
    case RateMethod::monte_carlo: return "monte-carlo";
    case RateMethod::high_snr_asymptote: return "high-snr-asymptote";
    case RateMethod::low_snr_asymptote: return "low-snr-asymptote";
    case RateMethod::large_m_asymptote: return "large-M-asymptote";
  }
  return "unknown";
}

/// Per-user ergodic rates in nats/s/Hz plus their total.
struct RateReport {
  std::vector<double> per_user;
  double sum = 0.0;
  RateMethod method = RateMethod::closed_form;
  std::optional<std::vector<double>> standard_error;  // Monte Carlo only

  static RateReport make(std::vector<double> rates, RateMethod method,
                         std::optional<std::vector<double>> errors = std::nullopt) {
    RateReport r;
    r.sum = std::accumulate(rates.begin(), rates.end(), 0.0);
    r.per_user = std::move(rates);
    r.method = method;
    r.standard_error = std::move(errors);
    return r;
  }
};

/// Large-M signal/interference split for one user.
struct SinrBreakdown {
  double signal = 0.0;                   // (rho/M) w_i^H S_i w_i
  double interference_plus_noise = 1.0;  // 1 + (rho/M) sum_{j != i} w_j^H S_i w_j
  double sinr = 0.0;
  double rate = 0.0;  // log(1 + sinr)
};

namespace detail {

inline void require_rho(double rho, const char* who) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw PreconditionError(std::string(who) + ": rho must be positive and finite");
  }
}

// lambda * e^x E1(x) with x = m / (rho lambda); tends to 0 with lambda.
inline double scaled_exp_e1(double lambda, double rho, double m) {
  if (!(lambda > 0.0)) return 0.0;
  const double x = m / (rho * lambda);
  if (!std::isfinite(x) || x > 1e300) return 0.0;
  return lambda * exp_e1(x);
}

// log(k) / (k - 1), continuous at k = 1.
inline double log_ratio(double k) {
  const double u = k - 1.0;
  return u == 0.0 ? 1.0 : std::log1p(u) / u;
}

// log1p(u) / u, continuous at u = 0.
inline double log1p_ratio(double u) { return u == 0.0 ? 1.0 : std::log1p(u) / u; }

}  // namespace detail

/// E[log(1 + a T)] with T ~ Gamma(2, 1) and a = rho * lambda / m: the
/// coincident-eigenvalue limit of the two-term formula, (1 - x) e^x E1(x) + 1
/// with x = m / (rho lambda).
inline double confluent_pair_term(double lambda, double rho, double m = 2.0) {
  detail::require_rho(rho, "confluent_pair_term");
  if (!(lambda > 0.0)) return 0.0;
  const double x = m / (rho * lambda);
  return (1.0 - x) * exp_e1(x) + 1.0;
}

/// E[log(1 + (rho/m) sum_k lambda_k |g_k|^2)], g ~ CN(0, I), by one-dimensional
/// quadrature of  int_0^inf e^-t/t (1 - prod_k (1 + a_k t)^-1) dt  in log t.
/// Valid for any multiplicities; used where partial fractions lose accuracy.
inline double expected_log_term_quadrature(std::span<const double> spectrum, double rho, double m) {
  detail::require_rho(rho, "expected_log_term_quadrature");
  std::vector<double> weights;
  double total = 0.0;
  for (double lambda : spectrum) {
    if (lambda > 0.0) {
      weights.push_back(rho * lambda / m);
      total += weights.back();
    }
  }
  if (weights.empty()) return 0.0;
  auto integrand = [&](double u) {
    const double t = std::exp(u);
    double log_prod = 0.0;
    for (double a : weights) log_prod += std::log1p(a * t);
    return std::exp(-t) * -std::expm1(-log_prod);
  };
  const double lo = std::log(1e-17 / std::max(1.0, total));
  const double hi = std::log(60.0);
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 20, 1e-14);
}

/// E[log(1 + (rho/m) sum_k lambda_k |g_k|^2)] by the partial-fraction sum
///   sum_k prod_{j != k} lambda_k / (lambda_k - lambda_j) * e^{x_k} E1(x_k),
///   x_k = m / (rho lambda_k),
/// over the strictly positive eigenvalues (entries <= 1e-14 * max count as
/// zero; their contribution vanishes). Clustered eigenvalues (relative gap
/// < 1e-6) or a cancellation-dominated sum switch to the quadrature route.
inline double expected_log_term(std::span<const double> spectrum, double rho, double m) {
  detail::require_rho(rho, "expected_log_term");
  double peak = 0.0;
  for (double lambda : spectrum) peak = std::max(peak, lambda);
  if (!(peak > 0.0)) return 0.0;

  std::vector<double> positive;
  for (double lambda : spectrum)
    if (lambda > 1e-14 * peak) positive.push_back(lambda);
  std::sort(positive.begin(), positive.end(), std::greater<>());

  for (std::size_t k = 1; k < positive.size(); ++k) {
    if (positive[k - 1] - positive[k] < 1e-6 * peak) {
      return expected_log_term_quadrature(positive, rho, m);
    }
  }
  double total = 0.0, magnitude = 0.0;
  for (std::size_t k = 0; k < positive.size(); ++k) {
    double coefficient = 1.0;
    for (std::size_t j = 0; j < positive.size(); ++j) {
      if (j != k) coefficient *= positive[k] / (positive[k] - positive[j]);
    }
    const double term = coefficient * exp_e1(m / (rho * positive[k]));
    total += term;
    magnitude += std::abs(term);
  }
  if (magnitude > 1e6 * std::abs(total)) return expected_log_term_quadrature(positive, rho, m);
  return total;
}

/// Two-user ergodic rate from the link statistics:
///   [L1 e^{x1}E1(x1) - L2 e^{x2}E1(x2)] / (L1 - L2) - e^{xB}E1(xB),
///   x = 2 / (rho L).
/// Zero eigenvalues contribute nothing; L1 ~ L2 (gap <= 1e-6 L1) uses the
/// confluent form at the midpoint.
inline double ergodic_rate_m2(const LinkStatistics& stats, double rho) {
  detail::require_rho(rho, "ergodic_rate_m2");
  const auto [top, bottom, gap] = pair_eigenvalues(stats);

  double with_signal = 0.0;
  if (top > 0.0) {
    if (!(bottom > 0.0)) {
      with_signal = exp_e1(2.0 / (rho * top));
    } else if (gap <= 1e-6 * top) {
      with_signal = confluent_pair_term(0.5 * (top + bottom), rho);
    } else {
      with_signal =
          (detail::scaled_exp_e1(top, rho, 2.0) - detail::scaled_exp_e1(bottom, rho, 2.0)) / gap;
    }
  }
  const double interference_only = stats.b > 0.0 ? exp_e1(2.0 / (rho * stats.b)) : 0.0;
  return std::max(0.0, with_signal - interference_only);
}

inline void require_two_user(const CovarianceMatrix& sigma, const char* who) {
  if (sigma.dim() != 2) throw DimensionError(std::string(who) + ": requires M = 2");
}

/// Ergodic rate of user i (beamformer w_i) interfered by w_j, M = 2.
inline double ergodic_rate_m2(const CovarianceMatrix& sigma_i, const Beamformer& w_i,
                              const Beamformer& w_j, double rho) {
  detail::require_rho(rho, "ergodic_rate_m2");
  require_two_user(sigma_i, "ergodic_rate_m2");
  require_positive_definite(sigma_i, "ergodic_rate_m2");
  return ergodic_rate_m2(link_statistics(sigma_i, w_i, w_j), rho);
}

/// General-M ergodic rate E[I_1] - E[I_2] from the effective spectra.
/// The exponential-integral argument is M / (rho Lambda), the form that
/// reduces to the two-user expression at M = 2.
inline double ergodic_rate_general(const CovarianceMatrix& sigma_i, const BeamformerSet& ws,
                                   std::size_t user, double rho) {
  detail::require_rho(rho, "ergodic_rate_general");
  if (ws.dim() < 2) throw DimensionError("ergodic_rate_general: requires M >= 2");
  const EffectiveSpectrum spec = effective_spectrum_general(sigma_i, ws, user);
  const double m = static_cast<double>(ws.dim());
  const auto& full = spec.signal_plus_interference;
  const auto& partial = spec.interference_only;
  const double e1 = expected_log_term(std::span(full.data(), static_cast<std::size_t>(full.size())), rho, m);
  const double e2 =
      expected_log_term(std::span(partial.data(), static_cast<std::size_t>(partial.size())), rho, m);
  return std::max(0.0, e1 - e2);
}

/// Low-SNR limit (rho/2) A.
inline double low_snr_rate(const LinkStatistics& stats, double rho) {
  detail::require_rho(rho, "low_snr_rate");
  return 0.5 * rho * stats.a;
}

/// High-SNR limit [L1 log L1 - L2 log L2] / (L1 - L2) - log B, written as
/// log L1 + log1p(u)/u - log B with u = (L1 - L2)/L2 so that L2 = 0 and
/// L1 = L2 are both exact limits.
inline double high_snr_rate_m2(const LinkStatistics& stats) {
  stats.validate();
  if (!(stats.b > 0.0)) {
    throw UnboundedRateError("high_snr_rate_m2: B = 0, interference-free rate grows without bound");
  }
  const auto [top, bottom, gap] = pair_eigenvalues(stats);
  const double spread = bottom > 0.0 ? detail::log1p_ratio(gap / bottom) : 0.0;
  return std::log(top) + spread - std::log(stats.b);
}

/// f(z) = (1/s) log((1+s)/(1-s)), s = sqrt(1 - z^2); decreasing, f(1) = 2.
inline double f_func(double z) {
  if (!(z > 0.0 && z <= 1.0)) throw DomainError("f_func: z must lie in (0, 1]");
  const double s2 = (1.0 - z) * (1.0 + z);
  const double s = std::sqrt(s2);
  if (s < 1e-4) return 2.0 * (1.0 + s2 / 3.0 + s2 * s2 / 5.0);
  return 2.0 / s * (std::log1p(s) - std::log(z));
}

/// g(z) = f(z) + 2 log z; increasing from 2 log 2 (z -> 0) to 2 (z = 1).
inline double g_func(double z) {
  if (!(z > 0.0 && z <= 1.0)) throw DomainError("g_func: z must lie in (0, 1]");
  const double s2 = (1.0 - z) * (1.0 + z);
  const double s = std::sqrt(s2);
  if (s < 1e-4) return 2.0 * (1.0 + s2 / 3.0 + s2 * s2 / 5.0) + 2.0 * std::log(z);
  // 1 - s = z^2 / (1 + s) keeps the z -> 0 end free of cancellation.
  return 2.0 / s * std::log1p(s) - 2.0 * std::log(z) * (z * z / (1.0 + s)) / s;
}

/// d = sqrt(4 (AB - C^2)) / (A + B), in [0, 1].
inline double semi_metric_d(const LinkStatistics& stats) {
  stats.validate();
  const double total = stats.a + stats.b;
  if (!(total > 0.0)) throw DomainError("semi_metric_d: A + B must be positive");
  const double det = std::max(0.0, stats.a * stats.b - stats.c * stats.c);
  return std::min(1.0, 2.0 * std::sqrt(det) / total);
}

/// High-SNR limit in semi-metric form: g(d)/2 + log(1 + A/B) - log 2.
inline double high_snr_rate_m2_semi_metric(const LinkStatistics& stats) {
  if (!(stats.b > 0.0)) {
    throw UnboundedRateError("high_snr_rate_m2_semi_metric: B = 0");
  }
  const double d = semi_metric_d(stats);
  const double g = d > 0.0 ? g_func(d) : 2.0 * std::numbers::ln2;
  return 0.5 * g + std::log1p(stats.a / stats.b) - std::numbers::ln2;
}

/// Large-M limit log(1 + SINR_i) of user `user`.
inline SinrBreakdown asymptotic_sinr(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                     std::size_t user, double rho) {
  detail::require_rho(rho, "asymptotic_sinr");
  if (sigmas.size() != ws.size()) throw DimensionError("asymptotic_sinr: one covariance per user");
  if (user >= ws.size()) throw DimensionError("asymptotic_sinr: user index out of range");
  const Matrix& s = sigmas[user].matrix();
  if (s.rows() != ws.dim()) throw DimensionError("asymptotic_sinr: dimension mismatch");
  const double scale = rho / static_cast<double>(ws.size());
  SinrBreakdown out;
  double interference = 0.0;
  for (std::size_t j = 0; j < ws.size(); ++j) {
    const double q = std::max(0.0, ws[j].dot(s * ws[j]).real());
    if (j == user) {
      out.signal = scale * q;
    } else {
      interference += q;
    }
  }
  out.interference_plus_noise = 1.0 + scale * interference;
  out.sinr = out.signal / out.interference_plus_noise;
  out.rate = std::log1p(out.sinr);
  return out;
}

/// Optimal high-SNR sum-rate when both covariances share an eigenbasis:
///   k1 log k1/(k1-1) + log k2/(k2-1)   if k1 >= k2
///   k2 log k2/(k2-1) + log k1/(k1-1)   otherwise
/// with log k/(k-1) -> 1 at k = 1. kappa2 may be below 1 (the second
/// user's eigenvalues indexed along the first user's ordering).
inline double high_snr_sum_rate_common_basis(double kappa1, double kappa2) {
  if (!(kappa1 > 1.0) || !std::isfinite(kappa1)) {
    throw PreconditionError("high_snr_sum_rate_common_basis: kappa1 must exceed 1");
  }
  if (!(kappa2 > 0.0) || !std::isfinite(kappa2)) {
    throw PreconditionError("high_snr_sum_rate_common_basis: kappa2 must be positive");
  }
  if (kappa1 >= kappa2) return kappa1 * detail::log_ratio(kappa1) + detail::log_ratio(kappa2);
  return kappa2 * detail::log_ratio(kappa2) + detail::log_ratio(kappa1);
}

// ---------------------------------------------------------------------------
// Whole-system reports.

namespace detail {

inline void require_scenario(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                             const char* who) {
  if (sigmas.size() != ws.size()) throw DimensionError(std::string(who) + ": one covariance per user");
  for (const auto& s : sigmas)
    if (s.dim() != ws.dim()) throw DimensionError(std::string(who) + ": dimension mismatch");
}

}  // namespace detail

/// Closed-form rates for every user: two-user formula when M = 2, the
/// partial-fraction formula otherwise.
inline RateReport closed_form_rates(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                    double rho) {
  detail::require_scenario(sigmas, ws, "closed_form_rates");
  std::vector<double> rates;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (ws.size() == 2) {
      rates.push_back(ergodic_rate_m2(sigmas[i], ws[i], ws[1 - i], rho));
    } else {
      rates.push_back(ergodic_rate_general(sigmas[i], ws, i, rho));
    }
  }
  return RateReport::make(std::move(rates), RateMethod::closed_form);
}

/// Low-SNR asymptote (rho/M) w_i^H S_i w_i for every user.
inline RateReport low_snr_rates(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                double rho) {
  detail::require_scenario(sigmas, ws, "low_snr_rates");
  detail::require_rho(rho, "low_snr_rates");
  std::vector<double> rates;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const double a = std::max(0.0, ws[i].dot(sigmas[i].matrix() * ws[i]).real());
    rates.push_back(rho / static_cast<double>(ws.size()) * a);
  }
  return RateReport::make(std::move(rates), RateMethod::low_snr_asymptote);
}

/// High-SNR asymptote per user, M = 2.
inline RateReport high_snr_rates(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws) {
  detail::require_scenario(sigmas, ws, "high_snr_rates");
  if (ws.size() != 2) throw DimensionError("high_snr_rates: requires M = 2");
  std::vector<double> rates;
  for (std::size_t i = 0; i < 2; ++i) {
    rates.push_back(high_snr_rate_m2(link_statistics(sigmas[i], ws[i], ws[1 - i])));
  }
  return RateReport::make(std::move(rates), RateMethod::high_snr_asymptote);
}

/// Large-M asymptote log(1 + SINR_i) per user.
inline RateReport large_m_rates(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                double rho) {
  detail::require_scenario(sigmas, ws, "large_m_rates");
  std::vector<double> rates;
  for (std::size_t i = 0; i < ws.size(); ++i) rates.push_back(asymptotic_sinr(sigmas, ws, i, rho).rate);
  return RateReport::make(std::move(rates), RateMethod::large_m_asymptote);
}

}  // namespace statbeam
