#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "statbeam/channel.hpp"
#include "statbeam/error.hpp"
#include "statbeam/parallel.hpp"
#include "statbeam/random.hpp"
#include "statbeam/rates.hpp"

namespace statbeam {

struct McEstimate {
  double mean = 0.0;
  double standard_error = 0.0;  // sample standard deviation / sqrt(samples)
  std::size_t samples = 0;
};

inline constexpr std::size_t mc_chunk_size = 4096;
inline constexpr std::size_t mc_min_samples = 1000;

namespace detail {

inline std::size_t chunk_count(std::size_t samples) { return (samples + mc_chunk_size - 1) / mc_chunk_size; }

inline McEstimate to_estimate(const RunningStats& s) {
  return {s.mean, s.standard_error(), s.count};
}

}  // namespace detail

/// Monte Carlo ergodic rate of `user` at each rho in `rhos`, from the direct
/// definition R = log(1 + (rho/M)|h^H w_i|^2 / (1 + (rho/M) sum_{j!=i} |h^H w_j|^2)).
///
/// Sample s draws g from stream (seed, user, s) and h = S^{1/2} g; chunks of
/// samples are reduced in a fixed tree order, so the result is bit-identical
/// for any worker count. Every rho reuses the same draws, so each entry
/// equals what mc_ergodic_rate returns for that rho alone.
inline std::vector<McEstimate> mc_ergodic_rates(std::span<const CovarianceMatrix> sigmas,
                                                const BeamformerSet& ws, std::size_t user,
                                                std::span<const double> rhos, std::size_t samples,
                                                std::uint64_t seed, unsigned workers = 0) {
  if (samples < mc_min_samples) throw PreconditionError("mc_ergodic_rate: need at least 1000 samples");
  if (sigmas.size() != ws.size()) throw DimensionError("mc_ergodic_rate: one covariance per user");
  if (user >= ws.size()) throw DimensionError("mc_ergodic_rate: user index out of range");
  if (sigmas[user].dim() != ws.dim()) throw DimensionError("mc_ergodic_rate: dimension mismatch");
  for (double rho : rhos) detail::require_rho(rho, "mc_ergodic_rate");

  const Index m = ws.dim();
  const Matrix root = matrix_sqrt_psd(sigmas[user].matrix());
  // h^H w_j = g^H (S^{1/2} w_j) since the root is Hermitian.
  const Matrix projected = root * ws.as_matrix();
  std::vector<double> scales;
  for (double rho : rhos) scales.push_back(rho / static_cast<double>(m));

  const std::size_t chunks = detail::chunk_count(samples);
  std::vector<std::vector<RunningStats>> partial(chunks, std::vector<RunningStats>(rhos.size()));
  const std::uint32_t stream = stream_id(StreamPurpose::channel, static_cast<std::uint32_t>(user));

  parallel_for(chunks, workers, [&](std::size_t c) {
    Vector g(m);
    std::vector<double> gains(static_cast<std::size_t>(m));
    const std::size_t end = std::min(samples, (c + 1) * mc_chunk_size);
    for (std::size_t s = c * mc_chunk_size; s < end; ++s) {
      RandomStream rs(seed, stream, s);
      for (Index k = 0; k < m; ++k) g(k) = rs.complex_normal();
      double signal = 0.0, interference = 0.0;
      for (Index j = 0; j < m; ++j) {
        const double gain = std::norm(g.dot(projected.col(j)));
        if (static_cast<std::size_t>(j) == user) {
          signal = gain;
        } else {
          interference += gain;
        }
      }
      for (std::size_t r = 0; r < scales.size(); ++r) {
        const double a = scales[r];
        partial[c][r].add(std::log1p(a * signal / (1.0 + a * interference)));
      }
    }
  });

  std::vector<McEstimate> out;
  std::vector<RunningStats> column(chunks);
  for (std::size_t r = 0; r < rhos.size(); ++r) {
    for (std::size_t c = 0; c < chunks; ++c) column[c] = partial[c][r];
    out.push_back(detail::to_estimate(merge_tree(column)));
  }
  return out;
}

inline McEstimate mc_ergodic_rate(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                  std::size_t user, double rho, std::size_t samples, std::uint64_t seed,
                                  unsigned workers = 0) {
  const double rhos[] = {rho};
  return mc_ergodic_rates(sigmas, ws, user, rhos, samples, seed, workers).front();
}

/// Cross-check estimator in the magnitude/direction factored form:
/// E[log(1 + (rho/M) |g|^2 d^H L d)] - E[log(1 + (rho/M) |g|^2 d^H L~ d)] with
/// |g|^2 and the isotropic direction d drawn from independent streams.
inline McEstimate mc_ergodic_rate_factored(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                           std::size_t user, double rho, std::size_t samples,
                                           std::uint64_t seed, unsigned workers = 0) {
  if (samples < mc_min_samples) throw PreconditionError("mc_ergodic_rate_factored: need at least 1000 samples");
  if (sigmas.size() != ws.size()) throw DimensionError("mc_ergodic_rate_factored: one covariance per user");
  detail::require_rho(rho, "mc_ergodic_rate_factored");
  const EffectiveSpectrum spec = effective_spectrum_general(sigmas[user], ws, user);
  const Index m = ws.dim();
  const double scale = rho / static_cast<double>(m);
  const std::size_t chunks = detail::chunk_count(samples);
  std::vector<RunningStats> partial(chunks);
  const auto u32 = static_cast<std::uint32_t>(user);

  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::size_t end = std::min(samples, (c + 1) * mc_chunk_size);
    for (std::size_t s = c * mc_chunk_size; s < end; ++s) {
      RandomStream magnitude(seed, stream_id(StreamPurpose::magnitude, u32), s);
      RandomStream direction(seed, stream_id(StreamPurpose::direction, u32), s);
      double norm2 = 0.0;
      for (Index k = 0; k < m; ++k) norm2 += std::norm(magnitude.complex_normal());
      Vector d(m);
      for (Index k = 0; k < m; ++k) d(k) = direction.complex_normal();
      d.normalize();
      double full = 0.0, partial_form = 0.0;
      for (Index k = 0; k < m; ++k) {
        full += spec.signal_plus_interference(k) * std::norm(d(k));
        partial_form += spec.interference_only(k) * std::norm(d(k));
      }
      partial[c].add(std::log1p(scale * norm2 * full) - std::log1p(scale * norm2 * partial_form));
    }
  });
  return detail::to_estimate(merge_tree(partial));
}

/// Sorted sample of a scalar distribution.
class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> values) : sorted_(std::move(values)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  /// Fraction of samples <= y.
  [[nodiscard]] double operator()(double y) const {
    const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), y);
    return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
  }

  [[nodiscard]] double min() const { return sorted_.front(); }
  [[nodiscard]] double max() const { return sorted_.back(); }
  [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }
  [[nodiscard]] const std::vector<double>& samples() const noexcept { return sorted_; }

 private:
  std::vector<double> sorted_;
};

/// Empirical distribution of Y = sum_j lambda_j |d_j|^2 with d uniform on the
/// unit complex sphere (a normalized CN(0, I) vector). For two eigenvalues Y
/// is uniform on [lambda_2, lambda_1].
inline EmpiricalCdf mc_quadratic_form_density(std::span<const double> spectrum, std::size_t samples,
                                              std::uint64_t seed, unsigned workers = 0) {
  if (spectrum.size() < 2) throw DimensionError("mc_quadratic_form_density: need at least 2 eigenvalues");
  if (samples < 10000) throw PreconditionError("mc_quadratic_form_density: need at least 10^4 samples");
  bool any = false;
  for (double v : spectrum) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw PreconditionError("mc_quadratic_form_density: eigenvalues must be finite and >= 0");
    }
    any = any || v > 0.0;
  }
  if (!any) throw DomainError("mc_quadratic_form_density: degenerate all-zero spectrum");

  const auto m = static_cast<Index>(spectrum.size());
  std::vector<double> values(samples);
  const std::size_t chunks = detail::chunk_count(samples);
  const std::uint32_t stream = stream_id(StreamPurpose::direction, static_cast<std::uint32_t>(m));
  parallel_for(chunks, workers, [&](std::size_t c) {
    Vector d(m);
    const std::size_t end = std::min(samples, (c + 1) * mc_chunk_size);
    for (std::size_t s = c * mc_chunk_size; s < end; ++s) {
      RandomStream rs(seed, stream, s);
      for (Index k = 0; k < m; ++k) d(k) = rs.complex_normal();
      const double n2 = d.squaredNorm();
      double y = 0.0;
      for (Index k = 0; k < m; ++k) y += spectrum[static_cast<std::size_t>(k)] * std::norm(d(k));
      values[s] = y / n2;
    }
  });
  return EmpiricalCdf(std::move(values));
}

/// Kolmogorov-Smirnov distance between the sample and Uniform[lo, hi].
inline double ks_distance_uniform(const EmpiricalCdf& cdf, double lo, double hi) {
  if (!(hi > lo)) throw DomainError("ks_distance_uniform: need hi > lo");
  const auto& xs = cdf.samples();
  const double n = static_cast<double>(xs.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = std::clamp((xs[i] - lo) / (hi - lo), 0.0, 1.0);
    worst = std::max({worst, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return worst;
}

/// Monte Carlo report for every user.
inline RateReport monte_carlo_rates(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                    double rho, std::size_t samples, std::uint64_t seed,
                                    unsigned workers = 0) {
  std::vector<double> rates, errors;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const McEstimate e = mc_ergodic_rate(sigmas, ws, i, rho, samples, seed, workers);
    rates.push_back(e.mean);
    errors.push_back(e.standard_error);
  }
  return RateReport::make(std::move(rates), RateMethod::monte_carlo, std::move(errors));
}

}  // namespace statbeam
