#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "statbeam/channel.hpp"
#include "statbeam/random.hpp"

// Seeded scenario generators shared by the validation suites, tests and
// samples. Every generator is a pure function of (seed, index).

namespace statbeam {

struct Scenario {
  std::vector<CovarianceMatrix> sigmas;
  BeamformerSet ws;
  std::string label;
};

inline Vector random_unit_vector(Index m, RandomStream& rs) {
  Vector v(m);
  for (Index k = 0; k < m; ++k) v(k) = rs.complex_normal();
  return v.normalized();
}

inline BeamformerSet random_beamformer_set(Index m, RandomStream& rs) {
  std::vector<Beamformer> vs;
  for (Index i = 0; i < m; ++i) vs.push_back(random_unit_vector(m, rs));
  return BeamformerSet::normalized(std::move(vs));
}

/// Descending spectrum in [0.1, ...) with consecutive gaps >= `min_gap`.
inline std::vector<double> random_distinct_spectrum(Index m, RandomStream& rs, double min_gap = 0.1) {
  std::vector<double> ev(static_cast<std::size_t>(m));
  double level = 0.1 + 0.5 * rs.uniform();
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) {
    *it = level;
    level += min_gap + 1.5 * rs.uniform();
  }
  return ev;
}

inline CovarianceMatrix random_exponential_covariance(Index m, RandomStream& rs) {
  const double r = 0.1 + 0.8 * rs.uniform();
  const double scale = 0.5 + 1.5 * rs.uniform();
  const double angle = 2.0 * std::numbers::pi * rs.uniform();
  return steered_exponential_correlation(m, r, scale, angle);
}

inline CovarianceMatrix random_spectrum_fixture(Index m, RandomStream& rs) {
  const std::vector<double> ev = random_distinct_spectrum(m, rs);
  const Matrix q = random_unitary(m, rs);
  RealVector lambda(m);
  for (Index k = 0; k < m; ++k) lambda(k) = ev[static_cast<std::size_t>(k)];
  const Matrix s = q * lambda.cast<Complex>().asDiagonal() * q.adjoint();
  return CovarianceMatrix(0.5 * (s + s.adjoint()));
}

/// M users on M antennas with random unit beamformers. Even indices use
/// steered exponential correlation, odd indices conjugated random spectra.
inline Scenario random_scenario(Index m, std::uint64_t seed, std::uint32_t index) {
  RandomStream rs(seed, stream_id(StreamPurpose::fixture, index));
  Scenario out;
  const bool exponential = index % 2 == 0;
  for (Index i = 0; i < m; ++i) {
    out.sigmas.push_back(exponential ? random_exponential_covariance(m, rs) : random_spectrum_fixture(m, rs));
  }
  out.ws = random_beamformer_set(m, rs);
  out.label = std::string(exponential ? "exponential" : "spectrum") + "-" + std::to_string(index);
  return out;
}

/// Generic positive definite pair for two-user design checks.
inline std::vector<CovarianceMatrix> random_pd_pair(std::uint64_t seed, std::uint32_t index) {
  return random_scenario(2, seed, index).sigmas;
}

/// Commuting pair U diag(kappa1, 1) U^H and c U diag(kappa2, 1) U^H with a
/// random unitary U and scale c.
inline std::vector<CovarianceMatrix> commuting_pair(double kappa1, double kappa2, std::uint64_t seed,
                                                    std::uint32_t index) {
  RandomStream rs(seed, stream_id(StreamPurpose::fixture, index));
  const Matrix q = random_unitary(2, rs);
  const double c = 0.5 + rs.uniform();
  const Matrix d1 = Eigen::Vector2cd(kappa1, 1.0).asDiagonal();
  const Matrix d2 = Eigen::Vector2cd(c * kappa2, c).asDiagonal();
  const Matrix s1 = q * d1 * q.adjoint();
  const Matrix s2 = q * d2 * q.adjoint();
  return {CovarianceMatrix(0.5 * (s1 + s1.adjoint())), CovarianceMatrix(0.5 * (s2 + s2.adjoint()))};
}

/// Exponential correlation r for every user, user i steered by 2 pi i / M
/// so that the users' dominant directions differ.
inline std::vector<CovarianceMatrix> steered_exponential_family(Index m, double r, double scale = 1.0) {
  std::vector<CovarianceMatrix> out;
  for (Index i = 0; i < m; ++i) {
    out.push_back(steered_exponential_correlation(m, r, scale, 2.0 * std::numbers::pi * static_cast<double>(i) /
                                                                   static_cast<double>(m)));
  }
  return out;
}

}  // namespace statbeam
