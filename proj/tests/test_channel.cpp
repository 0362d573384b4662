#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "statbeam/channel.hpp"
#include "statbeam/fixtures.hpp"
#include "statbeam/io.hpp"

using namespace statbeam;

namespace {

Matrix diag(std::initializer_list<double> values) {
  Matrix d = Matrix::Zero(static_cast<Index>(values.size()), static_cast<Index>(values.size()));
  Index k = 0;
  for (double v : values) d(k, k) = v, ++k;
  return d;
}

Vector basis(Index m, Index k) {
  Vector e = Vector::Zero(m);
  e(k) = 1.0;
  return e;
}

// Spectrum via the explicit square root, independent of the Gram route.
RealVector sqrt_route_spectrum(const CovarianceMatrix& s, const std::vector<Vector>& ws) {
  const Matrix root = matrix_sqrt_psd(s.matrix());
  Matrix p = Matrix::Zero(s.dim(), s.dim());
  for (const auto& w : ws) p += w * w.adjoint();
  const Matrix e = root * p * root;
  RealVector ev = hermitian_eig(0.5 * (e + e.adjoint())).eigenvalues;
  return ev.cwiseMax(0.0);
}

}  // namespace

TEST(CovarianceMatrix, ValidatesOnConstruction) {
  EXPECT_NO_THROW(CovarianceMatrix(Matrix::Identity(2, 2)));
  EXPECT_THROW(CovarianceMatrix(diag({1.0, -0.5})), NotPsdError);
  Matrix asym = Matrix::Identity(2, 2);
  asym(0, 1) = 0.3;
  EXPECT_THROW(CovarianceMatrix{asym}, PreconditionError);
  EXPECT_THROW(CovarianceMatrix(Matrix(2, 3)), DimensionError);
  EXPECT_THROW(require_positive_definite(CovarianceMatrix(diag({1.0, 1e-12})), "test"), SingularCovarianceError);
}

TEST(BeamformerSet, RequiresUnitNormAndSquareShape) {
  EXPECT_NO_THROW(BeamformerSet({basis(2, 0), basis(2, 1)}));
  EXPECT_THROW(BeamformerSet({2.0 * basis(2, 0), basis(2, 1)}), PreconditionError);
  EXPECT_THROW(BeamformerSet({basis(3, 0), basis(3, 1)}), DimensionError);
  const BeamformerSet n = BeamformerSet::normalized({2.0 * basis(2, 0), basis(2, 1)});
  EXPECT_NEAR(n[0].norm(), 1.0, 1e-15);
}

TEST(LinkStatistics, DiagonalExample) {
  const CovarianceMatrix s(diag({2.0, 1.0}));
  const LinkStatistics st = link_statistics(s, basis(2, 0), basis(2, 1));
  EXPECT_NEAR(st.a, 2.0, 1e-15);
  EXPECT_NEAR(st.b, 1.0, 1e-15);
  EXPECT_NEAR(st.c, 0.0, 1e-15);
  const EffectiveSpectrum e = effective_spectrum_m2(st);
  EXPECT_NEAR(e.signal_plus_interference(0), 2.0, 1e-15);
  EXPECT_NEAR(e.signal_plus_interference(1), 1.0, 1e-15);
  EXPECT_NEAR(e.interference_only(0), 1.0, 1e-15);
  EXPECT_NEAR(e.interference_only(1), 0.0, 1e-15);
}

TEST(LinkStatistics, RankOneExample) {
  const EffectiveSpectrum e = effective_spectrum_m2({1.0, 1.0, 1.0});
  EXPECT_NEAR(e.signal_plus_interference(0), 2.0, 1e-15);
  EXPECT_NEAR(e.signal_plus_interference(1), 0.0, 1e-15);
  EXPECT_THROW(effective_spectrum_m2({1.0, 1.0, 1.1}), InvariantError);
}

TEST(LinkStatistics, TraceDeterminantPhaseAndUnitaryInvariance) {
  for (std::uint32_t k = 0; k < 100; ++k) {
    const Scenario sc = random_scenario(2, 21, k);
    const LinkStatistics st = link_statistics(sc.sigmas[0], sc.ws[0], sc.ws[1]);
    const EffectiveSpectrum e = effective_spectrum_m2(st);
    EXPECT_NEAR(e.signal_plus_interference.sum(), st.a + st.b, 1e-12 * (st.a + st.b));
    EXPECT_NEAR(e.signal_plus_interference.prod(), st.a * st.b - st.c * st.c, 1e-12 * (st.a + st.b) * (st.a + st.b));

    RandomStream rs(22, k);
    const double theta = 2.0 * std::numbers::pi * rs.uniform();
    const LinkStatistics rotated = link_statistics(sc.sigmas[0], std::polar(1.0, theta) * sc.ws[0], sc.ws[1]);
    EXPECT_NEAR(rotated.a, st.a, 1e-12);
    EXPECT_NEAR(rotated.b, st.b, 1e-12);
    EXPECT_NEAR(rotated.c, st.c, 1e-12);

    const Matrix q = random_unitary(2, rs);
    const CovarianceMatrix qs(q * sc.sigmas[0].matrix() * q.adjoint());
    const LinkStatistics moved = link_statistics(qs, q * sc.ws[0], q * sc.ws[1]);
    EXPECT_NEAR(moved.a, st.a, 1e-10);
    EXPECT_NEAR(moved.b, st.b, 1e-10);
    EXPECT_NEAR(moved.c, st.c, 1e-10);
  }
}

TEST(EffectiveSpectrum, GeneralMatchesTwoUserAndSqrtRoute) {
  const CovarianceMatrix s(diag({2.0, 1.0}));
  const BeamformerSet std2 = BeamformerSet::standard_basis(2);
  const EffectiveSpectrum g = effective_spectrum_general(s, std2, 0);
  EXPECT_NEAR(g.signal_plus_interference(0), 2.0, 1e-14);
  EXPECT_NEAR(g.signal_plus_interference(1), 1.0, 1e-14);
  EXPECT_NEAR(g.interference_only(0), 1.0, 1e-14);
  EXPECT_NEAR(g.interference_only(1), 0.0, 1e-14);

  for (std::uint32_t k = 0; k < 40; ++k) {
    const Index m = 2 + k % 4;
    const Scenario sc = random_scenario(m, 23, k);
    for (std::size_t i = 0; i < sc.ws.size(); ++i) {
      const EffectiveSpectrum e = effective_spectrum_general(sc.sigmas[i], sc.ws, i);
      const RealVector full = sqrt_route_spectrum(sc.sigmas[i], sc.ws.vectors());
      std::vector<Vector> others;
      for (std::size_t j = 0; j < sc.ws.size(); ++j)
        if (j != i) others.push_back(sc.ws[j]);
      const RealVector partial = sqrt_route_spectrum(sc.sigmas[i], others);
      EXPECT_LE((e.signal_plus_interference - full).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LE((e.interference_only - partial).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_NEAR(e.interference_only.minCoeff(), 0.0, 1e-12);
      // trace identity
      double trace = 0.0;
      for (std::size_t j = 0; j < sc.ws.size(); ++j) trace += sc.ws[j].dot(sc.sigmas[i].matrix() * sc.ws[j]).real();
      EXPECT_NEAR(e.signal_plus_interference.sum(), trace, 1e-10 * trace);
      if (m == 2) {
        const EffectiveSpectrum two = effective_spectrum_m2(link_statistics(sc.sigmas[i], sc.ws[i], sc.ws[1 - i]));
        EXPECT_LE((two.signal_plus_interference - e.signal_plus_interference).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LE((two.interference_only - e.interference_only).cwiseAbs().maxCoeff(), 1e-10);
      }
    }
  }
  EXPECT_THROW(effective_spectrum_general(s, std2, 2), DimensionError);
}

TEST(ExponentialCorrelation, Examples) {
  EXPECT_LE((exponential_correlation(2, 0.0, 1.0).matrix() - Matrix::Identity(2, 2)).norm(), 1e-15);
  const CovarianceMatrix h = exponential_correlation(2, 0.5, 1.0);
  EXPECT_NEAR(h.matrix()(0, 1).real(), 0.5, 1e-15);
  EXPECT_NEAR(h.max_eigenvalue(), 1.5, 1e-14);
  EXPECT_NEAR(h.min_eigenvalue(), 0.5, 1e-14);
  const CovarianceMatrix big = exponential_correlation(4, 0.9, 2.0);
  EXPECT_NEAR(big.matrix().trace().real(), 8.0, 1e-13);
  EXPECT_GT(big.min_eigenvalue(), 0.0);
  EXPECT_THROW(exponential_correlation(3, 1.0, 1.0), PreconditionError);
  EXPECT_THROW(exponential_correlation(3, -0.1, 1.0), PreconditionError);
  const CovarianceMatrix steered = steered_exponential_correlation(4, 0.9, 2.0, 1.1);
  EXPECT_NEAR(steered.max_eigenvalue(), big.max_eigenvalue(), 1e-12);
}

TEST(ChannelSampler, SampleCovarianceConsistent) {
  const CovarianceMatrix s = random_scenario(3, 24, 1).sigmas[0];
  ChannelSampler sampler(s);
  const int n = 100000;
  Matrix acc = Matrix::Zero(3, 3);
  Eigen::MatrixXd acc2 = Eigen::MatrixXd::Zero(3, 3);
  for (int k = 0; k < n; ++k) {
    RandomStream rs(25, stream_id(StreamPurpose::channel, 0), static_cast<std::uint64_t>(k));
    const Vector h = sampler.draw(rs).h;
    const Matrix outer = h * h.adjoint();
    acc += outer;
    acc2 += outer.cwiseAbs2();
  }
  const Matrix mean = acc / static_cast<double>(n);
  for (Index r = 0; r < 3; ++r) {
    for (Index c = 0; c < 3; ++c) {
      const double var = acc2(r, c) / n - std::norm(mean(r, c));
      const double se = std::sqrt(var / n);
      EXPECT_LE(std::abs(mean(r, c) - s.matrix()(r, c)), 5.0 * se) << r << "," << c;
    }
  }
}

TEST(Commutes, DetectsSharedEigenbasis) {
  const auto pair = commuting_pair(4.0, 2.0, 26, 0);
  EXPECT_TRUE(commutes(pair[0], pair[1]));
  const auto generic = random_pd_pair(26, 1);
  EXPECT_FALSE(commutes(generic[0], generic[1]));
}

TEST(CovarianceJson, RoundTripAndValidation) {
  const CovarianceMatrix s = random_scenario(3, 27, 1).sigmas[1];
  const CovarianceMatrix back = covariance_from_json(covariance_to_json(s));
  EXPECT_LE((back.matrix() - s.matrix()).norm(), 1e-15);
  const Json not_psd = Json::parse(R"({"dim": 2, "re": [[1, 0], [0, -1]], "im": [[0, 0], [0, 0]]})");
  EXPECT_THROW(covariance_from_json(not_psd), ConfigError);
  const Json not_herm = Json::parse(R"({"dim": 2, "re": [[1, 0.5], [0.2, 1]]})");
  EXPECT_THROW(covariance_from_json(not_herm), ConfigError);
  const Json bad_shape = Json::parse(R"({"dim": 3, "re": [[1, 0], [0, 1]]})");
  EXPECT_THROW(covariance_from_json(bad_shape), ConfigError);
}
