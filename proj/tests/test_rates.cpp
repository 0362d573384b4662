#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "statbeam/fixtures.hpp"
#include "statbeam/montecarlo.hpp"
#include "statbeam/rates.hpp"

using namespace statbeam;

namespace {

CovarianceMatrix identity(Index m) { return CovarianceMatrix(Matrix::Identity(m, m)); }

// Random valid (A, B, C) with C^2 <= AB.
LinkStatistics random_stats(RandomStream& rs) {
  const double a = 0.05 + 3.0 * rs.uniform();
  const double b = 0.05 + 3.0 * rs.uniform();
  const double c = std::sqrt(a * b) * rs.uniform();
  return {a, b, c};
}

}  // namespace

TEST(ErgodicRateM2, IdentityApproachesOneAtHighSnr) {
  const CovarianceMatrix s = identity(2);
  const BeamformerSet ws = BeamformerSet::standard_basis(2);
  const double r = ergodic_rate_m2(s, ws[0], ws[1], 1e6);
  EXPECT_NEAR(r, 1.0, 1e-4);
  EXPECT_NEAR(high_snr_rate_m2({1.0, 1.0, 0.0}), 1.0, 1e-15);
}

TEST(ErgodicRateM2, ZeroCovarianceAndZeroInterference) {
  EXPECT_EQ(ergodic_rate_m2(LinkStatistics{0.0, 0.0, 0.0}, 10.0), 0.0);
  // B = 0: single exponential term only
  const double x = 2.0 / (10.0 * 2.0);
  EXPECT_NEAR(ergodic_rate_m2(LinkStatistics{2.0, 0.0, 0.0}, 10.0), exp_e1(x), 1e-14);
  EXPECT_THROW(ergodic_rate_m2(LinkStatistics{1.0, 1.0, 0.0}, 0.0), PreconditionError);
  EXPECT_THROW(ergodic_rate_m2(identity(3), Vector::Unit(3, 0), Vector::Unit(3, 1), 1.0), DimensionError);
  EXPECT_THROW(ergodic_rate_m2(CovarianceMatrix(Matrix(Eigen::Vector2cd(1.0, 0.0).asDiagonal())), Vector::Unit(2, 0),
                               Vector::Unit(2, 1), 1.0),
               SingularCovarianceError);
}

TEST(ErgodicRateM2, ConfluentCaseIsContinuous) {
  // A = B, C = 0 gives coincident eigenvalues; nearby stats approach it.
  for (double rho : {0.1, 1.0, 10.0, 1e3}) {
    const double at = ergodic_rate_m2(LinkStatistics{1.0, 1.0, 0.0}, rho);
    const double x = 2.0 / rho;
    EXPECT_NEAR(at, (1.0 - x) * exp_e1(x) + 1.0 - exp_e1(x), 1e-13);
    for (double eps : {1e-3, 1e-5, 1e-7}) {
      const double near = ergodic_rate_m2(LinkStatistics{1.0 + eps, 1.0, 0.0}, rho);
      EXPECT_NEAR(near, at, 5.0 * eps) << rho << " " << eps;
    }
  }
}

TEST(ErgodicRateM2, RankOneLimitIsContinuous) {
  // C^2 -> AB drives the smaller eigenvalue to zero.
  for (double rho : {0.5, 5.0, 500.0}) {
    const double a = 2.0, b = 0.5;
    const double at = ergodic_rate_m2(LinkStatistics{a, b, std::sqrt(a * b)}, rho);
    const double expected = exp_e1(2.0 / (rho * (a + b))) - exp_e1(2.0 / (rho * b));
    EXPECT_NEAR(at, expected, 1e-12);
    // the small eigenvalue is about 0.8 eps and enters as lambda log(rho lambda)
    for (double eps : {1e-4, 1e-6, 1e-8}) {
      const double near = ergodic_rate_m2(LinkStatistics{a, b, std::sqrt(a * b) * (1.0 - eps)}, rho);
      EXPECT_NEAR(near, at, 2.0 * eps * (1.0 + std::abs(std::log(rho * eps)))) << rho << " " << eps;
    }
  }
}

TEST(ErgodicRateM2, PropertiesOverRandomStatistics) {
  RandomStream rs(31, 0);
  for (int k = 0; k < 500; ++k) {
    const LinkStatistics st = random_stats(rs);
    double previous = 0.0;
    for (double rho : {1e-3, 1e-1, 1.0, 10.0, 1e3, 1e5}) {
      const double r = ergodic_rate_m2(st, rho);
      EXPECT_GE(r, 0.0);
      EXPECT_TRUE(std::isfinite(r));
      EXPECT_GE(r, previous - 1e-12) << "rate must not decrease with rho";
      // never above the interference-free single-stream rate
      EXPECT_LE(r, exp_e1(2.0 / (rho * st.a)) + 1e-12);
      previous = r;
    }
    // scaling the covariance by c equals scaling rho by c
    const double c = 0.2 + 3.0 * rs.uniform();
    EXPECT_NEAR(ergodic_rate_m2({c * st.a, c * st.b, c * st.c}, 2.0),
                ergodic_rate_m2(st, 2.0 * c), 1e-12 * (1.0 + ergodic_rate_m2(st, 2.0 * c)));
    // low SNR slope
    const double tiny = 1e-6;
    EXPECT_NEAR(ergodic_rate_m2(st, tiny) / low_snr_rate(st, tiny), 1.0, 1e-4);
  }
}

TEST(LowSnr, Example) {
  EXPECT_NEAR(low_snr_rate({1.0, 0.3, 0.1}, 0.01), 0.005, 1e-17);
  const auto sigmas = std::vector<CovarianceMatrix>{identity(2), identity(2)};
  const RateReport r = low_snr_rates(sigmas, BeamformerSet::standard_basis(2), 0.01);
  EXPECT_NEAR(r.per_user[0], 0.005, 1e-17);
  EXPECT_NEAR(r.sum, 0.01, 1e-17);
}

TEST(HighSnr, DirectAndSemiMetricFormsAgree) {
  RandomStream rs(32, 0);
  for (int k = 0; k < 1000; ++k) {
    const LinkStatistics st = random_stats(rs);
    EXPECT_NEAR(high_snr_rate_m2(st), high_snr_rate_m2_semi_metric(st), 1e-10);
  }
  EXPECT_NEAR(high_snr_rate_m2({2.0, 0.5, 1.0}), high_snr_rate_m2_semi_metric({2.0, 0.5, 1.0}), 1e-12);
  EXPECT_THROW(high_snr_rate_m2({1.0, 0.0, 0.0}), UnboundedRateError);
}

TEST(HighSnr, ClosedFormConvergesToAsymptote) {
  RandomStream rs(33, 0);
  for (int k = 0; k < 50; ++k) {
    const LinkStatistics st = random_stats(rs);
    const double gap6 = std::abs(ergodic_rate_m2(st, 1e6) - high_snr_rate_m2(st));
    const double gap8 = std::abs(ergodic_rate_m2(st, 1e8) - high_snr_rate_m2(st));
    EXPECT_LE(gap6, 1e-2);
    EXPECT_LE(gap8, gap6 + 1e-12);
  }
}

TEST(FgFunctions, ExamplesAndLimits) {
  EXPECT_NEAR(f_func(0.6), 1.25 * std::log(9.0), 1e-14);
  EXPECT_NEAR(f_func(0.6), 2.7465, 1e-4);
  EXPECT_NEAR(g_func(0.6), 1.7249, 1e-4);
  EXPECT_NEAR(f_func(1.0), 2.0, 1e-15);
  EXPECT_NEAR(g_func(1.0), 2.0, 1e-15);
  EXPECT_NEAR(g_func(1e-12), 2.0 * std::numbers::ln2, 1e-9);
  EXPECT_THROW(f_func(0.0), DomainError);
  EXPECT_THROW(g_func(1.5), DomainError);
}

TEST(FgFunctions, MonotoneAndConsistent) {
  double prev_f = INFINITY, prev_g = -INFINITY;
  for (int k = 1; k <= 1000; ++k) {
    const double z = k / 1000.0;
    const double f = f_func(z), g = g_func(z);
    EXPECT_LT(f, prev_f);
    EXPECT_GT(g, prev_g);
    EXPECT_NEAR(g, f + 2.0 * std::log(z), 1e-12 * std::abs(f));
    EXPECT_GE(f, 2.0 - 1e-15);
    EXPECT_LE(g, 2.0 + 1e-15);
    EXPECT_GE(g, 2.0 * std::numbers::ln2 - 1e-15);
    prev_f = f;
    prev_g = g;
  }
  // series branch joins the direct formula
  const double z = std::sqrt(1.0 - 0.99e-8);
  EXPECT_NEAR(f_func(z), 2.0 * (1.0 + 0.99e-8 / 3.0), 1e-14);
}

TEST(CommonBasis, Examples) {
  EXPECT_NEAR(high_snr_sum_rate_common_basis(4.0, 2.0), 2.5415, 1e-4);
  EXPECT_NEAR(high_snr_sum_rate_common_basis(4.0, 2.0), 4.0 / 3.0 * std::log(4.0) + std::log(2.0), 1e-14);
  EXPECT_NEAR(high_snr_sum_rate_common_basis(2.0, 2.0), 3.0 * std::numbers::ln2, 1e-14);
  EXPECT_NEAR(high_snr_sum_rate_common_basis(1.0 + 1e-9, 1.0), 2.0, 1e-8);
  // the larger ratio takes the weighted term
  EXPECT_NEAR(high_snr_sum_rate_common_basis(2.0, 4.0), high_snr_sum_rate_common_basis(4.0, 2.0), 1e-14);
  EXPECT_THROW(high_snr_sum_rate_common_basis(1.0, 2.0), PreconditionError);
  EXPECT_THROW(high_snr_sum_rate_common_basis(2.0, 0.0), PreconditionError);
}

TEST(AsymptoticSinr, IdentityExample) {
  const std::vector<CovarianceMatrix> sigmas{identity(2), identity(2)};
  const BeamformerSet ws = BeamformerSet::normalized({Vector::Unit(2, 0), Vector::Ones(2)});
  for (std::size_t i = 0; i < 2; ++i) {
    const SinrBreakdown b = asymptotic_sinr(sigmas, ws, i, 2.0);
    EXPECT_NEAR(b.sinr, 0.5, 1e-15);
    EXPECT_NEAR(b.rate, std::log(1.5), 1e-15);
  }
  EXPECT_THROW(asymptotic_sinr(sigmas, ws, 2, 2.0), DimensionError);
}

TEST(AsymptoticSinr, MonotoneInRho) {
  for (std::uint32_t k = 0; k < 20; ++k) {
    const Scenario sc = random_scenario(4, 34, k);
    double prev = 0.0;
    for (double rho : {0.01, 0.1, 1.0, 10.0, 100.0, 1e4}) {
      const double r = large_m_rates(sc.sigmas, sc.ws, rho).sum;
      EXPECT_GT(r, prev);
      prev = r;
    }
  }
}

TEST(ExpectedLogTerm, PartialFractionsMatchQuadrature) {
  RandomStream rs(35, 0);
  for (int k = 0; k < 200; ++k) {
    const Index m = 2 + k % 5;
    const std::vector<double> ev = random_distinct_spectrum(m, rs, 0.3);
    for (double rho : {0.1, 1.0, 10.0, 1e3}) {
      const double pf = expected_log_term(ev, rho, static_cast<double>(m));
      const double quad = expected_log_term_quadrature(ev, rho, static_cast<double>(m));
      EXPECT_NEAR(pf, quad, 1e-9 * (1.0 + std::abs(quad))) << m << " " << rho;
    }
  }
}

TEST(ExpectedLogTerm, ClusteredSpectrumMatchesConfluentForm) {
  const std::vector<double> pair{1.0, 1.0 + 1e-9};
  for (double rho : {0.1, 1.0, 100.0}) {
    EXPECT_NEAR(expected_log_term(pair, rho, 2.0), confluent_pair_term(1.0, rho), 1e-8);
  }
  EXPECT_EQ(expected_log_term(std::vector<double>{0.0, 0.0}, 1.0, 2.0), 0.0);
}

TEST(ExpectedLogTerm, MonteCarloCrossCheck) {
  // diag(3, 2, 1) at rho = 10, M = 3, estimated by direct sampling
  const std::vector<double> ev{3.0, 2.0, 1.0};
  const double rho = 10.0;
  RunningStats stats;
  for (std::uint64_t s = 0; s < 200000; ++s) {
    RandomStream rs(36, 0, s);
    double q = 0.0;
    for (double lambda : ev) q += lambda * std::norm(rs.complex_normal());
    stats.add(std::log1p(rho / 3.0 * q));
  }
  const double closed = expected_log_term(ev, rho, 3.0);
  EXPECT_LE(std::abs(closed - stats.mean), 4.0 * stats.standard_error());
}

TEST(ErgodicRateGeneral, ReducesToTwoUserForm) {
  for (std::uint32_t k = 0; k < 50; ++k) {
    const Scenario sc = random_scenario(2, 37, k);
    for (double rho : {0.1, 1.0, 10.0, 1e4}) {
      for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_NEAR(ergodic_rate_general(sc.sigmas[i], sc.ws, i, rho),
                    ergodic_rate_m2(sc.sigmas[i], sc.ws[i], sc.ws[1 - i], rho), 1e-9);
      }
    }
  }
}

TEST(ErgodicRateGeneral, UnitaryInvariance) {
  for (std::uint32_t k = 0; k < 20; ++k) {
    const Scenario sc = random_scenario(3, 38, k);
    RandomStream rs(38, 1, k);
    const Matrix q = random_unitary(3, rs);
    std::vector<Vector> moved;
    for (const auto& w : sc.ws.vectors()) moved.push_back(q * w);
    const BeamformerSet qws(std::move(moved));
    for (std::size_t i = 0; i < 3; ++i) {
      const CovarianceMatrix qs(q * sc.sigmas[i].matrix() * q.adjoint());
      EXPECT_NEAR(ergodic_rate_general(qs, qws, i, 5.0), ergodic_rate_general(sc.sigmas[i], sc.ws, i, 5.0), 1e-9);
    }
  }
}

TEST(RateReports, SumMatchesPerUser) {
  const Scenario sc = random_scenario(3, 39, 0);
  const RateReport r = closed_form_rates(sc.sigmas, sc.ws, 3.0);
  EXPECT_EQ(r.per_user.size(), 3u);
  EXPECT_NEAR(r.sum, r.per_user[0] + r.per_user[1] + r.per_user[2], 1e-15);
  EXPECT_EQ(r.method, RateMethod::closed_form);
  EXPECT_THROW(high_snr_rates(sc.sigmas, sc.ws), DimensionError);
  const std::vector<CovarianceMatrix> short_list{sc.sigmas[0]};
  EXPECT_THROW(closed_form_rates(short_list, sc.ws, 1.0), DimensionError);
}
