#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "statbeam/channel.hpp"
#include "statbeam/error.hpp"
#include "statbeam/numerics.hpp"
#include "statbeam/parallel.hpp"
#include "statbeam/random.hpp"
#include "statbeam/rates.hpp"

namespace statbeam {

enum class DesignMethod { low_snr, high_snr_gev, common_basis, grid_oracle, fixed_point };

inline std::string to_string(DesignMethod m) {
  switch (m) {
    case DesignMethod::low_snr: return "low-snr";
    case DesignMethod::high_snr_gev: return "high-snr-gev";
    case DesignMethod::common_basis: return "common-basis";
    case DesignMethod::grid_oracle: return "grid-oracle";
    case DesignMethod::fixed_point: return "fixed-point";
  }
  return "unknown";
}

inline std::optional<DesignMethod> parse_design_method(const std::string& tag) {
  for (auto m : {DesignMethod::low_snr, DesignMethod::high_snr_gev, DesignMethod::common_basis,
                 DesignMethod::grid_oracle, DesignMethod::fixed_point}) {
    if (to_string(m) == tag) return m;
  }
  return std::nullopt;
}

struct DesignResult {
  BeamformerSet ws;
  double objective = 0.0;  // predicted sum-rate in nats (low-snr: slope per unit rho)
  DesignMethod method = DesignMethod::low_snr;
  std::map<std::string, double> diagnostics;
  bool converged = true;
};

namespace detail {

inline void require_users(std::span<const CovarianceMatrix> sigmas, const char* who) {
  if (sigmas.empty()) throw DimensionError(std::string(who) + ": no users");
  for (const auto& s : sigmas) {
    if (s.dim() != static_cast<Index>(sigmas.size())) {
      throw DimensionError(std::string(who) + ": need M covariances of size M x M");
    }
  }
}

}  // namespace detail

/// Low-SNR optimum: each user beamforms along the dominant eigenvector of its
/// own covariance. `objective` is the sum-rate slope sum_i lambda_max / M, so
/// the predicted sum-rate at small rho is rho * objective. The diagnostic
/// "degenerate" is 1 when some dominant eigenvalue is repeated and the
/// returned vector is one arbitrary choice.
inline DesignResult design_low_snr(std::span<const CovarianceMatrix> sigmas) {
  detail::require_users(sigmas, "design_low_snr");
  std::vector<Beamformer> vs;
  double slope = 0.0;
  bool degenerate = false;
  for (const auto& s : sigmas) {
    const EigenDecomposition eig = s.eigen();
    const double top = eig.eigenvalues(0);
    if (!(top > 0.0)) throw PreconditionError("design_low_snr: covariance has no positive eigenvalue");
    if (eig.eigenvalues.size() > 1 && top - eig.eigenvalues(1) <= 1e-10 * top) degenerate = true;
    vs.push_back(eig.eigenvectors.col(0));
    slope += top;
  }
  DesignResult out;
  out.ws = BeamformerSet::normalized(std::move(vs));
  out.objective = slope / static_cast<double>(sigmas.size());
  out.method = DesignMethod::low_snr;
  out.diagnostics["degenerate"] = degenerate ? 1.0 : 0.0;
  return out;
}

inline double high_snr_sum_rate_m2(const CovarianceMatrix& s1, const CovarianceMatrix& s2,
                                   const Beamformer& w1, const Beamformer& w2) {
  return high_snr_rate_m2(link_statistics(s1, w1, w2)) + high_snr_rate_m2(link_statistics(s2, w2, w1));
}

/// High-SNR optimum for two users: w1 is the dominant generalized eigenvector
/// of (S1, S2), w2 that of (S2, S1). The two pencils have reciprocal
/// spectra; diagnostics report both eigenvalues and the product of user 2's
/// with the smaller eigenvalue of (S1, S2), which is 1.
inline DesignResult design_high_snr_m2(const CovarianceMatrix& s1, const CovarianceMatrix& s2) {
  require_two_user(s1, "design_high_snr_m2");
  require_two_user(s2, "design_high_snr_m2");
  require_positive_definite(s1, "design_high_snr_m2");
  require_positive_definite(s2, "design_high_snr_m2");
  const GeneralizedEigen first = generalized_eig(s1.matrix(), s2.matrix());
  const GeneralizedEigenPair second = generalized_dominant_eigvec(s2.matrix(), s1.matrix());

  DesignResult out;
  out.ws = BeamformerSet::normalized({first.vectors.col(0), second.vector});
  out.objective = high_snr_sum_rate_m2(s1, s2, out.ws[0], out.ws[1]);
  out.method = DesignMethod::high_snr_gev;
  out.diagnostics["eta_user1"] = first.values(0);
  out.diagnostics["eta_user2"] = second.value;
  out.diagnostics["reciprocal_product"] = second.value * first.values(1);
  return out;
}

/// High-SNR optimum when S1 and S2 commute. With u1, u2 the eigenvectors of
/// S1 (lambda1 > lambda2), kappa1 = lambda1/lambda2 and kappa2 = mu1/mu2 where
/// mu_k = u_k^H S2 u_k: (u1, u2) unless kappa2 > kappa1, then (u2, u1).
/// At kappa1 = kappa2 both assignments tie and (u1, u2) is returned.
inline DesignResult design_common_basis(const CovarianceMatrix& s1, const CovarianceMatrix& s2) {
  require_two_user(s1, "design_common_basis");
  require_two_user(s2, "design_common_basis");
  require_positive_definite(s1, "design_common_basis");
  require_positive_definite(s2, "design_common_basis");
  if (!commutes(s1, s2)) throw PreconditionError("design_common_basis: covariances do not commute");
  const EigenDecomposition eig = s1.eigen();
  const double lambda1 = eig.eigenvalues(0), lambda2 = eig.eigenvalues(1);
  if (lambda1 - lambda2 <= 1e-12 * lambda1) {
    throw PreconditionError("design_common_basis: first covariance must have kappa1 > 1");
  }
  const Vector u1 = eig.eigenvectors.col(0);
  const Vector u2 = eig.eigenvectors.col(1);
  const double mu1 = u1.dot(s2.matrix() * u1).real();
  const double mu2 = u2.dot(s2.matrix() * u2).real();
  const double kappa1 = lambda1 / lambda2;
  const double kappa2 = mu1 / mu2;

  DesignResult out;
  const bool swapped = kappa2 > kappa1;
  out.ws = swapped ? BeamformerSet::normalized({u2, u1}) : BeamformerSet::normalized({u1, u2});
  out.objective = high_snr_sum_rate_common_basis(kappa1, kappa2);
  out.method = DesignMethod::common_basis;
  out.diagnostics["kappa1"] = kappa1;
  out.diagnostics["kappa2"] = kappa2;
  out.diagnostics["case"] = swapped ? 3.0 : (kappa2 <= 1.0 ? 1.0 : 2.0);
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force oracle.

struct GridOracleOptions {
  std::optional<double> rho;  // empty: maximize the high-SNR asymptote
  int resolution = 96;        // theta steps; phi uses resolution / 2
  bool refine = true;         // pattern-search polish of the best cell
  unsigned workers = 0;
};

namespace detail {

inline Eigen::Vector2cd grid_vector(double theta, double phi) {
  return {Complex(std::cos(theta), 0.0), std::polar(std::sin(theta), phi)};
}

struct PairObjective {
  Eigen::Matrix2cd s1;
  Eigen::Matrix2cd s2;
  std::optional<double> rho;

  [[nodiscard]] double user_rate(const LinkStatistics& st) const {
    return rho ? ergodic_rate_m2(st, *rho) : high_snr_rate_m2(st);
  }

  // a1_x = w_x^H S1 w_x and so on, precomputed per candidate.
  [[nodiscard]] double operator()(const Eigen::Vector2cd& w1, const Eigen::Vector2cd& s2w1, double a1_1,
                                  double a2_1, const Eigen::Vector2cd& w2, const Eigen::Vector2cd& s1w2,
                                  double a1_2, double a2_2) const {
    return user_rate({a1_1, a1_2, std::abs(w1.dot(s1w2))}) + user_rate({a2_2, a2_1, std::abs(w2.dot(s2w1))});
  }

  [[nodiscard]] double at(const std::array<double, 4>& p) const {
    const Eigen::Vector2cd w1 = grid_vector(p[0], p[1]);
    const Eigen::Vector2cd w2 = grid_vector(p[2], p[3]);
    const Eigen::Vector2cd s2w1 = s2 * w1, s1w2 = s1 * w2;
    return (*this)(w1, s2w1, quad(s1, w1), w1.dot(s2w1).real(), w2, s1w2, w2.dot(s1w2).real(), quad(s2, w2));
  }

  static double quad(const Eigen::Matrix2cd& s, const Eigen::Vector2cd& w) {
    return std::max(0.0, w.dot(s * w).real());
  }
};

}  // namespace detail

/// Exhaustive search over pairs w = (cos t, sin t e^{j p}), t in [0, pi/2]
/// (`resolution` points, endpoints included) and p in [0, 2 pi)
/// (`resolution / 2` points), maximizing the two-user sum of ergodic_rate_m2
/// at rho, or of the high-SNR asymptote when rho is empty. Ties keep the
/// lowest grid index. With `refine`, a compass search started from the best
/// cell halves its step until 1e-10 rad.
inline DesignResult grid_search_oracle_m2(const CovarianceMatrix& s1, const CovarianceMatrix& s2,
                                          const GridOracleOptions& options = {}) {
  require_two_user(s1, "grid_search_oracle_m2");
  require_two_user(s2, "grid_search_oracle_m2");
  require_positive_definite(s1, "grid_search_oracle_m2");
  require_positive_definite(s2, "grid_search_oracle_m2");
  if (options.resolution < 8) throw PreconditionError("grid_search_oracle_m2: resolution must be >= 8");
  if (options.rho) detail::require_rho(*options.rho, "grid_search_oracle_m2");

  const int theta_steps = options.resolution;
  const int phi_steps = options.resolution / 2;
  const double dtheta = 0.5 * std::numbers::pi / (theta_steps - 1);
  const double dphi = 2.0 * std::numbers::pi / phi_steps;
  const std::size_t count = static_cast<std::size_t>(theta_steps) * static_cast<std::size_t>(phi_steps);

  const detail::PairObjective objective{s1.matrix(), s2.matrix(), options.rho};
  std::vector<Eigen::Vector2cd> w(count), s1w(count), s2w(count);
  std::vector<double> a1(count), a2(count);
  for (int t = 0; t < theta_steps; ++t) {
    for (int p = 0; p < phi_steps; ++p) {
      const auto k = static_cast<std::size_t>(t * phi_steps + p);
      w[k] = detail::grid_vector(t * dtheta, p * dphi);
      s1w[k] = objective.s1 * w[k];
      s2w[k] = objective.s2 * w[k];
      a1[k] = std::max(0.0, w[k].dot(s1w[k]).real());
      a2[k] = std::max(0.0, w[k].dot(s2w[k]).real());
    }
  }

  struct RowBest {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t partner = 0;
  };
  std::vector<RowBest> rows(count);
  parallel_for(count, options.workers, [&](std::size_t a) {
    RowBest best;
    for (std::size_t b = 0; b < count; ++b) {
      const double v = objective(w[a], s2w[a], a1[a], a2[a], w[b], s1w[b], a1[b], a2[b]);
      if (v > best.value) best = {v, b};
    }
    rows[a] = best;
  });
  std::size_t best_a = 0;
  for (std::size_t a = 1; a < count; ++a)
    if (rows[a].value > rows[best_a].value) best_a = a;
  const std::size_t best_b = rows[best_a].partner;
  const double grid_value = rows[best_a].value;

  auto coords = [&](std::size_t k) {
    return std::pair{static_cast<double>(k / phi_steps) * dtheta, static_cast<double>(k % phi_steps) * dphi};
  };
  std::array<double, 4> point{coords(best_a).first, coords(best_a).second, coords(best_b).first,
                              coords(best_b).second};
  double value = grid_value;
  int iterations = 0;
  if (options.refine) {
    double step_t = dtheta, step_p = dphi;
    while (step_t > 1e-10 && iterations < 2000) {
      ++iterations;
      std::array<double, 4> best_point = point;
      double best_value = value;
      for (int code = 0; code < 81; ++code) {
        if (code == 40) continue;  // the centre
        std::array<double, 4> cand = point;
        int rest = code;
        for (int d = 0; d < 4; ++d) {
          const int offset = rest % 3 - 1;
          rest /= 3;
          cand[static_cast<std::size_t>(d)] += offset * (d % 2 == 0 ? step_t : step_p);
        }
        cand[0] = std::clamp(cand[0], 0.0, 0.5 * std::numbers::pi);
        cand[2] = std::clamp(cand[2], 0.0, 0.5 * std::numbers::pi);
        const double v = objective.at(cand);
        if (v > best_value) {
          best_value = v;
          best_point = cand;
        }
      }
      if (best_value > value) {
        value = best_value;
        point = best_point;
      } else {
        step_t *= 0.5;
        step_p *= 0.5;
      }
    }
  }

  DesignResult out;
  out.ws = BeamformerSet::normalized(
      {Vector(detail::grid_vector(point[0], point[1])), Vector(detail::grid_vector(point[2], point[3]))});
  out.objective = value;
  out.method = DesignMethod::grid_oracle;
  out.diagnostics["theta_steps"] = theta_steps;
  out.diagnostics["phi_steps"] = phi_steps;
  out.diagnostics["grid_objective"] = grid_value;
  out.diagnostics["refine_iterations"] = iterations;
  out.diagnostics["high_snr"] = options.rho ? 0.0 : 1.0;
  if (options.rho) out.diagnostics["rho"] = *options.rho;
  return out;
}

// ---------------------------------------------------------------------------
// Large-M designs.

/// log(1 + (rho/m) l1 / (1 + (rho/m) sum_{j>=2} l_j)): the best large-M rate
/// user i can get from its covariance alone when the beamformers are
/// orthonormal. Non-orthogonal interferers stacked on weak eigenvectors can
/// exceed it.
inline double per_user_upper_bound(const CovarianceMatrix& sigma_i, double rho, double m) {
  detail::require_rho(rho, "per_user_upper_bound");
  if (!(m > 0.0)) throw PreconditionError("per_user_upper_bound: m must be positive");
  const RealVector ev = sigma_i.eigen().eigenvalues.cwiseMax(0.0);
  const double scale = rho / m;
  const double rest = ev.sum() - ev(0);
  return std::log1p(scale * ev(0) / (1.0 + scale * rest));
}

/// Beamformers that attain per_user_upper_bound for `user`: w_user = u_1 and
/// the other users take u_2, ..., u_M in index order.
inline BeamformerSet per_user_bound_achiever(const CovarianceMatrix& sigma_i, std::size_t user) {
  const Index m = sigma_i.dim();
  if (user >= static_cast<std::size_t>(m)) throw DimensionError("per_user_bound_achiever: user out of range");
  const EigenDecomposition eig = sigma_i.eigen();
  std::vector<Beamformer> vs(static_cast<std::size_t>(m));
  vs[user] = eig.eigenvectors.col(0);
  Index next = 1;
  for (std::size_t j = 0; j < vs.size(); ++j)
    if (j != user) vs[j] = eig.eigenvectors.col(next++);
  return BeamformerSet::normalized(std::move(vs));
}

namespace detail {

struct SinrState {
  std::vector<double> signal, interference, sinr;  // interference includes the noise term 1
};

inline SinrState sinr_state(std::span<const CovarianceMatrix> sigmas, std::span<const Vector> ws, double rho) {
  const std::size_t m = ws.size();
  const double scale = rho / static_cast<double>(m);
  SinrState st{std::vector<double>(m), std::vector<double>(m, 1.0), std::vector<double>(m)};
  for (std::size_t i = 0; i < m; ++i) {
    const Matrix& s = sigmas[i].matrix();
    for (std::size_t j = 0; j < m; ++j) {
      const double q = ws[j].dot(s * ws[j]).real();
      if (i == j) {
        st.signal[i] = scale * q;
      } else {
        st.interference[i] += scale * q;
      }
    }
    st.sinr[i] = st.signal[i] / st.interference[i];
  }
  return st;
}

inline void require_raw(std::span<const CovarianceMatrix> sigmas, std::span<const Vector> ws, const char* who) {
  if (sigmas.size() != ws.size() || ws.empty()) throw DimensionError(std::string(who) + ": one covariance per user");
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (ws[i].size() != static_cast<Index>(ws.size()) || sigmas[i].dim() != static_cast<Index>(ws.size())) {
      throw DimensionError(std::string(who) + ": need M users on M antennas");
    }
  }
}

}  // namespace detail

/// sum_i log(1 + SINR_i); defined for arbitrary (not necessarily unit) vectors.
inline double asymptotic_sum_rate(std::span<const CovarianceMatrix> sigmas, std::span<const Vector> ws, double rho) {
  detail::require_raw(sigmas, ws, "asymptotic_sum_rate");
  detail::require_rho(rho, "asymptotic_sum_rate");
  const auto st = detail::sinr_state(sigmas, ws, rho);
  double total = 0.0;
  for (double s : st.sinr) total += std::log1p(s);
  return total;
}

inline double asymptotic_sum_rate(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws, double rho) {
  return asymptotic_sum_rate(sigmas, std::span(ws.vectors()), rho);
}

struct SumRateBounds {
  double lower = 0.0;
  double upper = 1.0;
};

/// Sandwich on sum_i log(1 + SINR_i) / ((rho/M) sum_i w_i^H S_i w_i):
/// lower = 1 - (rho/M) max_i sum_j w_j^H S_i w_j, upper = 1.
inline SumRateBounds low_snr_sum_rate_bound(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                            double rho) {
  detail::require_raw(sigmas, std::span(ws.vectors()), "low_snr_sum_rate_bound");
  detail::require_rho(rho, "low_snr_sum_rate_bound");
  double worst = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    double load = 0.0;
    for (std::size_t j = 0; j < ws.size(); ++j) load += ws[j].dot(sigmas[i].matrix() * ws[j]).real();
    worst = std::max(worst, load);
  }
  return {1.0 - rho / static_cast<double>(ws.size()) * worst, 1.0};
}

/// The ratio bracketed by low_snr_sum_rate_bound.
inline double normalized_asymptotic_sum_rate(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws,
                                             double rho) {
  double signal = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) signal += ws[i].dot(sigmas[i].matrix() * ws[i]).real();
  return asymptotic_sum_rate(sigmas, ws, rho) / (rho / static_cast<double>(ws.size()) * signal);
}

/// T_i(w) = S_i / (I_i (1 + SINR_i)) - sum_{j != i} SINR_j S_j / (I_j (1 + SINR_j)).
/// (rho/M) T_i w_i is the Wirtinger derivative of the asymptotic sum-rate
/// with respect to conj(w_i).
inline Matrix fixed_point_operator(std::span<const CovarianceMatrix> sigmas, std::span<const Vector> ws,
                                   double rho, std::size_t user) {
  detail::require_raw(sigmas, ws, "fixed_point_operator");
  const auto st = detail::sinr_state(sigmas, ws, rho);
  Matrix t = sigmas[user].matrix() / (st.interference[user] * (1.0 + st.sinr[user]));
  for (std::size_t j = 0; j < ws.size(); ++j) {
    if (j == user) continue;
    t -= st.sinr[j] / (st.interference[j] * (1.0 + st.sinr[j])) * sigmas[j].matrix();
  }
  return 0.5 * (t + t.adjoint());
}

/// Gradient of the asymptotic sum-rate with respect to the real coordinates
/// (Re w_i, Im w_i), packed as complex vectors: 2 (rho/M) T_i w_i.
inline std::vector<Vector> sum_rate_gradient(std::span<const CovarianceMatrix> sigmas, std::span<const Vector> ws,
                                             double rho) {
  detail::require_raw(sigmas, ws, "sum_rate_gradient");
  detail::require_rho(rho, "sum_rate_gradient");
  const double scale = rho / static_cast<double>(ws.size());
  std::vector<Vector> out;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    out.push_back(2.0 * scale * (fixed_point_operator(sigmas, ws, rho, i) * ws[i]));
  }
  return out;
}

/// Norm of the sum-rate gradient after removing, for each user, the
/// component along w_i (tangent space of the unit sphere).
inline double projected_gradient_norm(std::span<const CovarianceMatrix> sigmas, const BeamformerSet& ws, double rho) {
  const auto grad = sum_rate_gradient(sigmas, std::span(ws.vectors()), rho);
  double total = 0.0;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    const Vector tangent = grad[i] - ws[i].dot(grad[i]).real() * ws[i];
    total += tangent.squaredNorm();
  }
  return std::sqrt(total);
}

enum class FixedPointInit { low_snr, per_user_bound, random };

struct FixedPointOptions {
  double tol = 1e-10;
  int max_iter = 500;
  int restarts = 5;
  std::uint64_t seed = 1;
  FixedPointInit init = FixedPointInit::low_snr;
  unsigned workers = 0;
};

namespace detail {

// Dominant eigenvector of a Hermitian matrix; inside a repeated top
// eigenvalue, the unit vector of that eigenspace closest to `current`.
inline Vector dominant_eigvec_near(const Matrix& t, const Vector& current) {
  const EigenDecomposition eig = hermitian_eig(t);
  const double scale = std::max(std::abs(eig.eigenvalues(0)), std::abs(eig.eigenvalues(eig.eigenvalues.size() - 1)));
  Index cluster = 1;
  while (cluster < eig.eigenvalues.size() && eig.eigenvalues(0) - eig.eigenvalues(cluster) <= 1e-10 * scale) ++cluster;
  if (cluster == 1) return eig.eigenvectors.col(0);
  const Matrix basis = eig.eigenvectors.leftCols(cluster);
  Vector projected = basis * (basis.adjoint() * current);
  if (projected.norm() <= 1e-8 * current.norm()) return eig.eigenvectors.col(0);
  return projected.normalized();
}

}  // namespace detail

/// One run of the large-M stationarity iteration from `init`:
///   w_i <- dominant eigenvector of T_i(w), all users updated from the same w,
/// until the largest principal angle moved in a sweep drops below `tol` or
/// `max_iter` sweeps. Non-convergence is reported via `converged`, not thrown.
inline DesignResult fixed_point_design(std::span<const CovarianceMatrix> sigmas, double rho, const BeamformerSet& init,
                                       double tol, int max_iter) {
  detail::require_users(sigmas, "fixed_point_design");
  detail::require_rho(rho, "fixed_point_design");
  for (const auto& s : sigmas) require_positive_definite(s, "fixed_point_design");
  if (init.size() != sigmas.size()) throw DimensionError("fixed_point_design: init must have one vector per user");
  if (!(tol > 0.0) || max_iter < 1) throw PreconditionError("fixed_point_design: need tol > 0 and max_iter >= 1");

  std::vector<Vector> w = init.vectors();
  double objective = asymptotic_sum_rate(sigmas, std::span<const Vector>(w), rho);
  bool monotone = true;
  bool converged = false;
  double step = std::numeric_limits<double>::infinity();
  int iterations = 0;
  while (iterations < max_iter) {
    ++iterations;
    std::vector<Vector> next(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      next[i] = detail::dominant_eigvec_near(fixed_point_operator(sigmas, w, rho, i), w[i]);
    }
    step = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) step = std::max(step, principal_angle(next[i], w[i]));
    w = std::move(next);
    const double updated = asymptotic_sum_rate(sigmas, std::span<const Vector>(w), rho);
    if (updated < objective - 1e-13 * std::abs(objective)) monotone = false;
    objective = updated;
    if (step < tol) {
      converged = true;
      break;
    }
  }
  for (auto& v : w) normalize_phase(v);

  DesignResult out;
  out.ws = BeamformerSet::normalized(std::move(w));
  out.objective = objective;
  out.method = DesignMethod::fixed_point;
  out.converged = converged;
  double residual = 0.0;
  for (std::size_t i = 0; i < out.ws.size(); ++i) {
    const Vector tw = fixed_point_operator(sigmas, out.ws.vectors(), rho, i) * out.ws[i];
    residual = std::max(residual, (tw - out.ws[i].dot(tw) * out.ws[i]).norm());
  }
  out.diagnostics["iterations"] = iterations;
  out.diagnostics["final_step"] = step;
  out.diagnostics["converged"] = converged ? 1.0 : 0.0;
  out.diagnostics["monotone"] = monotone ? 1.0 : 0.0;
  out.diagnostics["stationarity_residual"] = projected_gradient_norm(sigmas, out.ws, rho);
  out.diagnostics["fixed_point_residual"] = residual;
  return out;
}

/// Random unit beamformers, one per user.
inline BeamformerSet random_beamformers(Index m, std::uint64_t seed, std::uint32_t index) {
  RandomStream rs(seed, stream_id(StreamPurpose::restart, index));
  std::vector<Beamformer> vs;
  for (Index i = 0; i < m; ++i) {
    Vector v(m);
    for (Index k = 0; k < m; ++k) v(k) = rs.complex_normal();
    vs.push_back(v);
  }
  return BeamformerSet::normalized(std::move(vs));
}

/// Multi-start fixed-point design: restart 0 from `options.init`, the rest
/// from seeded random beamformers. Returns the converged run with the best
/// objective (lowest restart index on ties); if none converged, the best run
/// with converged = false.
inline DesignResult fixed_point_design(std::span<const CovarianceMatrix> sigmas, double rho,
                                       const FixedPointOptions& options = {}) {
  detail::require_users(sigmas, "fixed_point_design");
  const int restarts = std::max(1, options.restarts);
  const auto m = static_cast<Index>(sigmas.size());
  std::vector<DesignResult> runs(static_cast<std::size_t>(restarts));
  parallel_for(runs.size(), options.workers, [&](std::size_t r) {
    BeamformerSet init;
    if (r == 0 && options.init == FixedPointInit::low_snr) {
      init = design_low_snr(sigmas).ws;
    } else if (r == 0 && options.init == FixedPointInit::per_user_bound) {
      init = per_user_bound_achiever(sigmas[0], 0);
    } else {
      init = random_beamformers(m, options.seed, static_cast<std::uint32_t>(r));
    }
    runs[r] = fixed_point_design(sigmas, rho, init, options.tol, options.max_iter);
  });

  std::size_t best = runs.size();
  int converged_runs = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (!runs[r].converged) continue;
    ++converged_runs;
    if (best == runs.size() || runs[r].objective > runs[best].objective) best = r;
  }
  if (best == runs.size()) {
    best = 0;
    for (std::size_t r = 1; r < runs.size(); ++r)
      if (runs[r].objective > runs[best].objective) best = r;
  }
  DesignResult out = runs[best];
  out.diagnostics["restart"] = static_cast<double>(best);
  out.diagnostics["restarts"] = restarts;
  out.diagnostics["converged_restarts"] = converged_runs;
  return out;
}

}  // namespace statbeam
