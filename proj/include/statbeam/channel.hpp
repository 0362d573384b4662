#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "statbeam/error.hpp"
#include "statbeam/numerics.hpp"
#include "statbeam/random.hpp"

namespace statbeam {

/// Spatial covariance of one user's Rayleigh channel: Hermitian PSD, M x M.
class CovarianceMatrix {
 public:
  CovarianceMatrix() = default;

  /// Validates Hermitian (1e-12 entrywise, relative to the largest entry) and
  /// PSD (min eigenvalue >= -1e-12 scaled); stores the Hermitian part.
  explicit CovarianceMatrix(const Matrix& entries) {
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
      throw DimensionError("CovarianceMatrix: must be square and non-empty");
    }
    if (!entries.allFinite()) throw PreconditionError("CovarianceMatrix: non-finite entry");
    if (!is_hermitian(entries)) throw PreconditionError("CovarianceMatrix: not Hermitian");
    entries_ = 0.5 * (entries + entries.adjoint());
    const EigenDecomposition eig = hermitian_eig(entries_);
    max_eigenvalue_ = eig.eigenvalues(0);
    min_eigenvalue_ = eig.eigenvalues(eig.eigenvalues.size() - 1);
    if (min_eigenvalue_ < -psd_tolerance(max_eigenvalue_)) {
      throw NotPsdError("CovarianceMatrix: eigenvalue " + std::to_string(min_eigenvalue_) +
                        " is negative");
    }
  }

  [[nodiscard]] Index dim() const noexcept { return entries_.rows(); }
  [[nodiscard]] const Matrix& matrix() const noexcept { return entries_; }
  [[nodiscard]] double max_eigenvalue() const noexcept { return max_eigenvalue_; }
  [[nodiscard]] double min_eigenvalue() const noexcept { return min_eigenvalue_; }
  [[nodiscard]] EigenDecomposition eigen() const { return hermitian_eig(entries_); }

 private:
  Matrix entries_;
  double max_eigenvalue_ = 0.0;
  double min_eigenvalue_ = 0.0;
};

/// Two-user closed forms need a well-conditioned positive definite matrix:
/// min eigenvalue >= 1e-10 * max eigenvalue.
inline void require_positive_definite(const CovarianceMatrix& sigma, const char* who) {
  if (!(sigma.max_eigenvalue() > 0.0) ||
      sigma.min_eigenvalue() < 1e-10 * sigma.max_eigenvalue()) {
    throw SingularCovarianceError(std::string(who) +
                                  ": covariance must be positive definite (min/max eigenvalue "
                                  "ratio >= 1e-10)");
  }
}

using Beamformer = Vector;

/// One unit-norm beamformer per user; M users on M antennas.
class BeamformerSet {
 public:
  BeamformerSet() = default;

  /// Vectors must already be unit norm to within 1e-12.
  explicit BeamformerSet(std::vector<Beamformer> vectors) : vectors_(std::move(vectors)) {
    const auto m = static_cast<Index>(vectors_.size());
    if (m == 0) throw DimensionError("BeamformerSet: empty");
    for (const auto& w : vectors_) {
      if (w.size() != m) {
        throw DimensionError("BeamformerSet: need M vectors of dimension M");
      }
      if (!w.allFinite() || std::abs(w.norm() - 1.0) > 1e-12) {
        throw PreconditionError("BeamformerSet: beamformer is not unit norm");
      }
    }
  }

  /// Normalizes each vector before validation.
  static BeamformerSet normalized(std::vector<Beamformer> vectors) {
    for (auto& w : vectors) {
      const double n = w.norm();
      if (!(n > 0.0)) throw PreconditionError("BeamformerSet: zero beamformer");
      w /= n;
    }
    return BeamformerSet(std::move(vectors));
  }

  static BeamformerSet standard_basis(Index m) {
    std::vector<Beamformer> vs;
    for (Index i = 0; i < m; ++i) vs.push_back(Vector::Unit(m, i));
    return BeamformerSet(std::move(vs));
  }

  [[nodiscard]] std::size_t size() const noexcept { return vectors_.size(); }
  [[nodiscard]] Index dim() const noexcept { return static_cast<Index>(vectors_.size()); }
  [[nodiscard]] const Beamformer& operator[](std::size_t i) const { return vectors_.at(i); }
  [[nodiscard]] const std::vector<Beamformer>& vectors() const noexcept { return vectors_; }

  /// M x M matrix whose columns are the beamformers.
  [[nodiscard]] Matrix as_matrix() const {
    Matrix w(dim(), dim());
    for (Index i = 0; i < dim(); ++i) w.col(i) = vectors_[static_cast<std::size_t>(i)];
    return w;
  }

 private:
  std::vector<Beamformer> vectors_;
};

/// Quadratic forms of a two-user link: A = w_i^H S w_i, B = w_j^H S w_j,
/// C = |w_i^H S w_j|.
struct LinkStatistics {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  /// Checks nonnegativity and C^2 <= AB (with rounding slack).
  void validate() const {
    if (!(a >= 0.0) || !(b >= 0.0) || !(c >= 0.0)) {
      throw InvariantError("LinkStatistics: entries must be nonnegative and finite");
    }
    const double slack = 1e-12 * (a + b) * (a + b);
    if (c * c > a * b + slack) throw InvariantError("LinkStatistics: C^2 > AB");
  }
};

/// Eigenvalues of the signal-plus-interference and interference-only
/// effective matrices, each descending and nonnegative.
struct EffectiveSpectrum {
  RealVector signal_plus_interference;
  RealVector interference_only;
};

struct ChannelSample {
  Vector h;
};

/// Draws h = S^{1/2} g with g ~ CN(0, I); holds the square root so repeated
/// draws do not refactor the covariance.
class ChannelSampler {
 public:
  explicit ChannelSampler(const CovarianceMatrix& sigma) : root_(matrix_sqrt_psd(sigma.matrix())) {}

  ChannelSample draw(RandomStream& stream) const {
    Vector g(root_.rows());
    for (Index k = 0; k < g.size(); ++k) g(k) = stream.complex_normal();
    return {root_ * g};
  }

  [[nodiscard]] const Matrix& root() const noexcept { return root_; }

 private:
  Matrix root_;
};

inline ChannelSample sample_channel(const CovarianceMatrix& sigma, RandomStream& stream) {
  return ChannelSampler(sigma).draw(stream);
}

inline LinkStatistics link_statistics(const CovarianceMatrix& sigma_i, const Beamformer& w_i,
                                      const Beamformer& w_j) {
  if (w_i.size() != sigma_i.dim() || w_j.size() != sigma_i.dim()) {
    throw DimensionError("link_statistics: dimension mismatch");
  }
  if (std::abs(w_i.norm() - 1.0) > 1e-10 || std::abs(w_j.norm() - 1.0) > 1e-10) {
    throw PreconditionError("link_statistics: beamformers must be unit norm");
  }
  const Matrix& s = sigma_i.matrix();
  const Vector sw_j = s * w_j;
  LinkStatistics out;
  out.a = std::max(0.0, w_i.dot(s * w_i).real());
  out.b = std::max(0.0, w_j.dot(sw_j).real());
  out.c = std::abs(w_i.dot(sw_j));
  return out;
}

/// Closed-form spectrum of the 2x2 effective matrices:
/// Lambda_1,2 = (A + B +- sqrt((A - B)^2 + 4C^2)) / 2, interference (B, 0).
/// The smaller eigenvalue is taken as det / Lambda_1 to avoid cancellation.
struct PairEigenvalues {
  double top = 0.0;
  double bottom = 0.0;
  double gap = 0.0;  // top - bottom, computed directly
};

inline PairEigenvalues pair_eigenvalues(const LinkStatistics& stats) {
  stats.validate();
  const double gap = std::hypot(stats.a - stats.b, 2.0 * stats.c);
  const double top = 0.5 * (stats.a + stats.b + gap);
  const double det = std::max(0.0, stats.a * stats.b - stats.c * stats.c);
  return {top, top > 0.0 ? det / top : 0.0, gap};
}

inline EffectiveSpectrum effective_spectrum_m2(const LinkStatistics& stats) {
  const PairEigenvalues pair = pair_eigenvalues(stats);
  EffectiveSpectrum out;
  out.signal_plus_interference = RealVector{{pair.top, pair.bottom}};
  out.interference_only = RealVector{{stats.b, 0.0}};
  return out;
}

namespace detail {

inline RealVector gram_spectrum(const Matrix& gram, Index pad_to) {
  RealVector out = RealVector::Zero(pad_to);
  if (gram.rows() > 0) {
    const RealVector ev = hermitian_eig(gram).eigenvalues.cwiseMax(0.0);
    out.head(ev.size()) = ev;
  }
  return out;
}

}  // namespace detail

/// Spectra of S^{1/2}(sum_j w_j w_j^H)S^{1/2} and of the same sum without
/// user `exclude`. Evaluated through the Gram matrix W^H S W, which has the
/// same nonzero eigenvalues and needs no matrix square root.
inline EffectiveSpectrum effective_spectrum_general(const CovarianceMatrix& sigma_i,
                                                    const BeamformerSet& ws, std::size_t exclude) {
  if (ws.dim() != sigma_i.dim()) throw DimensionError("effective_spectrum_general: dimension mismatch");
  if (exclude >= ws.size()) throw DimensionError("effective_spectrum_general: user index out of range");
  const Index m = ws.dim();
  const Matrix w = ws.as_matrix();
  const Matrix gram = w.adjoint() * sigma_i.matrix() * w;

  Matrix others(m - 1, m - 1);
  const auto ex = static_cast<Index>(exclude);
  for (Index r = 0, rr = 0; r < m; ++r) {
    if (r == ex) continue;
    for (Index c = 0, cc = 0; c < m; ++c) {
      if (c == ex) continue;
      others(rr, cc++) = gram(r, c);
    }
    ++rr;
  }
  EffectiveSpectrum out;
  out.signal_plus_interference = detail::gram_spectrum(0.5 * (gram + gram.adjoint()), m);
  out.interference_only = detail::gram_spectrum(0.5 * (others + others.adjoint()), m);
  return out;
}

/// scale * r^|k-l|; positive definite for 0 <= r < 1.
inline CovarianceMatrix exponential_correlation(Index m, double r, double scale) {
  if (m < 1) throw DimensionError("exponential_correlation: m must be positive");
  if (!(r >= 0.0 && r < 1.0)) throw PreconditionError("exponential_correlation: r must lie in [0, 1)");
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw PreconditionError("exponential_correlation: scale must be positive");
  }
  Matrix s(m, m);
  for (Index k = 0; k < m; ++k)
    for (Index l = 0; l < m; ++l) s(k, l) = scale * std::pow(r, static_cast<double>(std::abs(k - l)));
  return CovarianceMatrix(s);
}

/// Exponential correlation steered by a linear phase: D E D^H with
/// D = diag(e^{j k angle}). Same spectrum as exponential_correlation.
inline CovarianceMatrix steered_exponential_correlation(Index m, double r, double scale, double angle) {
  const CovarianceMatrix base = exponential_correlation(m, r, scale);
  Vector d(m);
  for (Index k = 0; k < m; ++k) d(k) = std::polar(1.0, angle * static_cast<double>(k));
  return CovarianceMatrix(d.asDiagonal() * base.matrix() * d.conjugate().asDiagonal());
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of diag(R) folded back into Q.
inline Matrix random_unitary(Index m, RandomStream& stream) {
  Matrix g(m, m);
  for (Index c = 0; c < m; ++c)
    for (Index r = 0; r < m; ++r) g(r, c) = stream.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(m, m);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index k = 0; k < m; ++k) {
    const double mag = std::abs(r(k, k));
    if (mag > 0.0) q.col(k) *= r(k, k) / mag;
  }
  return q;
}

/// Q diag(eigenvalues) Q^H with Q Haar-random from `seed`.
inline CovarianceMatrix random_spectrum_covariance(std::span<const double> eigenvalues, std::uint64_t seed) {
  const auto m = static_cast<Index>(eigenvalues.size());
  if (m == 0) throw DimensionError("random_spectrum_covariance: empty spectrum");
  RealVector lambda(m);
  for (Index k = 0; k < m; ++k) {
    lambda(k) = eigenvalues[static_cast<std::size_t>(k)];
    if (!(lambda(k) >= 0.0) || !std::isfinite(lambda(k))) {
      throw PreconditionError("random_spectrum_covariance: eigenvalues must be finite and >= 0");
    }
  }
  RandomStream stream(seed, stream_id(StreamPurpose::fixture, static_cast<std::uint32_t>(m)));
  const Matrix q = random_unitary(m, stream);
  const Matrix s = q * lambda.cast<Complex>().asDiagonal() * q.adjoint();
  return CovarianceMatrix(0.5 * (s + s.adjoint()));
}

/// ||S1 S2 - S2 S1||_F <= tol * ||S1||_F ||S2||_F.
inline bool commutes(const CovarianceMatrix& s1, const CovarianceMatrix& s2, double tol = 1e-10) {
  if (s1.dim() != s2.dim()) return false;
  const Matrix& a = s1.matrix();
  const Matrix& b = s2.matrix();
  return (a * b - b * a).norm() <= tol * a.norm() * b.norm();
}

}  // namespace statbeam
