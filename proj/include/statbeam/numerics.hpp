#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "statbeam/error.hpp"

namespace statbeam {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace detail {

inline double max_abs_entry(const Matrix& h) {
  return h.size() == 0 ? 0.0 : h.cwiseAbs().maxCoeff();
}

// e^x E1(x) from the convergent power series; accurate for 0 < x <= 1.
inline double exp_e1_series(double x) {
  double sum = 0.0;
  double power = 1.0;  // (-x)^k / k!
  for (int k = 1; k < 200; ++k) {
    power *= -x / k;
    const double term = -power / k;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return std::exp(x) * (-std::numbers::egamma - std::log(x) + sum);
}

// e^x E1(x) from the continued fraction 1/(x+1- 1/(x+3- 4/(x+5- ...))),
// modified Lentz. Converges quickly for x > 1.
inline double exp_e1_continued_fraction(double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -static_cast<double>(i) * i;
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) <= 1e-16) break;
  }
  return h;
}

}  // namespace detail

/// e^x * E1(x), where E1(x) is the exponential integral int_x^inf e^-t/t dt.
///
/// The product is evaluated directly so neither factor over- or underflows:
/// power series for x <= 1, continued fraction above. Throws DomainError for
/// x <= 0 or non-finite x.
inline double exp_e1(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("exp_e1: argument must be finite and positive, got " + std::to_string(x));
  }
  return x <= 1.0 ? detail::exp_e1_series(x) : detail::exp_e1_continued_fraction(x);
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues descending.
struct EigenDecomposition {
  RealVector eigenvalues;
  Matrix eigenvectors;  // column k pairs with eigenvalues(k)
};

inline bool is_hermitian(const Matrix& h, double tol = 1e-12) {
  if (h.rows() != h.cols()) return false;
  const double scale = std::max(1.0, detail::max_abs_entry(h));
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

/// Rotate v so that its largest-magnitude entry is real and positive.
/// Ties (within 1e-10 relative) resolve to the lowest index.
inline void normalize_phase(Eigen::Ref<Vector> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  Index pivot = 0;
  for (Index k = 0; k < v.size(); ++k) {
    if (std::abs(v(k)) >= peak * (1.0 - 1e-10)) {
      pivot = k;
      break;
    }
  }
  const Complex rotation = std::conj(v(pivot)) / std::abs(v(pivot));
  v *= rotation;
  v(pivot) = Complex(v(pivot).real(), 0.0);
}

/// Hermitian eigensolver: cyclic complex Jacobi.
///
/// Each rotation first removes the phase of the pivot a_pq with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation. Output is sorted
/// descending (stable in the original diagonal order) and every eigenvector is
/// phase-normalized. Eigenvectors of a degenerate cluster are an arbitrary
/// orthonormal basis of the cluster subspace.
inline EigenDecomposition hermitian_eig(const Matrix& h) {
  if (h.rows() != h.cols()) throw DimensionError("hermitian_eig: matrix is not square");
  if (!h.allFinite()) throw PreconditionError("hermitian_eig: matrix has non-finite entries");
  if (!is_hermitian(h)) throw PreconditionError("hermitian_eig: matrix is not Hermitian");

  const Index n = h.rows();
  Matrix a = 0.5 * (h + h.adjoint());
  Matrix v = Matrix::Identity(n, n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    const double scale = a.norm();
    if (off == 0.0 || std::sqrt(off) <= 1e-3 * std::numeric_limits<double>::epsilon() * scale) break;

    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double mag = std::abs(a(p, q));
        if (mag == 0.0) continue;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        if (sweep > 3 && mag <= 1e-3 * std::numeric_limits<double>::epsilon() *
                                     std::min(std::abs(app), std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const Complex phase = std::conj(a(p, q)) / mag;
        const double theta = (aqq - app) / (2.0 * mag);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // U restricted to (p, q): [[c, s], [-s*phase, c*phase]].
        const Complex upp = c, upq = s, uqp = -s * phase, uqq = c * phase;

        for (Index k = 0; k < n; ++k) {
          const Complex akp = a(k, p), akq = a(k, q);
          a(k, p) = akp * upp + akq * uqp;
          a(k, q) = akp * upq + akq * uqq;
        }
        for (Index k = 0; k < n; ++k) {
          const Complex apk = a(p, k), aqk = a(q, k);
          a(p, k) = std::conj(upp) * apk + std::conj(uqp) * aqk;
          a(q, k) = std::conj(upq) * apk + std::conj(uqq) * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        a(p, p) = app - t * mag;
        a(q, q) = aqq + t * mag;
        for (Index k = 0; k < n; ++k) {
          const Complex vkp = v(k, p), vkq = v(k, q);
          v(k, p) = vkp * upp + vkq * uqp;
          v(k, q) = vkp * upq + vkq * uqq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index l, Index r) { return a(l, l).real() > a(r, r).real(); });

  EigenDecomposition out{RealVector(n), Matrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src).real();
    out.eigenvectors.col(k) = v.col(src);
    normalize_phase(out.eigenvectors.col(k));
  }
  return out;
}

/// Tolerance below which a negative eigenvalue counts as rounding noise.
inline double psd_tolerance(double largest_eigenvalue) {
  return 1e-12 * std::max(1.0, std::abs(largest_eigenvalue));
}

/// Principal (PSD) square root of a Hermitian PSD matrix. Eigenvalues in
/// [-tol, 0) are clamped to zero; anything more negative is NotPsdError.
inline Matrix matrix_sqrt_psd(const Matrix& h) {
  const EigenDecomposition eig = hermitian_eig(h);
  const Index n = h.rows();
  if (n == 0) return Matrix(0, 0);
  const double tol = psd_tolerance(eig.eigenvalues(0));
  if (eig.eigenvalues(n - 1) < -tol) {
    throw NotPsdError("matrix_sqrt_psd: eigenvalue " + std::to_string(eig.eigenvalues(n - 1)) +
                      " is negative");
  }
  const RealVector roots = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  Matrix s = eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.adjoint();
  return 0.5 * (s + s.adjoint());
}

/// Generalized eigenpairs of a Hermitian pencil (A, B) with B positive definite.
/// Vectors are unit Euclidean norm and phase-normalized; values descending.
struct GeneralizedEigen {
  RealVector values;
  Matrix vectors;
};

namespace detail {

inline Matrix inverse_sqrt_pd(const Matrix& b, const char* who) {
  const EigenDecomposition eig = hermitian_eig(b);
  const Index n = b.rows();
  const double largest = eig.eigenvalues(0);
  const double smallest = eig.eigenvalues(n - 1);
  if (!(largest > 0.0) || smallest <= 1e-12 * largest) {
    throw PreconditionError(std::string(who) + ": second matrix is not positive definite");
  }
  const RealVector inv_roots = eig.eigenvalues.cwiseSqrt().cwiseInverse();
  Matrix r = eig.eigenvectors * inv_roots.asDiagonal() * eig.eigenvectors.adjoint();
  return 0.5 * (r + r.adjoint());
}

}  // namespace detail

/// All generalized eigenpairs A x = sigma B x via the symmetric reduction
/// B^{-1/2} A B^{-1/2}, back-transformed and renormalized.
inline GeneralizedEigen generalized_eig(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw DimensionError("generalized_eig: matrices must be square and of equal size");
  }
  if (!is_hermitian(a)) throw PreconditionError("generalized_eig: first matrix is not Hermitian");
  const Matrix root = detail::inverse_sqrt_pd(b, "generalized_eig");
  Matrix reduced = root * a * root;
  reduced = 0.5 * (reduced + reduced.adjoint());
  const EigenDecomposition eig = hermitian_eig(reduced);

  GeneralizedEigen out{eig.eigenvalues, root * eig.eigenvectors};
  for (Index k = 0; k < out.vectors.cols(); ++k) {
    out.vectors.col(k).normalize();
    normalize_phase(out.vectors.col(k));
  }
  return out;
}

struct GeneralizedEigenPair {
  Vector vector;
  double value = 0.0;
};

/// Dominant generalized eigenpair of (A, B): the top eigenpair of B^{-1} A.
inline GeneralizedEigenPair generalized_dominant_eigvec(const Matrix& a, const Matrix& b) {
  const GeneralizedEigen all = generalized_eig(a, b);
  return {all.vectors.col(0), all.values(0)};
}

/// Principal angle arccos|w^H v| between the lines spanned by w and v, in
/// [0, pi/2]. Computed through atan2 so small angles keep full precision.
inline double principal_angle(const Vector& w, const Vector& v) {
  if (w.size() != v.size()) throw DimensionError("principal_angle: size mismatch");
  const double nw = w.norm(), nv = v.norm();
  if (nw == 0.0 || nv == 0.0) throw DomainError("principal_angle: zero vector");
  const Vector wu = w / nw;
  const Vector vu = v / nv;
  const Complex overlap = wu.dot(vu);  // w^H v
  const double perp = (vu - wu * overlap).norm();
  return std::atan2(perp, std::abs(overlap));
}

}  // namespace statbeam
