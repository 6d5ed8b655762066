// Test-only oracles: exact eigendecomposition-based geometry and finite
// differences. Independent of the Newton-Schulz implementation path they
// are used to check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "ellembed/rng.hpp"
#include "ellembed/types.hpp"

namespace oracle {

using ellembed::EllipticalPoint;
using ellembed::Index;
using ellembed::Matrix;
using ellembed::Rng;
using ellembed::Vector;

inline Matrix sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  Vector lam = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

inline Matrix inv_sqrt_psd(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  Vector lam = eig.eigenvalues();
  Vector inv(lam.size());
  for (Index i = 0; i < lam.size(); ++i) {
    inv[i] = lam[i] > 0.0 ? 1.0 / std::sqrt(lam[i]) : 0.0;
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

inline double trace_cross(const Matrix& a, const Matrix& b) {
  const Matrix root = sqrt_psd(a);
  return sqrt_psd(root * b * root).trace();
}

inline double bures_sq(const Matrix& a, const Matrix& b) {
  return std::max(0.0, a.trace() + b.trace() - 2.0 * trace_cross(a, b));
}

inline Matrix transport(const Matrix& a, const Matrix& b) {
  const Matrix root = sqrt_psd(a);
  const Matrix inv_root = inv_sqrt_psd(a);
  return inv_root * sqrt_psd(root * b * root) * inv_root;
}

inline double w2_sq(const EllipticalPoint& alpha, const EllipticalPoint& beta) {
  return (alpha.mean - beta.mean).squaredNorm() +
         alpha.tau * bures_sq(alpha.scale(), beta.scale());
}

inline double polarization(const EllipticalPoint& alpha,
                           const EllipticalPoint& beta) {
  return alpha.mean.dot(beta.mean) +
         alpha.tau * trace_cross(alpha.scale(), beta.scale());
}

// --- random instances -------------------------------------------------------

inline Matrix random_orthogonal(int d, Rng& rng) {
  Matrix g(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  // Fix signs so the draw is Haar-ish and deterministic.
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

/// SPD matrix with eigenvalues log-uniform in [1, cond], scaled by `scale`.
inline Matrix random_spd(int d, Rng& rng, double cond = 100.0,
                         double scale = 1.0) {
  Matrix q = random_orthogonal(d, rng);
  Vector lam(d);
  for (int i = 0; i < d; ++i) {
    lam[i] = scale * std::exp(rng.uniform() * std::log(cond));
  }
  // Pin the extremes on the first two eigenvalues so the condition number of
  // the draw actually reaches `cond` now and then.
  if (d >= 2 && rng.uniform() < 0.25) {
    lam[0] = scale;
    lam[1] = scale * cond;
  }
  return q * lam.asDiagonal() * q.transpose();
}

/// Random point whose scale has eigenvalues in [0.1, 10] (condition number
/// at most 100, where 20 Newton-Schulz iterations are fully converged).
inline EllipticalPoint random_point(int d, Rng& rng, int k = -1,
                                    double epsilon = 0.0, double tau = 1.0) {
  EllipticalPoint p;
  if (k < 0) k = d;
  p.mean = Vector(d);
  for (int i = 0; i < d; ++i) p.mean[i] = rng.normal();
  Matrix q = random_orthogonal(d, rng).leftCols(std::min(k, d));
  Vector lam(std::min(k, d));
  for (Index i = 0; i < lam.size(); ++i) {
    lam[i] = 0.1 * std::exp(rng.uniform() * std::log(100.0));
  }
  p.factor = Matrix::Zero(d, k);
  p.factor.leftCols(lam.size()) = q * lam.cwiseSqrt().asDiagonal();
  p.epsilon = epsilon;
  p.tau = tau;
  return p;
}

// --- finite differences ------------------------------------------------------

/// Central finite differences of a scalar function over the entries of a
/// matrix parameter.
inline Matrix fd_grad(const std::function<double(const Matrix&)>& f,
                      const Matrix& x, double h = 1e-5) {
  Matrix g(x.rows(), x.cols());
  Matrix xp = x;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double orig = x(i, j);
      xp(i, j) = orig + h;
      const double up = f(xp);
      xp(i, j) = orig - h;
      const double down = f(xp);
      xp(i, j) = orig;
      g(i, j) = (up - down) / (2.0 * h);
    }
  }
  return g;
}

inline Vector fd_grad_vec(const std::function<double(const Vector&)>& f,
                          const Vector& x, double h = 1e-5) {
  Vector g(x.size());
  Vector xp = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    xp[i] = orig + h;
    const double up = f(xp);
    xp[i] = orig - h;
    const double down = f(xp);
    xp[i] = orig;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

inline double rel_error(const Matrix& got, const Matrix& want) {
  return (got - want).norm() / std::max(1e-12, want.norm());
}

}  // namespace oracle
