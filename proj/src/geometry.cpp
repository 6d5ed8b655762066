#include "ellembed/geometry.hpp"

#include <cmath>

namespace ellembed {

namespace detail {

void require_comparable(const EllipticalPoint& alpha,
                        const EllipticalPoint& beta, const char* op) {
  if (alpha.dim() != beta.dim()) {
    throw ShapeError(std::string(op) + ": dimension mismatch (" +
                     std::to_string(alpha.dim()) + " vs " +
                     std::to_string(beta.dim()) + ")");
  }
  if (std::abs(alpha.tau - beta.tau) >
      1e-12 * std::max(1.0, std::abs(alpha.tau))) {
    throw FamilyError(std::string(op) +
                      ": points belong to different elliptical families "
                      "(tau " + std::to_string(alpha.tau) + " vs " +
                      std::to_string(beta.tau) + ")");
  }
}

double cross_trace_from_root(const Matrix& root_a, const Matrix& b,
                             int iters) {
  Matrix cross = symmetrize(root_a * b * root_a);
  return trace_sqrt_psd(cross, iters);
}

}  // namespace detail

using detail::cross_trace_from_root;
using detail::is_positive_definite;
using detail::require_square_symmetric;
using detail::sqrt_psd;
using detail::trace_sqrt_psd;

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  require_square_symmetric(a, op);
  require_square_symmetric(b, op);
  if (a.rows() != b.rows()) {
    throw ShapeError(std::string(op) + ": dimension mismatch (" +
                     std::to_string(a.rows()) + " vs " +
                     std::to_string(b.rows()) + ")");
  }
}

/// Transport map via eigendecomposition with pseudo-inverse roots. Cold path
/// for rank-deficient unregularized scales; the hot path never lands here.
Matrix transport_map_pseudo(const Matrix& a, const Matrix& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  if (eig.info() != Eigen::Success) {
    throw SingularityError("transport_map: eigendecomposition failed");
  }
  const Vector lam = eig.eigenvalues().cwiseMax(0.0);
  const double cutoff = 1e-12 * std::max(1.0, lam.maxCoeff());
  Vector root = lam.cwiseSqrt();
  Vector pinv_root = root;
  for (Index i = 0; i < root.size(); ++i) {
    pinv_root[i] = lam[i] > cutoff ? 1.0 / root[i] : 0.0;
  }
  const Matrix& u = eig.eigenvectors();
  Matrix a_half = u * root.asDiagonal() * u.transpose();
  Matrix a_pinv_half = u * pinv_root.asDiagonal() * u.transpose();

  Matrix cross = symmetrize(a_half * b * a_half);
  Eigen::SelfAdjointEigenSolver<Matrix> eig_cross(cross);
  Vector cross_root = eig_cross.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix cross_half = eig_cross.eigenvectors() * cross_root.asDiagonal() *
                      eig_cross.eigenvectors().transpose();
  return symmetrize(a_pinv_half * cross_half * a_pinv_half);
}

/// Transport map used by the factor gradients: regularized inputs go through
/// the Newton-Schulz primal formula, unregularized rank-deficient ones either
/// fail the differentiability image condition or use pseudo-inverse roots.
Matrix gradient_transport(const Matrix& l, const Matrix& b, double eps,
                          int iters, const char* op) {
  const Index d = l.rows();
  require_square_symmetric(b, op);
  if (b.rows() != d) {
    throw ShapeError(std::string(op) + ": factor/matrix dimension mismatch");
  }
  if (b.norm() == 0.0) return Matrix::Zero(d, d);  // transport to a Dirac

  Matrix a = l * l.transpose();
  if (eps > 0.0) {
    a.diagonal().array() += eps;
    return transport_map(a, b, TransportFormula::primal, iters).t;
  }
  if (is_positive_definite(a)) {
    return transport_map(a, b, TransportFormula::primal, iters).t;
  }
  // Unregularized and rank deficient: the gradient exists only when the
  // target's image is contained in the factor's image.
  Eigen::ColPivHouseholderQR<Matrix> qr(l);
  const Index rank = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(d, rank);
  Matrix outside = b - q * (q.transpose() * b);
  if (outside.norm() > 1e-9 * std::max(1.0, b.norm())) {
    throw NonDifferentiableError(
        std::string(op) +
        ": Bures metric not differentiable (Image(B) exceeds Image(A) and "
        "eps = 0)");
  }
  return transport_map_pseudo(a, b);
}

}  // namespace

// ---------------------------------------------------------------------------

double bures_sq(const Matrix& a, const Matrix& b, int iters) {
  require_same_shape(a, b, "bures_sq");
  Matrix root_a = sqrt_psd(a, iters);
  const double cross = cross_trace_from_root(root_a, b, iters);
  const double value = a.trace() + b.trace() - 2.0 * cross;
  return std::max(0.0, value);
}

double w2_sq(const EllipticalPoint& alpha, const EllipticalPoint& beta,
             int iters) {
  detail::require_comparable(alpha, beta, "w2_sq");
  const double mean_part = (alpha.mean - beta.mean).squaredNorm();
  return mean_part + alpha.tau * bures_sq(alpha.scale(), beta.scale(), iters);
}

Matrix variance_of(const EllipticalPoint& p) { return p.tau * p.scale(); }

double hellinger_sq(const Vector& da, const Vector& db) {
  if (da.size() != db.size()) {
    throw ShapeError("hellinger_sq: length mismatch");
  }
  if ((da.array() < 0.0).any() || (db.array() < 0.0).any()) {
    throw DomainError("hellinger_sq: entries must be nonnegative");
  }
  return (da.cwiseSqrt() - db.cwiseSqrt()).squaredNorm();
}

// ---------------------------------------------------------------------------

TransportMap transport_map(const Matrix& a, const Matrix& b,
                           TransportFormula formula, int iters) {
  require_same_shape(a, b, "transport_map");
  const Index d = a.rows();
  if (b.norm() == 0.0) {
    // Everything is transported onto a Dirac: T = 0 satisfies T A T = 0.
    return TransportMap{Matrix::Zero(d, d)};
  }
  if (formula == TransportFormula::primal) {
    if (!is_positive_definite(a)) {
      throw SingularityError(
          "transport_map: A is singular; regularize or use the alternative "
          "formula");
    }
    SqrtPair roots_a = newton_schulz(a, iters);
    Matrix cross = symmetrize(roots_a.y * b * roots_a.y);
    Matrix cross_half = sqrt_psd(cross, iters);
    return TransportMap{symmetrize(roots_a.z * cross_half * roots_a.z)};
  }
  SqrtPair roots_b = newton_schulz(b, iters);
  Matrix cross = symmetrize(roots_b.y * a * roots_b.y);
  SqrtPair roots_cross = newton_schulz(cross, iters);
  return TransportMap{symmetrize(roots_b.y * roots_cross.z * roots_b.y)};
}

std::pair<TransportMap, TransportMap> transport_pair(const Matrix& a,
                                                     const Matrix& b,
                                                     int iters) {
  require_same_shape(a, b, "transport_pair");
  if (!is_positive_definite(a) || !is_positive_definite(b)) {
    throw SingularityError("transport_pair: both scales must be nonsingular");
  }
  SqrtPair r1 = newton_schulz(a, iters);  // Y1 = A^{1/2}, Z1 = A^{-1/2}
  Matrix cross = symmetrize(r1.y * b * r1.y);
  SqrtPair r2 = newton_schulz(cross, iters);
  TransportMap t_ab{symmetrize(r1.z * r2.y * r1.z)};
  TransportMap t_ba{symmetrize(r1.y * r2.z * r1.y)};
  return {std::move(t_ab), std::move(t_ba)};
}

EllipticalPoint geodesic_point(const EllipticalPoint& alpha,
                               const EllipticalPoint& beta, double t,
                               int iters) {
  detail::require_comparable(alpha, beta, "geodesic_point");
  const Index d = alpha.dim();
  Matrix a = alpha.scale();
  Matrix b = beta.scale();
  Matrix map = transport_map(a, b, TransportFormula::primal, iters).t;
  Matrix blend = (1.0 - t) * Matrix::Identity(d, d) + t * map;

  EllipticalPoint out;
  out.mean = (1.0 - t) * alpha.mean + t * beta.mean;
  out.tau = alpha.tau;
  out.epsilon = 0.0;
  if (alpha.epsilon == 0.0) {
    out.factor = blend * alpha.factor;
  } else {
    // The regularized scale has no k-column factor; interpolate a full one
    // so the returned factor reproduces C(t) exactly.
    Eigen::LLT<Matrix> llt(a);
    out.factor = blend * Matrix(llt.matrixL());
  }
  return out;
}

Matrix riemannian_step(const Matrix& a, const Matrix& b, double eta,
                       int iters) {
  const Index d = a.rows();
  Matrix map = transport_map(a, b, TransportFormula::primal, iters).t;
  Matrix blend = (1.0 - eta) * Matrix::Identity(d, d) + eta * map;
  return symmetrize(blend * a * blend.transpose());
}

// ---------------------------------------------------------------------------

Matrix grad_bures_factor(const Matrix& l, const Matrix& b, double eps,
                         int iters) {
  Matrix t = gradient_transport(l, b, eps, iters, "grad_bures_factor");
  return l - t * l;
}

Matrix grad_polarization_factor(const Matrix& l, const Matrix& b, double eps,
                                double tau, int iters) {
  Matrix t = gradient_transport(l, b, eps, iters, "grad_polarization_factor");
  return tau * (t * l);
}

// ---------------------------------------------------------------------------

double polarization(const EllipticalPoint& alpha, const EllipticalPoint& beta,
                    int iters) {
  detail::require_comparable(alpha, beta, "polarization");
  Matrix a = alpha.scale();
  Matrix b = beta.scale();
  double cross = 0.0;
  if (a.norm() != 0.0 && b.norm() != 0.0) {
    Matrix root_a = sqrt_psd(a, iters);
    cross = cross_trace_from_root(root_a, b, iters);
  }
  return alpha.mean.dot(beta.mean) + alpha.tau * cross;
}

double cosine_mixture(const EllipticalPoint& alpha,
                      const EllipticalPoint& beta, double rho, int iters) {
  detail::require_comparable(alpha, beta, "cosine_mixture");
  const double na = alpha.mean.norm();
  const double nb = beta.mean.norm();
  if (na == 0.0 || nb == 0.0) {
    throw DegenerateError("cosine_mixture: zero mean has no cosine");
  }
  Matrix a = alpha.scale();
  Matrix b = beta.scale();
  const double tr_a = a.trace();
  const double tr_b = b.trace();
  if (tr_a <= 0.0 || tr_b <= 0.0) {
    throw DegenerateError("cosine_mixture: zero-trace scale has no cosine");
  }
  Matrix root_a = sqrt_psd(a, iters);
  const double cross = cross_trace_from_root(root_a, b, iters);
  return alpha.mean.dot(beta.mean) / (na * nb) +
         rho * cross / std::sqrt(tr_a * tr_b);
}

double bures_cosine(const EllipticalPoint& alpha, const EllipticalPoint& beta,
                    double rho, int iters) {
  detail::require_comparable(alpha, beta, "bures_cosine");
  Matrix a = alpha.scale();
  Matrix b = beta.scale();
  const double qa = alpha.mean.squaredNorm() + rho * a.trace();
  const double qb = beta.mean.squaredNorm() + rho * b.trace();
  if (qa <= 0.0 || qb <= 0.0) {
    throw DegenerateError(
        "bures_cosine: point with zero mean and zero scale");
  }
  double cross = 0.0;
  if (a.norm() != 0.0 && b.norm() != 0.0) {
    Matrix root_a = sqrt_psd(a, iters);
    cross = cross_trace_from_root(root_a, b, iters);
  }
  return (alpha.mean.dot(beta.mean) + rho * cross) / std::sqrt(qa * qb);
}

}  // namespace ellembed
