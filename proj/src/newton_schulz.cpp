#include "ellembed/newton_schulz.hpp"

#include <atomic>
#include <cmath>

namespace ellembed {

namespace {
std::atomic<std::uint64_t> g_invocations{0};
}  // namespace

std::uint64_t newton_schulz_invocations() {
  return g_invocations.load(std::memory_order_relaxed);
}

void reset_newton_schulz_invocations() {
  g_invocations.store(0, std::memory_order_relaxed);
}

namespace detail {

void require_square_symmetric(const Matrix& m, const char* op) {
  if (m.rows() != m.cols()) {
    throw ShapeError(std::string(op) + ": matrix must be square, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const double scale = m.norm();
  if ((m - m.transpose()).norm() > 1e-8 * (1.0 + scale)) {
    throw ShapeError(std::string(op) + ": matrix must be symmetric");
  }
}

bool is_positive_definite(const Matrix& m) {
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

Matrix sqrt_psd(const Matrix& m, int iters) {
  if (m.norm() == 0.0) return Matrix::Zero(m.rows(), m.cols());
  return newton_schulz(m, iters).y;
}

double trace_sqrt_psd(const Matrix& m, int iters) {
  if (m.norm() == 0.0) return 0.0;
  return newton_schulz(m, iters).y.trace();
}

}  // namespace detail

SqrtPair newton_schulz(const Matrix& m, int iters, double eps) {
  g_invocations.fetch_add(1, std::memory_order_relaxed);
  detail::require_square_symmetric(m, "newton_schulz");
  if (iters < 1) throw DomainError("newton_schulz: iters must be >= 1");
  if (eps <= 0.0) throw DomainError("newton_schulz: eps must be positive");

  const double norm = m.norm();
  if (norm == 0.0) {
    throw DomainError("newton_schulz: zero matrix has no inverse square root");
  }

  const Index d = m.rows();
  const double scale = (1.0 + eps) * norm;
  const Matrix identity = Matrix::Identity(d, d);

  Matrix y = m / scale;
  Matrix z = identity;
  double best_residual = std::numeric_limits<double>::infinity();

  for (int k = 0; k < iters; ++k) {
    Matrix p = z * y;
    const double residual = (p - identity).norm();
    if (!std::isfinite(residual)) {
      throw ConvergenceError("newton_schulz: non-finite iterate", k);
    }
    // Once inside the contraction region the residual decreases
    // monotonically; a large rebound means the spectrum escaped.
    if (residual > 1.0 && residual > 10.0 * best_residual) {
      throw ConvergenceError("newton_schulz: diverging residual", k);
    }
    best_residual = std::min(best_residual, residual);
    Matrix t = 0.5 * (3.0 * identity - p);
    y = y * t;
    z = t * z;
  }

  SqrtPair out;
  const double root = std::sqrt(scale);
  out.y = symmetrize(y * root);
  out.z = symmetrize(z / root);
  out.residual = (out.y * out.z - identity).norm();
  if (!std::isfinite(out.residual)) {
    throw ConvergenceError("newton_schulz: non-finite result", iters);
  }
  return out;
}

}  // namespace ellembed
