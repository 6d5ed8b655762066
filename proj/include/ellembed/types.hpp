#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace ellembed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Error taxonomy. Data-shaped problems (bad input files, mismatched
// dimensions) are distinct from numerical failures so the CLI can map them
// to different exit codes.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Wrong matrix/vector dimensions or non-symmetric input.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Mixing elliptical families (different tau) in one comparison.
class FamilyError : public Error {
 public:
  using Error::Error;
};

/// Entries outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Degenerate problem instance (zero norms, constant rank vectors, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Malformed persisted data; carries a 1-based line number when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& msg, long line = -1)
      : Error(line >= 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Invalid relation graph (cycles outside self-loops, missing nodes).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// Anything else wrong with user-supplied data (empty vocab, OOV nodes).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An iteration failed to converge; remembers at which step.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, int iteration)
      : Error(msg + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

/// A matrix that must be invertible is (numerically) singular.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Gradient requested at a point where the metric is not differentiable.
class NonDifferentiableError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values encountered during optimization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Family constants: covariance = tau * scale.
// ---------------------------------------------------------------------------

inline constexpr double kGaussianTau = 1.0;

/// Uniform distributions on full-rank ellipsoids: tau = 1/(d+2).
inline double uniform_tau(Index d) { return 1.0 / static_cast<double>(d + 2); }

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// One embedding: a mean in R^d and a d x k scale factor L. The effective
/// scale is A = L L^T + epsilon I; every geometric operation works on A,
/// never on L directly. k may be smaller than d (low-rank scales) or zero
/// (a Dirac when epsilon is also zero).
struct EllipticalPoint {
  Vector mean;
  Matrix factor;         // d x k
  double epsilon = 0.0;  // shared regularizer added to L L^T
  double tau = kGaussianTau;

  Index dim() const { return mean.size(); }
  Index factor_rank() const { return factor.cols(); }

  /// Effective scale A = L L^T + epsilon I.
  Matrix scale() const {
    Matrix a = factor * factor.transpose();
    if (epsilon != 0.0) a.diagonal().array() += epsilon;
    return a;
  }
};

/// Point mass at `mean`: zero factor, zero regularizer.
inline EllipticalPoint dirac(Vector mean, double tau = kGaussianTau) {
  EllipticalPoint p;
  const Index d = mean.size();
  p.mean = std::move(mean);
  p.factor = Matrix::Zero(d, 0);
  p.epsilon = 0.0;
  p.tau = tau;
  return p;
}

/// Optimal transport map between two scale matrices: the unique symmetric
/// PSD T with T A T = B.
struct TransportMap {
  Matrix t;
};

/// Coupled square root / inverse square root approximation with the
/// ||Y Z - I||_F residual observed on exit.
struct SqrtPair {
  Matrix y;  // ~ M^{1/2}
  Matrix z;  // ~ M^{-1/2}
  double residual = 0.0;
};

/// Gradient of a scalar loss with respect to one point's parameters.
struct GradientPair {
  Vector d_mean;
  Matrix d_factor;

  GradientPair() = default;
  GradientPair(Index d, Index k)
      : d_mean(Vector::Zero(d)), d_factor(Matrix::Zero(d, k)) {}

  GradientPair& operator+=(const GradientPair& o) {
    d_mean += o.d_mean;
    d_factor += o.d_factor;
    return *this;
  }
  GradientPair& operator*=(double s) {
    d_mean *= s;
    d_factor *= s;
    return *this;
  }
  bool all_finite() const {
    return d_mean.allFinite() && d_factor.allFinite();
  }
};

inline Matrix symmetrize(const Matrix& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace ellembed
