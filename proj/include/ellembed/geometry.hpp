#pragma once

#include <utility>

#include "ellembed/newton_schulz.hpp"
#include "ellembed/types.hpp"

namespace ellembed {

/// Default Newton-Schulz iteration count where an operation does not expose
/// one. 20 is accurate to ~1e-10 on well-conditioned inputs; trainers use 6.
inline constexpr int kDefaultSqrtIters = 20;

// ---------------------------------------------------------------------------
// Distances
// ---------------------------------------------------------------------------

/// Squared Bures metric Tr(A + B - 2 (A^{1/2} B A^{1/2})^{1/2}) between PSD
/// matrices, clamped at zero against round-off.
double bures_sq(const Matrix& a, const Matrix& b, int iters = kDefaultSqrtIters);

/// Squared 2-Wasserstein distance between two elliptical measures of the
/// same family: ||a - b||^2 + tau * bures_sq(A, B) on the effective scales.
double w2_sq(const EllipticalPoint& alpha, const EllipticalPoint& beta,
             int iters = kDefaultSqrtIters);

/// Covariance matrix: tau times the effective scale.
Matrix variance_of(const EllipticalPoint& p);

/// Squared Hellinger metric ||sqrt(da) - sqrt(db)||^2 between nonnegative
/// vectors; equals the Bures metric between the corresponding diagonals.
double hellinger_sq(const Vector& da, const Vector& db);

// ---------------------------------------------------------------------------
// Transport maps, geodesics, Riemannian steps
// ---------------------------------------------------------------------------

enum class TransportFormula {
  primal,       // A^{-1/2} (A^{1/2} B A^{1/2})^{1/2} A^{-1/2}
  alternative,  // B^{1/2}  (B^{1/2} A B^{1/2})^{-1/2} B^{1/2}
};

/// The symmetric PSD matrix T with T A T = B. The primal formula requires
/// nonsingular A; the alternative inverts around B instead. The result is
/// symmetrized before returning.
TransportMap transport_map(const Matrix& a, const Matrix& b,
                           TransportFormula formula = TransportFormula::primal,
                           int iters = kDefaultSqrtIters);

/// Both transport directions from exactly two Newton-Schulz runs:
/// {Y1,Z1} = roots of A, {Y2,Z2} = roots of A^{1/2} B A^{1/2}, then
/// T_AB = Z1 Y2 Z1 and T_BA = Y1 Z2 Y1.
std::pair<TransportMap, TransportMap> transport_pair(
    const Matrix& a, const Matrix& b, int iters = kDefaultSqrtIters);

/// Point at parameter t on the Wasserstein geodesic from alpha to beta;
/// t outside [0,1] extrapolates (the scale stays PSD by construction).
EllipticalPoint geodesic_point(const EllipticalPoint& alpha,
                               const EllipticalPoint& beta, double t,
                               int iters = kDefaultSqrtIters);

/// One Riemannian gradient step on 1/2 B^2(A, B):
/// ((1-eta) I + eta T^{AB}) A ((1-eta) I + eta T^{AB}).
Matrix riemannian_step(const Matrix& a, const Matrix& b, double eta,
                       int iters = kDefaultSqrtIters);

// ---------------------------------------------------------------------------
// Gradients in factor parameterization (A = L L^T + eps I)
// ---------------------------------------------------------------------------

/// d/dL [ 1/2 B^2(L L^T + eps I, B) ] = (I - T^{A_eps B}) L.
/// With eps = 0 and Image(B) not contained in Image(L L^T) the metric is not
/// differentiable and a NonDifferentiableError is thrown.
Matrix grad_bures_factor(const Matrix& l, const Matrix& b, double eps,
                         int iters = kDefaultSqrtIters);

/// d/dL [ tau * Tr(A^{1/2} B A^{1/2})^{1/2} ] = tau * T^{A_eps B} L,
/// the factor gradient of the trace term of the polarization form.
Matrix grad_polarization_factor(const Matrix& l, const Matrix& b, double eps,
                                double tau = 1.0,
                                int iters = kDefaultSqrtIters);

// ---------------------------------------------------------------------------
// Similarities
// ---------------------------------------------------------------------------

/// Wasserstein-Bures pseudo-dot-product
/// <a,b> + tau * Tr(A^{1/2} B A^{1/2})^{1/2}; equal to the polarization
/// identity 1/2 (W2^2(alpha, d0) + W2^2(beta, d0) - W2^2(alpha, beta)).
double polarization(const EllipticalPoint& alpha, const EllipticalPoint& beta,
                    int iters = kDefaultSqrtIters);

/// Sum of a mean cosine and a trace-normalized Bures cross term:
/// <a,b>/(|a||b|) + rho * Tr(A^{1/2} B A^{1/2})^{1/2} / sqrt(Tr A Tr B).
/// The second term always lies in [0, 1].
double cosine_mixture(const EllipticalPoint& alpha,
                      const EllipticalPoint& beta, double rho = 1.0,
                      int iters = kDefaultSqrtIters);

/// Jointly normalized pseudo-dot-product:
/// (<a,b> + rho Tr(...)^{1/2}) / ((|a|^2 + rho Tr A)(|b|^2 + rho Tr B))^{1/2}.
double bures_cosine(const EllipticalPoint& alpha, const EllipticalPoint& beta,
                    double rho = 1.0, int iters = kDefaultSqrtIters);

namespace detail {

/// Shared family/shape validation for two-point operations.
void require_comparable(const EllipticalPoint& alpha,
                        const EllipticalPoint& beta, const char* op);

/// Tr(A^{1/2} B A^{1/2})^{1/2} given precomputed root Y = A^{1/2}.
double cross_trace_from_root(const Matrix& root_a, const Matrix& b, int iters);

}  // namespace detail
}  // namespace ellembed
