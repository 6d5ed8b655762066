#pragma once

#include <cstdint>

#include "ellembed/types.hpp"

namespace ellembed {

/// Coupled Newton-Schulz iteration producing M^{1/2} and M^{-1/2} together
/// using matrix products only. The input is scaled by (1+eps)*||M||_F so its
/// spectrum lands in (0, 1], the convergence region of the iteration, and
/// rescaled on exit. Runs a fixed number of iterations; throws
/// ConvergenceError if the coupled residual ||Z Y - I||_F grows past the
/// point of no return or turns non-finite.
SqrtPair newton_schulz(const Matrix& m, int iters, double eps = 1e-6);

/// Number of newton_schulz invocations since process start (or the last
/// reset). Instrumentation for callers that budget square-root work.
std::uint64_t newton_schulz_invocations();
void reset_newton_schulz_invocations();

namespace detail {

/// Square root of a PSD matrix with the zero matrix mapped to zero
/// (newton_schulz itself rejects zero input since no inverse root exists).
Matrix sqrt_psd(const Matrix& m, int iters);

/// trace((M)^{1/2}) with the same zero-safety.
double trace_sqrt_psd(const Matrix& m, int iters);

/// Cheap positive definiteness probe (Cholesky).
bool is_positive_definite(const Matrix& m);

void require_square_symmetric(const Matrix& m, const char* op);

}  // namespace detail
}  // namespace ellembed
