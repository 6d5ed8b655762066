#pragma once

#include <span>
#include <vector>

#include "ellembed/geometry.hpp"
#include "ellembed/parallel.hpp"
#include "ellembed/types.hpp"

namespace ellembed {

// Batched pairwise kernels. Scale roots of the row points are computed once
// and shared across their row, so an n x m grid costs n + n*m Newton-Schulz
// runs instead of 2*n*m. The OpenMP versions split rows across threads; every
// cell is an independent pure computation, so results are identical to the
// serial reference for any thread count.

/// n x m grid of squared 2-Wasserstein distances.
Matrix pairwise_w2_sq(std::span<const EllipticalPoint> rows,
                      std::span<const EllipticalPoint> cols,
                      int iters = kDefaultSqrtIters, int threads = 0);

/// n x m grid of Wasserstein-Bures pseudo-dot-products.
Matrix pairwise_polarization(std::span<const EllipticalPoint> rows,
                             std::span<const EllipticalPoint> cols,
                             int iters = kDefaultSqrtIters, int threads = 0);

namespace reference {

/// Serial double loop over w2_sq, kept as the correctness baseline for the
/// parallel kernels (and as the slow side of the benchmark).
Matrix pairwise_w2_sq(std::span<const EllipticalPoint> rows,
                      std::span<const EllipticalPoint> cols,
                      int iters = kDefaultSqrtIters);

Matrix pairwise_polarization(std::span<const EllipticalPoint> rows,
                             std::span<const EllipticalPoint> cols,
                             int iters = kDefaultSqrtIters);

}  // namespace reference

/// Pseudo-dot-products of one point against several others, with both
/// transport directions for gradient assembly. Reuses alpha's scale roots,
/// so m others cost 1 + m Newton-Schulz runs.
struct PolarizationBatch {
  std::vector<double> value;    // <a, b_k> + tau Tr(...)^{1/2}
  std::vector<Matrix> t_ab;     // transport alpha -> beta_k
  std::vector<Matrix> t_ba;     // transport beta_k -> alpha
};

PolarizationBatch polarization_batch(
    const EllipticalPoint& alpha,
    const std::vector<const EllipticalPoint*>& betas,
    int iters = kDefaultSqrtIters);

}  // namespace ellembed
