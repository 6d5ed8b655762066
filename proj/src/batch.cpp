#include "ellembed/batch.hpp"

#include <cmath>

namespace ellembed {

namespace {

using detail::cross_trace_from_root;
using detail::sqrt_psd;

void require_uniform(std::span<const EllipticalPoint> rows,
                     std::span<const EllipticalPoint> cols, const char* op) {
  if (rows.empty() || cols.empty()) return;
  const Index d = rows[0].dim();
  const double tau = rows[0].tau;
  auto check = [&](const EllipticalPoint& p) {
    if (p.dim() != d) throw ShapeError(std::string(op) + ": mixed dimensions");
    if (std::abs(p.tau - tau) > 1e-12 * std::max(1.0, std::abs(tau))) {
      throw FamilyError(std::string(op) + ": mixed elliptical families");
    }
  };
  for (const auto& p : rows) check(p);
  for (const auto& p : cols) check(p);
}

std::vector<Matrix> row_roots(std::span<const EllipticalPoint> rows,
                              int iters, int threads) {
  std::vector<Matrix> roots(rows.size());
  parallel_for(std::ssize(rows), threads, [&](std::ptrdiff_t i) {
    roots[i] = sqrt_psd(rows[i].scale(), iters);
  });
  return roots;
}

double w2_sq_cell(const EllipticalPoint& row, const Matrix& row_root,
                  const EllipticalPoint& col, int iters) {
  const Matrix b = col.scale();
  double cross = 0.0;
  if (row_root.norm() != 0.0 && b.norm() != 0.0) {
    cross = cross_trace_from_root(row_root, b, iters);
  }
  const double bures =
      std::max(0.0, row.scale().trace() + b.trace() - 2.0 * cross);
  return (row.mean - col.mean).squaredNorm() + row.tau * bures;
}

double polarization_cell(const EllipticalPoint& row, const Matrix& row_root,
                         const EllipticalPoint& col, int iters) {
  const Matrix b = col.scale();
  double cross = 0.0;
  if (row_root.norm() != 0.0 && b.norm() != 0.0) {
    cross = cross_trace_from_root(row_root, b, iters);
  }
  return row.mean.dot(col.mean) + row.tau * cross;
}

template <typename Cell>
Matrix pairwise_grid(std::span<const EllipticalPoint> rows,
                     std::span<const EllipticalPoint> cols, int iters,
                     int threads, Cell cell) {
  Matrix out(rows.size(), cols.size());
  if (rows.empty() || cols.empty()) return out;
  std::vector<Matrix> roots = row_roots(rows, iters, threads);
  parallel_for(std::ssize(rows), threads, [&](std::ptrdiff_t i) {
    for (std::ptrdiff_t j = 0; j < std::ssize(cols); ++j) {
      out(i, j) = cell(rows[i], roots[i], cols[j], iters);
    }
  });
  return out;
}

}  // namespace

Matrix pairwise_w2_sq(std::span<const EllipticalPoint> rows,
                      std::span<const EllipticalPoint> cols, int iters,
                      int threads) {
  require_uniform(rows, cols, "pairwise_w2_sq");
  return pairwise_grid(rows, cols, iters, threads, w2_sq_cell);
}

Matrix pairwise_polarization(std::span<const EllipticalPoint> rows,
                             std::span<const EllipticalPoint> cols, int iters,
                             int threads) {
  require_uniform(rows, cols, "pairwise_polarization");
  return pairwise_grid(rows, cols, iters, threads, polarization_cell);
}

namespace reference {

Matrix pairwise_w2_sq(std::span<const EllipticalPoint> rows,
                      std::span<const EllipticalPoint> cols, int iters) {
  Matrix out(rows.size(), cols.size());
  for (std::ptrdiff_t i = 0; i < std::ssize(rows); ++i) {
    for (std::ptrdiff_t j = 0; j < std::ssize(cols); ++j) {
      out(i, j) = w2_sq(rows[i], cols[j], iters);
    }
  }
  return out;
}

Matrix pairwise_polarization(std::span<const EllipticalPoint> rows,
                             std::span<const EllipticalPoint> cols,
                             int iters) {
  Matrix out(rows.size(), cols.size());
  for (std::ptrdiff_t i = 0; i < std::ssize(rows); ++i) {
    for (std::ptrdiff_t j = 0; j < std::ssize(cols); ++j) {
      out(i, j) = polarization(rows[i], cols[j], iters);
    }
  }
  return out;
}

}  // namespace reference

PolarizationBatch polarization_batch(
    const EllipticalPoint& alpha,
    const std::vector<const EllipticalPoint*>& betas, int iters) {
  const Matrix a = alpha.scale();
  if (!detail::is_positive_definite(a)) {
    throw SingularityError(
        "polarization_batch: alpha's scale must be nonsingular (use eps > 0)");
  }
  SqrtPair r1 = newton_schulz(a, iters);

  PolarizationBatch out;
  out.value.resize(betas.size());
  out.t_ab.resize(betas.size());
  out.t_ba.resize(betas.size());
  for (std::size_t k = 0; k < betas.size(); ++k) {
    const EllipticalPoint& beta = *betas[k];
    detail::require_comparable(alpha, beta, "polarization_batch");
    Matrix b = beta.scale();
    if (!detail::is_positive_definite(b)) {
      throw SingularityError(
          "polarization_batch: beta's scale must be nonsingular");
    }
    Matrix cross = symmetrize(r1.y * b * r1.y);
    SqrtPair r2 = newton_schulz(cross, iters);
    out.value[k] = alpha.mean.dot(beta.mean) + alpha.tau * r2.y.trace();
    out.t_ab[k] = symmetrize(r1.z * r2.y * r1.z);
    out.t_ba[k] = symmetrize(r1.y * r2.z * r1.y);
  }
  return out;
}

}  // namespace ellembed
