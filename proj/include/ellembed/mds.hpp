#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "ellembed/types.hpp"

namespace ellembed {

/// Metric MDS instance: a symmetric nonnegative dissimilarity matrix with
/// zero diagonal, a target embedding dimension and an elliptical family.
struct MdsProblem {
  Matrix dissimilarities;
  int target_dim = 2;
  double tau = kGaussianTau;
};

/// Validates the MdsProblem invariants (symmetry, zero diagonal, n >= 2).
MdsProblem make_mds_problem(Matrix dissimilarities, int target_dim,
                            double tau = kGaussianTau);

/// Euclidean distance matrix of a rows-are-items numeric table.
Matrix euclidean_dissimilarities(const Matrix& table);

/// Wasserstein stress sum_{i != j} (D_ij - W2(mu_i, mu_j))^2. A 1e-9 floor
/// under the square root keeps the loss differentiable at coincident pairs.
double stress(std::span<const EllipticalPoint> points, const Matrix& d,
              int iters = 20, int threads = 0);

/// stress / sum_{i != j} D_ij^2. Throws DegenerateError on an all-zero D.
double normalized_stress(std::span<const EllipticalPoint> points,
                         const Matrix& d, int iters = 20, int threads = 0);

/// Random start: factors are d x dof standard normal draws (so the scale
/// products follow a standard Wishart with `dof` degrees of freedom), means
/// standard normal unless seeded explicitly later.
std::vector<EllipticalPoint> wishart_init(int n, int d, int dof,
                                          std::uint64_t seed,
                                          double epsilon = 0.01,
                                          double tau = kGaussianTau);

struct MdsConfig {
  int iters = 1000;
  double lr = 0.01;          // Adagrad learning rate
  double adagrad_eps = 1e-8;
  int dof = 4;               // Wishart degrees of freedom at init
  int ns_iters = 6;
  double epsilon = 0.01;
  std::uint64_t seed = 0;
  int threads = 0;
  /// Optional fixed initial means (size n); random normal otherwise.
  const std::vector<Vector>* init_means = nullptr;
  /// Per-iteration "iter value" lines of the normalized stress.
  std::ostream* stress_log = nullptr;
};

/// Full-gradient Adagrad descent of the stress on means and factors.
/// On a non-finite loss the last finite iterate is returned.
std::vector<EllipticalPoint> fit_mds(const MdsProblem& problem,
                                     const MdsConfig& config);

inline constexpr double kStressFloor = 1e-9;

}  // namespace ellembed
