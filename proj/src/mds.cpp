#include "ellembed/mds.hpp"

#include <cmath>
#include <iostream>

#include "ellembed/batch.hpp"
#include "ellembed/newton_schulz.hpp"
#include "ellembed/optim.hpp"
#include "ellembed/parallel.hpp"
#include "ellembed/rng.hpp"

namespace ellembed {

MdsProblem make_mds_problem(Matrix dissimilarities, int target_dim,
                            double tau) {
  const Index n = dissimilarities.rows();
  if (dissimilarities.cols() != n) {
    throw ShapeError("mds: dissimilarity matrix must be square");
  }
  if (n < 2) throw DataError("mds: need at least 2 items");
  if ((dissimilarities.array() < 0.0).any()) {
    throw DomainError("mds: dissimilarities must be nonnegative");
  }
  if ((dissimilarities - dissimilarities.transpose()).norm() >
      1e-9 * (1.0 + dissimilarities.norm())) {
    throw ShapeError("mds: dissimilarity matrix must be symmetric");
  }
  if (dissimilarities.diagonal().norm() != 0.0) {
    throw ShapeError("mds: dissimilarity matrix must have a zero diagonal");
  }
  if (target_dim < 1) throw DomainError("mds: target_dim must be positive");
  return MdsProblem{std::move(dissimilarities), target_dim, tau};
}

Matrix euclidean_dissimilarities(const Matrix& table) {
  const Index n = table.rows();
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) = (table.row(i) - table.row(j)).norm();
    }
  }
  return d;
}

double stress(std::span<const EllipticalPoint> points, const Matrix& d,
              int iters, int threads) {
  const Index n = d.rows();
  if (std::ssize(points) != n || d.cols() != n) {
    throw ShapeError("stress: points/matrix size mismatch");
  }
  Matrix w2 = pairwise_w2_sq(points, points, iters, threads);
  double acc = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const double w = std::sqrt(w2(i, j) + kStressFloor);
      const double diff = d(i, j) - w;
      acc += diff * diff;
    }
  }
  return 2.0 * acc;
}

double normalized_stress(std::span<const EllipticalPoint> points,
                         const Matrix& d, int iters, int threads) {
  const double denom = d.squaredNorm();  // sum of D_ij^2 over ordered pairs
  if (denom == 0.0) {
    throw DegenerateError("normalized_stress: all-zero dissimilarities");
  }
  return stress(points, d, iters, threads) / denom;
}

std::vector<EllipticalPoint> wishart_init(int n, int d, int dof,
                                          std::uint64_t seed, double epsilon,
                                          double tau) {
  if (n < 1 || d < 1 || dof < 0) {
    throw DomainError("wishart_init: bad shape arguments");
  }
  Rng rng(seed);
  std::vector<EllipticalPoint> points(n);
  for (auto& p : points) {
    p.mean = Vector(d);
    for (Index i = 0; i < d; ++i) p.mean[i] = rng.normal();
    p.factor = Matrix(d, dof);
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < dof; ++c) p.factor(r, c) = rng.normal();
    }
    p.epsilon = epsilon;
    p.tau = tau;
  }
  return points;
}

namespace {

struct PairData {
  double w2sq = 0.0;
  Matrix t_fwd;  // transport i -> j
  Matrix t_bwd;  // transport j -> i
};

}  // namespace

std::vector<EllipticalPoint> fit_mds(const MdsProblem& problem,
                                     const MdsConfig& config) {
  const Matrix& d = problem.dissimilarities;
  const Index n = d.rows();
  const int dim = problem.target_dim;
  const int nthreads = resolve_threads(config.threads);

  std::vector<EllipticalPoint> points =
      wishart_init(static_cast<int>(n), dim, config.dof, config.seed,
                   config.epsilon, problem.tau);
  if (config.init_means != nullptr) {
    if (std::ssize(*config.init_means) != n) {
      throw ShapeError("fit_mds: init_means size mismatch");
    }
    for (Index i = 0; i < n; ++i) {
      if ((*config.init_means)[i].size() != dim) {
        throw ShapeError("fit_mds: init_means dimension mismatch");
      }
      points[i].mean = (*config.init_means)[i];
    }
  }
  if (config.dof < dim && config.epsilon == 0.0) {
    std::cerr << "fit_mds: warning: rank-deficient init (dof < dim) with "
                 "epsilon = 0; gradients may not exist\n";
  }

  const double denom = d.squaredNorm();
  if (denom == 0.0) {
    throw DegenerateError("fit_mds: all-zero dissimilarities");
  }

  AdagradState opt(config.lr, config.adagrad_eps);
  opt.init(points);

  // Flattened upper triangle.
  std::vector<std::pair<Index, Index>> pair_index;
  pair_index.reserve(n * (n - 1) / 2);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) pair_index.emplace_back(i, j);
  }
  std::vector<PairData> pairs(pair_index.size());
  std::vector<double> pair_stress(pair_index.size());
  std::vector<SqrtPair> roots(n);
  std::vector<GradientPair> grads(n);
  std::vector<EllipticalPoint> last_finite = points;

  auto find_pair = [&](Index i, Index j) -> const PairData& {
    // (i, j) with i < j sits at offset i*(2n-i-1)/2 + (j-i-1).
    return pairs[static_cast<std::size_t>(i) * (2 * n - i - 1) / 2 +
                 (j - i - 1)];
  };

  // Dirac scales (pure point embeddings) have no inverse root; their
  // transports degenerate to the zero map and their factor blocks are empty.
  auto zero_pair = [dim] {
    SqrtPair z;
    z.y = Matrix::Zero(dim, dim);
    z.z = Matrix::Zero(dim, dim);
    return z;
  };

  for (int iter = 0; iter <= config.iters; ++iter) {
    parallel_for(n, nthreads, [&](std::ptrdiff_t i) {
      const Matrix a = points[i].scale();
      roots[i] = a.norm() == 0.0 ? zero_pair()
                                 : newton_schulz(a, config.ns_iters);
    });

    parallel_for(std::ssize(pair_index), nthreads, [&](std::ptrdiff_t p) {
      const auto [i, j] = pair_index[p];
      const Matrix a_j = points[j].scale();
      Matrix cross = symmetrize(roots[i].y * a_j * roots[i].y);
      SqrtPair r2 = cross.norm() == 0.0 ? zero_pair()
                                        : newton_schulz(cross, config.ns_iters);
      const double bures = std::max(
          0.0, points[i].scale().trace() + a_j.trace() - 2.0 * r2.y.trace());
      pairs[p].w2sq = (points[i].mean - points[j].mean).squaredNorm() +
                      problem.tau * bures;
      pairs[p].t_fwd = symmetrize(roots[i].z * r2.y * roots[i].z);
      pairs[p].t_bwd = symmetrize(roots[i].y * r2.z * roots[i].y);
      const double w = std::sqrt(pairs[p].w2sq + kStressFloor);
      const double diff = d(i, j) - w;
      pair_stress[p] = diff * diff;
    });

    double loss = 0.0;
    for (double s : pair_stress) loss += s;
    loss *= 2.0;

    if (!std::isfinite(loss)) {
      std::cerr << "fit_mds: non-finite stress at iteration " << iter
                << "; returning last finite iterate\n";
      return last_finite;
    }
    last_finite = points;
    if (config.stress_log != nullptr) {
      (*config.stress_log) << iter << ' ' << loss / denom << '\n';
    }
    if (iter == config.iters) break;

    parallel_for(n, nthreads, [&](std::ptrdiff_t i) {
      GradientPair g(points[i].dim(), points[i].factor_rank());
      const Matrix identity = Matrix::Identity(dim, dim);
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const PairData& pd = i < j ? find_pair(i, j) : find_pair(j, i);
        const Matrix& t = i < j ? pd.t_fwd : pd.t_bwd;
        const double w = std::sqrt(pd.w2sq + kStressFloor);
        const double coeff = -2.0 * (d(i, j) - w) / w;
        g.d_mean += coeff * 2.0 * (points[i].mean - points[j].mean);
        g.d_factor +=
            coeff * 2.0 * problem.tau * ((identity - t) * points[i].factor);
      }
      grads[i] = std::move(g);
    });

    for (Index i = 0; i < n; ++i) {
      adagrad_step(opt, static_cast<int>(i), points[i].mean, points[i].factor,
                   grads[i]);
    }
  }
  return points;
}

}  // namespace ellembed
