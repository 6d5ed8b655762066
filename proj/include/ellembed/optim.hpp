#pragma once

#include <vector>

#include "ellembed/types.hpp"

namespace ellembed {

/// Diagonal Adagrad over a collection of (mean, factor) parameter blocks.
/// Accumulators grow entrywise with squared gradients and never shrink.
struct AdagradState {
  double lr = 0.01;
  double eps = 1e-8;
  std::vector<Vector> accum_mean;
  std::vector<Matrix> accum_factor;

  AdagradState() = default;
  AdagradState(double lr_, double eps_ = 1e-8) : lr(lr_), eps(eps_) {}

  /// Allocate zero accumulators matching `points`' shapes.
  void init(const std::vector<EllipticalPoint>& points);

  bool initialized() const { return !accum_mean.empty(); }
};

/// One Adagrad update of block `id`:
///   accum += grad^2,  param -= lr * grad / sqrt(accum + eps).
/// Throws ShapeError on mismatched shapes and NumericalError (with the block
/// id) on non-finite gradients.
void adagrad_step(AdagradState& state, int id, Vector& mean, Matrix& factor,
                  const GradientPair& grad);

/// Plain SGD: param -= lr * grad.
struct SgdState {
  double lr = 0.01;
};

void sgd_step(const SgdState& state, int id, Vector& mean, Matrix& factor,
              const GradientPair& grad);

/// Mean-part gradient of the squared 2-Wasserstein distance: d/da ||a-b||^2.
inline Vector w2_sq_mean_grad(const Vector& a, const Vector& b) {
  return 2.0 * (a - b);
}

/// Mean-part gradient of the polarization form d/da <a, b>.
inline Vector polarization_mean_grad(const Vector& b) { return b; }

}  // namespace ellembed
