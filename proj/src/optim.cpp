#include "ellembed/optim.hpp"

namespace ellembed {

namespace {

void require_block(int id, const Vector& mean, const Matrix& factor,
                   const GradientPair& grad, const char* op) {
  if (grad.d_mean.size() != mean.size() ||
      grad.d_factor.rows() != factor.rows() ||
      grad.d_factor.cols() != factor.cols()) {
    throw ShapeError(std::string(op) + ": gradient/parameter shape mismatch "
                     "for block " + std::to_string(id));
  }
  if (!grad.all_finite()) {
    throw NumericalError(std::string(op) + ": non-finite gradient for block " +
                         std::to_string(id));
  }
}

}  // namespace

void AdagradState::init(const std::vector<EllipticalPoint>& points) {
  accum_mean.clear();
  accum_factor.clear();
  accum_mean.reserve(points.size());
  accum_factor.reserve(points.size());
  for (const auto& p : points) {
    accum_mean.push_back(Vector::Zero(p.mean.size()));
    accum_factor.push_back(Matrix::Zero(p.factor.rows(), p.factor.cols()));
  }
}

void adagrad_step(AdagradState& state, int id, Vector& mean, Matrix& factor,
                  const GradientPair& grad) {
  require_block(id, mean, factor, grad, "adagrad_step");
  if (id < 0 || id >= static_cast<int>(state.accum_mean.size())) {
    throw ShapeError("adagrad_step: block id out of range");
  }
  Vector& am = state.accum_mean[id];
  Matrix& af = state.accum_factor[id];
  am.array() += grad.d_mean.array().square();
  af.array() += grad.d_factor.array().square();
  mean.array() -=
      state.lr * grad.d_mean.array() / (am.array() + state.eps).sqrt();
  factor.array() -=
      state.lr * grad.d_factor.array() / (af.array() + state.eps).sqrt();
}

void sgd_step(const SgdState& state, int id, Vector& mean, Matrix& factor,
              const GradientPair& grad) {
  require_block(id, mean, factor, grad, "sgd_step");
  mean -= state.lr * grad.d_mean;
  factor -= state.lr * grad.d_factor;
}

}  // namespace ellembed
