#pragma once

#include <span>
#include <string>
#include <vector>

#include "ellembed/store.hpp"
#include "ellembed/types.hpp"

namespace ellembed {

/// Two dominant eigenvectors of a PSD matrix by power iteration with
/// deflation. Columns are orthonormal with nonincreasing Rayleigh quotients.
/// Degenerate spectra settle on any basis of an invariant subspace (residual
/// ||C V - V (V^T C V)|| below tol). Throws DegenerateError when the matrix
/// has fewer than two positive eigenvalues and ConvergenceError when the
/// iteration stalls.
Matrix top2_eigvecs(const Matrix& c, double tol = 1e-9, int max_iter = 10000);

/// Orthogonal projection of a point onto the plane spanned by `basis`
/// (d x 2, orthonormal within 1e-8): mean2 = V^T a, scale2 = V^T A V.
std::pair<Eigen::Vector2d, Eigen::Matrix2d> project(const EllipticalPoint& p,
                                                    const Matrix& basis);

enum class EllipseMode { covariance, precision };

/// Semi-axes and major-axis angle (radians, in [0, pi)) of the ellipse drawn
/// for a 2x2 scale matrix. Covariance mode uses the eigenvalues as radii
/// (the support of a uniform elliptical measure is the unit ball's image
/// under the scale matrix); precision mode keeps the axes and inverts the
/// eigenvalues.
struct EllipseParams {
  double r1 = 0.0;  // major
  double r2 = 0.0;  // minor
  double angle = 0.0;
};

EllipseParams ellipse_params(const Eigen::Matrix2d& scale2, EllipseMode mode);

struct SvgItem {
  std::string label;
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double r1 = 0.0;
  double r2 = 0.0;
  double angle = 0.0;  // radians, counterclockwise in world coordinates
  std::string style;   // SVG style attribute for the ellipse
};

struct CanvasSpec {
  double width = 800.0;
  double height = 600.0;
  double margin = 40.0;
  double font_size = 11.0;
};

/// Deterministic SVG 1.1 document with one <ellipse> (rotated around its
/// center) and one <text> label per item. World coordinates are scaled
/// uniformly into the canvas with the y axis flipped.
std::string render_svg(std::span<const SvgItem> items, const CanvasSpec& canvas);

struct VizOptions {
  EllipseMode mode = EllipseMode::precision;
  bool sqrt_radii = false;       // plot sqrt(eigenvalue) radii instead
  std::string reference;         // word whose scale spans the plane (d > 2)
  StoreSide side = StoreSide::single;
  CanvasSpec canvas;
  int iters = 20;
};

/// Projects the selected words of a store onto a 2-D plane (identity when
/// d == 2, else the top-2 eigenplane of the reference word's scale) and
/// renders them.
std::string render_store(const EmbeddingStore& store,
                         const std::vector<std::string>& words,
                         const VizOptions& options);

}  // namespace ellembed
