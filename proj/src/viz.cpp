#include "ellembed/viz.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "ellembed/newton_schulz.hpp"

namespace ellembed {

namespace {

Vector power_start(Index d, int variant) {
  // Fixed start with a mild ramp; avoids being orthogonal to axis-aligned
  // eigenvectors. `variant` decorrelates the two columns.
  Vector v(d);
  for (Index i = 0; i < d; ++i) {
    v[i] = 1.0 + 0.01 * static_cast<double>(i + 1) +
           (variant == 0 ? 0.0 : 0.003 * static_cast<double>((i * 7) % 5) -
                                     0.5 * (i % 2));
  }
  return v / v.norm();
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

Matrix top2_eigvecs(const Matrix& c, double tol, int max_iter) {
  detail::require_square_symmetric(c, "top2_eigvecs");
  if (c.rows() < 2) {
    throw DegenerateError("top2_eigvecs: need dimension >= 2");
  }
  if (tol <= 0.0 || max_iter < 1) {
    throw DomainError("top2_eigvecs: bad tolerance or iteration budget");
  }
  const double scale = c.norm();
  if (scale == 0.0) {
    throw DegenerateError("top2_eigvecs: zero matrix has rank < 2");
  }

  // Two-column power iteration; the second column is deflated against the
  // first by Gram-Schmidt each step. The stop criterion is invariance of
  // the pair, ||C V - V (V^T C V)||_F, so clustered eigenvalues settle on
  // an arbitrary basis of their invariant subspace instead of stalling.
  Vector v1 = power_start(c.rows(), 0);
  Vector v2 = power_start(c.rows(), 1);
  v2 -= v1 * v1.dot(v2);
  v2.normalize();

  const double threshold = tol * std::max(1.0, scale);
  bool converged = false;
  for (int k = 0; k < max_iter; ++k) {
    Vector w1 = c * v1;
    const double n1 = w1.norm();
    if (n1 > 1e-14 * scale) v1 = w1 / n1;
    Vector w2 = c * v2;
    w2 -= v1 * v1.dot(w2);
    const double n2 = w2.norm();
    if (n2 > 1e-14 * scale) {
      v2 = w2 / n2;
    } else {
      // Fell into the kernel; keep the previous orthonormal direction.
      v2 -= v1 * v1.dot(v2);
      v2.normalize();
    }
    Matrix basis(c.rows(), 2);
    basis.col(0) = v1;
    basis.col(1) = v2;
    Matrix small = basis.transpose() * c * basis;
    if ((c * basis - basis * small).norm() <= threshold) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw ConvergenceError("top2_eigvecs: power iteration did not converge",
                           max_iter);
  }

  // Ritz rotation inside the pair sorts the Rayleigh quotients.
  Matrix basis(c.rows(), 2);
  basis.col(0) = v1;
  basis.col(1) = v2;
  Eigen::Matrix2d small = basis.transpose() * c * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ritz(small);
  Matrix rotated = basis * ritz.eigenvectors();
  Matrix out(c.rows(), 2);
  out.col(0) = rotated.col(1);  // eigenvalues ascend in Eigen
  out.col(1) = rotated.col(0);
  // Orthonormality can drift a hair through the rotation.
  out.col(0).normalize();
  out.col(1) -= out.col(0) * out.col(0).dot(out.col(1));
  out.col(1).normalize();

  const double lam1 = out.col(0).dot(c * out.col(0));
  const double lam2 = out.col(1).dot(c * out.col(1));
  if (lam1 <= 0.0 || lam2 <= std::max(1e-12 * lam1, 0.0)) {
    throw DegenerateError("top2_eigvecs: matrix has rank < 2");
  }
  return out;
}

std::pair<Eigen::Vector2d, Eigen::Matrix2d> project(const EllipticalPoint& p,
                                                    const Matrix& basis) {
  if (basis.rows() != p.dim() || basis.cols() != 2) {
    throw ShapeError("project: basis must be d x 2");
  }
  if ((basis.transpose() * basis - Matrix::Identity(2, 2)).norm() > 1e-8) {
    throw DomainError("project: basis is not orthonormal");
  }
  Eigen::Vector2d mean2 = basis.transpose() * p.mean;
  Eigen::Matrix2d scale2 = basis.transpose() * p.scale() * basis;
  scale2 = 0.5 * (scale2 + scale2.transpose());
  return {mean2, scale2};
}

EllipseParams ellipse_params(const Eigen::Matrix2d& scale2, EllipseMode mode) {
  if (std::abs(scale2(0, 1) - scale2(1, 0)) >
      1e-9 * (1.0 + scale2.norm())) {
    throw ShapeError("ellipse_params: matrix must be symmetric");
  }
  const double a = scale2(0, 0);
  const double b = 0.5 * (scale2(0, 1) + scale2(1, 0));
  const double c = scale2(1, 1);
  const double mean = 0.5 * (a + c);
  const double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
  double lam1 = mean + disc;  // >= lam2
  double lam2 = mean - disc;
  lam1 = std::max(lam1, 0.0);
  lam2 = std::max(lam2, 0.0);

  // Eigenvector of lam1.
  Eigen::Vector2d v1;
  if (std::abs(b) > 1e-300) {
    v1 << lam1 - c, b;
  } else if (a >= c) {
    v1 << 1.0, 0.0;
  } else {
    v1 << 0.0, 1.0;
  }
  v1.normalize();

  auto axis_angle = [](const Eigen::Vector2d& v) {
    double theta = std::atan2(v.y(), v.x());
    // Axes are direction-free; fold into [0, pi).
    while (theta < 0.0) theta += M_PI;
    while (theta >= M_PI) theta -= M_PI;
    return theta;
  };

  EllipseParams out;
  if (mode == EllipseMode::covariance) {
    out.r1 = lam1;
    out.r2 = lam2;
    out.angle = axis_angle(v1);
  } else {
    if (lam2 <= 0.0) {
      throw SingularityError(
          "ellipse_params: precision view needs a nonsingular scale");
    }
    // Same axes, inverted eigenvalues: the major axis flips to lam2's.
    out.r1 = 1.0 / lam2;
    out.r2 = 1.0 / lam1;
    Eigen::Vector2d v2(-v1.y(), v1.x());
    out.angle = axis_angle(v2);
  }
  return out;
}

std::string render_svg(std::span<const SvgItem> items,
                       const CanvasSpec& canvas) {
  for (const auto& item : items) {
    if (!std::isfinite(item.center.x()) || !std::isfinite(item.center.y()) ||
        !std::isfinite(item.r1) || !std::isfinite(item.r2) ||
        !std::isfinite(item.angle)) {
      throw DomainError("render_svg: non-finite coordinates for '" +
                        item.label + "'");
    }
  }

  // World bounding box including the ellipse extents.
  double min_x = 0.0, max_x = 1.0, min_y = 0.0, max_y = 1.0;
  if (!items.empty()) {
    min_x = min_y = std::numeric_limits<double>::infinity();
    max_x = max_y = -min_x;
    for (const auto& item : items) {
      const double r = std::max(item.r1, item.r2);
      min_x = std::min(min_x, item.center.x() - r);
      max_x = std::max(max_x, item.center.x() + r);
      min_y = std::min(min_y, item.center.y() - r);
      max_y = std::max(max_y, item.center.y() + r);
    }
  }
  const double span_x = std::max(max_x - min_x, 1e-12);
  const double span_y = std::max(max_y - min_y, 1e-12);
  const double scale = std::min((canvas.width - 2 * canvas.margin) / span_x,
                                (canvas.height - 2 * canvas.margin) / span_y);
  const double off_x =
      0.5 * (canvas.width - scale * (min_x + max_x));
  const double off_y =
      0.5 * (canvas.height + scale * (min_y + max_y));

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
      << "width=\"" << fmt(canvas.width) << "\" height=\""
      << fmt(canvas.height) << "\" viewBox=\"0 0 " << fmt(canvas.width) << ' '
      << fmt(canvas.height) << "\">\n";
  out << "  <g>\n";
  for (const auto& item : items) {
    const double cx = off_x + scale * item.center.x();
    const double cy = off_y - scale * item.center.y();  // y grows downward
    const double deg = -item.angle * 180.0 / M_PI;      // ccw world -> svg
    out << "    <ellipse cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy)
        << "\" rx=\"" << fmt(item.r1 * scale) << "\" ry=\""
        << fmt(item.r2 * scale) << "\" transform=\"rotate(" << fmt(deg) << ' '
        << fmt(cx) << ' ' << fmt(cy) << ")\""
        << (item.style.empty() ? std::string()
                               : " style=\"" + xml_escape(item.style) + "\"")
        << "/>\n";
    out << "    <text x=\"" << fmt(cx) << "\" y=\"" << fmt(cy)
        << "\" font-size=\"" << fmt(canvas.font_size)
        << "\" text-anchor=\"middle\">" << xml_escape(item.label)
        << "</text>\n";
  }
  out << "  </g>\n</svg>\n";
  return out.str();
}

std::string render_store(const EmbeddingStore& store,
                         const std::vector<std::string>& words,
                         const VizOptions& options) {
  const StoreSection& sec = store.resolve(options.side);
  if (words.empty()) throw DataError("render_store: no words selected");

  Matrix basis;
  if (sec.dim == 2) {
    basis = Matrix::Identity(2, 2);
  } else {
    const std::string& ref =
        options.reference.empty() ? words.front() : options.reference;
    const EllipticalPoint* anchor = sec.find(ref);
    if (anchor == nullptr) {
      throw DataError("render_store: reference word '" + ref +
                      "' not in store");
    }
    basis = top2_eigvecs(anchor->scale());
  }

  std::vector<SvgItem> items;
  items.reserve(words.size());
  static const char* kPalette[] = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
      "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f",
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    const EllipticalPoint* p = sec.find(words[i]);
    if (p == nullptr) {
      throw DataError("render_store: word '" + words[i] + "' not in store");
    }
    auto [mean2, scale2] = project(*p, basis);
    EllipseParams e = ellipse_params(scale2, options.mode);
    SvgItem item;
    item.label = words[i];
    item.center = mean2;
    item.r1 = options.sqrt_radii ? std::sqrt(e.r1) : e.r1;
    item.r2 = options.sqrt_radii ? std::sqrt(e.r2) : e.r2;
    item.angle = e.angle;
    item.style = std::string("fill:none;stroke:") +
                 kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))] +
                 ";stroke-width:1.5";
    items.push_back(std::move(item));
  }
  return render_svg(items, options.canvas);
}

}  // namespace ellembed
