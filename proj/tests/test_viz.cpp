#include "ellembed/viz.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

using namespace ellembed;

namespace {

Eigen::Matrix2d rot2(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

/// Minimal XML well-formedness scan: balanced tags, quoted attributes,
/// no stray '<' or '&'.
bool xml_well_formed(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  if (text.rfind("<?xml", 0) == 0) {
    i = text.find("?>");
    if (i == std::string::npos) return false;
    i += 2;
  }
  while (i < text.size()) {
    const char c = text[i];
    if (c == '&') {
      const auto semi = text.find(';', i);
      if (semi == std::string::npos || semi - i > 6) return false;
      i = semi + 1;
      continue;
    }
    if (c != '<') {
      if (c == '>') return false;
      ++i;
      continue;
    }
    const auto end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    if (tag.empty()) return false;
    // Attribute quotes must balance.
    if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
    if (tag[0] == '/') {
      if (stack.empty()) return false;
      if (stack.back() != tag.substr(1)) return false;
      stack.pop_back();
    } else if (tag.back() != '/') {
      const auto space = tag.find_first_of(" \t\n");
      stack.push_back(space == std::string::npos ? tag
                                                 : tag.substr(0, space));
    }
    i = end + 1;
  }
  return stack.empty();
}

}  // namespace

TEST_CASE("top2_eigvecs on a diagonal matrix") {
  Matrix c = Vector{{4.0, 1.0, 0.25}}.asDiagonal();
  Matrix v = top2_eigvecs(c);
  CHECK((v.transpose() * v - Matrix::Identity(2, 2)).norm() < 1e-8);
  // Sign-free comparison with e1, e2.
  CHECK(std::abs(std::abs(v(0, 0)) - 1.0) < 1e-7);
  CHECK(std::abs(std::abs(v(1, 1)) - 1.0) < 1e-7);
  // Rayleigh quotients nonincreasing.
  const double r1 = v.col(0).dot(c * v.col(0));
  const double r2 = v.col(1).dot(c * v.col(1));
  CHECK(r1 >= r2);
  CHECK(r1 == doctest::Approx(4.0).epsilon(1e-7));
  CHECK(r2 == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("top2_eigvecs on a rotated spectrum matches the eigen oracle") {
  Rng rng(100);
  Matrix q = oracle::random_orthogonal(4, rng);
  Vector lam = Vector{{6.0, 3.0, 1.0, 0.5}};
  Matrix c = q * lam.asDiagonal() * q.transpose();
  Matrix v = top2_eigvecs(c);
  // Span check against the two leading oracle eigenvectors.
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
  Matrix lead(4, 2);
  lead.col(0) = eig.eigenvectors().col(3);
  lead.col(1) = eig.eigenvectors().col(2);
  // Projection of v onto the leading space has full norm.
  Matrix proj = lead * (lead.transpose() * v);
  CHECK((proj - v).norm() < 1e-6);
}

TEST_CASE("top2_eigvecs accepts degenerate spectra via the residual contract") {
  Matrix c = Matrix::Identity(3, 3);
  Matrix v = top2_eigvecs(c, 1e-9, 100);
  Matrix small = v.transpose() * c * v;
  CHECK((c * v - v * small).norm() < 1e-9);
  CHECK((v.transpose() * v - Matrix::Identity(2, 2)).norm() < 1e-9);
}

TEST_CASE("top2_eigvecs rejects rank-deficient matrices") {
  Matrix rank1 = Matrix::Zero(3, 3);
  rank1(0, 0) = 2.0;
  CHECK_THROWS_AS(top2_eigvecs(rank1), DegenerateError);
  CHECK_THROWS_AS(top2_eigvecs(Matrix::Zero(3, 3)), DegenerateError);
}

TEST_CASE("project: identity basis and PSD preservation") {
  Rng rng(101);
  EllipticalPoint p = oracle::random_point(2, rng);
  auto [mean2, scale2] = project(p, Matrix::Identity(2, 2));
  CHECK((mean2 - p.mean).norm() < 1e-12);
  CHECK((scale2 - p.scale()).norm() < 1e-12);

  // Axis-aligned projection by hand in d = 3.
  EllipticalPoint q = oracle::random_point(3, rng);
  Matrix basis(3, 2);
  basis << 1, 0, 0, 0, 0, 1;
  auto [m2, s2] = project(q, basis);
  CHECK(m2[0] == doctest::Approx(q.mean[0]));
  CHECK(m2[1] == doctest::Approx(q.mean[2]));
  Matrix a = q.scale();
  CHECK(s2(0, 0) == doctest::Approx(a(0, 0)));
  CHECK(s2(1, 1) == doctest::Approx(a(2, 2)));
  CHECK(s2(0, 1) == doctest::Approx(a(0, 2)));

  // Congruence preserves PSD.
  for (int trial = 0; trial < 5; ++trial) {
    EllipticalPoint r = oracle::random_point(4, rng);
    Matrix b = oracle::random_orthogonal(4, rng).leftCols(2);
    auto [mm, ss] = project(r, b);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(ss);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
  }

  Matrix bad = 2.0 * Matrix::Identity(2, 2);
  CHECK_THROWS_AS(project(p, bad), DomainError);
}

TEST_CASE("ellipse_params covariance and precision views") {
  Eigen::Matrix2d d41;
  d41 << 4, 0, 0, 1;

  EllipseParams cov = ellipse_params(d41, EllipseMode::covariance);
  CHECK(cov.r1 == doctest::Approx(4.0));
  CHECK(cov.r2 == doctest::Approx(1.0));
  CHECK(cov.angle == doctest::Approx(0.0));

  EllipseParams prec = ellipse_params(d41, EllipseMode::precision);
  CHECK(prec.r1 == doctest::Approx(1.0));
  CHECK(prec.r2 == doctest::Approx(0.25));
  CHECK(prec.angle == doctest::Approx(M_PI / 2));

  Eigen::Matrix2d singular;
  singular << 1, 0, 0, 0;
  CHECK_THROWS_AS(ellipse_params(singular, EllipseMode::precision),
                  SingularityError);
  CHECK_NOTHROW(ellipse_params(singular, EllipseMode::covariance));
}

TEST_CASE("ellipse_params recovers a known rotation") {
  const double theta = M_PI / 6;  // 30 degrees
  Eigen::Matrix2d d41;
  d41 << 4, 0, 0, 1;
  Eigen::Matrix2d c = rot2(theta) * d41 * rot2(theta).transpose();
  EllipseParams p = ellipse_params(c, EllipseMode::covariance);
  CHECK(p.r1 == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(p.r2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(p.angle == doctest::Approx(theta).epsilon(1e-6));
}

TEST_CASE("ellipse_params rotation equivariance") {
  Rng rng(102);
  Eigen::Matrix2d base;
  base << 3.0, 0.8, 0.8, 1.2;
  EllipseParams ref = ellipse_params(base, EllipseMode::covariance);
  for (double theta : {0.3, 1.0, 2.2}) {
    Eigen::Matrix2d r = rot2(theta);
    EllipseParams rotated =
        ellipse_params(Eigen::Matrix2d(r.transpose() * base * r),
                       EllipseMode::covariance);
    CHECK(rotated.r1 == doctest::Approx(ref.r1).epsilon(1e-9));
    CHECK(rotated.r2 == doctest::Approx(ref.r2).epsilon(1e-9));
    double delta = std::fmod(ref.angle - rotated.angle - theta, M_PI);
    if (delta < -M_PI / 2) delta += M_PI;
    if (delta > M_PI / 2) delta -= M_PI;
    CHECK(std::abs(delta) < 1e-6);
  }
}

TEST_CASE("precision of the reciprocal matrix returns the original radii") {
  Eigen::Matrix2d c;
  c << 2.5, 0.6, 0.6, 1.0;
  EllipseParams cov = ellipse_params(c, EllipseMode::covariance);
  // Build the matrix with reciprocal eigenvalues on the same axes.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(c);
  Eigen::Vector2d inv = eig.eigenvalues().cwiseInverse();
  Eigen::Matrix2d recip =
      eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  EllipseParams prec = ellipse_params(recip, EllipseMode::precision);
  CHECK(prec.r1 == doctest::Approx(cov.r1).epsilon(1e-9));
  CHECK(prec.r2 == doctest::Approx(cov.r2).epsilon(1e-9));
  CHECK(prec.angle == doctest::Approx(cov.angle).epsilon(1e-6));
}

TEST_CASE("render_svg produces well-formed documents") {
  CanvasSpec canvas;

  SUBCASE("empty list") {
    const std::string svg = render_svg({}, canvas);
    CHECK(xml_well_formed(svg));
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("<ellipse") == std::string::npos);
  }

  SUBCASE("unit circle at the origin") {
    SvgItem item;
    item.label = "origin & <friends>";
    item.r1 = item.r2 = 1.0;
    const std::string svg = render_svg(std::vector<SvgItem>{item}, canvas);
    CHECK(xml_well_formed(svg));
    const auto rx = svg.find("rx=\"");
    const auto ry = svg.find("ry=\"");
    REQUIRE(rx != std::string::npos);
    REQUIRE(ry != std::string::npos);
    const std::string rx_val = svg.substr(rx + 4, svg.find('"', rx + 4) - rx - 4);
    const std::string ry_val = svg.substr(ry + 4, svg.find('"', ry + 4) - ry - 4);
    CHECK(rx_val == ry_val);
    CHECK(svg.find("&amp;") != std::string::npos);
    CHECK(svg.find("&lt;friends&gt;") != std::string::npos);
  }

  SUBCASE("deterministic output") {
    Rng rng(103);
    std::vector<SvgItem> items;
    for (int i = 0; i < 4; ++i) {
      SvgItem item;
      item.label = "w" + std::to_string(i);
      item.center = Eigen::Vector2d(rng.normal(), rng.normal());
      item.r1 = 1.0 + rng.uniform();
      item.r2 = rng.uniform();
      item.angle = rng.uniform() * M_PI;
      item.style = "fill:none;stroke:#1f77b4";
      items.push_back(item);
    }
    CHECK(render_svg(items, canvas) == render_svg(items, canvas));
    CHECK(xml_well_formed(render_svg(items, canvas)));
  }

  SUBCASE("non-finite input is rejected") {
    SvgItem item;
    item.r1 = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(render_svg(std::vector<SvgItem>{item}, canvas),
                    DomainError);
  }
}

TEST_CASE("render_store projects onto a reference word's plane") {
  Rng rng(104);
  EmbeddingStore store;
  StoreSection& sec = store.add_section(StoreSide::single, 4, 4, 1.0, 0.01);
  // The anchor's scale spans the plane; give it a clearly gapped spectrum so
  // the power iteration separates the leading eigenvectors quickly.
  EllipticalPoint anchor = oracle::random_point(4, rng, 4, 0.01);
  anchor.factor = oracle::random_orthogonal(4, rng) *
                  Vector{{2.0, 1.2, 0.7, 0.4}}.asDiagonal();
  sec.add("anchor", anchor);
  for (const char* tok : {"one", "two"}) {
    sec.add(tok, oracle::random_point(4, rng, 4, 0.01));
  }
  VizOptions options;
  options.reference = "anchor";
  options.mode = EllipseMode::precision;
  const std::string svg = render_store(store, {"anchor", "one", "two"},
                                       options);
  CHECK(xml_well_formed(svg));
  CHECK(svg.find("anchor") != std::string::npos);

  CHECK_THROWS_AS(render_store(store, {"missing"}, options), DataError);
  CHECK_THROWS_AS(render_store(store, {}, options), DataError);
}
