#include "doctest.h"

#include "nsalpha/band_field.hpp"

#include <cmath>

using namespace nsalpha;

namespace {

Vec3 analytic(const Vec3& x) {
  return {std::cos(x(0) - 2 * x(2)) + 0.5, std::sin(x(1)) * std::cos(3 * x(0)), -0.25 * std::sin(x(0) + x(1) + x(2))};
}

Mat3 analytic_gradient(const Vec3& x) {
  Mat3 g;
  const double s = std::sin(x(0) - 2 * x(2));
  const double c = std::cos(x(0) + x(1) + x(2));
  g << -s, 0, 2 * s,
      -3 * std::sin(x(1)) * std::sin(3 * x(0)), std::cos(x(1)) * std::cos(3 * x(0)), 0,
      -0.25 * c, -0.25 * c, -0.25 * c;
  return g;
}

}  // namespace

TEST_CASE("band field evaluation matches analytic values off the grid") {
  const GridSpec g{16};
  const auto F = forward_transform(sample_field(g, analytic));
  const BandField b = restrict_to_band(F, 4);
  std::vector<Vec3> pts{{0.1, 0.2, 0.3}, {6.0, 3.3, -1.0}, {12.7, 0.0, 2.2}};
  for (int i = 0; i < 300; ++i) pts.emplace_back(0.037 * i - 3.0, 0.011 * (i % 97) * (i % 13), std::sin(i) * 14);
  std::vector<Vec3> vals(pts.size());
  std::vector<Mat3> grads(pts.size());
  evaluate(b, pts, vals, grads);
  double err_v = 0.0, err_g = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    err_v = std::max(err_v, (vals[i] - analytic(pts[i])).cwiseAbs().maxCoeff());
    err_g = std::max(err_g, (grads[i] - analytic_gradient(pts[i])).cwiseAbs().maxCoeff());
  }
  CHECK(err_v < 1e-13);
  CHECK(err_g < 1e-12);
  CHECK((evaluate_at(b, pts[1]) - vals[1]).norm() == 0.0);
}

TEST_CASE("band field values without gradients") {
  const GridSpec g{8};
  const auto F = forward_transform(sample_field(g, [](const Vec3& x) { return Vec3(std::cos(x(2)), 0, 1); }));
  const BandField b = restrict_to_band(F, 3);
  std::vector<Vec3> pts{{0, 0, 0}, {0, 0, std::numbers::pi}};
  std::vector<Vec3> vals(2);
  evaluate(b, pts, vals, {});
  CHECK(vals[0](0) == doctest::Approx(1.0));
  CHECK(vals[1](0) == doctest::Approx(-1.0));
  CHECK(vals[0](2) == doctest::Approx(1.0));
}

TEST_CASE("band restriction drops modes outside the band") {
  const GridSpec g{16};
  const auto F = forward_transform(sample_field(g, [](const Vec3& x) { return Vec3(std::cos(5 * x(0)), std::cos(x(1)), 0); }));
  const BandField b = restrict_to_band(F, 2);
  const Vec3 v = evaluate_at(b, Vec3(0, 0, 0));
  CHECK(std::abs(v(0)) < 1e-14);
  CHECK(v(1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(restrict_to_band(F, 8), std::invalid_argument);
}

TEST_CASE("lerp interpolates coefficients") {
  const GridSpec g{8};
  const auto A = forward_transform(sample_field(g, [](const Vec3& x) { return Vec3(std::cos(x(0)), 0, 0); }));
  const auto B = forward_transform(sample_field(g, [](const Vec3& x) { return Vec3(0, std::sin(x(1)), 0); }));
  const BandField m = lerp(restrict_to_band(A, 2), restrict_to_band(B, 2), 0.25);
  const Vec3 x(0.0, std::numbers::pi / 2, 0.0);
  const Vec3 v = evaluate_at(m, x);
  CHECK(v(0) == doctest::Approx(0.75));
  CHECK(v(1) == doctest::Approx(0.25));
  CHECK_THROWS(lerp(restrict_to_band(A, 2), restrict_to_band(B, 3), 0.5));
}
