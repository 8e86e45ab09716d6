#include "doctest.h"

#include "nsalpha/mollifier.hpp"
#include "nsalpha/spectral.hpp"

#include <cmath>

using namespace nsalpha;

namespace {
// 1 / int_{R^3} exp(-1/(pi^2 - 4|x|^2)) dx, 30-digit adaptive quadrature (mpmath).
constexpr double kReferenceConstant = 0.0933766643926726205503858584838;
}  // namespace

TEST_CASE("normalization constant against an independent high-precision value") {
  CHECK(normalization_constant() > 0.0);
  CHECK(std::abs(normalization_constant() / kReferenceConstant - 1.0) < 1e-13);
}

TEST_CASE("bump values") {
  CHECK(bump_eval(Vec3::Zero()) == doctest::Approx(normalization_constant() * std::exp(-1.0 / (std::numbers::pi * std::numbers::pi))));
  CHECK(bump_eval(Vec3(kBumpRadius, 0, 0)) == 0.0);
  CHECK(bump_eval(Vec3(0, 2.0, 0)) == 0.0);
  CHECK(bump_profile(kBumpRadius - 1e-3) < 1e-30);
  // Geodesic distance: x and x + 2 pi e_j are the same point.
  CHECK(bump_eval(Vec3(0.3, kTwoPi - 0.2, 0)) == bump_eval(Vec3(0.3, -0.2, 0)));
}

TEST_CASE("scaled mollifier peak and support") {
  const MollifierSpec spec{0.25, 4096};
  CHECK(spec.width_scale() == doctest::Approx(8.0));
  CHECK(spec.support_radius() == doctest::Approx(std::numbers::pi / 16));
  CHECK(scaled_eval(spec, Vec3::Zero()) == doctest::Approx(spec.peak()));
  CHECK(spec.peak() == doctest::Approx(512.0 * bump_eval(Vec3::Zero())));
  CHECK(scaled_eval(spec, Vec3(spec.support_radius(), 0, 0)) == 0.0);
  CHECK_THROWS_AS(validate(MollifierSpec{0.0, 10}), std::invalid_argument);
  CHECK_THROWS_AS(validate(MollifierSpec{0.2, 0}), std::invalid_argument);
}

TEST_CASE("unit mass by Cartesian quadrature, doubled resolution agrees") {
  for (std::int64_t n : {512, 1728, 4096}) {
    const MollifierSpec spec{0.25, n};
    const double coarse = mollifier_mass(spec, 32);
    const double fine = mollifier_mass(spec, 64);
    CHECK(std::abs(coarse - fine) < 1e-10);
    CHECK(std::abs(fine - 1.0) < 1e-8);
  }
}

TEST_CASE("gradient matches central differences and is odd") {
  const MollifierSpec spec{0.25, 512};
  const double h = 1e-6;
  const double r = spec.support_radius();
  for (const Vec3& x : {Vec3(0.1 * r, 0.2 * r, -0.3 * r), Vec3(0.5 * r, 0, 0), Vec3(-0.2 * r, 0.6 * r, 0.1 * r)}) {
    Vec3 fd;
    for (int j = 0; j < 3; ++j) {
      Vec3 e = Vec3::Zero();
      e(j) = h;
      fd(j) = (scaled_eval(spec, x + e) - scaled_eval(spec, x - e)) / (2 * h);
    }
    const Vec3 g = scaled_gradient(spec, x);
    CHECK((fd - g).norm() <= 1e-6 * std::max(1.0, g.norm()));
    CHECK((scaled_gradient(spec, -x) + g).norm() < 1e-12 * std::max(1.0, g.norm()));
  }
  CHECK(scaled_gradient(spec, Vec3::Zero()).norm() == 0.0);
}

TEST_CASE("spectral coefficients") {
  const MollifierSpec spec{0.25, 16};
  const GridSpec g{32};
  const auto v = spectral_coefficients(spec, g);
  CHECK(std::abs(v.at(Vec3i(0, 0, 0)) - 1.0) < 1e-8);
  double asym = 0.0;
  for (int n = 0; n < g.size(); ++n) {
    const Vec3i k = g.wavevector(n);
    if (k.cwiseAbs().maxCoeff() >= g.modes_per_axis / 2) continue;
    asym = std::max(asym, std::abs(v.values[n] - v.at(-k)));
  }
  CHECK(asym < 1e-12);
  CHECK(v.at(Vec3i(1, 0, 0)) < 1.0);
  CHECK(v.at(Vec3i(1, 0, 0)) == doctest::Approx(v.at(Vec3i(0, -1, 0))).epsilon(1e-12));
}

TEST_CASE("radial Fourier transform against high-precision values") {
  // int V(x) e^{-ik.x} dx for the unscaled bump (N = 1), 30-digit quadrature (mpmath).
  const MollifierSpec unit{0.25, 1};
  CHECK(mollifier_transform(unit, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(mollifier_transform(unit, 1.0) - 0.803660769503317727734659421807) < 1e-13);
  CHECK(std::abs(mollifier_transform(unit, 3.0) - 0.0283970273760237813151371771791) < 1e-13);
  CHECK(std::abs(mollifier_transform(unit, 7.5) + 0.00170008863097796195066012081976) < 1e-13);
  // Scaling: V^N_hat(k) = V_hat(k / N^beta).
  CHECK(mollifier_transform(MollifierSpec{0.25, 81}, 3.0) == doctest::Approx(mollifier_transform(unit, 1.0)).epsilon(1e-13));
}

TEST_CASE("sampled spectrum approaches the exact multipliers under refinement") {
  const MollifierSpec spec{0.25, 16};
  double previous = 1.0;
  for (int m : {16, 32, 64}) {
    const GridSpec g{m};
    ScalarField samples(g);
    for (int n = 0; n < g.size(); ++n) samples.values(0, n) = scaled_eval(spec, g.node(n));
    const auto hat = forward_transform(samples);
    const int n1 = g.flat_index(1, 0, 0);
    const double err = std::abs(kTorusVolume * hat.values(0, n1).real() - mollifier_transform(spec, 1.0));
    CHECK(err < previous);
    previous = err;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("approximate identity as N grows") {
  const GridSpec g{64};
  double previous = 0.0;
  for (std::int64_t n : {8, 64, 512}) {
    const double v1 = spectral_coefficients(MollifierSpec{0.25, n}, g).at(Vec3i(1, 0, 0));
    CHECK(v1 > previous);
    CHECK(v1 < 1.0);
    previous = v1;
  }
}

TEST_CASE("under-resolved support is rejected") {
  CHECK_THROWS_AS(spectral_coefficients(MollifierSpec{0.25, 4096}, GridSpec{16}), ResolutionError);
  CHECK_NOTHROW(check_resolution(MollifierSpec{0.25, 4096}, GridSpec{128}));
}

TEST_CASE("beta bound") {
  const BetaBound ok = beta_bound_check(7, 0.9, 0.2);
  CHECK(ok.ok);
  CHECK(ok.beta_upper == doctest::Approx(1.0 / (3.9 - 6.0 / 7.0)));
  CHECK(ok.beta_upper == doctest::Approx(0.3286).epsilon(1e-3));
  CHECK_FALSE(beta_bound_check(7, 0.9, 0.0).ok);
  CHECK_FALSE(beta_bound_check(7, 6.0 / 7.0, 0.2).ok);
  CHECK_FALSE(beta_bound_check(6, 0.9, 0.2).ok);
  CHECK_FALSE(beta_bound_check(7, 0.9, 0.4).ok);
  CHECK(beta_bound_check(7, 0.9, 0.4).beta_upper_slack < 0);
}
