#include "doctest.h"

#include "nsalpha/noise.hpp"
#include "nsalpha/rng.hpp"

#include <cmath>
#include <vector>

using namespace nsalpha;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  // Reference outputs of the published Random123 known-answer tests.
  {
    const Philox4x32 gen(0);
    const auto r = gen({0, 0, 0, 0});
    CHECK(r == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  }
  {
    const Philox4x32 gen(0xffffffffffffffffull);
    const auto r = gen({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
    CHECK(r == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  }
  {
    const Philox4x32 gen(0x299f31d0a4093822ull);
    const auto r = gen({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
    CHECK(r == Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
  }
}

TEST_CASE("unit conversion stays inside the open interval") {
  CHECK(to_open_unit(0, 0) > 0.0);
  CHECK(to_open_unit(0xffffffffu, 0xffffffffu) < 1.0);
}

TEST_CASE("standard normal moments") {
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n / 4; ++i)
    for (int lane = 0; lane < 4; ++lane) {
      const double z = standard_normal(42, {StreamKind::B, 7}, i, lane);
      s1 += z;
      s2 += z * z;
      s4 += z * z * z * z;
    }
  // 5 sigma bounds: sd(mean) = 1/sqrt(n), sd(s2/n) = sqrt(2/n), sd(s4/n) = sqrt(96/n).
  CHECK(std::abs(s1 / n) < 5 / std::sqrt(n));
  CHECK(std::abs(s2 / n - 1) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(s4 / n - 3) < 5 * std::sqrt(96.0 / n));
}

TEST_CASE("streams are independent and reproducible") {
  const double a = standard_normal(1, {StreamKind::W, 0}, 5, 0);
  CHECK(a == standard_normal(1, {StreamKind::W, 0}, 5, 0));
  CHECK(a != standard_normal(1, {StreamKind::W, 1}, 5, 0));
  CHECK(a != standard_normal(1, {StreamKind::B, 0}, 5, 0));
  CHECK(a != standard_normal(2, {StreamKind::W, 0}, 5, 0));
  CHECK(a != standard_normal(1, {StreamKind::W, 0}, 6, 0));
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
}

TEST_CASE("Brownian increments nest under step halving") {
  const BrownianDriver coarse{9, {StreamKind::W, 0}, 0.01, 2};
  const BrownianDriver fine{9, {StreamKind::W, 0}, 0.005, 1};
  for (std::uint64_t s = 0; s < 50; ++s) {
    CHECK(coarse.scalar_increment(s) == doctest::Approx(fine.scalar_increment(2 * s) + fine.scalar_increment(2 * s + 1)).epsilon(1e-14));
    const Vec3 vc = coarse.vector_increment(s);
    const Vec3 vf = fine.vector_increment(2 * s) + fine.vector_increment(2 * s + 1);
    CHECK((vc - vf).norm() < 1e-14);
  }
}

TEST_CASE("Brownian increment variance is dt") {
  const BrownianDriver d{3, {StreamKind::B, 2}, 0.04, 1};
  const int n = 40000;
  double s2 = 0.0;
  for (int s = 0; s < n; ++s) s2 += std::pow(d.scalar_increment(s), 2);
  CHECK(std::abs(s2 / n / 0.04 - 1.0) < 5 * std::sqrt(2.0 / n));
}

TEST_CASE("noise construction rejects non-solenoidal single modes") {
  CHECK_THROWS_AS(NoiseModel({SingleModeNoise{Vec3(1, 0, 0), Vec3i(1, 0, 0), Phase::Cos}}), std::invalid_argument);
  CHECK_THROWS_AS(NoiseModel({SingleModeNoise{Vec3(1, 1, 0), Vec3i(2, 0, 1), Phase::Sin}}), std::invalid_argument);
  CHECK_NOTHROW(NoiseModel({SingleModeNoise{Vec3(0, 1, 0), Vec3i(1, 0, 0), Phase::Cos}}));
}

TEST_CASE("sigma, its gradient and the drift correction") {
  const NoiseModel model({ConstantNoise{Vec3(0.3, 0, 0)}, SingleModeNoise{Vec3(0, 0, 0.7), Vec3i(1, 2, 0), Phase::Sin}});
  CHECK_FALSE(model.all_constant());
  const Vec3 x(0.4, 1.1, -2.0);
  CHECK((model.sigma(0, x) - Vec3(0.3, 0, 0)).norm() == 0.0);
  CHECK(model.sigma_gradient(0, x).isZero());
  CHECK(model.sigma(1, x)(2) == doctest::Approx(0.7 * std::sin(x(0) + 2 * x(1))));
  // Central finite differences of sigma.
  const double h = 1e-6;
  Mat3 fd;
  for (int j = 0; j < 3; ++j) {
    Vec3 e = Vec3::Zero();
    e(j) = h;
    fd.col(j) = (model.sigma(1, x + e) - model.sigma(1, x - e)) / (2 * h);
  }
  CHECK((fd - model.sigma_gradient(1, x)).cwiseAbs().maxCoeff() < 1e-8);
  // (grad sigma) sigma vanishes because eps . kappa = 0.
  CHECK(model.sigma_dot_grad_sigma(1, x).norm() < 1e-15);
}

TEST_CASE("assumption residual for constant and single-mode families") {
  const GridSpec g{32};
  const NoiseModel constant({ConstantNoise{Vec3(0.3, -0.1, 0.2)}});
  const NoiseModel single({SingleModeNoise{Vec3(0, 0, 0.5), Vec3i(1, 0, 0), Phase::Cos}});
  const NoiseModel pair({SingleModeNoise{Vec3(0, 1, 0), Vec3i(1, 0, 0), Phase::Cos},
                         SingleModeNoise{Vec3(0, 1, 0), Vec3i(1, 0, 0), Phase::Sin}});
  CHECK(validate_assumption(constant, g) <= 1e-12);
  CHECK(validate_assumption(single, g) <= 1e-12);
  CHECK(validate_assumption(pair, g) <= 1e-12);
  CHECK(divergence_residual(single, g) <= 1e-12);
  CHECK(validate_assumption(NoiseModel{}, g) == 0.0);
}
