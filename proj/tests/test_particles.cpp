#include "doctest.h"

#include "nsalpha/parallel.hpp"
#include "nsalpha/particles.hpp"

#include <algorithm>
#include <cmath>

using namespace nsalpha;

namespace {

SpectralField shear_plus_mean(const GridSpec& g) {
  return forward_transform(sample_field(g, [](const Vec3& x) {
    return Vec3(0.2, std::sin(x(2)), std::cos(x(0)) + 0.5 * std::cos(x(0) + x(1)));
  }));
}

}  // namespace

TEST_CASE("lattice init weights reproduce integrals of omega0") {
  const GridSpec g{16};
  const auto omega0 = shear_plus_mean(g);
  const auto ens = init_lattice(omega0, 8, 0.25);
  CHECK(ens.size() == 512);
  CHECK(ens.stream_ids[511] == 511u);
  // int omega0 = vol * mean.
  CHECK((ens.total_mass() - kTorusVolume * Vec3(0.2, 0, 0)).norm() < 1e-12);
  // (1/N) sum cos(x1) w_3 = int cos(x1) (cos x1 + ...) = vol / 2.
  double acc = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) acc += std::cos(ens.positions[i](0)) * ens.weights[i](2);
  CHECK(acc / ens.size() == doctest::Approx(kTorusVolume / 2).epsilon(1e-12));
  for (const Mat3& p : ens.deformations) CHECK(p == Mat3::Identity());
}

TEST_CASE("importance init has constant weight magnitude and unbiased mass") {
  const GridSpec g{16};
  const auto omega0 = shear_plus_mean(g);
  const auto ens = init_importance(omega0, 20000, 7, 0.25);
  const double l1 = ens.weights[0].norm();
  for (const Vec3& w : ens.weights) CHECK(w.norm() == doctest::Approx(l1).epsilon(1e-9));
  const Vec3 mass = ens.total_mass();
  // Standard error of each component is at most l1 / sqrt(N).
  CHECK((mass - kTorusVolume * Vec3(0.2, 0, 0)).cwiseAbs().maxCoeff() < 5 * l1 / std::sqrt(20000.0));
  const auto again = init_importance(omega0, 20000, 7, 0.25);
  CHECK(again.positions == ens.positions);
  CHECK_THROWS_AS(init_importance(SpectralField(g), 10, 1, 0.25), std::invalid_argument);
}

TEST_CASE("single particle field has the mollifier multipliers") {
  const GridSpec g{32};
  ParticleEnsemble ens;
  ens.spec = {0.25, 16};
  ens.positions = {Vec3(0.3, 5.0, 2.2)};
  ens.deformations = {Mat3::Identity()};
  ens.weights = {Vec3(0, 0, 2.0)};
  ens.stream_ids = {0};
  const auto F = empirical_field(ens, g);
  const auto v = spectral_coefficients(ens.spec, g);
  double err = 0.0;
  for (int n = 0; n < g.size(); ++n) {
    const Vec3i k = g.wavevector(n);
    if (k.cwiseAbs().maxCoeff() == g.modes_per_axis / 2) continue;
    const double phase = -k.cast<double>().dot(ens.positions[0]);
    const Complex expected = 2.0 * v.values[n] / kTorusVolume * Complex(std::cos(phase), std::sin(phase));
    err = std::max(err, std::abs(F.values(2, n) - expected) + std::abs(F.values(0, n)));
  }
  CHECK(err < 1e-15);
}

TEST_CASE("two-particle field is the sum of single-particle fields") {
  const GridSpec g{32};
  ParticleEnsemble a;
  a.spec = {0.25, 16};
  a.positions = {Vec3(0.3, 5.0, 2.2), Vec3(4.0, 1.0, 6.0)};
  a.deformations = {Mat3::Identity(), Mat3::Identity()};
  a.weights = {Vec3(0, 0, 2.0), Vec3(1.0, -1.0, 0.5)};
  a.stream_ids = {0, 1};
  ParticleEnsemble first = a, second = a;
  first.weights[1].setZero();
  second.weights[0].setZero();
  const auto sum = empirical_field(a, g);
  const SpectralField::Storage parts = empirical_field(first, g).values + empirical_field(second, g).values;
  CHECK((sum.values - parts).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("mean of g^N is the total mass over the volume") {
  const GridSpec g{64};
  const auto ens = init_importance(shear_plus_mean(GridSpec{16}), 3000, 5, 0.25);
  const auto F = empirical_field(ens, g);
  CHECK((F.values.col(0).real() - ens.total_mass() / kTorusVolume).norm() < 1e-8);
  CHECK(F.values.col(0).imag().norm() == 0.0);
  CHECK(hermitian_defect(F) < 1e-15);
}

TEST_CASE("deposit is independent of the thread count") {
  const GridSpec g{64};
  const auto ens = init_importance(shear_plus_mean(GridSpec{16}), 3000, 3, 0.25);
  set_thread_count(1);
  const auto a = empirical_field(ens, g);
  set_thread_count(4);
  const auto b = empirical_field(ens, g);
  set_thread_count(1);
  CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);
  // Permuting particles together with their stream ids changes nothing.
  ParticleEnsemble perm = ens;
  std::reverse(perm.positions.begin(), perm.positions.end());
  std::reverse(perm.weights.begin(), perm.weights.end());
  std::reverse(perm.stream_ids.begin(), perm.stream_ids.end());
  CHECK((empirical_field(perm, g).values - a.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("under-resolved deposit grid is rejected") {
  const auto ens = init_lattice(shear_plus_mean(GridSpec{16}), 16, 0.25);
  CHECK_THROWS_AS(empirical_field(ens, GridSpec{16}), ResolutionError);
}

TEST_CASE("self-interaction vanishes on the grid path") {
  const GridSpec g{16};
  ParticleEnsemble ens;
  ens.spec = {0.25, 8};
  ens.positions = {Vec3(1.0, 2.0, 3.0)};
  ens.deformations = {Mat3::Identity()};
  ens.weights = {Vec3(0.3, -1.0, 2.0)};
  ens.stream_ids = {0};
  const AlphaKernel kernel(0.5, g);
  const auto v = velocity_at_particles(ens, velocity_spectral(ens, kernel));
  CHECK(v.u[0].norm() < 1e-14);
}

TEST_CASE("constant noise translates particles rigidly") {
  const GridSpec g{32};
  ParticleEnsemble ens = init_lattice(SpectralField(g), 4, 0.25);
  const Vec3 a(0.3, 0.0, -0.1);
  ParticleDynamics dyn{AlphaKernel(0.5, g), 0.0, NoiseModel({ConstantNoise{a}}), 5, 6, 0.01, 1};
  const auto next = step(ens, dyn, 3);
  const double dw = dyn.w_driver(0).scalar_increment(3);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    CHECK((minimum_image(next.positions[i] - ens.positions[i] - a * dw)).norm() < 1e-14);
    CHECK(next.deformations[i] == Mat3::Identity());
  }
  CHECK(next.t == doctest::Approx(0.01));
}

TEST_CASE("idiosyncratic noise uses each particle's stream") {
  const GridSpec g{32};
  ParticleEnsemble ens = init_lattice(SpectralField(g), 4, 0.25);
  ParticleDynamics dyn{AlphaKernel(0.5, g), 0.02, NoiseModel{}, 5, 6, 0.01, 1};
  const auto next = step(ens, dyn, 0);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const Vec3 expected = std::sqrt(0.04) * dyn.b_driver(ens.stream_ids[i]).vector_increment(0);
    CHECK((minimum_image(next.positions[i] - ens.positions[i]) - expected).norm() < 1e-14);
  }
}

TEST_CASE("non-finite state raises a blow-up error") {
  const GridSpec g{32};
  ParticleEnsemble ens = init_lattice(SpectralField(g), 4, 0.25);
  ens.weights[2] = Vec3(std::nan(""), 0, 0);
  ParticleDynamics dyn{AlphaKernel(0.5, g), 0.0, NoiseModel{}, 1, 2, 0.01, 1};
  CHECK_THROWS_AS(step(ens, dyn, 0), BlowUpError);
}

TEST_CASE("run records snapshots on the step grid") {
  const GridSpec g{32};
  ParticleEnsemble ens = init_lattice(shear_plus_mean(g), 4, 0.25);
  ParticleDynamics dyn{AlphaKernel(0.5, g), 0.0, NoiseModel{}, 1, 2, 0.01, 1};
  const std::vector<double> times{0.0, 0.02, 0.03};
  const auto snaps = run(ens, dyn, 0.03, times);
  REQUIRE(snaps.size() == 3);
  CHECK(snaps[1].t == doctest::Approx(0.02));
  CHECK(ens.t == doctest::Approx(0.03));
  CHECK_THROWS_AS(step_index_of(0.015, 0.01), std::invalid_argument);
  CHECK(step_index_of(0.5, 1e-3) == 500);
}
