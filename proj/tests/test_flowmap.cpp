#include "doctest.h"

#include "nsalpha/flowmap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace nsalpha;

namespace {

SpectralField single_mode(const GridSpec& g) {
  return forward_transform(sample_field(g, [](const Vec3& x) { return Vec3(0, 0, std::cos(x(0))); }));
}

VelocityTrack still_track(const GridSpec& g, double T) {
  VelocityTrack track;
  track.times = {0.0, T};
  track.velocity = {restrict_to_band(SpectralField(g), 2), restrict_to_band(SpectralField(g), 2)};
  return track;
}

int flat_of(const GridSpec& g, const Vec3i& k) {
  return g.flat_index(g.index_of(k(0)), g.index_of(k(1)), g.index_of(k(2)));
}

}  // namespace

TEST_CASE("flow ensemble layout") {
  const auto ens = make_flow_ensemble(4, 3);
  CHECK(ens.label_count() == 64);
  CHECK(ens.positions.size() == 192);
  CHECK(ens.positions[64 + 5] == ens.labels[5]);
  CHECK(ens.jacobians[100] == Mat3::Identity());
  CHECK(max_jacobian_defect(ens) == 0.0);
  CHECK(modes_up_to(1).size() == 27);
  CHECK_THROWS_AS(make_flow_ensemble(0, 2), std::invalid_argument);
}

TEST_CASE("velocity track interpolates in time") {
  const GridSpec g{8};
  VelocityTrack track;
  track.times = {0.0, 1.0};
  track.velocity = {restrict_to_band(single_mode(g), 2), restrict_to_band(SpectralField(g), 2)};
  CHECK(evaluate_at(track.at(0.25), Vec3::Zero())(2) == doctest::Approx(0.75));
  CHECK(evaluate_at(track.at(1.0), Vec3::Zero())(2) == doctest::Approx(0.0));
  CHECK_THROWS_AS((void)track.at(1.5), std::out_of_range);
}

TEST_CASE("no velocity and no noise leaves the flow at rest") {
  const GridSpec g{8};
  FlowConfig cfg;
  cfg.nu = 0.0;
  cfg.dt = 0.01;
  const auto out = evolve_flow(still_track(g, 0.1), cfg, make_flow_ensemble(3, 2), std::vector<double>{0.1});
  REQUIRE(out.size() == 1);
  CHECK(out[0].positions == make_flow_ensemble(3, 2).positions);
  CHECK(max_jacobian_defect(out[0]) == 0.0);
  CHECK(out[0].t == doctest::Approx(0.1));
}

TEST_CASE("constant common noise translates every label by a W") {
  const GridSpec g{8};
  FlowConfig cfg;
  cfg.nu = 0.0;
  cfg.dt = 0.01;
  cfg.w_seed = 4;
  const Vec3 a(0.3, 0, 0.2);
  cfg.noise = NoiseModel({ConstantNoise{a}});
  const auto out = evolve_flow(still_track(g, 0.1), cfg, make_flow_ensemble(2, 2), std::vector<double>{0.1});
  double w = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) w += BrownianDriver{4, {StreamKind::W, 0}, 0.01, 1}.scalar_increment(s);
  const auto& e = out[0];
  for (std::size_t i = 0; i < e.positions.size(); ++i) {
    CHECK((e.positions[i] - e.labels[i % e.label_count()] - a * w).norm() < 1e-13);
    CHECK(e.jacobians[i] == Mat3::Identity());
  }
}

TEST_CASE("pairing at t = 0 is the lattice Fourier coefficient") {
  const GridSpec g{16};
  const auto omega0 = forward_transform(sample_field(g, [](const Vec3& x) {
    return Vec3(std::sin(x(1) - x(2)), 0.3, std::cos(x(0)) + std::cos(x(0) + x(2)));
  }));
  const auto ens = make_flow_ensemble(16, 2);
  for (const Vec3i& k : modes_up_to(1)) {
    const auto est = weak_pairing(ens, omega0, k);
    CHECK((est.estimate - omega0.values.col(flat_of(g, k))).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(est.standard_error.maxCoeff() == 0.0);
  }
  CHECK(weak_pairing(ens, SpectralField(g), Vec3i(1, 0, 0)).estimate.isZero());
  CHECK_THROWS_AS(weak_pairing(make_flow_ensemble(4, 1), omega0, Vec3i(1, 0, 0)), std::invalid_argument);
}

TEST_CASE("estimates are invariant under replica relabeling") {
  const GridSpec g{16};
  FlowConfig cfg;
  cfg.nu = 0.05;
  cfg.dt = 0.01;
  cfg.b_seed = 9;
  const auto omega0 = single_mode(g);
  FlowEnsemble ens = make_flow_ensemble(4, 5);
  const auto a = evolve_flow(still_track(g, 0.05), cfg, ens, std::vector<double>{0.05})[0];
  // Reverse the replicas together with their stream ids.
  FlowEnsemble perm = ens;
  std::reverse(perm.replica_streams.begin(), perm.replica_streams.end());
  const auto b = evolve_flow(still_track(g, 0.05), cfg, perm, std::vector<double>{0.05})[0];
  const auto ea = weak_pairing(a, omega0, Vec3i(1, 0, 0));
  const auto eb = weak_pairing(b, omega0, Vec3i(1, 0, 0));
  CHECK(ea.estimate == eb.estimate);
  CHECK(ea.standard_error == eb.standard_error);
  CHECK(ea.standard_error.maxCoeff() > 0.0);
}

TEST_CASE("deterministic decay recovered within three standard errors") {
  const GridSpec g{16};
  SolverConfig scfg;
  scfg.grid = g;
  scfg.alpha = 1.0;
  scfg.nu = 0.05;
  scfg.dt = 0.01;
  const auto omega0 = single_mode(g);
  const std::vector<double> times{0.0, 0.2};
  const auto run = run_solver_with_track(omega0, 0.2, scfg, times, 2);
  CHECK(run.track.times.size() == 11);
  FlowConfig cfg;
  cfg.nu = 0.05;
  cfg.dt = 0.01;
  cfg.b_seed = 21;
  const auto flows = evolve_flow(run.track, cfg, make_flow_ensemble(8, 32), times);
  const auto est = weak_pairing(flows[1], omega0, Vec3i(1, 0, 0));
  const double exact = 0.5 * std::exp(-0.05 * 0.2);
  CHECK(std::abs(est.estimate(2) - exact) <= 3 * est.standard_error(2));
  CHECK(max_jacobian_defect(flows[1]) < 1e-6);

  const auto rows = compare_to_solver(flows, omega0, run.trajectory.omega, modes_up_to(1));
  CHECK(rows.size() == 2 * 27 * 3);
  CHECK(rows.front().z == 0.0);
  // Components that vanish by symmetry compare at roundoff, not at a few standard errors.
  for (const auto& row : rows) {
    if (std::abs(row.solver) < 1e-14 && std::abs(row.estimate) < 1e-14) CHECK(row.z < 1.0);
  }
  std::ostringstream csv;
  write_comparison_csv(csv, rows);
  const std::string text = csv.str();
  CHECK(text.rfind("k1,k2,k3,t,component,estimate_re,estimate_im,solver_re,solver_im,stderr,z\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(rows.size() + 1));
}

TEST_CASE("Jacobian defect is second order in dt") {
  const GridSpec g{16};
  const auto omega0 = forward_transform(sample_field(g, [](const Vec3& x) {
    return Vec3(std::sin(x(1)), std::sin(x(2)), std::sin(x(0)));
  }));
  auto defect = [&](double dt) {
    SolverConfig scfg;
    scfg.grid = g;
    scfg.dt = dt;
    const auto run = run_solver_with_track(omega0, 0.4, scfg, std::vector<double>{0.4});
    FlowConfig cfg;
    cfg.nu = 0.0;
    cfg.dt = dt;
    return max_jacobian_defect(evolve_flow(run.track, cfg, make_flow_ensemble(6, 1), std::vector<double>{0.4})[0]);
  };
  const double d1 = defect(0.04), d2 = defect(0.02);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.3));
}
