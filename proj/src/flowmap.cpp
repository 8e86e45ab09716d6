#include "nsalpha/flowmap.hpp"

#include "nsalpha/kernel.hpp"
#include "nsalpha/parallel.hpp"
#include "nsalpha/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace nsalpha {

BandField VelocityTrack::at(double t) const {
  if (times.empty()) throw std::logic_error("VelocityTrack: empty");
  const double tol = 1e-9 * std::max(1.0, std::abs(t));
  if (t < times.front() - tol || t > times.back() + tol) {
    throw std::out_of_range("VelocityTrack: t = " + std::to_string(t) + " outside the recorded interval");
  }
  const auto it = std::lower_bound(times.begin(), times.end(), t - tol);
  const std::size_t hi = static_cast<std::size_t>(it - times.begin());
  if (std::abs(times[hi] - t) <= tol || hi == 0) return velocity[hi];
  const std::size_t lo = hi - 1;
  const double theta = (t - times[lo]) / (times[hi] - times[lo]);
  return lerp(velocity[lo], velocity[hi], theta);
}

SolverRun run_solver_with_track(const SpectralField& omega0, double T, const SolverConfig& config,
                                std::span<const double> snapshot_times, int stride) {
  if (stride < 1 || stride > 4) throw std::invalid_argument("run_solver_with_track: stride must be in [1, 4]");
  const AlphaKernel kernel(config.alpha, config.grid);
  const int band = std::min(config.grid.dealias_band(), config.grid.modes_per_axis / 2 - 1);
  const std::uint64_t last = step_index_of(T, config.dt);
  SolverRun run;
  auto observer = [&](const SolverState& state, std::uint64_t s) {
    if (s % static_cast<std::uint64_t>(stride) == 0 || s == last) {
      run.track.times.push_back(state.t);
      run.track.velocity.push_back(restrict_to_band(velocity_from_vorticity(state.omega, kernel), band));
    }
  };
  run.trajectory = solve(omega0, T, config, snapshot_times, observer);
  return run;
}

FlowEnsemble make_flow_ensemble(int labels_per_axis, int replicas) {
  if (labels_per_axis < 1) throw std::invalid_argument("flow ensemble: labels_per_axis must be >= 1");
  if (replicas < 1) throw std::invalid_argument("flow ensemble: replicas must be >= 1");
  FlowEnsemble ens;
  ens.labels_per_axis = labels_per_axis;
  ens.replicas = replicas;
  const double h = kTwoPi / labels_per_axis;
  for (int iz = 0; iz < labels_per_axis; ++iz)
    for (int iy = 0; iy < labels_per_axis; ++iy)
      for (int ix = 0; ix < labels_per_axis; ++ix) ens.labels.emplace_back(h * (ix + 0.5), h * (iy + 0.5), h * (iz + 0.5));
  for (int r = 0; r < replicas; ++r) {
    ens.positions.insert(ens.positions.end(), ens.labels.begin(), ens.labels.end());
    ens.replica_streams.push_back(static_cast<std::uint32_t>(r));
  }
  ens.jacobians.assign(ens.positions.size(), Mat3::Identity());
  return ens;
}

std::vector<FlowEnsemble> evolve_flow(const VelocityTrack& track, const FlowConfig& config, FlowEnsemble ens,
                                      std::span<const double> snapshot_times) {
  const double dt = config.dt;
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_flow: dt must be > 0");
  std::vector<std::uint64_t> wanted;
  for (double t : snapshot_times) wanted.push_back(step_index_of(t, dt));
  std::sort(wanted.begin(), wanted.end());
  const std::uint64_t first = step_index_of(ens.t, dt);
  if (!wanted.empty() && wanted.front() < first) throw std::invalid_argument("evolve_flow: snapshot before t0");

  const std::size_t count = ens.positions.size();
  const std::size_t labels = ens.label_count();
  const std::size_t terms = config.noise.size();
  const double diffusion = std::sqrt(2.0 * config.nu);
  std::vector<FlowEnsemble> out;
  auto record = [&](std::uint64_t s) {
    while (!wanted.empty() && wanted.front() == s) {
      out.push_back(ens);
      wanted.erase(wanted.begin());
    }
  };

  std::vector<Vec3> u0(count), u1(count);
  std::vector<Mat3> g0(count), g1(count);
  std::vector<Vec3> xp(count);
  std::vector<Mat3> jp(count);
  std::vector<double> dW(terms);
  std::vector<Vec3> dB(ens.replicas, Vec3::Zero());

  record(first);
  for (std::uint64_t s = first; !wanted.empty(); ++s) {
    const double t0 = s * dt;
    const double t1 = (s + 1) * dt;
    for (std::size_t m = 0; m < terms; ++m) {
      dW[m] = BrownianDriver{config.w_seed, {StreamKind::W, static_cast<std::uint32_t>(m)}, dt, config.substeps}
                  .scalar_increment(s);
    }
    for (int r = 0; r < ens.replicas; ++r) {
      if (diffusion > 0.0) {
        dB[r] = diffusion * BrownianDriver{config.b_seed, {StreamKind::B, ens.replica_streams[r]}, dt, config.substeps}
                                .vector_increment(s);
      }
    }

    evaluate(track.at(t0), ens.positions, u0, g0);
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const Vec3& x = ens.positions[i];
        const Mat3& j = ens.jacobians[i];
        Vec3 dx = u0[i] * dt + dB[i / labels];
        Mat3 dj = g0[i] * j * dt;
        for (std::size_t m = 0; m < terms; ++m) {
          dx += config.noise.sigma(m, x) * dW[m];
          dj += config.noise.sigma_gradient(m, x) * j * dW[m];
        }
        xp[i] = x + dx;
        jp[i] = j + dj;
      }
    });
    evaluate(track.at(t1), xp, u1, g1);
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const Vec3 x = ens.positions[i];
        const Mat3 j = ens.jacobians[i];
        Vec3 dx = 0.5 * (u0[i] + u1[i]) * dt + dB[i / labels];
        Mat3 dj = 0.5 * (g0[i] * j + g1[i] * jp[i]) * dt;
        for (std::size_t m = 0; m < terms; ++m) {
          dx += 0.5 * (config.noise.sigma(m, x) + config.noise.sigma(m, xp[i])) * dW[m];
          dj += 0.5 * (config.noise.sigma_gradient(m, x) * j + config.noise.sigma_gradient(m, xp[i]) * jp[i]) * dW[m];
        }
        ens.positions[i] = x + dx;
        ens.jacobians[i] = j + dj;
      }
    });
    ens.t = t1;
    for (std::size_t i = 0; i < count; ++i) {
      if (!ens.positions[i].allFinite() || !ens.jacobians[i].allFinite()) {
        throw BlowUpError("flowmap: non-finite state at step " + std::to_string(s), s);
      }
    }
    record(s + 1);
  }
  return out;
}

PairingEstimate weak_pairing(const FlowEnsemble& ens, const SpectralField& omega0, const Vec3i& k) {
  if (ens.replicas < 2) throw std::invalid_argument("weak_pairing: at least two replicas are needed for a variance");
  const std::size_t labels = ens.label_count();
  std::vector<Vec3> w0(labels);
  evaluate(restrict_to_band(omega0, omega0.grid.modes_per_axis / 2 - 1), ens.labels, w0, {});
  const Vec3 kd = k.cast<double>();

  // Replica means, summed over replicas in stream order.
  std::vector<int> order(ens.replicas);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return ens.replica_streams[a] < ens.replica_streams[b]; });
  std::vector<Vec3c> per_replica(ens.replicas, Vec3c::Zero());
  for (int r = 0; r < ens.replicas; ++r) {
    Vec3c acc = Vec3c::Zero();
    for (std::size_t l = 0; l < labels; ++l) {
      const std::size_t i = static_cast<std::size_t>(r) * labels + l;
      const double phase = -kd.dot(ens.positions[i]);
      acc += (ens.jacobians[i] * w0[l]).cast<Complex>() * Complex(std::cos(phase), std::sin(phase));
    }
    per_replica[r] = acc / static_cast<double>(labels);
  }
  PairingEstimate est;
  est.k = k;
  est.t = ens.t;
  for (int r : order) est.estimate += per_replica[r];
  est.estimate /= static_cast<double>(ens.replicas);
  Eigen::Vector3d var_re = Eigen::Vector3d::Zero(), var_im = Eigen::Vector3d::Zero();
  for (int r : order) {
    const Vec3c d = per_replica[r] - est.estimate;
    var_re += d.real().cwiseAbs2();
    var_im += d.imag().cwiseAbs2();
  }
  const double denom = static_cast<double>(ens.replicas - 1) * ens.replicas;
  est.standard_error = ((var_re + var_im) / denom).cwiseSqrt();
  return est;
}

std::vector<ComparisonRow> compare_to_solver(std::span<const FlowEnsemble> flows, const SpectralField& omega0,
                                             std::span<const SpectralField> solver, std::span<const Vec3i> modes) {
  if (flows.size() != solver.size()) throw std::invalid_argument("compare_to_solver: size mismatch");
  // Coefficients that vanish by symmetry carry only roundoff in both estimate and standard error.
  const double floor = kPairingRoundoff * omega0.values.cwiseAbs().maxCoeff();
  std::vector<ComparisonRow> rows;
  for (std::size_t s = 0; s < flows.size(); ++s) {
    const GridSpec& g = solver[s].grid;
    for (const Vec3i& k : modes) {
      const PairingEstimate est = weak_pairing(flows[s], omega0, k);
      const int n = g.flat_index(g.index_of(k(0)), g.index_of(k(1)), g.index_of(k(2)));
      for (int c = 0; c < 3; ++c) {
        ComparisonRow row;
        row.k = k;
        row.t = flows[s].t;
        row.component = c;
        row.estimate = est.estimate(c);
        row.solver = solver[s].values(c, n);
        row.standard_error = est.standard_error(c);
        const double diff = std::abs(row.estimate - row.solver);
        const double scale = std::max(row.standard_error, floor);
        if (scale > 0.0) {
          row.z = diff / scale;
        } else {
          row.z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows) {
  out << "k1,k2,k3,t,component,estimate_re,estimate_im,solver_re,solver_im,stderr,z\n";
  const auto precision = out.precision(17);
  for (const auto& r : rows) {
    out << r.k(0) << ',' << r.k(1) << ',' << r.k(2) << ',' << r.t << ',' << r.component << ','
        << r.estimate.real() << ',' << r.estimate.imag() << ',' << r.solver.real() << ',' << r.solver.imag()
        << ',' << r.standard_error << ',' << r.z << '\n';
  }
  out.precision(precision);
}

std::vector<Vec3i> modes_up_to(int max_abs) {
  std::vector<Vec3i> out;
  for (int k3 = -max_abs; k3 <= max_abs; ++k3)
    for (int k2 = -max_abs; k2 <= max_abs; ++k2)
      for (int k1 = -max_abs; k1 <= max_abs; ++k1) out.emplace_back(k1, k2, k3);
  return out;
}

double max_jacobian_defect(const FlowEnsemble& ens) {
  double worst = 0.0;
  for (const Mat3& j : ens.jacobians) worst = std::max(worst, std::abs(j.determinant() - 1.0));
  return worst;
}

}  // namespace nsalpha
