#include "nsalpha/particles.hpp"

#include "nsalpha/parallel.hpp"
#include "nsalpha/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nsalpha {

Vec3 ParticleEnsemble::total_mass() const {
  std::array<std::vector<double>, 3> parts;
  for (auto& p : parts) p.resize(size());
  for (std::size_t i = 0; i < size(); ++i) {
    const Vec3 q = deformations[i] * weights[i];
    for (int a = 0; a < 3; ++a) parts[a][i] = q(a);
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, size()));
  return Vec3(pairwise_sum(parts[0]), pairwise_sum(parts[1]), pairwise_sum(parts[2])) / n;
}

namespace {

BandField full_band(const SpectralField& F) { return restrict_to_band(F, F.grid.modes_per_axis / 2 - 1); }

ParticleEnsemble make_ensemble(std::size_t count, double beta) {
  ParticleEnsemble ens;
  ens.spec = {beta, static_cast<std::int64_t>(count)};
  validate(ens.spec);
  ens.positions.resize(count);
  ens.deformations.assign(count, Mat3::Identity());
  ens.weights.resize(count);
  ens.stream_ids.resize(count);
  std::iota(ens.stream_ids.begin(), ens.stream_ids.end(), 0u);
  return ens;
}

}  // namespace

ParticleEnsemble init_lattice(const SpectralField& omega0, int n_per_axis, double beta) {
  if (n_per_axis < 2) throw std::invalid_argument("init_lattice: n_per_axis must be >= 2");
  const std::size_t count = static_cast<std::size_t>(n_per_axis) * n_per_axis * n_per_axis;
  ParticleEnsemble ens = make_ensemble(count, beta);
  const double h = kTwoPi / n_per_axis;
  for (int iz = 0; iz < n_per_axis; ++iz)
    for (int iy = 0; iy < n_per_axis; ++iy)
      for (int ix = 0; ix < n_per_axis; ++ix) {
        const std::size_t i = ix + n_per_axis * (iy + static_cast<std::size_t>(n_per_axis) * iz);
        ens.positions[i] = Vec3(h * (ix + 0.5), h * (iy + 0.5), h * (iz + 0.5));
      }
  evaluate(full_band(omega0), ens.positions, ens.weights, {});
  for (auto& w : ens.weights) w *= kTorusVolume;
  return ens;
}

ParticleEnsemble init_importance(const SpectralField& omega0, std::int64_t count, std::uint64_t seed,
                                 double beta) {
  if (count < 1) throw std::invalid_argument("init_importance: count must be >= 1");
  // Fine-grid estimates of sup|omega0| and ||omega0||_1.
  GridSpec fine = omega0.grid;
  fine.modes_per_axis *= 2;
  const PhysicalField samples = inverse_transform(resample(omega0, fine));
  double sup = 0.0;
  std::vector<double> magnitudes(samples.size());
  for (int n = 0; n < samples.size(); ++n) {
    magnitudes[n] = samples.values.col(n).norm();
    sup = std::max(sup, magnitudes[n]);
  }
  if (sup == 0.0) throw std::invalid_argument("init_importance: omega0 is identically zero");
  const double l1 = pairwise_sum(magnitudes) * fine.cell_volume();
  const double envelope = 1.05 * sup;

  ParticleEnsemble ens = make_ensemble(static_cast<std::size_t>(count), beta);
  const BandField field = full_band(omega0);
  const Philox4x32 gen(seed);
  const StreamId stream{StreamKind::Init, 0};
  std::uint64_t proposal = 0;
  std::size_t accepted = 0;
  const std::size_t batch = std::max<std::size_t>(1024, 2 * static_cast<std::size_t>(count));
  std::vector<Vec3> candidates(batch), values(batch);
  std::vector<double> acceptance(batch);
  while (accepted < ens.size()) {
    for (std::size_t b = 0; b < batch; ++b, ++proposal) {
      const auto lo = static_cast<std::uint32_t>(proposal);
      const auto hi = static_cast<std::uint32_t>(proposal >> 32);
      const std::uint32_t tag = static_cast<std::uint32_t>(stream.kind) << 24;
      const auto a = uniform_pair(gen, {lo, hi, stream.index, tag});
      const auto c = uniform_pair(gen, {lo, hi, stream.index, tag | 1u});
      candidates[b] = kTwoPi * Vec3(a[0], a[1], c[0]);
      acceptance[b] = c[1];
    }
    evaluate(field, candidates, values, {});
    for (std::size_t b = 0; b < batch && accepted < ens.size(); ++b) {
      const double mag = values[b].norm();
      if (mag > envelope) throw std::runtime_error("init_importance: rejection envelope violated");
      if (acceptance[b] * envelope < mag) {
        ens.positions[accepted] = candidates[b];
        ens.weights[accepted] = values[b] * (l1 / mag);
        ++accepted;
      }
    }
  }
  return ens;
}

SpectralField empirical_field(const ParticleEnsemble& ens, const GridSpec& grid, int band) {
  const MollifierSpectrum v_hat = spectral_coefficients(ens.spec, grid);
  if (band < 0) band = grid.modes_per_axis / 2 - 1;
  const std::size_t count = ens.size();
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return ens.stream_ids[a] < ens.stream_ids[b]; });
  std::vector<Vec3> points(count), charges(count);
  for (std::size_t j = 0; j < count; ++j) {
    points[j] = ens.positions[order[j]];
    charges[j] = ens.deformations[order[j]] * ens.weights[order[j]];
  }
  SpectralField out = sum_modes(grid, band, points, charges);
  const double scale = 1.0 / (kTorusVolume * static_cast<double>(std::max<std::size_t>(1, count)));
  for (int n = 0; n < grid.size(); ++n) out.values.col(n) *= v_hat.values[n] * scale;
  return out;
}

SpectralField velocity_spectral(const ParticleEnsemble& ens, const AlphaKernel& kernel) {
  const GridSpec& g = kernel.grid();
  const int band = std::min(g.dealias_band(), g.modes_per_axis / 2 - 1);
  return velocity_from_vorticity(empirical_field(ens, g, band), kernel);
}

VelocityField velocity_field(const ParticleEnsemble& ens, const AlphaKernel& kernel) {
  const SpectralField u = velocity_spectral(ens, kernel);
  return {inverse_transform(u), gradient_tensor(u)};
}

PointVelocities velocity_at_particles(const ParticleEnsemble& ens, const SpectralField& u_spectral) {
  const int band = std::min(u_spectral.grid.dealias_band(), u_spectral.grid.modes_per_axis / 2 - 1);
  const BandField field = restrict_to_band(u_spectral, band);
  PointVelocities out;
  out.u.resize(ens.size());
  out.gradient.resize(ens.size());
  evaluate(field, ens.positions, out.u, out.gradient);
  return out;
}

Vec3 direct_velocity_at(const ParticleEnsemble& ens, std::size_t i, const AlphaKernel& kernel,
                        const MollifierSpectrum& v_hat, int band) {
  Vec3 acc = Vec3::Zero();
  for (std::size_t j = 0; j < ens.size(); ++j) {
    if (j == i) continue;
    acc += mollified_kernel_matrix(ens.positions[i] - ens.positions[j], v_hat, kernel, band) *
           (ens.deformations[j] * ens.weights[j]);
  }
  return acc / static_cast<double>(ens.size());
}

namespace {

bool finite(const ParticleEnsemble& ens) {
  for (std::size_t i = 0; i < ens.size(); ++i) {
    if (!ens.positions[i].allFinite() || !ens.deformations[i].allFinite()) return false;
  }
  return true;
}

}  // namespace

ParticleEnsemble step(const ParticleEnsemble& ens, const ParticleDynamics& dyn, std::uint64_t step_index) {
  const std::size_t count = ens.size();
  const std::size_t terms = dyn.noise.size();
  const double dt = dyn.dt;
  std::vector<double> dW(terms);
  for (std::size_t m = 0; m < terms; ++m) dW[m] = dyn.w_driver(m).scalar_increment(step_index);
  const double diffusion = std::sqrt(2.0 * dyn.nu);

  // Stage 1 at the current state.
  const PointVelocities v0 = velocity_at_particles(ens, velocity_spectral(ens, dyn.kernel));
  ParticleEnsemble predictor = ens;
  std::vector<Vec3> diffusive(count, Vec3::Zero());
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      if (diffusion > 0.0) diffusive[i] = diffusion * dyn.b_driver(ens.stream_ids[i]).vector_increment(step_index);
      Vec3 dx = v0.u[i] * dt + diffusive[i];
      Mat3 dphi = v0.gradient[i] * ens.deformations[i] * dt;
      for (std::size_t m = 0; m < terms; ++m) {
        dx += dyn.noise.sigma(m, ens.positions[i]) * dW[m];
        dphi += dyn.noise.sigma_gradient(m, ens.positions[i]) * ens.deformations[i] * dW[m];
      }
      predictor.positions[i] = ens.positions[i] + dx;
      predictor.deformations[i] = ens.deformations[i] + dphi;
    }
  });

  // Stage 2 at the predicted state, then the trapezoidal corrector.
  const PointVelocities v1 = velocity_at_particles(predictor, velocity_spectral(predictor, dyn.kernel));
  ParticleEnsemble next = ens;
  parallel_for(count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vec3& x0 = ens.positions[i];
      const Vec3& x1 = predictor.positions[i];
      const Mat3& p0 = ens.deformations[i];
      const Mat3& p1 = predictor.deformations[i];
      Vec3 dx = 0.5 * (v0.u[i] + v1.u[i]) * dt + diffusive[i];
      Mat3 dphi = 0.5 * (v0.gradient[i] * p0 + v1.gradient[i] * p1) * dt;
      for (std::size_t m = 0; m < terms; ++m) {
        dx += 0.5 * (dyn.noise.sigma(m, x0) + dyn.noise.sigma(m, x1)) * dW[m];
        dphi += 0.5 * (dyn.noise.sigma_gradient(m, x0) * p0 + dyn.noise.sigma_gradient(m, x1) * p1) * dW[m];
      }
      next.positions[i] = wrap_position(x0 + dx);
      next.deformations[i] = p0 + dphi;
    }
  });
  next.t = ens.t + dt;
  if (!finite(next)) {
    throw BlowUpError("particle system: non-finite state at step " + std::to_string(step_index), step_index);
  }
  return next;
}

std::uint64_t step_index_of(double t, double dt) {
  const double ratio = t / dt;
  const double rounded = std::round(ratio);
  if (ratio < -1e-9 || std::abs(ratio - rounded) > 1e-6) {
    throw std::invalid_argument("time " + std::to_string(t) + " is not on the step grid (dt = " +
                                std::to_string(dt) + ")");
  }
  return static_cast<std::uint64_t>(rounded);
}

std::vector<FieldSnapshot> run(ParticleEnsemble& ens, const ParticleDynamics& dyn, double T,
                               std::span<const double> snapshot_times) {
  const std::uint64_t first = step_index_of(ens.t, dyn.dt);
  const std::uint64_t last = step_index_of(T, dyn.dt);
  std::vector<std::uint64_t> wanted;
  for (double t : snapshot_times) {
    const std::uint64_t s = step_index_of(t, dyn.dt);
    if (s < first || s > last) throw std::invalid_argument("run: snapshot time outside [t0, T]");
    wanted.push_back(s);
  }
  std::sort(wanted.begin(), wanted.end());
  std::vector<FieldSnapshot> out;
  auto record = [&](std::uint64_t s) {
    while (!wanted.empty() && wanted.front() == s) {
      out.push_back({s * dyn.dt, empirical_field(ens, dyn.kernel.grid())});
      wanted.erase(wanted.begin());
    }
  };
  record(first);
  for (std::uint64_t s = first; s < last; ++s) {
    ens = step(ens, dyn, s);
    ens.t = (s + 1) * dyn.dt;
    record(s + 1);
  }
  return out;
}

}  // namespace nsalpha
