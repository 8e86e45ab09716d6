#pragma once

#include "nsalpha/band_field.hpp"
#include "nsalpha/grid.hpp"
#include "nsalpha/kernel.hpp"
#include "nsalpha/mollifier.hpp"
#include "nsalpha/noise.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace nsalpha {

/// Non-finite state detected while time stepping.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(const std::string& what, std::uint64_t step) : std::runtime_error(what), step_(step) {}
  [[nodiscard]] std::uint64_t step() const { return step_; }

 private:
  std::uint64_t step_;
};

/// Interacting vortex particles: positions X^i on the torus, deformation
/// matrices Phi^i, and weights w^i that never change after initialization.
/// Particle i draws its own Brownian path from stream B[stream_ids[i]].
struct ParticleEnsemble {
  MollifierSpec spec;
  double t = 0.0;
  std::vector<Vec3> positions;
  std::vector<Mat3> deformations;
  std::vector<Vec3> weights;
  std::vector<std::uint32_t> stream_ids;

  [[nodiscard]] std::size_t size() const { return positions.size(); }
  /// (1/N) sum_i Phi^i w^i, the total mass of the empirical measure.
  [[nodiscard]] Vec3 total_mass() const;
};

/// n^3 particles at the cell centers of a regular lattice, Phi = Id and
/// w^i = vol * omega0(eta^i), so that (1/N) sum f(eta^i) w^i is the lattice
/// quadrature of int f omega0.
ParticleEnsemble init_lattice(const SpectralField& omega0, int n_per_axis, double beta);

/// N particles drawn i.i.d. from |omega0| / ||omega0||_1 by rejection
/// sampling, with w^i = omega0(X^i) ||omega0||_1 / |omega0(X^i)|.
/// Throws std::invalid_argument for omega0 == 0.
ParticleEnsemble init_importance(const SpectralField& omega0, std::int64_t count, std::uint64_t seed,
                                 double beta);

/// Fourier coefficients of g^N = V^N * mu^N for max_j |k_j| <= band
/// (default M/2 - 1):
///   c_k = V_hat(k) / (vol N) sum_i Phi^i w^i e^{-ik.X^i},
/// exact up to roundoff, summed in stream-id order. Throws ResolutionError
/// when the grid under-resolves V^N.
SpectralField empirical_field(const ParticleEnsemble& ens, const GridSpec& grid, int band = -1);

/// u^N = K_alpha * g^N, truncated to the grid's dealiased band.
SpectralField velocity_spectral(const ParticleEnsemble& ens, const AlphaKernel& kernel);

struct VelocityField {
  PhysicalField u;
  TensorField gradient;
};

/// u^N and grad u^N on the grid nodes.
VelocityField velocity_field(const ParticleEnsemble& ens, const AlphaKernel& kernel);

struct PointVelocities {
  std::vector<Vec3> u;
  std::vector<Mat3> gradient;
};

/// Exact evaluation of a spectral velocity (and its gradient) at the
/// particles, summing every retained mode up to the grid's dealiased band.
PointVelocities velocity_at_particles(const ParticleEnsemble& ens, const SpectralField& u_spectral);

/// Literal pairwise sum (1/N) sum_{j != i} G(X^i - X^j) Phi^j w^j.
Vec3 direct_velocity_at(const ParticleEnsemble& ens, std::size_t i, const AlphaKernel& kernel,
                        const MollifierSpectrum& v_hat, int band);

/// Everything the particle stepper needs besides the ensemble.
struct ParticleDynamics {
  AlphaKernel kernel;  // also fixes the deposit grid
  double nu = 0.0;
  NoiseModel noise;
  std::uint64_t w_seed = 0;
  std::uint64_t b_seed = 0;
  double dt = 1e-3;
  std::uint32_t substeps = 1;

  [[nodiscard]] BrownianDriver w_driver(std::size_t m) const {
    return {w_seed, {StreamKind::W, static_cast<std::uint32_t>(m)}, dt, substeps};
  }
  [[nodiscard]] BrownianDriver b_driver(std::uint32_t stream) const {
    return {b_seed, {StreamKind::B, stream}, dt, substeps};
  }
};

/// One Heun (Stratonovich) step number `step_index` of
///   dX   = u^N(X) dt + sqrt(2 nu) dB + sum_m sigma_m(X) o dW^m,
///   dPhi = grad u^N(X) Phi dt + sum_m grad sigma_m(X) Phi o dW^m,
/// rebuilding u^N from the ensemble at each stage. Throws BlowUpError.
ParticleEnsemble step(const ParticleEnsemble& ens, const ParticleDynamics& dyn, std::uint64_t step_index);

struct FieldSnapshot {
  double t = 0.0;
  SpectralField field;
};

/// Steps from ens.t to T and returns g^N at each snapshot time. Snapshot
/// times must lie on the step grid.
std::vector<FieldSnapshot> run(ParticleEnsemble& ens, const ParticleDynamics& dyn, double T,
                               std::span<const double> snapshot_times);

/// Step index of time t on a grid of spacing dt; throws std::invalid_argument
/// when t is not a grid point.
std::uint64_t step_index_of(double t, double dt);

}  // namespace nsalpha
