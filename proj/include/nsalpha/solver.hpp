#pragma once

#include "nsalpha/grid.hpp"
#include "nsalpha/kernel.hpp"
#include "nsalpha/noise.hpp"
#include "nsalpha/spectral.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace nsalpha {

struct SolverConfig {
  double nu = 0.05;
  double alpha = 0.5;
  double dt = 1e-3;
  GridSpec grid;
  NoiseModel noise;
  /// Treat nu Lap exactly through exp(-nu |k|^2 dt) instead of inside Heun.
  bool integrating_factor = false;
  /// Use (grad v)^T omega instead of (grad v) omega in the Lie derivative.
  bool transpose_stretching = false;
  std::uint64_t w_seed = 0;
  std::uint32_t substeps = 1;

  [[nodiscard]] BrownianDriver w_driver(std::size_t m) const {
    return {w_seed, {StreamKind::W, static_cast<std::uint32_t>(m)}, dt, substeps};
  }
};

struct SolverState {
  SpectralField omega;
  double t = 0.0;
};

/// Lie derivative L_v omega = (grad omega) v - (grad v) omega (or (grad v)^T
/// omega when `transpose` is set), evaluated in physical space, transformed
/// and dealiased.
SpectralField lie_derivative(const SpectralField& omega, const PhysicalField& v, const TensorField& grad_v,
                             bool transpose = false);

/// Pseudo-spectral discretization of
///   d omega = [-L_u omega + nu Lap omega] dt - sum_m L_{sigma_m} omega o dW^m,
///   u = K_alpha * omega.
/// omega is assumed divergence-free; the untransposed bracket is then
/// evaluated as curl(omega x v), which needs a third of the transforms.
/// Caches the kernel and the sigma fields on the grid.
class SpectralSolver {
 public:
  explicit SpectralSolver(SolverConfig config);

  [[nodiscard]] const SolverConfig& config() const { return config_; }
  [[nodiscard]] const AlphaKernel& kernel() const { return kernel_; }

  /// -L_u omega, dealiased.
  [[nodiscard]] SpectralField nonlinear_term(const SpectralField& omega) const;
  /// -L_u omega + nu Lap omega.
  [[nodiscard]] SpectralField rhs_deterministic(const SpectralField& omega) const;
  /// -L_{sigma_m} omega for each noise term.
  [[nodiscard]] std::vector<SpectralField> noise_terms(const SpectralField& omega) const;

  /// One Stratonovich Heun step with the given per-term increments.
  [[nodiscard]] SolverState step(const SolverState& state, std::span<const double> dW) const;

  /// dt max|u| M / (2 pi).
  [[nodiscard]] double cfl_number(const SpectralField& omega) const;

 private:
  struct Stage {
    SpectralField drift;                // -L_u omega (+ nu Lap omega unless integrating factor)
    std::vector<SpectralField> noise;   // -L_{sigma_m} omega
  };
  [[nodiscard]] Stage evaluate_stage(const SpectralField& omega, bool want_noise) const;
  /// -L_v omega, dealiased; `grad_v` is only read for the transposed variant.
  [[nodiscard]] SpectralField minus_lie(const SpectralField& omega, const PhysicalField& w, const PhysicalField& v,
                                        const TensorField& grad_v) const;

  SolverConfig config_;
  AlphaKernel kernel_;
  std::vector<PhysicalField> sigma_;
  std::vector<TensorField> sigma_gradient_;
  std::vector<double> decay_;  // exp(-nu |k|^2 dt)
};

SpectralField rhs_deterministic(const SolverState& state, const SolverConfig& config);

SolverState step_stratonovich_heun(const SolverState& state, const SolverConfig& config,
                                   std::span<const double> dW);

/// A f = nu Lap f + 1/2 sum_m Tr(sigma sigma^T H f) + 1/2 sum_m Tr((grad sigma)(grad sigma)^T H f),
/// per component. Spectral multiplier when every sigma_m is constant.
SpectralField ito_generator_apply(const SpectralField& f, const NoiseModel& noise, double nu);

struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> omega;
  std::vector<std::string> warnings;
};

/// Called after every step (and once at t0 with step = 0).
using StepObserver = std::function<void(const SolverState&, std::uint64_t step)>;

/// Integrates from t = 0 to T and records omega at each snapshot time.
/// Throws BlowUpError on non-finite coefficients.
Trajectory solve(const SpectralField& omega0, double T, const SolverConfig& config,
                 std::span<const double> snapshot_times, const StepObserver& observer = {});

}  // namespace nsalpha
