#pragma once

#include "nsalpha/band_field.hpp"
#include "nsalpha/grid.hpp"
#include "nsalpha/noise.hpp"
#include "nsalpha/solver.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace nsalpha {

/// Band-limited velocity u(t) sampled at increasing times, linearly
/// interpolated in time between samples.
struct VelocityTrack {
  std::vector<double> times;
  std::vector<BandField> velocity;

  [[nodiscard]] BandField at(double t) const;
};

/// Runs the solver and records K_alpha * omega restricted to the dealiased
/// band every `stride` steps (stride <= 4 keeps interpolation below the
/// integrator error). Snapshots of omega are returned in `trajectory`.
struct SolverRun {
  VelocityTrack track;
  Trajectory trajectory;
};
SolverRun run_solver_with_track(const SpectralField& omega0, double T, const SolverConfig& config,
                                std::span<const double> snapshot_times, int stride = 1);

struct FlowConfig {
  double nu = 0.05;
  double dt = 1e-3;
  NoiseModel noise;
  std::uint64_t w_seed = 0;  // shared with the solver
  std::uint64_t b_seed = 0;  // replica r uses stream B[r]
  std::uint32_t substeps = 1;
};

/// Stochastic flow X_r(x, t) and Jacobian J_r(x, t) for an L^3 lattice of
/// material labels and R replicas of the idiosyncratic path B (one B path per
/// replica, shared by all labels; W shared by everything).
/// Replica r, label l lives at index r * labels.size() + l.
struct FlowEnsemble {
  int labels_per_axis = 0;
  int replicas = 0;
  double t = 0.0;
  std::vector<Vec3> labels;
  std::vector<Vec3> positions;
  std::vector<Mat3> jacobians;
  std::vector<std::uint32_t> replica_streams;

  [[nodiscard]] std::size_t label_count() const { return labels.size(); }
};

/// Cell-centre lattice labels, X = x and J = Id for every replica.
FlowEnsemble make_flow_ensemble(int labels_per_axis, int replicas);

/// Heun integration of
///   dX = u(X, t) dt + sqrt(2 nu) dB + sum_m sigma_m(X) o dW^m,
///   dJ = grad u(X, t) J dt + sum_m grad sigma_m(X) J o dW^m
/// up to each snapshot time; returns the ensemble at every snapshot time.
/// Throws BlowUpError on non-finite state.
std::vector<FlowEnsemble> evolve_flow(const VelocityTrack& track, const FlowConfig& config, FlowEnsemble initial,
                                      std::span<const double> snapshot_times);

struct PairingEstimate {
  Vec3i k = Vec3i::Zero();
  double t = 0.0;
  Vec3c estimate = Vec3c::Zero();
  /// Standard error of each component (complex: sqrt(se_re^2 + se_im^2)).
  Vec3 standard_error = Vec3::Zero();
};

/// Estimates the coefficient (1/vol) int omega_t e^{-ik.x} dx as
///   (1/R) sum_r (1/L^3) sum_x J_r(x) omega0(x) e^{-ik.X_r(x)},
/// with the standard error from the spread over replicas. Requires R >= 2.
PairingEstimate weak_pairing(const FlowEnsemble& ens, const SpectralField& omega0, const Vec3i& k);

struct ComparisonRow {
  Vec3i k = Vec3i::Zero();
  double t = 0.0;
  int component = 0;
  Complex estimate;
  Complex solver;
  double standard_error = 0.0;
  double z = 0.0;  // |estimate - solver| / max(standard_error, roundoff floor)
};

/// Standard errors are floored at this fraction of the largest initial
/// coefficient when forming z.
inline constexpr double kPairingRoundoff = 1e-12;

/// Tabulates every (time, mode, component) against the solver coefficients.
/// `flows[i]` and `solver[i]` must share time `times[i]`.
std::vector<ComparisonRow> compare_to_solver(std::span<const FlowEnsemble> flows, const SpectralField& omega0,
                                             std::span<const SpectralField> solver, std::span<const Vec3i> modes);

/// Columns k1,k2,k3,t,component,estimate_re,estimate_im,solver_re,solver_im,stderr,z.
void write_comparison_csv(std::ostream& out, std::span<const ComparisonRow> rows);

/// Every k with max_j |k_j| <= max_abs.
std::vector<Vec3i> modes_up_to(int max_abs);

/// max over labels and replicas of |det J - 1|.
double max_jacobian_defect(const FlowEnsemble& ens);

}  // namespace nsalpha
