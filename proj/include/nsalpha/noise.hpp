#pragma once

#include "nsalpha/grid.hpp"
#include "nsalpha/rng.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace nsalpha {

/// sigma(x) = a.
struct ConstantNoise {
  Vec3 a = Vec3::Zero();
};

enum class Phase { Cos, Sin };

/// sigma(x) = eps cos(kappa.x) or eps sin(kappa.x), with eps orthogonal to
/// kappa so that div sigma = 0.
struct SingleModeNoise {
  Vec3 amplitude = Vec3::Zero();
  Vec3i wavevector = Vec3i::Zero();
  Phase phase = Phase::Cos;
};

using NoiseTerm = std::variant<ConstantNoise, SingleModeNoise>;

/// Finite list of advection fields sigma_m, each paired with its own scalar
/// Brownian motion W^m. Immutable after construction.
class NoiseModel {
 public:
  NoiseModel() = default;
  /// Throws std::invalid_argument when a single-mode term is not
  /// divergence-free (eps . kappa != 0).
  explicit NoiseModel(std::vector<NoiseTerm> terms);

  [[nodiscard]] std::size_t size() const { return terms_.size(); }
  [[nodiscard]] bool empty() const { return terms_.empty(); }
  [[nodiscard]] const std::vector<NoiseTerm>& terms() const { return terms_; }
  /// True when every term has zero gradient.
  [[nodiscard]] bool all_constant() const;

  [[nodiscard]] Vec3 sigma(std::size_t m, const Vec3& x) const;
  /// (grad sigma)_{ij} = d_j sigma_i.
  [[nodiscard]] Mat3 sigma_gradient(std::size_t m, const Vec3& x) const;
  /// (grad sigma_m) sigma_m at x.
  [[nodiscard]] Vec3 sigma_dot_grad_sigma(std::size_t m, const Vec3& x) const;

 private:
  std::vector<NoiseTerm> terms_;
};

/// Max over grid nodes of |div_row(sum_m sigma sigma^T + (grad sigma)(grad sigma)^T)|,
/// row divergence taken spectrally.
double validate_assumption(const NoiseModel& model, const GridSpec& grid);

/// Max over grid nodes of |div sigma_m| over all terms, taken spectrally.
double divergence_residual(const NoiseModel& model, const GridSpec& grid);

enum class StreamKind : std::uint32_t { W = 0, B = 1, Init = 2 };

struct StreamId {
  StreamKind kind = StreamKind::W;
  std::uint32_t index = 0;
  bool operator==(const StreamId&) const = default;
};

/// Brownian increments over steps of length dt, generated from the key
/// (seed, stream, fine step). With substeps = s each increment is the sum of
/// s consecutive fine increments of length dt / s, so a driver with
/// (dt, s = 2) follows the same path as one with (dt / 2, s = 1).
struct BrownianDriver {
  std::uint64_t seed = 0;
  StreamId stream;
  double dt = 0.0;
  std::uint32_t substeps = 1;

  [[nodiscard]] double scalar_increment(std::uint64_t step) const;
  [[nodiscard]] Vec3 vector_increment(std::uint64_t step) const;
};

/// Raw standard normal number `lane` (0..3) for fine step `fine_step`.
double standard_normal(std::uint64_t seed, StreamId stream, std::uint64_t fine_step, int lane);

}  // namespace nsalpha
