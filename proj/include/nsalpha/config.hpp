#pragma once

#include "nsalpha/grid.hpp"
#include "nsalpha/noise.hpp"
#include "nsalpha/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsalpha {

/// One real Fourier mode a cos(k.x) + b sin(k.x) of an initial vorticity.
struct FourierMode {
  Vec3i k = Vec3i::Zero();
  Vec3 cos_coeff = Vec3::Zero();
  Vec3 sin_coeff = Vec3::Zero();
};

/// Named band-limited initial vorticity, scaled by `amplitude`:
///   zero, single_mode (0, 0, cos x1), taylor_green, abc (A = B = C = 1),
///   modes (the `modes` list).
struct InitialCondition {
  std::string id = "taylor_green";
  double amplitude = 1.0;
  std::vector<FourierMode> modes;
};

/// Error norm of g - omega: Sobolev H^s_2 or the grid sup-norm.
struct NormId {
  enum class Kind { Sobolev, Sup };
  Kind kind = Kind::Sobolev;
  double s = -1.0;

  /// "H-1", "L2", "H0.88", "sup".
  [[nodiscard]] std::string name() const;
  bool operator==(const NormId&) const = default;
};

/// W and B seeds default to mix_seed(master, 1) and mix_seed(master, 2).
struct Seeds {
  std::uint64_t master = 1;
  std::optional<std::uint64_t> w;
  std::optional<std::uint64_t> b;

  [[nodiscard]] std::uint64_t w_seed() const { return w.value_or(mix_seed(master, 1)); }
  [[nodiscard]] std::uint64_t b_seed() const { return b.value_or(mix_seed(master, 2)); }
};

struct FlowmapSettings {
  int labels_per_axis = 8;
  int replicas = 64;
  double T = 0.25;
  int max_mode = 1;
  int track_stride = 1;
};

struct ExperimentConfig {
  int M = 32;
  double dealias_fraction = 2.0 / 3.0;
  double alpha = 0.5;
  double nu = 0.05;
  double p = 7.0;
  double alpha_sobolev = 0.9;
  double eta = 0.88;
  double beta = 0.25;
  double T = 0.5;
  double dt = 1e-3;
  std::vector<double> snapshots;
  std::vector<int> lattice_sides{8, 12, 16};
  /// Particle deposit grid; 0 selects the smallest admissible grid.
  int particle_grid = 0;
  std::vector<NoiseTerm> noise;
  Seeds seeds;
  std::vector<NormId> norms{{NormId::Kind::Sobolev, -1.0}, {NormId::Kind::Sobolev, 0.0}, {NormId::Kind::Sup, 0.0}};
  InitialCondition initial_condition;
  bool integrating_factor = false;
  bool transpose_stretching = false;
  std::uint32_t substeps = 1;
  FlowmapSettings flowmap;

  [[nodiscard]] GridSpec grid() const { return {M, dealias_fraction}; }
  [[nodiscard]] NoiseModel noise_model() const { return NoiseModel(noise); }
  [[nodiscard]] SolverConfig solver_config() const;
};

/// Every schema violation found, in document order.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  [[nodiscard]] const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Parses and validates a configuration document. Missing keys take their
/// defaults; unknown keys, type errors and constraint failures are all
/// collected and thrown together as ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Complete document with every default filled; parse_config(to_json(c))
/// reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical dump of to_json(config), as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Default snapshot times: 11 equally spaced step-grid times in [0, T].
std::vector<double> default_snapshots(double T, double dt);

/// The initial vorticity sampled on `grid` and transformed.
SpectralField initial_vorticity(const InitialCondition& ic, const GridSpec& grid);

}  // namespace nsalpha
