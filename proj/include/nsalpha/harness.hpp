#pragma once

#include "nsalpha/config.hpp"
#include "nsalpha/flowmap.hpp"
#include "nsalpha/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nsalpha {

/// Stated at the top of every error report.
inline constexpr const char* kNormNote =
    "errors are measured in H^s_2 Sobolev norms (H-1, L2, ...) and the grid sup-norm, "
    "not in the H^eta_p (p > 6) norm of the convergence theory";

/// ||g - omega|| in the given norm; the sup-norm is taken over grid nodes.
/// Throws std::invalid_argument when the grids differ.
double error_norm(const SpectralField& g, const SpectralField& omega, const NormId& norm);

struct ErrorRow {
  std::int64_t N = 0;
  double beta = 0.0;
  std::string norm;
  double sup_error = 0.0;  // NaN when the run failed
  double t_of_sup = 0.0;   // NaN when the run failed
  double wall_ms = 0.0;
  std::uint64_t seed_master = 0;
  std::string config_hash;
};

/// One row per (N, norm), in sweep order then norm order.
struct ErrorTable {
  std::vector<ErrorRow> rows;
};

/// Row-wise bitwise equality of every column except wall_ms.
bool same_results(const ErrorTable& a, const ErrorTable& b);

/// Deposit grid for N particles: `config.particle_grid` when set, otherwise
/// the smallest 2^a 3^b 5^c size >= M that resolves the mollifier.
GridSpec particle_grid_for(const ExperimentConfig& config, std::int64_t N);

/// For every lattice side n (N = n^3): lattice-initialized particles and the
/// spectral solver, both driven by the W seed of the config, compared at
/// every snapshot time after resampling g^N to the solver grid. A blown-up
/// particle run yields NaN rows; a blown-up solver fails every row.
/// Progress and the W stream keys go to `log` when given.
ErrorTable run_convergence(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Columns N,beta,norm,sup_error,t_of_sup,wall_ms,seed_master,config_hash.
void write_csv(std::ostream& out, const ErrorTable& table);
nlohmann::json to_json(const ErrorTable& table);
ErrorTable table_from_json(const nlohmann::json& doc);

struct ValidationItem {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;
  [[nodiscard]] bool ok() const;
};

/// Noise assumption residual, divergence-free velocity, curl identity,
/// mollifier mass for every N of the sweep, the beta bound and direct vs
/// grid velocity for 64 particles.
ValidationReport validate(const ExperimentConfig& config);
void print_report(std::ostream& out, const ValidationReport& report);

/// Writes solver and particle vorticity snapshots (binary + JSON sidecar)
/// into `dir`; returns the written binary paths.
std::vector<std::filesystem::path> simulate(const ExperimentConfig& config, const std::filesystem::path& dir,
                                            std::ostream* log = nullptr);

struct FlowmapResult {
  std::vector<ComparisonRow> rows;
  double max_z_final = 0.0;        // largest |estimate - solver| / stderr at T
  double max_error_initial = 0.0;  // largest |estimate - solver| at t = 0
  double max_det_defect = 0.0;     // max |det J - 1| at T
};

/// Stochastic flow driven by the solver velocity on the configured label
/// lattice and replica count, compared with the solver at t = 0 and T.
FlowmapResult run_flowmap(const ExperimentConfig& config, std::ostream* log = nullptr);

}  // namespace nsalpha
