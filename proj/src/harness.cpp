#include "nsalpha/harness.hpp"

#include "nsalpha/kernel.hpp"
#include "nsalpha/mollifier.hpp"
#include "nsalpha/particles.hpp"
#include "nsalpha/rng.hpp"
#include "nsalpha/snapshot.hpp"
#include "nsalpha/spectral.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <ostream>

namespace nsalpha {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

bool fft_friendly(int m) {
  for (int p : {2, 3, 5})
    while (m % p == 0) m /= p;
  return m == 1;
}

/// Deposit band matched to the solver's dealiased band.
GridSpec with_band(int modes_per_axis, int band) {
  return {modes_per_axis, std::max(band, 0) / (modes_per_axis / 2.0) + 1e-12};
}

int solver_band(const GridSpec& grid) { return std::min(grid.dealias_band(), grid.modes_per_axis / 2 - 1); }

void log_line(std::ostream* log, const std::string& line) {
  if (log) *log << line << '\n' << std::flush;
}

std::string w_keys(const BrownianDriver& d) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "W[%u] seed=%llu dt=%.17g substeps=%u", d.stream.index,
                static_cast<unsigned long long>(d.seed), d.dt, d.substeps);
  return buf;
}

json seeds_json(const ExperimentConfig& c) {
  return {{"master", c.seeds.master}, {"W", c.seeds.w_seed()}, {"B", c.seeds.b_seed()}};
}

std::vector<double> sorted_snapshots(const ExperimentConfig& c) {
  std::vector<double> t = c.snapshots;
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

ParticleDynamics particle_dynamics(const ExperimentConfig& c, const GridSpec& grid) {
  return {AlphaKernel(c.alpha, grid), c.nu, c.noise_model(), c.seeds.w_seed(), c.seeds.b_seed(), c.dt, c.substeps};
}

}  // namespace

double error_norm(const SpectralField& g, const SpectralField& omega, const NormId& norm) {
  if (!(g.grid == omega.grid)) throw std::invalid_argument("error_norm: fields live on different grids");
  const SpectralField diff(g.grid, g.values - omega.values);
  if (norm.kind == NormId::Kind::Sup) return sup_norm(inverse_transform(diff));
  return sobolev_norm(diff, norm.s);
}

bool same_results(const ErrorTable& a, const ErrorTable& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const ErrorRow& x = a.rows[i];
    const ErrorRow& y = b.rows[i];
    if (x.N != y.N || !same_bits(x.beta, y.beta) || x.norm != y.norm || !same_bits(x.sup_error, y.sup_error) ||
        !same_bits(x.t_of_sup, y.t_of_sup) || x.seed_master != y.seed_master || x.config_hash != y.config_hash) {
      return false;
    }
  }
  return true;
}

GridSpec particle_grid_for(const ExperimentConfig& config, std::int64_t N) {
  const int band = solver_band(config.grid());
  if (config.particle_grid > 0) return with_band(config.particle_grid, band);
  const MollifierSpec spec{config.beta, N};
  for (int m = std::max(config.M, 4);; m += 2) {
    if (!fft_friendly(m)) continue;
    try {
      check_resolution(spec, GridSpec{m});
      return with_band(m, band);
    } catch (const ResolutionError&) {
    }
  }
}

ErrorTable run_convergence(const ExperimentConfig& c, std::ostream* log) {
  const std::string hash = config_hash(c);
  const GridSpec grid = c.grid();
  const SpectralField omega0 = dealias(initial_vorticity(c.initial_condition, grid));
  const std::vector<double> times = sorted_snapshots(c);
  const SolverConfig sc = c.solver_config();

  log_line(log, std::string("# ") + kNormNote);
  for (std::size_t m = 0; m < sc.noise.size(); ++m) log_line(log, "solver    " + w_keys(sc.w_driver(m)));

  Trajectory traj;
  std::string solver_failure;
  try {
    traj = solve(omega0, c.T, sc, times);
    for (const auto& w : traj.warnings) log_line(log, "solver warning: " + w);
  } catch (const BlowUpError& e) {
    solver_failure = e.what();
    log_line(log, std::string("solver failed: ") + e.what());
  }

  ErrorTable table;
  for (int n : c.lattice_sides) {
    const std::int64_t N = static_cast<std::int64_t>(n) * n * n;
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> worst(c.norms.size(), kNaN), when(c.norms.size(), kNaN);
    if (solver_failure.empty()) {
      try {
        const GridSpec pg = particle_grid_for(c, N);
        const ParticleDynamics dyn = particle_dynamics(c, pg);
        for (std::size_t m = 0; m < dyn.noise.size(); ++m) {
          const BrownianDriver a = dyn.w_driver(m), b = sc.w_driver(m);
          if (!(a.seed == b.seed && a.stream == b.stream && a.dt == b.dt && a.substeps == b.substeps)) {
            throw std::logic_error("particle and solver W streams differ");
          }
          log_line(log, "N=" + std::to_string(N) + " " + w_keys(a));
        }
        ParticleEnsemble ens = init_lattice(omega0, n, c.beta);
        const auto snaps = run(ens, dyn, c.T, times);
        std::fill(worst.begin(), worst.end(), -1.0);
        for (std::size_t s = 0; s < snaps.size(); ++s) {
          const SpectralField g = resample(snaps[s].field, grid);
          for (std::size_t k = 0; k < c.norms.size(); ++k) {
            const double e = error_norm(g, traj.omega[s], c.norms[k]);
            if (!std::isfinite(e)) throw BlowUpError("non-finite error", 0);
            if (e > worst[k]) {
              worst[k] = e;
              when[k] = snaps[s].t;
            }
          }
        }
      } catch (const std::exception& e) {
        std::fill(worst.begin(), worst.end(), kNaN);
        std::fill(when.begin(), when.end(), kNaN);
        log_line(log, "N=" + std::to_string(N) + " failed: " + e.what());
      }
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (std::size_t k = 0; k < c.norms.size(); ++k) {
      table.rows.push_back({N, c.beta, c.norms[k].name(), worst[k], when[k], ms, c.seeds.master, hash});
    }
    if (log) {
      *log << "N=" << N << " done in " << ms / 1000.0 << " s:";
      for (std::size_t k = 0; k < c.norms.size(); ++k) *log << ' ' << c.norms[k].name() << '=' << worst[k];
      *log << '\n' << std::flush;
    }
  }
  return table;
}

void write_csv(std::ostream& out, const ErrorTable& table) {
  out << "N,beta,norm,sup_error,t_of_sup,wall_ms,seed_master,config_hash\n";
  for (const auto& r : table.rows) {
    out << r.N << ',' << format_double(r.beta) << ',' << r.norm << ',' << format_double(r.sup_error) << ','
        << format_double(r.t_of_sup) << ',' << format_double(r.wall_ms) << ',' << r.seed_master << ','
        << r.config_hash << '\n';
  }
}

json to_json(const ErrorTable& table) {
  auto number = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  json rows = json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"N", r.N},
                    {"beta", r.beta},
                    {"norm", r.norm},
                    {"sup_error", number(r.sup_error)},
                    {"t_of_sup", number(r.t_of_sup)},
                    {"wall_ms", r.wall_ms},
                    {"seed_master", r.seed_master},
                    {"config_hash", r.config_hash}});
  }
  return {{"note", kNormNote},
          {"columns", {"N", "beta", "norm", "sup_error", "t_of_sup", "wall_ms", "seed_master", "config_hash"}},
          {"rows", rows}};
}

ErrorTable table_from_json(const json& doc) {
  auto number = [](const json& v) { return v.is_null() ? kNaN : v.get<double>(); };
  ErrorTable table;
  for (const auto& r : doc.at("rows")) {
    table.rows.push_back({r.at("N").get<std::int64_t>(), r.at("beta").get<double>(), r.at("norm").get<std::string>(),
                          number(r.at("sup_error")), number(r.at("t_of_sup")), r.at("wall_ms").get<double>(),
                          r.at("seed_master").get<std::uint64_t>(), r.at("config_hash").get<std::string>()});
  }
  return table;
}

bool ValidationReport::ok() const {
  return std::all_of(items.begin(), items.end(), [](const ValidationItem& i) { return i.pass; });
}

ValidationReport validate(const ExperimentConfig& c) {
  ValidationReport report;
  auto add = [&](std::string name, double value, double tol, std::string detail = {}) {
    report.items.push_back({std::move(name), value, tol, value <= tol, std::move(detail)});
  };
  const GridSpec grid = c.grid();
  const NoiseModel noise = c.noise_model();

  add("noise assumption residual", noise.empty() ? 0.0 : validate_assumption(noise, grid), 1e-12,
      std::to_string(noise.size()) + " term(s)");
  add("noise divergence residual", noise.empty() ? 0.0 : divergence_residual(noise, grid), 1e-12);

  const SpectralField omega0 = dealias(initial_vorticity(c.initial_condition, grid));
  const AlphaKernel kernel(c.alpha, grid);
  const SpectralField u = velocity_from_vorticity(omega0, kernel);
  double div = 0.0, unorm = 0.0;
  for (int n = 0; n < grid.size(); ++n) {
    const Vec3 k = grid.wavevector(n).cast<double>();
    div = std::max(div, std::abs(k(0) * u.values(0, n) + k(1) * u.values(1, n) + k(2) * u.values(2, n)));
    unorm += u.values.col(n).squaredNorm();
  }
  unorm = std::sqrt(unorm);
  add("velocity divergence max|k.u_k|/||u||", unorm > 0.0 ? div / unorm : div, 1e-12);

  // curl K omega = (I - alpha^2 Lap)^{-1} omega for divergence-free, mean-free omega.
  const SpectralField w = curl(u);
  double curl_err = 0.0, wnorm = 0.0;
  for (int n = 0; n < grid.size(); ++n) {
    const double k2 = grid.wavevector(n).squaredNorm();
    const Vec3c expected = k2 == 0.0 ? Vec3c::Zero() : Vec3c(omega0.values.col(n) / (1.0 + c.alpha * c.alpha * k2));
    curl_err = std::max(curl_err, (w.values.col(n) - expected).cwiseAbs().maxCoeff());
    wnorm = std::max(wnorm, omega0.values.col(n).cwiseAbs().maxCoeff());
  }
  add("curl identity (relative)", wnorm > 0.0 ? curl_err / wnorm : curl_err, 1e-12);

  double mass_err = 0.0, richardson = 0.0;
  for (int n : c.lattice_sides) {
    const MollifierSpec spec{c.beta, static_cast<std::int64_t>(n) * n * n};
    const double coarse = mollifier_mass(spec, 32), fine = mollifier_mass(spec, 64);
    mass_err = std::max(mass_err, std::abs(fine - 1.0));
    richardson = std::max(richardson, std::abs(fine - coarse));
  }
  add("mollifier mass |int V^N - 1|", mass_err, 1e-8, "panel doubling change " + format_double(richardson));

  const BetaBound bound = beta_bound_check(c.p, c.alpha_sobolev, c.beta);
  report.items.push_back({"beta bound", c.beta, bound.beta_upper, bound.ok,
                          "slack " + format_double(std::min(bound.beta_lower_slack, bound.beta_upper_slack)) +
                              ", p - 6 = " + format_double(bound.p_slack) + ", alpha - 6/p = " +
                              format_double(bound.alpha_lower_slack)});

  // Direct pairwise sum vs the grid path for 64 jittered, deformed particles.
  {
    const std::int64_t N = 64;
    const GridSpec pg = particle_grid_for(c, N);
    ParticleEnsemble ens = init_lattice(resample(omega0, pg), 4, c.beta);
    const Philox4x32 gen(c.seeds.master);
    for (std::size_t i = 0; i < ens.size(); ++i) {
      for (int a = 0; a < 3; ++a) {
        const auto r = uniform_pair(gen, {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(a), 0x0c1e, 0});
        ens.positions[i](a) = wrap_coordinate(ens.positions[i](a) + (r[0] - 0.5) * pg.spacing());
        for (int b = 0; b < 3; ++b) {
          const auto q = uniform_pair(gen, {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(a),
                                            static_cast<std::uint32_t>(b), 1});
          ens.deformations[i](a, b) += 0.2 * (q[0] - 0.5);
        }
        if (ens.weights[i].isZero()) ens.weights[i](a) = r[1] - 0.5;
      }
    }
    const AlphaKernel pk(c.alpha, pg);
    const PointVelocities grid_path = velocity_at_particles(ens, velocity_spectral(ens, pk));
    const MollifierSpectrum v_hat = spectral_coefficients(ens.spec, pg);
    double diff = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < ens.size(); ++i) {
      const Vec3 direct = direct_velocity_at(ens, i, pk, v_hat, solver_band(pg));
      diff = std::max(diff, (direct - grid_path.u[i]).norm());
      scale = std::max(scale, direct.norm());
    }
    add("direct vs grid velocity, N = 64 (relative)", scale > 0.0 ? diff / scale : diff, 1e-6,
        "deposit grid M = " + std::to_string(pg.modes_per_axis));
  }
  return report;
}

void print_report(std::ostream& out, const ValidationReport& report) {
  for (const auto& item : report.items) {
    out << (item.pass ? "PASS " : "FAIL ") << item.name << ": " << format_double(item.value)
        << (item.name == "beta bound" ? " < " : " <= ") << format_short(item.tolerance);
    if (!item.detail.empty()) out << " (" << item.detail << ')';
    out << '\n';
  }
}

std::vector<std::filesystem::path> simulate(const ExperimentConfig& c, const std::filesystem::path& dir,
                                            std::ostream* log) {
  std::filesystem::create_directories(dir);
  const std::string hash = config_hash(c);
  const GridSpec grid = c.grid();
  const SpectralField omega0 = dealias(initial_vorticity(c.initial_condition, grid));
  const std::vector<double> times = sorted_snapshots(c);
  std::vector<std::filesystem::path> written;

  auto emit = [&](const std::string& stem, double t, std::int64_t N, const SpectralField& field) {
    const auto bin = dir / (stem + ".nsa3");
    write_snapshot(bin, inverse_transform(field));
    std::ofstream side(dir / (stem + ".json"));
    side << json{{"t", t},           {"N", N},         {"beta", c.beta}, {"M", field.grid.modes_per_axis},
                 {"seeds", seeds_json(c)}, {"config_hash", hash}}
                .dump(2)
         << '\n';
    written.push_back(bin);
  };
  auto stem = [](const std::string& prefix, std::size_t s) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%04zu", s);
    return prefix + buf;
  };

  const Trajectory traj = solve(omega0, c.T, c.solver_config(), times);
  for (std::size_t s = 0; s < traj.times.size(); ++s) emit(stem("solver", s), traj.times[s], 0, traj.omega[s]);
  log_line(log, "solver: " + std::to_string(traj.times.size()) + " snapshots");

  for (int n : c.lattice_sides) {
    const std::int64_t N = static_cast<std::int64_t>(n) * n * n;
    ParticleEnsemble ens = init_lattice(omega0, n, c.beta);
    const auto snaps = run(ens, particle_dynamics(c, particle_grid_for(c, N)), c.T, times);
    for (std::size_t s = 0; s < snaps.size(); ++s) {
      emit(stem("particles_N" + std::to_string(N), s), snaps[s].t, N, resample(snaps[s].field, grid));
    }
    log_line(log, "N=" + std::to_string(N) + ": " + std::to_string(snaps.size()) + " snapshots");
  }
  return written;
}

FlowmapResult run_flowmap(const ExperimentConfig& c, std::ostream* log) {
  const FlowmapSettings& f = c.flowmap;
  const GridSpec grid = c.grid();
  const SpectralField omega0 = dealias(initial_vorticity(c.initial_condition, grid));
  const std::vector<double> times{0.0, f.T};
  const SolverRun solver = run_solver_with_track(omega0, f.T, c.solver_config(), times, f.track_stride);
  for (const auto& w : solver.trajectory.warnings) log_line(log, "solver warning: " + w);

  FlowConfig fc;
  fc.nu = c.nu;
  fc.dt = c.dt;
  fc.noise = c.noise_model();
  fc.w_seed = c.seeds.w_seed();
  fc.b_seed = c.seeds.b_seed();
  fc.substeps = c.substeps;
  const auto flows = evolve_flow(solver.track, fc, make_flow_ensemble(f.labels_per_axis, f.replicas), times);
  const std::vector<Vec3i> modes = modes_up_to(f.max_mode);

  FlowmapResult result;
  result.rows = compare_to_solver(flows, omega0, solver.trajectory.omega, modes);
  for (const auto& row : result.rows) {
    if (row.t == 0.0) {
      result.max_error_initial = std::max(result.max_error_initial, std::abs(row.estimate - row.solver));
    } else {
      result.max_z_final = std::max(result.max_z_final, row.z);
    }
  }
  result.max_det_defect = max_jacobian_defect(flows.back());
  log_line(log, "flowmap: max z at T = " + format_double(result.max_z_final) +
                    ", max |error| at t = 0 = " + format_double(result.max_error_initial) +
                    ", max |det J - 1| = " + format_double(result.max_det_defect));
  return result;
}

}  // namespace nsalpha
