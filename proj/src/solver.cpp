#include "nsalpha/solver.hpp"

#include "nsalpha/particles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nsalpha {

namespace {

PhysicalField lie_product(const PhysicalField& omega, const TensorField& grad_omega, const PhysicalField& v,
                          const TensorField& grad_v, bool transpose) {
  PhysicalField out(omega.grid);
  for (int n = 0; n < omega.size(); ++n) {
    const Mat3 gw = as_matrix(grad_omega.values.col(n));
    const Mat3 gv = as_matrix(grad_v.values.col(n));
    const Vec3 w = omega.values.col(n);
    const Vec3 stretch = transpose ? Vec3(gv.transpose() * w) : Vec3(gv * w);
    out.values.col(n) = gw * v.values.col(n) - stretch;
  }
  return out;
}

PhysicalField cross_product(const PhysicalField& a, const PhysicalField& b) {
  PhysicalField out(a.grid);
  for (int n = 0; n < a.size(); ++n) out.values.col(n) = Vec3(a.values.col(n)).cross(Vec3(b.values.col(n)));
  return out;
}

}  // namespace

SpectralField lie_derivative(const SpectralField& omega, const PhysicalField& v, const TensorField& grad_v,
                             bool transpose) {
  if (!(omega.grid == v.grid) || !(omega.grid == grad_v.grid)) {
    throw std::invalid_argument("lie_derivative: grid mismatch");
  }
  const PhysicalField w = inverse_transform(omega);
  const TensorField gw = gradient_tensor(omega);
  return dealias(forward_transform(lie_product(w, gw, v, grad_v, transpose)));
}

SpectralSolver::SpectralSolver(SolverConfig config)
    : config_(std::move(config)), kernel_(config_.alpha, config_.grid) {
  if (!(config_.dt > 0.0)) throw std::invalid_argument("solver: dt must be > 0");
  if (config_.nu < 0.0) throw std::invalid_argument("solver: nu must be >= 0");
  const GridSpec& g = config_.grid;
  for (std::size_t m = 0; m < config_.noise.size(); ++m) {
    sigma_.push_back(sample_field(g, [&](const Vec3& x) { return config_.noise.sigma(m, x); }));
    TensorField grad(g);
    for (int n = 0; n < g.size(); ++n) {
      const Mat3 s = config_.noise.sigma_gradient(m, g.node(n));
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) grad.values(3 * i + j, n) = s(i, j);
    }
    sigma_gradient_.push_back(std::move(grad));
  }
  decay_.resize(g.size());
  for (int n = 0; n < g.size(); ++n) {
    decay_[n] = std::exp(-config_.nu * g.wavevector(n).squaredNorm() * config_.dt);
  }
}

SpectralField SpectralSolver::minus_lie(const SpectralField& omega, const PhysicalField& w, const PhysicalField& v,
                                        const TensorField& grad_v) const {
  if (config_.transpose_stretching) {
    SpectralField out =
        dealias(forward_transform(lie_product(w, gradient_tensor(omega), v, grad_v, true)));
    out.values *= -1.0;
    return out;
  }
  // -L_v omega = curl(v x omega) for divergence-free v and omega.
  return curl(dealias(forward_transform(cross_product(v, w))));
}

SpectralSolver::Stage SpectralSolver::evaluate_stage(const SpectralField& omega, bool want_noise) const {
  const PhysicalField w = inverse_transform(omega);
  const SpectralField u_hat = velocity_from_vorticity(omega, kernel_);
  const PhysicalField u = inverse_transform(u_hat);
  const TensorField gu = config_.transpose_stretching ? gradient_tensor(u_hat) : TensorField();

  Stage stage;
  stage.drift = minus_lie(omega, w, u, gu);
  if (!config_.integrating_factor && config_.nu > 0.0) {
    stage.drift.values += config_.nu * laplacian(omega).values;
  }
  if (want_noise) {
    for (std::size_t m = 0; m < sigma_.size(); ++m) {
      stage.noise.push_back(minus_lie(omega, w, sigma_[m], sigma_gradient_[m]));
    }
  }
  return stage;
}

SpectralField SpectralSolver::nonlinear_term(const SpectralField& omega) const {
  const SpectralField u_hat = velocity_from_vorticity(omega, kernel_);
  const TensorField gu = config_.transpose_stretching ? gradient_tensor(u_hat) : TensorField();
  return minus_lie(omega, inverse_transform(omega), inverse_transform(u_hat), gu);
}

SpectralField SpectralSolver::rhs_deterministic(const SpectralField& omega) const {
  SpectralField out = nonlinear_term(omega);
  out.values += config_.nu * laplacian(omega).values;
  return out;
}

std::vector<SpectralField> SpectralSolver::noise_terms(const SpectralField& omega) const {
  return evaluate_stage(omega, true).noise;
}

SolverState SpectralSolver::step(const SolverState& state, std::span<const double> dW) const {
  if (dW.size() != sigma_.size()) throw std::invalid_argument("solver step: one increment per noise term");
  const double dt = config_.dt;
  bool any_noise = false;
  for (double w : dW) {
    if (!std::isfinite(w)) throw std::invalid_argument("solver step: non-finite increment");
    any_noise = any_noise || w != 0.0;
  }

  auto increment = [&](const Stage& s) {
    SpectralField d = s.drift;
    d.values *= dt;
    if (any_noise) {
      for (std::size_t m = 0; m < dW.size(); ++m) d.values += dW[m] * s.noise[m].values;
    }
    return d;
  };
  auto apply_decay = [&](SpectralField f) {
    for (int n = 0; n < f.size(); ++n) f.values.col(n) *= decay_[n];
    return f;
  };

  const Stage first = evaluate_stage(state.omega, any_noise);
  const SpectralField d0 = increment(first);
  SpectralField predictor = state.omega;
  predictor.values += d0.values;
  if (config_.integrating_factor) predictor = apply_decay(std::move(predictor));
  predictor = dealias(predictor);

  const Stage second = evaluate_stage(predictor, any_noise);
  const SpectralField d1 = increment(second);
  SolverState next{state.omega, state.t + dt};
  if (config_.integrating_factor) {
    next.omega.values += 0.5 * d0.values;
    next.omega = apply_decay(std::move(next.omega));
    next.omega.values += 0.5 * d1.values;
  } else {
    next.omega.values += 0.5 * (d0.values + d1.values);
  }
  next.omega = dealias(next.omega);
  if (!next.omega.values.allFinite()) {
    throw BlowUpError("spectral solver: non-finite coefficients at t = " + std::to_string(next.t),
                      static_cast<std::uint64_t>(std::llround(next.t / dt)));
  }
  return next;
}

double SpectralSolver::cfl_number(const SpectralField& omega) const {
  const double umax = sup_norm(inverse_transform(velocity_from_vorticity(omega, kernel_)));
  return config_.dt * umax * config_.grid.modes_per_axis / kTwoPi;
}

SpectralField rhs_deterministic(const SolverState& state, const SolverConfig& config) {
  return SpectralSolver(config).rhs_deterministic(state.omega);
}

SolverState step_stratonovich_heun(const SolverState& state, const SolverConfig& config,
                                   std::span<const double> dW) {
  return SpectralSolver(config).step(state, dW);
}

SpectralField ito_generator_apply(const SpectralField& f, const NoiseModel& noise, double nu) {
  const GridSpec& g = f.grid;
  SpectralField out = laplacian(f);
  out.values *= nu;
  if (noise.empty()) return out;

  if (noise.all_constant()) {
    for (int n = 0; n < g.size(); ++n) {
      const Vec3 k = g.wavevector(n).cast<double>();
      double q = 0.0;
      for (std::size_t m = 0; m < noise.size(); ++m) {
        const double s = noise.sigma(m, Vec3::Zero()).dot(k);
        q += s * s;
      }
      out.values.col(n) -= 0.5 * q * f.values.col(n);
    }
    return out;
  }

  // Q(x) = 1/2 sum_m sigma sigma^T + (grad sigma)(grad sigma)^T, contracted with the Hessian.
  std::vector<Mat3> q(g.size(), Mat3::Zero());
  for (int n = 0; n < g.size(); ++n) {
    const Vec3 x = g.node(n);
    for (std::size_t m = 0; m < noise.size(); ++m) {
      const Vec3 s = noise.sigma(m, x);
      const Mat3 gs = noise.sigma_gradient(m, x);
      q[n] += 0.5 * (s * s.transpose() + gs * gs.transpose());
    }
  }
  PhysicalField contraction(g);
  for (int a = 0; a < 3; ++a) {
    const SpectralField da = spectral_derivative(f, a);
    for (int b = a; b < 3; ++b) {
      const PhysicalField hab = inverse_transform(spectral_derivative(da, b));
      const double factor = a == b ? 1.0 : 2.0;
      for (int n = 0; n < g.size(); ++n) contraction.values.col(n) += factor * q[n](a, b) * hab.values.col(n);
    }
  }
  out.values += forward_transform(contraction).values;
  return out;
}

Trajectory solve(const SpectralField& omega0, double T, const SolverConfig& config,
                 std::span<const double> snapshot_times, const StepObserver& observer) {
  if (!(omega0.grid == config.grid)) throw std::invalid_argument("solve: omega0 grid differs from config grid");
  const SpectralSolver solver(config);
  const std::uint64_t steps = step_index_of(T, config.dt);
  std::vector<std::uint64_t> wanted;
  for (double t : snapshot_times) {
    const std::uint64_t s = step_index_of(t, config.dt);
    if (s > steps) throw std::invalid_argument("solve: snapshot time after T");
    wanted.push_back(s);
  }
  std::sort(wanted.begin(), wanted.end());

  Trajectory traj;
  SolverState state{dealias(omega0), 0.0};
  bool warned = false;
  auto record = [&](std::uint64_t s) {
    if (observer) observer(state, s);
    while (!wanted.empty() && wanted.front() == s) {
      traj.times.push_back(state.t);
      traj.omega.push_back(state.omega);
      wanted.erase(wanted.begin());
      const double cfl = solver.cfl_number(state.omega);
      if (cfl > 0.5 && !warned) {
        std::ostringstream msg;
        msg << "CFL number " << cfl << " exceeds 0.5 at t = " << state.t;
        traj.warnings.push_back(msg.str());
        warned = true;
      }
    }
  };
  record(0);
  std::vector<double> dW(config.noise.size());
  for (std::uint64_t s = 0; s < steps; ++s) {
    for (std::size_t m = 0; m < dW.size(); ++m) dW[m] = config.w_driver(m).scalar_increment(s);
    state = solver.step(state, dW);
    state.t = (s + 1) * config.dt;
    record(s + 1);
  }
  return traj;
}

}  // namespace nsalpha
