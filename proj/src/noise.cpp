#include "nsalpha/noise.hpp"

#include "nsalpha/spectral.hpp"

#include <stdexcept>

namespace nsalpha {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

NoiseModel::NoiseModel(std::vector<NoiseTerm> terms) : terms_(std::move(terms)) {
  for (const auto& term : terms_) {
    if (const auto* mode = std::get_if<SingleModeNoise>(&term)) {
      const Vec3 k = mode->wavevector.cast<double>();
      const double dot = mode->amplitude.dot(k);
      if (std::abs(dot) > 1e-14 * (1.0 + mode->amplitude.norm() * k.norm())) {
        throw std::invalid_argument(
            "noise: single_mode amplitude must be orthogonal to its wavevector (div sigma != 0)");
      }
    }
  }
}

bool NoiseModel::all_constant() const {
  for (const auto& term : terms_) {
    if (const auto* mode = std::get_if<SingleModeNoise>(&term)) {
      if (!mode->wavevector.isZero() && !mode->amplitude.isZero()) return false;
    }
  }
  return true;
}

Vec3 NoiseModel::sigma(std::size_t m, const Vec3& x) const {
  return std::visit(overloaded{[](const ConstantNoise& c) -> Vec3 { return c.a; },
                               [&](const SingleModeNoise& s) -> Vec3 {
                                 const double phase = s.wavevector.cast<double>().dot(x);
                                 return s.amplitude *
                                        (s.phase == Phase::Cos ? std::cos(phase) : std::sin(phase));
                               }},
                    terms_.at(m));
}

Mat3 NoiseModel::sigma_gradient(std::size_t m, const Vec3& x) const {
  return std::visit(overloaded{[](const ConstantNoise&) -> Mat3 { return Mat3::Zero(); },
                               [&](const SingleModeNoise& s) -> Mat3 {
                                 const Vec3 k = s.wavevector.cast<double>();
                                 const double phase = k.dot(x);
                                 const double d =
                                     s.phase == Phase::Cos ? -std::sin(phase) : std::cos(phase);
                                 return d * s.amplitude * k.transpose();
                               }},
                    terms_.at(m));
}

Vec3 NoiseModel::sigma_dot_grad_sigma(std::size_t m, const Vec3& x) const {
  return sigma_gradient(m, x) * sigma(m, x);
}

double validate_assumption(const NoiseModel& model, const GridSpec& grid) {
  validate(grid);
  TensorField stress(grid);
  for (int n = 0; n < grid.size(); ++n) {
    const Vec3 x = grid.node(n);
    Mat3 acc = Mat3::Zero();
    for (std::size_t m = 0; m < model.size(); ++m) {
      const Vec3 s = model.sigma(m, x);
      const Mat3 g = model.sigma_gradient(m, x);
      acc += s * s.transpose() + g * g.transpose();
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) stress.values(3 * i + j, n) = acc(i, j);
  }
  const SpectralTensorField hat = forward_transform(stress);
  SpectralField div(grid);
  for (int n = 0; n < grid.size(); ++n) {
    const Vec3i k = grid.wavevector(n);
    for (int i = 0; i < 3; ++i) {
      Complex acc = 0.0;
      for (int j = 0; j < 3; ++j) acc += Complex(0.0, k(j)) * hat.values(3 * i + j, n);
      div.values(i, n) = acc;
    }
  }
  return sup_norm(inverse_transform(div));
}

double divergence_residual(const NoiseModel& model, const GridSpec& grid) {
  double worst = 0.0;
  for (std::size_t m = 0; m < model.size(); ++m) {
    const PhysicalField s = sample_field(grid, [&](const Vec3& x) { return model.sigma(m, x); });
    const auto div = inverse_transform(divergence(forward_transform(s)));
    worst = std::max(worst, div.values.cwiseAbs().maxCoeff());
  }
  return worst;
}

double standard_normal(std::uint64_t seed, StreamId stream, std::uint64_t fine_step, int lane) {
  const Philox4x32 gen(seed);
  const auto kind = static_cast<std::uint32_t>(stream.kind);
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(fine_step),
                                static_cast<std::uint32_t>(fine_step >> 32), stream.index,
                                (kind << 24) | static_cast<std::uint32_t>(lane / 2)};
  return normal_pair(gen, ctr)[lane % 2];
}

double BrownianDriver::scalar_increment(std::uint64_t step) const {
  const double scale = std::sqrt(dt / substeps);
  double acc = 0.0;
  for (std::uint32_t s = 0; s < substeps; ++s) {
    acc += standard_normal(seed, stream, step * substeps + s, 0);
  }
  return scale * acc;
}

Vec3 BrownianDriver::vector_increment(std::uint64_t step) const {
  const double scale = std::sqrt(dt / substeps);
  Vec3 acc = Vec3::Zero();
  for (std::uint32_t s = 0; s < substeps; ++s) {
    for (int lane = 0; lane < 3; ++lane) {
      acc(lane) += standard_normal(seed, stream, step * substeps + s, lane);
    }
  }
  return scale * acc;
}

}  // namespace nsalpha
