#include "nsalpha/kernel.hpp"

#include <stdexcept>

namespace nsalpha {

namespace {

// k x c for real k. Eigen's cross() conjugates complex results, so spell it out.
Vec3c cross(const Vec3i& k, const Vec3c& c) {
  return {static_cast<double>(k(1)) * c(2) - static_cast<double>(k(2)) * c(1),
          static_cast<double>(k(2)) * c(0) - static_cast<double>(k(0)) * c(2),
          static_cast<double>(k(0)) * c(1) - static_cast<double>(k(1)) * c(0)};
}

}  // namespace

AlphaKernel::AlphaKernel(double alpha, const GridSpec& grid) : alpha_(alpha), grid_(grid) {
  if (!(alpha > 0.0)) throw std::invalid_argument("kernel: alpha must be > 0");
  validate(grid);
  multipliers_.resize(grid.size());
  for (int n = 0; n < grid.size(); ++n) multipliers_[n] = multiplier(grid.wavevector(n));
}

SpectralField velocity_from_vorticity(const SpectralField& omega, const AlphaKernel& kernel) {
  if (!(omega.grid == kernel.grid())) throw std::invalid_argument("velocity_from_vorticity: grid mismatch");
  const GridSpec& g = omega.grid;
  const int nyquist = g.modes_per_axis / 2;
  SpectralField u(g);
  const auto& ks = wavevector_table(g.modes_per_axis);
  for (int n = 0; n < g.size(); ++n) {
    const Vec3i k = ks[n];
    if (k.cwiseAbs().maxCoeff() == nyquist) continue;
    const double m = kernel.multiplier(n);
    if (m == 0.0) continue;
    const Vec3c w = omega.values.col(n);
    const Vec3c kxw = cross(k, w);
    u.values.col(n) = Complex(0.0, m) * kxw;
  }
  return u;
}

SpectralField curl(const SpectralField& F) {
  const GridSpec& g = F.grid;
  const int nyquist = g.modes_per_axis / 2;
  SpectralField out(g);
  const auto& ks = wavevector_table(g.modes_per_axis);
  for (int n = 0; n < g.size(); ++n) {
    const Vec3i k = ks[n];
    if (k.cwiseAbs().maxCoeff() == nyquist) continue;
    const Vec3c f = F.values.col(n);
    out.values.col(n) = Complex(0.0, 1.0) * cross(k, f);
  }
  return out;
}

TensorField velocity_gradient(const SpectralField& omega, const AlphaKernel& kernel) {
  return gradient_tensor(velocity_from_vorticity(omega, kernel));
}

Mat3 mollified_kernel_matrix(const Vec3& z, const MollifierSpectrum& v_hat, const AlphaKernel& kernel,
                             int band) {
  const GridSpec& g = v_hat.grid;
  if (band < 0 || band > g.modes_per_axis / 2) {
    throw std::invalid_argument("mollified_kernel_matrix: band exceeds the mollifier grid");
  }
  // Accumulate sum_k e^{ik.z} V(k) m(k) k as a complex vector; G = (i/vol) [s]_x.
  Vec3c s = Vec3c::Zero();
  for (int k1 = -band; k1 <= band; ++k1) {
    for (int k2 = -band; k2 <= band; ++k2) {
      for (int k3 = -band; k3 <= band; ++k3) {
        if (k1 == 0 && k2 == 0 && k3 == 0) continue;
        const Vec3i k(k1, k2, k3);
        const double weight = v_hat.at(k) * kernel.multiplier(k);
        const double phase = k.cast<double>().dot(z);
        s += (weight * Complex(std::cos(phase), std::sin(phase))) * k.cast<Complex>();
      }
    }
  }
  // i * s: real part is -Im(s), imaginary part Re(s) cancels by symmetry.
  const Vec3c is = Complex(0.0, 1.0) * s;
  const double residue = is.imag().norm();
  if (residue > 1e-10 * (1.0 + is.real().norm())) {
    throw std::logic_error("mollified_kernel_matrix: kernel sum is not real");
  }
  return cross_matrix(is.real()) / kTorusVolume;
}

}  // namespace nsalpha
