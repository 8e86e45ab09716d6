#pragma once

#include "nsalpha/grid.hpp"
#include "nsalpha/mollifier.hpp"
#include "nsalpha/spectral.hpp"

#include <vector>

namespace nsalpha {

/// Symbol of the alpha-smoothed inverse curl: 1 / (|k|^2 (1 + alpha^2 |k|^2)),
/// and 0 at k = 0.
inline double alpha_multiplier(double alpha, double k2) {
  return k2 == 0.0 ? 0.0 : 1.0 / (k2 * (1.0 + alpha * alpha * k2));
}

/// Mollified Biot-Savart operator u = (I - alpha^2 Lap)^{-1} curl^{-1} omega,
/// with the multiplier cached per grid wavevector.
class AlphaKernel {
 public:
  AlphaKernel(double alpha, const GridSpec& grid);

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] const GridSpec& grid() const { return grid_; }
  [[nodiscard]] double multiplier(int flat) const { return multipliers_[flat]; }
  [[nodiscard]] double multiplier(const Vec3i& k) const {
    return alpha_multiplier(alpha_, static_cast<double>(k.squaredNorm()));
  }

 private:
  double alpha_;
  GridSpec grid_;
  std::vector<double> multipliers_;
};

/// u_k = i (k x omega_k) m(k); u_0 = 0. Divergence-free by construction.
SpectralField velocity_from_vorticity(const SpectralField& omega, const AlphaKernel& kernel);

/// curl F, coefficients i k x F_k (Nyquist components dropped).
SpectralField curl(const SpectralField& F);

/// Physical-space grad u for u = velocity_from_vorticity(omega); entry (i, j) = d_j u_i.
TensorField velocity_gradient(const SpectralField& omega, const AlphaKernel& kernel);

/// Matrix G(z) with G(z) w = (V^N * K_alpha)(z) ^ w, by truncated Fourier
/// summation over 0 < max_j |k_j| <= band:
///   G(z) = (1/vol) sum_k e^{ik.z} V_hat(k) i m(k) [k]_x.
/// The imaginary residue is dropped after checking it is negligible.
/// Throws std::invalid_argument when band exceeds the mollifier grid.
Mat3 mollified_kernel_matrix(const Vec3& z, const MollifierSpectrum& v_hat, const AlphaKernel& kernel,
                             int band);

/// Cross-product matrix [k]_x with [k]_x w = k x w.
inline Mat3 cross_matrix(const Vec3& k) {
  Mat3 m;
  m << 0.0, -k(2), k(1), k(2), 0.0, -k(0), -k(1), k(0), 0.0;
  return m;
}

}  // namespace nsalpha
