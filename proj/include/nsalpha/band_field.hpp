#pragma once

#include "nsalpha/grid.hpp"
#include "nsalpha/spectral.hpp"

#include <span>
#include <vector>

namespace nsalpha {

/// Band-limited real R^3 field stored as its half-space Fourier modes, for
/// exact evaluation (no interpolation) at arbitrary points of the torus.
///
/// Modes are grouped by (k1, k2); every group holds a contiguous run of k3.
/// Coefficients already carry the Hermitian weight (2, or 1 for k = 0), so
///   f(x) = sum_groups sum_k3 Re(coeff * exp(i k.x)).
struct BandField {
  struct Group {
    int k1;
    int k2;
    int k3_begin;
    int k3_end;  // inclusive
    int offset;  // column of the first coefficient of the run
  };

  int band = 0;
  std::vector<Group> groups;
  Eigen::Matrix<Complex, 3, Eigen::Dynamic> coeffs;

  [[nodiscard]] int mode_count() const { return static_cast<int>(coeffs.cols()); }
};

/// Restricts F to max_j |k_j| <= band. Requires band < M/2.
BandField restrict_to_band(const SpectralField& F, int band);

/// (1 - theta) a + theta b; both must share the same band.
BandField lerp(const BandField& a, const BandField& b, double theta);

/// Values (and, when `gradients` is non-empty, the gradient d_j f_i in entry
/// (i, j)) at each point. Points need not be wrapped. Parallel over points.
void evaluate(const BandField& field, std::span<const Vec3> points, std::span<Vec3> values,
              std::span<Mat3> gradients);

/// Fourier sums c_k = sum_p q_p exp(-i k.x_p) for every max_j |k_j| <= band
/// (band < M/2), stored at the grid's wavevector layout; all other
/// coefficients are zero. Each mode is summed over the points in the given
/// order, so the result does not depend on the thread count.
SpectralField sum_modes(const GridSpec& grid, int band, std::span<const Vec3> points, std::span<const Vec3> charges);

/// Convenience single-point evaluation.
Vec3 evaluate_at(const BandField& field, const Vec3& x);

}  // namespace nsalpha
