#pragma once

#include "nsalpha/grid.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nsalpha {

/// Thrown when a grid is too coarse for the mollifier support.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Radius of the unscaled bump's support.
inline constexpr double kBumpRadius = std::numbers::pi / 2;

/// exp(-1 / (pi^2 - 4 r^2)) for r < pi/2, else 0.
double bump_profile(double r);

/// c such that the radial bump c * bump_profile(|x|) has unit mass on R^3.
/// Computed once by composite Gauss-Legendre quadrature and checked against
/// a doubled panel count.
double normalization_constant();

/// Normalized bump V at a torus point (geodesic distance to the origin).
double bump_eval(const Vec3& x);

/// V^N(x) = N^{3 beta} V(N^beta x) for a given particle count N.
struct MollifierSpec {
  double beta = 0.25;
  std::int64_t particle_count = 1;

  [[nodiscard]] double width_scale() const {
    return std::pow(static_cast<double>(particle_count), beta);
  }
  [[nodiscard]] double support_radius() const { return kBumpRadius / width_scale(); }
  [[nodiscard]] double peak() const;
};

/// Throws std::invalid_argument unless beta > 0 and N >= 1.
void validate(const MollifierSpec& spec);

double scaled_eval(const MollifierSpec& spec, const Vec3& x);

/// Integral of V^N over its support by tensor-product composite
/// Gauss-Legendre quadrature in Cartesian coordinates, with `panels` panels
/// per axis. Independent of the radial quadrature behind the constant.
double mollifier_mass(const MollifierSpec& spec, int panels);
Vec3 scaled_gradient(const MollifierSpec& spec, const Vec3& x);

/// int V^N(x) e^{-ik.x} dx for |k| = k, by radial quadrature of the
/// three-dimensional Fourier transform of a radial function.
double mollifier_transform(const MollifierSpec& spec, double k);

/// Convolution multipliers int V^N(x) e^{-ik.x} dx per grid wavevector.
/// values[n] belongs to grid.wavevector(n).
struct MollifierSpectrum {
  GridSpec grid;
  std::vector<double> values;

  [[nodiscard]] double at(const Vec3i& k) const {
    return values[grid.flat_index(grid.index_of(k(0)), grid.index_of(k(1)), grid.index_of(k(2)))];
  }
};

/// Throws ResolutionError unless the support diameter spans >= 4 grid spacings.
void check_resolution(const MollifierSpec& spec, const GridSpec& grid);

/// Exact multipliers (mollifier_transform) for every grid wavevector; cached
/// per (beta, N, M). Throws ResolutionError like check_resolution.
MollifierSpectrum spectral_coefficients(const MollifierSpec& spec, const GridSpec& grid);

/// Admissibility of (p, alpha, beta): p > 6, 6/p < alpha < 1,
/// 0 < beta < 1 / (3 + alpha - 6/p). Slacks are positive when satisfied.
struct BetaBound {
  bool ok = false;
  double beta_upper = 0.0;
  double p_slack = 0.0;            // p - 6
  double alpha_lower_slack = 0.0;  // alpha - 6/p
  double alpha_upper_slack = 0.0;  // 1 - alpha
  double beta_lower_slack = 0.0;   // beta
  double beta_upper_slack = 0.0;   // beta_upper - beta
};

BetaBound beta_bound_check(double p, double alpha, double beta);

}  // namespace nsalpha
