#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsalpha {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec3i = Eigen::Vector3i;
using Vec3c = Eigen::Matrix<Complex, 3, 1>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
/// Volume of the periodic box [0, 2pi)^3.
inline constexpr double kTorusVolume = kTwoPi * kTwoPi * kTwoPi;

/// Uniform periodic grid on [0, 2pi)^3 with M nodes per axis.
///
/// Node (ix, iy, iz) sits at (2pi/M)(ix, iy, iz) and has flat index
/// ix + M (iy + M iz), so x varies fastest. The same flat index addresses
/// the Fourier coefficient of wavevector (k(ix), k(iy), k(iz)).
struct GridSpec {
  int modes_per_axis = 32;
  double dealias_fraction = 2.0 / 3.0;

  static constexpr double domain_length = kTwoPi;

  [[nodiscard]] int size() const { return modes_per_axis * modes_per_axis * modes_per_axis; }
  [[nodiscard]] double spacing() const { return domain_length / modes_per_axis; }
  [[nodiscard]] double cell_volume() const {
    const double h = spacing();
    return h * h * h;
  }

  /// Largest |k_j| kept by dealias().
  [[nodiscard]] int dealias_band() const {
    return static_cast<int>(std::floor(dealias_fraction * modes_per_axis / 2 + 1e-9));
  }

  /// Signed wavenumber of an FFT index, in (-M/2, M/2].
  [[nodiscard]] int wavenumber(int index) const {
    return index <= modes_per_axis / 2 ? index : index - modes_per_axis;
  }

  /// FFT index of a signed wavenumber (|k| <= M/2).
  [[nodiscard]] int index_of(int k) const { return k >= 0 ? k : k + modes_per_axis; }

  [[nodiscard]] Vec3i wavevector(int flat) const {
    const int m = modes_per_axis;
    return {wavenumber(flat % m), wavenumber((flat / m) % m), wavenumber(flat / (m * m))};
  }

  [[nodiscard]] int flat_index(int ix, int iy, int iz) const {
    return ix + modes_per_axis * (iy + modes_per_axis * iz);
  }

  [[nodiscard]] Vec3 node(int flat) const {
    const int m = modes_per_axis;
    const double h = spacing();
    return {h * (flat % m), h * ((flat / m) % m), h * (flat / (m * m))};
  }

  bool operator==(const GridSpec&) const = default;
};

/// Throws std::invalid_argument unless M is even, M >= 4 and the dealias
/// fraction lies in (0, 1].
inline void validate(const GridSpec& grid) {
  if (grid.modes_per_axis < 4 || grid.modes_per_axis % 2 != 0) {
    throw std::invalid_argument("grid: modes_per_axis must be even and >= 4, got " +
                                std::to_string(grid.modes_per_axis));
  }
  if (!(grid.dealias_fraction > 0.0 && grid.dealias_fraction <= 1.0)) {
    throw std::invalid_argument("grid: dealias_fraction must lie in (0, 1]");
  }
}

/// GridSpec::wavevector for every flat index of an M^3 grid, built once per M.
const std::vector<Vec3i>& wavevector_table(int modes_per_axis);

/// Values on a grid, one column per node (physical) or per wavevector
/// (spectral), `Components` rows per column.
template <typename Scalar, int Components>
struct GridData {
  using Scalar_t = Scalar;
  using Storage = Eigen::Matrix<Scalar, Components, Eigen::Dynamic>;
  static constexpr int components = Components;

  GridSpec grid;
  Storage values;

  GridData() = default;
  explicit GridData(const GridSpec& g) : grid(g), values(Storage::Zero(Components, g.size())) {}
  GridData(const GridSpec& g, Storage v) : grid(g), values(std::move(v)) {}

  [[nodiscard]] int size() const { return static_cast<int>(values.cols()); }
};

/// Real R^3-valued samples at the M^3 grid nodes.
using PhysicalField = GridData<double, 3>;
/// Fourier coefficients of a real R^3-valued field, c_0 equal to the mean.
using SpectralField = GridData<Complex, 3>;
/// 3x3 tensor samples, entry (i, j) stored in row 3 i + j.
using TensorField = GridData<double, 9>;
using SpectralTensorField = GridData<Complex, 9>;

/// Entry (i, j) of a tensor column as a matrix.
template <typename Derived>
Mat3 as_matrix(const Eigen::MatrixBase<Derived>& column) {
  Mat3 out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = column(3 * i + j);
  return out;
}

/// Wraps a coordinate into [0, 2pi).
inline double wrap_coordinate(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0) y += kTwoPi;
  if (y >= kTwoPi) y -= kTwoPi;
  return y;
}

inline Vec3 wrap_position(const Vec3& x) {
  return {wrap_coordinate(x.x()), wrap_coordinate(x.y()), wrap_coordinate(x.z())};
}

/// Minimum-image displacement: each component mapped into [-pi, pi).
inline Vec3 minimum_image(const Vec3& d) {
  Vec3 out;
  for (int j = 0; j < 3; ++j) {
    out(j) = d(j) - kTwoPi * std::floor(d(j) / kTwoPi + 0.5);
  }
  return out;
}

}  // namespace nsalpha
