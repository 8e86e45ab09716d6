#pragma once

#include "nsalpha/grid.hpp"

#include <span>

namespace nsalpha {

using ScalarField = GridData<double, 1>;
using SpectralScalarField = GridData<Complex, 1>;

/// Forward FFT normalized so that the k = 0 coefficient is the spatial mean.
template <int C>
GridData<Complex, C> forward_transform(const GridData<double, C>& f);

/// Inverse of forward_transform; the imaginary residue is discarded.
template <int C>
GridData<double, C> inverse_transform(const GridData<Complex, C>& F);

/// Multiplies every coefficient by i k_axis (axis in 0..2). The Nyquist
/// plane of that axis is zeroed so the result stays Hermitian.
template <int C>
GridData<Complex, C> spectral_derivative(const GridData<Complex, C>& F, int axis);

/// Spectral gradient, entry (i, j) = d_j F_i.
SpectralTensorField gradient_spectral(const SpectralField& F);

/// Physical-space gradient tensor, entry (i, j) = d_j F_i.
TensorField gradient_tensor(const SpectralField& F);

/// Zeroes every coefficient with max_j |k_j| > dealias_fraction * M / 2.
template <int C>
GridData<Complex, C> dealias(const GridData<Complex, C>& F);

/// Keeps only coefficients with max_j |k_j| <= band.
template <int C>
GridData<Complex, C> truncate_to_band(const GridData<Complex, C>& F, int band);

/// Laplacian multiplier -|k|^2.
SpectralField laplacian(const SpectralField& F);

SpectralScalarField divergence(const SpectralField& F);

/// H^s_2 norm: sqrt(vol * sum_k (1 + |k|^2)^s |c_k|^2). s = 0 is the L2 norm.
double sobolev_norm(const SpectralField& F, double s);

/// Leray projection, multiplier I - k k^T / |k|^2 (k = 0 untouched).
SpectralField project_divergence_free(const SpectralField& F);

/// Copies coefficients onto another grid: zero padding when refining,
/// truncation to the common band when coarsening. Nyquist planes dropped.
SpectralField resample(const SpectralField& F, const GridSpec& target);

/// max_k |c_k - conj(c_{-k})| over all wavevectors strictly inside the band.
double hermitian_defect(const SpectralField& F);

/// max over nodes of the Euclidean norm.
double sup_norm(const PhysicalField& f);

/// Grid quadrature of |f|^2 over the torus.
double l2_norm_squared_quadrature(const PhysicalField& f);

/// Fixed-order pairwise summation.
double pairwise_sum(std::span<const double> values);

/// Samples an analytic field on the grid nodes.
template <typename F>
PhysicalField sample_field(const GridSpec& grid, F&& fn) {
  PhysicalField out(grid);
  for (int n = 0; n < grid.size(); ++n) out.values.col(n) = fn(grid.node(n));
  return out;
}

}  // namespace nsalpha
