#include "nsalpha/spectral.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace nsalpha {

namespace {

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  fftw_plan get(int m, int howmany, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(m, howmany, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t count = static_cast<std::size_t>(m) * m * m * howmany;
    auto* in = fftw_alloc_complex(count);
    auto* out = fftw_alloc_complex(count);
    const int dims[3] = {m, m, m};
    const int dist = m * m * m;
    fftw_plan plan =
        fftw_plan_many_dft(3, dims, howmany, in, nullptr, 1, dist, out, nullptr, 1, dist, sign, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plans() {
  static PlanCache cache;
  return cache;
}

// Component-contiguous layout: component c occupies [c m^3, (c + 1) m^3).
template <int C>
using Columns = Eigen::Matrix<Complex, Eigen::Dynamic, C>;

void execute(int m, int howmany, int sign, const Complex* in, Complex* out) {
  fftw_plan plan = plans().get(m, howmany, sign);
  // Plans assume SIMD-aligned arrays; Eigen heap storage always is.
  if (fftw_alignment_of(reinterpret_cast<double*>(const_cast<Complex*>(in))) != 0 ||
      fftw_alignment_of(reinterpret_cast<double*>(out)) != 0) {
    throw std::logic_error("fft: misaligned buffer");
  }
  // fftw_execute_dft takes non-const input but does not modify it out of place.
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

const std::vector<Vec3i>& wavevector_table(int modes_per_axis) {
  static std::mutex mutex;
  static std::map<int, std::vector<Vec3i>> tables;
  std::lock_guard lock(mutex);
  auto& table = tables[modes_per_axis];
  if (table.empty()) {
    const GridSpec g{modes_per_axis};
    table.resize(g.size());
    for (int n = 0; n < g.size(); ++n) table[n] = g.wavevector(n);
  }
  return table;
}

template <int C>
GridData<Complex, C> forward_transform(const GridData<double, C>& f) {
  validate(f.grid);
  const Columns<C> in = f.values.transpose().template cast<Complex>();
  Columns<C> buffer(f.grid.size(), C);
  execute(f.grid.modes_per_axis, C, FFTW_FORWARD, in.data(), buffer.data());
  return GridData<Complex, C>(f.grid, buffer.transpose() / static_cast<double>(f.grid.size()));
}

template <int C>
GridData<double, C> inverse_transform(const GridData<Complex, C>& F) {
  validate(F.grid);
  const Columns<C> in = F.values.transpose();
  Columns<C> buffer(F.grid.size(), C);
  execute(F.grid.modes_per_axis, C, FFTW_BACKWARD, in.data(), buffer.data());
  return GridData<double, C>(F.grid, buffer.real().transpose());
}

template <int C>
GridData<Complex, C> spectral_derivative(const GridData<Complex, C>& F, int axis) {
  if (axis < 0 || axis > 2) throw std::invalid_argument("spectral_derivative: axis must be 0, 1 or 2");
  const GridSpec& g = F.grid;
  const int nyquist = g.modes_per_axis / 2;
  GridData<Complex, C> out(g);
  const auto& ks = wavevector_table(g.modes_per_axis);
  for (int n = 0; n < g.size(); ++n) {
    const int k = ks[n](axis);
    if (k == nyquist) continue;
    out.values.col(n) = F.values.col(n) * Complex(0.0, k);
  }
  return out;
}

SpectralTensorField gradient_spectral(const SpectralField& F) {
  const GridSpec& g = F.grid;
  const int nyquist = g.modes_per_axis / 2;
  SpectralTensorField out(g);
  const auto& ks = wavevector_table(g.modes_per_axis);
  for (int n = 0; n < g.size(); ++n) {
    const Vec3i k = ks[n];
    for (int j = 0; j < 3; ++j) {
      if (k(j) == nyquist) continue;
      const Complex ik(0.0, k(j));
      for (int i = 0; i < 3; ++i) out.values(3 * i + j, n) = ik * F.values(i, n);
    }
  }
  return out;
}

TensorField gradient_tensor(const SpectralField& F) { return inverse_transform(gradient_spectral(F)); }

template <int C>
GridData<Complex, C> truncate_to_band(const GridData<Complex, C>& F, int band) {
  GridData<Complex, C> out = F;
  const auto& ks = wavevector_table(F.grid.modes_per_axis);
  for (int n = 0; n < F.grid.size(); ++n) {
    if (ks[n].cwiseAbs().maxCoeff() > band) out.values.col(n).setZero();
  }
  return out;
}

template <int C>
GridData<Complex, C> dealias(const GridData<Complex, C>& F) {
  return truncate_to_band(F, F.grid.dealias_band());
}

SpectralField laplacian(const SpectralField& F) {
  SpectralField out = F;
  const auto& ks = wavevector_table(F.grid.modes_per_axis);
  for (int n = 0; n < F.grid.size(); ++n) {
    out.values.col(n) *= -static_cast<double>(ks[n].squaredNorm());
  }
  return out;
}

SpectralScalarField divergence(const SpectralField& F) {
  const GridSpec& g = F.grid;
  const int nyquist = g.modes_per_axis / 2;
  SpectralScalarField out(g);
  const auto& ks = wavevector_table(g.modes_per_axis);
  for (int n = 0; n < g.size(); ++n) {
    const Vec3i k = ks[n];
    Complex acc = 0.0;
    for (int j = 0; j < 3; ++j) {
      if (k(j) != nyquist) acc += Complex(0.0, k(j)) * F.values(j, n);
    }
    out.values(0, n) = acc;
  }
  return out;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double sobolev_norm(const SpectralField& F, double s) {
  std::vector<double> terms(F.grid.size());
  const auto& ks = wavevector_table(F.grid.modes_per_axis);
  for (int n = 0; n < F.grid.size(); ++n) {
    const double k2 = ks[n].squaredNorm();
    terms[n] = std::pow(1.0 + k2, s) * F.values.col(n).squaredNorm();
  }
  return std::sqrt(kTorusVolume * pairwise_sum(terms));
}

SpectralField project_divergence_free(const SpectralField& F) {
  SpectralField out = F;
  const auto& ks = wavevector_table(F.grid.modes_per_axis);
  for (int n = 0; n < F.grid.size(); ++n) {
    const Vec3 k = ks[n].cast<double>();
    const double k2 = k.squaredNorm();
    if (k2 == 0.0) continue;
    const Vec3c c = F.values.col(n);
    const Complex kc = k(0) * c(0) + k(1) * c(1) + k(2) * c(2);
    out.values.col(n) = c - k.cast<Complex>() * (kc / k2);
  }
  return out;
}

SpectralField resample(const SpectralField& F, const GridSpec& target) {
  validate(target);
  SpectralField out(target);
  const int src_nyquist = F.grid.modes_per_axis / 2;
  const int dst_nyquist = target.modes_per_axis / 2;
  const int limit = std::min(src_nyquist, dst_nyquist);
  const auto& ks = wavevector_table(target.modes_per_axis);
  for (int n = 0; n < target.size(); ++n) {
    const Vec3i k = ks[n];
    if (k.cwiseAbs().maxCoeff() >= limit) continue;
    const int src = F.grid.flat_index(F.grid.index_of(k(0)), F.grid.index_of(k(1)), F.grid.index_of(k(2)));
    out.values.col(n) = F.values.col(src);
  }
  return out;
}

double hermitian_defect(const SpectralField& F) {
  const GridSpec& g = F.grid;
  const int nyquist = g.modes_per_axis / 2;
  double worst = 0.0;
  const auto& ks = wavevector_table(g.modes_per_axis);
  for (int n = 0; n < g.size(); ++n) {
    const Vec3i k = ks[n];
    if (k.cwiseAbs().maxCoeff() >= nyquist) continue;
    const int partner = g.flat_index(g.index_of(-k(0)), g.index_of(-k(1)), g.index_of(-k(2)));
    worst = std::max(worst, (F.values.col(n) - F.values.col(partner).conjugate()).norm());
  }
  return worst;
}

double sup_norm(const PhysicalField& f) {
  double worst = 0.0;
  for (int n = 0; n < f.size(); ++n) worst = std::max(worst, f.values.col(n).norm());
  return worst;
}

double l2_norm_squared_quadrature(const PhysicalField& f) {
  std::vector<double> terms(f.size());
  for (int n = 0; n < f.size(); ++n) terms[n] = f.values.col(n).squaredNorm();
  return pairwise_sum(terms) * f.grid.cell_volume();
}

#define NSALPHA_INSTANTIATE(C)                                                              \
  template GridData<Complex, C> forward_transform<C>(const GridData<double, C>&);           \
  template GridData<double, C> inverse_transform<C>(const GridData<Complex, C>&);           \
  template GridData<Complex, C> spectral_derivative<C>(const GridData<Complex, C>&, int);   \
  template GridData<Complex, C> dealias<C>(const GridData<Complex, C>&);                    \
  template GridData<Complex, C> truncate_to_band<C>(const GridData<Complex, C>&, int);

NSALPHA_INSTANTIATE(1)
NSALPHA_INSTANTIATE(3)
NSALPHA_INSTANTIATE(9)

#undef NSALPHA_INSTANTIATE

}  // namespace nsalpha
