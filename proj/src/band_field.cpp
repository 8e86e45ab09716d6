#include "nsalpha/band_field.hpp"

#include "nsalpha/parallel.hpp"

#include <array>
#include <cmath>

namespace nsalpha {

BandField restrict_to_band(const SpectralField& F, int band) {
  const GridSpec& g = F.grid;
  if (band < 0 || band >= g.modes_per_axis / 2) {
    throw std::invalid_argument("restrict_to_band: band must lie in [0, M/2)");
  }
  BandField out;
  out.band = band;
  std::vector<Vec3c> columns;
  for (int k1 = -band; k1 <= band; ++k1) {
    for (int k2 = -band; k2 <= band; ++k2) {
      // Half space: k3 > 0, or k3 = 0 with (k2, k1) lexicographically >= 0.
      const bool take_zero = k2 > 0 || (k2 == 0 && k1 >= 0);
      const int begin = take_zero ? 0 : 1;
      if (begin > band) continue;
      out.groups.push_back({k1, k2, begin, band, static_cast<int>(columns.size())});
      for (int k3 = begin; k3 <= band; ++k3) {
        const int n = g.flat_index(g.index_of(k1), g.index_of(k2), g.index_of(k3));
        const double weight = (k1 == 0 && k2 == 0 && k3 == 0) ? 1.0 : 2.0;
        columns.push_back(weight * F.values.col(n));
      }
    }
  }
  out.coeffs.resize(3, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) out.coeffs.col(static_cast<Eigen::Index>(c)) = columns[c];
  return out;
}

BandField lerp(const BandField& a, const BandField& b, double theta) {
  if (a.band != b.band) throw std::invalid_argument("lerp: band mismatch");
  BandField out = a;
  out.coeffs = (1.0 - theta) * a.coeffs + theta * b.coeffs;
  return out;
}

namespace {

constexpr std::size_t kBlock = 256;

template <bool WithGradient>
void evaluate_block(const BandField& field, const Vec3* points, std::size_t count, Vec3* values,
                    Mat3* gradients) {
  const int b = field.band;
  const std::size_t stride = kBlock;
  // Phases exp(i k x_a) for k = 0..b, per axis, laid out [k][point].
  std::array<std::vector<double>, 3> cs, sn;
  for (int a = 0; a < 3; ++a) {
    cs[a].assign((b + 1) * stride, 0.0);
    sn[a].assign((b + 1) * stride, 0.0);
    for (int k = 0; k <= b; ++k) {
      for (std::size_t p = 0; p < count; ++p) {
        const double phase = k * wrap_coordinate(points[p](a));
        cs[a][k * stride + p] = std::cos(phase);
        sn[a][k * stride + p] = std::sin(phase);
      }
    }
  }

  std::array<std::array<double, kBlock>, 3> u{};
  std::array<std::array<double, kBlock>, 9> grad{};
  std::array<double, kBlock> p12r{}, p12i{};
  std::array<std::array<double, kBlock>, 3> sum_im{}, sum_k3im{};

  for (const auto& group : field.groups) {
    const double* c1 = &cs[0][std::abs(group.k1) * stride];
    const double* s1 = &sn[0][std::abs(group.k1) * stride];
    const double* c2 = &cs[1][std::abs(group.k2) * stride];
    const double* s2 = &sn[1][std::abs(group.k2) * stride];
    const double sign1 = group.k1 < 0 ? -1.0 : 1.0;
    const double sign2 = group.k2 < 0 ? -1.0 : 1.0;
    for (std::size_t p = 0; p < count; ++p) {
      const double ar = c1[p], ai = sign1 * s1[p];
      const double br = c2[p], bi = sign2 * s2[p];
      p12r[p] = ar * br - ai * bi;
      p12i[p] = ar * bi + ai * br;
    }
    if constexpr (WithGradient) {
      for (int i = 0; i < 3; ++i) {
        sum_im[i].fill(0.0);
        sum_k3im[i].fill(0.0);
      }
    }
    for (int k3 = group.k3_begin; k3 <= group.k3_end; ++k3) {
      const Vec3c c = field.coeffs.col(group.offset + (k3 - group.k3_begin));
      const double* c3 = &cs[2][k3 * stride];
      const double* s3 = &sn[2][k3 * stride];
      const double k3d = k3;
      const double cr0 = c(0).real(), ci0 = c(0).imag();
      const double cr1 = c(1).real(), ci1 = c(1).imag();
      const double cr2 = c(2).real(), ci2 = c(2).imag();
      double* __restrict u0 = u[0].data();
      double* __restrict u1 = u[1].data();
      double* __restrict u2 = u[2].data();
      double* __restrict m0 = sum_im[0].data();
      double* __restrict m1 = sum_im[1].data();
      double* __restrict m2 = sum_im[2].data();
      double* __restrict q0 = sum_k3im[0].data();
      double* __restrict q1 = sum_k3im[1].data();
      double* __restrict q2 = sum_k3im[2].data();
      const double* __restrict pr12 = p12r.data();
      const double* __restrict pi12 = p12i.data();
      for (std::size_t p = 0; p < count; ++p) {
        const double pr = pr12[p] * c3[p] - pi12[p] * s3[p];
        const double pi = pr12[p] * s3[p] + pi12[p] * c3[p];
        u0[p] += cr0 * pr - ci0 * pi;
        u1[p] += cr1 * pr - ci1 * pi;
        u2[p] += cr2 * pr - ci2 * pi;
        if constexpr (WithGradient) {
          const double im0 = cr0 * pi + ci0 * pr;
          const double im1 = cr1 * pi + ci1 * pr;
          const double im2 = cr2 * pi + ci2 * pr;
          m0[p] += im0;
          m1[p] += im1;
          m2[p] += im2;
          q0[p] += k3d * im0;
          q1[p] += k3d * im1;
          q2[p] += k3d * im2;
        }
      }
    }
    if constexpr (WithGradient) {
      // d_j Re(c e^{ikx}) = -k_j Im(c e^{ikx})
      const double k1d = group.k1, k2d = group.k2;
      for (int i = 0; i < 3; ++i) {
        double* __restrict g0 = grad[3 * i + 0].data();
        double* __restrict g1 = grad[3 * i + 1].data();
        double* __restrict g2 = grad[3 * i + 2].data();
        const double* __restrict m = sum_im[i].data();
        const double* __restrict q = sum_k3im[i].data();
        for (std::size_t p = 0; p < count; ++p) {
          g0[p] -= k1d * m[p];
          g1[p] -= k2d * m[p];
          g2[p] -= q[p];
        }
      }
    }
  }

  for (std::size_t p = 0; p < count; ++p) {
    values[p] = Vec3(u[0][p], u[1][p], u[2][p]);
    if constexpr (WithGradient) {
      Mat3 m;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = grad[3 * i + j][p];
      gradients[p] = m;
    }
  }
}

}  // namespace

void evaluate(const BandField& field, std::span<const Vec3> points, std::span<Vec3> values,
              std::span<Mat3> gradients) {
  if (values.size() != points.size()) throw std::invalid_argument("evaluate: values size mismatch");
  const bool with_gradient = !gradients.empty();
  if (with_gradient && gradients.size() != points.size()) {
    throw std::invalid_argument("evaluate: gradients size mismatch");
  }
  const std::size_t blocks = (points.size() + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t first, std::size_t last) {
    for (std::size_t blk = first; blk < last; ++blk) {
      const std::size_t begin = blk * kBlock;
      const std::size_t count = std::min(kBlock, points.size() - begin);
      if (with_gradient) {
        evaluate_block<true>(field, points.data() + begin, count, values.data() + begin,
                             gradients.data() + begin);
      } else {
        evaluate_block<false>(field, points.data() + begin, count, values.data() + begin, nullptr);
      }
    }
  });
}

SpectralField sum_modes(const GridSpec& grid, int band, std::span<const Vec3> points, std::span<const Vec3> charges) {
  validate(grid);
  if (band < 0 || band >= grid.modes_per_axis / 2) throw std::invalid_argument("sum_modes: band must lie in [0, M/2)");
  if (points.size() != charges.size()) throw std::invalid_argument("sum_modes: one charge per point");
  const std::size_t n = points.size();
  const std::size_t stride = n;

  // cos / sin (k x_a) for k = 0..band, laid out [axis][k][point].
  std::array<std::vector<double>, 3> cs, sn;
  for (int a = 0; a < 3; ++a) {
    cs[a].resize((band + 1) * stride);
    sn[a].resize((band + 1) * stride);
  }
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (int a = 0; a < 3; ++a)
      for (int k = 0; k <= band; ++k)
        for (std::size_t p = begin; p < end; ++p) {
          const double phase = k * wrap_coordinate(points[p](a));
          cs[a][k * stride + p] = std::cos(phase);
          sn[a][k * stride + p] = std::sin(phase);
        }
  });
  std::array<std::vector<double>, 3> q;
  for (int c = 0; c < 3; ++c) {
    q[c].resize(n);
    for (std::size_t p = 0; p < n; ++p) q[c][p] = charges[p](c);
  }

  struct Row {
    int k1, k2, k3_begin;
  };
  std::vector<Row> rows;
  for (int k1 = -band; k1 <= band; ++k1)
    for (int k2 = -band; k2 <= band; ++k2) {
      const int begin = (k2 > 0 || (k2 == 0 && k1 >= 0)) ? 0 : 1;
      if (begin <= band) rows.push_back({k1, k2, begin});
    }

  SpectralField out(grid);
  constexpr std::size_t kLanes = 8;
  parallel_for(rows.size(), [&](std::size_t first, std::size_t last) {
    std::vector<double> pr(n), pi(n);
    for (std::size_t r = first; r < last; ++r) {
      const Row& row = rows[r];
      const double* c1 = &cs[0][std::abs(row.k1) * stride];
      const double* s1 = &sn[0][std::abs(row.k1) * stride];
      const double* c2 = &cs[1][std::abs(row.k2) * stride];
      const double* s2 = &sn[1][std::abs(row.k2) * stride];
      const double sign1 = row.k1 < 0 ? -1.0 : 1.0;
      const double sign2 = row.k2 < 0 ? -1.0 : 1.0;
      for (std::size_t p = 0; p < n; ++p) {
        const double ai = sign1 * s1[p], bi = sign2 * s2[p];
        pr[p] = c1[p] * c2[p] - ai * bi;
        pi[p] = c1[p] * bi + ai * c2[p];
      }
      for (int k3 = row.k3_begin; k3 <= band; ++k3) {
        const double* __restrict c3 = &cs[2][k3 * stride];
        const double* __restrict s3 = &sn[2][k3 * stride];
        // Fixed lane partial sums keep the reduction order independent of
        // the compiler's vectorization.
        double acc[6][kLanes] = {};
        const std::size_t full = n - n % kLanes;
        auto accumulate = [&](std::size_t p, std::size_t lane) {
          const double er = pr[p] * c3[p] - pi[p] * s3[p];
          const double ei = pr[p] * s3[p] + pi[p] * c3[p];
          for (int c = 0; c < 3; ++c) {
            acc[2 * c][lane] += q[c][p] * er;
            acc[2 * c + 1][lane] += q[c][p] * ei;
          }
        };
        for (std::size_t p = 0; p < full; p += kLanes)
          for (std::size_t l = 0; l < kLanes; ++l) accumulate(p + l, l);
        for (std::size_t p = full; p < n; ++p) accumulate(p, p - full);
        Vec3c sum;
        for (int c = 0; c < 3; ++c) {
          double re = 0.0, im = 0.0;
          for (std::size_t l = 0; l < kLanes; ++l) {
            re += acc[2 * c][l];
            im += acc[2 * c + 1][l];
          }
          sum(c) = Complex(re, im);
        }
        // sum holds sum_p q_p e^{+ik.x_p}; the requested coefficient is its conjugate.
        const int plus = grid.flat_index(grid.index_of(row.k1), grid.index_of(row.k2), grid.index_of(k3));
        const int minus = grid.flat_index(grid.index_of(-row.k1), grid.index_of(-row.k2), grid.index_of(-k3));
        out.values.col(plus) = sum.conjugate();
        out.values.col(minus) = sum;
      }
    }
  });
  // k = 0 was written twice through its own partner; make it exactly real.
  out.values.col(0) = out.values.col(0).real().cast<Complex>();
  return out;
}

Vec3 evaluate_at(const BandField& field, const Vec3& x) {
  Vec3 value;
  evaluate(field, std::span<const Vec3>(&x, 1), std::span<Vec3>(&value, 1), {});
  return value;
}

}  // namespace nsalpha
