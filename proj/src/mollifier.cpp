#include "nsalpha/mollifier.hpp"

#include "nsalpha/spectral.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <numbers>
#include <vector>

namespace nsalpha {

namespace {

constexpr double kPi = std::numbers::pi;

double radial_mass(int panels) {
  const double width = kBumpRadius / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    total += boost::math::quadrature::gauss<double, 20>::integrate(
        [](double r) { return 4.0 * kPi * r * r * bump_profile(r); }, p * width, (p + 1) * width);
  }
  return total;
}

struct RadialRule {
  std::vector<double> r;
  std::vector<double> f;  // 4 pi c r^2 V(r) times the quadrature weight
};

const RadialRule& radial_rule() {
  static const RadialRule rule = [] {
    using Rule = boost::math::quadrature::gauss<double, 20>;
    constexpr int kPanels = 128;
    const double width = kBumpRadius / kPanels;
    const double c = normalization_constant();
    RadialRule out;
    for (int p = 0; p < kPanels; ++p) {
      const double mid = (p + 0.5) * width;
      for (std::size_t i = 0; i < Rule::abscissa().size(); ++i) {
        const double a = Rule::abscissa()[i];
        const double w = 0.5 * width * Rule::weights()[i];
        for (double r : {mid - 0.5 * width * a, mid + 0.5 * width * a}) {
          out.r.push_back(r);
          out.f.push_back(4.0 * kPi * c * w * r * r * bump_profile(r));
          if (a == 0.0) break;
        }
      }
    }
    return out;
  }();
  return rule;
}

double compute_normalization() {
  const double coarse = radial_mass(64);
  const double fine = radial_mass(128);
  if (std::abs(coarse - fine) > 1e-13 * fine) {
    throw std::runtime_error("mollifier: normalization quadrature did not converge");
  }
  return 1.0 / fine;
}

}  // namespace

double bump_profile(double r) {
  const double gap = kPi * kPi - 4.0 * r * r;
  if (r >= kBumpRadius || gap <= 0.0) return 0.0;
  return std::exp(-1.0 / gap);
}

double normalization_constant() {
  static const double c = compute_normalization();
  return c;
}

double bump_eval(const Vec3& x) { return normalization_constant() * bump_profile(minimum_image(x).norm()); }

double MollifierSpec::peak() const {
  return std::pow(static_cast<double>(particle_count), 3.0 * beta) * normalization_constant() *
         bump_profile(0.0);
}

void validate(const MollifierSpec& spec) {
  if (!(spec.beta > 0.0)) throw std::invalid_argument("mollifier: beta must be > 0");
  if (spec.particle_count < 1) throw std::invalid_argument("mollifier: particle count must be >= 1");
}

double scaled_eval(const MollifierSpec& spec, const Vec3& x) {
  const double s = spec.width_scale();
  const double r = minimum_image(x).norm() * s;
  return s * s * s * normalization_constant() * bump_profile(r);
}

double mollifier_mass(const MollifierSpec& spec, int panels) {
  validate(spec);
  if (panels < 1) throw std::invalid_argument("mollifier_mass: panels must be >= 1");
  using Radial = boost::math::quadrature::gauss<double, 20>;
  using Polar = boost::math::quadrature::gauss<double, 10>;
  constexpr int kAzimuth = 16;
  const double radius = spec.support_radius();
  const double width = radius / panels;
  std::vector<double> shells;
  for (int p = 0; p < panels; ++p) {
    shells.push_back(Radial::integrate(
        [&](double r) {
          auto ring = [&](double mu) {
            const double rho = std::sqrt(1.0 - mu * mu);
            double sum = 0.0;
            for (int a = 0; a < kAzimuth; ++a) {
              const double phi = kTwoPi * a / kAzimuth;
              sum += scaled_eval(spec, r * Vec3(rho * std::cos(phi), rho * std::sin(phi), mu));
            }
            return sum * kTwoPi / kAzimuth;
          };
          // The rule stores non-negative abscissae only.
          double sphere = 0.0;
          for (std::size_t i = 0; i < Polar::abscissa().size(); ++i) {
            const double mu = Polar::abscissa()[i];
            sphere += Polar::weights()[i] * (mu == 0.0 ? ring(0.0) : ring(mu) + ring(-mu));
          }
          return r * r * sphere;
        },
        p * width, (p + 1) * width));
  }
  return pairwise_sum(shells);
}

Vec3 scaled_gradient(const MollifierSpec& spec, const Vec3& x) {
  const double s = spec.width_scale();
  const Vec3 d = minimum_image(x);
  const double r = d.norm() * s;
  const double gap = kPi * kPi - 4.0 * r * r;
  if (r >= kBumpRadius || gap <= 0.0) return Vec3::Zero();
  // V'(r) = -8 r / gap^2 V(r); chain rule gives s^4 V'(s|x|) x / |x|, and
  // r x / |x| = s x.
  const double v = normalization_constant() * std::exp(-1.0 / gap);
  return (s * s * s * s) * (-8.0 / (gap * gap)) * v * (s * d);
}

void check_resolution(const MollifierSpec& spec, const GridSpec& grid) {
  const double diameter = 2.0 * spec.support_radius();
  if (diameter < 4.0 * grid.spacing()) {
    throw ResolutionError("mollifier support diameter " + std::to_string(diameter) + " spans fewer than 4 grid spacings (h = " +
                          std::to_string(grid.spacing()) + ", M = " + std::to_string(grid.modes_per_axis) + ")");
  }
}

double mollifier_transform(const MollifierSpec& spec, double k) {
  validate(spec);
  const double q = k / spec.width_scale();
  const RadialRule& rule = radial_rule();
  double sum = 0.0;
  if (q == 0.0) {
    for (std::size_t j = 0; j < rule.r.size(); ++j) sum += rule.f[j];
  } else {
    for (std::size_t j = 0; j < rule.r.size(); ++j) sum += rule.f[j] * std::sin(q * rule.r[j]) / (q * rule.r[j]);
  }
  return sum;
}

MollifierSpectrum spectral_coefficients(const MollifierSpec& spec, const GridSpec& grid) {
  validate(spec);
  validate(grid);
  check_resolution(spec, grid);
  using Key = std::tuple<double, std::int64_t, int>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const MollifierSpectrum>> cache;
  const Key key{spec.beta, spec.particle_count, grid.modes_per_axis};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end() && it->second->grid == grid) return *it->second;
  }
  auto out = std::make_shared<MollifierSpectrum>(MollifierSpectrum{grid, std::vector<double>(grid.size())});
  std::map<int, double> by_norm;
  for (int n = 0; n < grid.size(); ++n) {
    const int k2 = grid.wavevector(n).squaredNorm();
    auto [it, fresh] = by_norm.try_emplace(k2, 0.0);
    if (fresh) it->second = mollifier_transform(spec, std::sqrt(static_cast<double>(k2)));
    out->values[n] = it->second;
  }
  std::lock_guard lock(mutex);
  if (cache.size() > 16) cache.clear();
  cache[key] = out;
  return *out;
}

BetaBound beta_bound_check(double p, double alpha, double beta) {
  BetaBound b;
  b.p_slack = p - 6.0;
  b.alpha_lower_slack = alpha - 6.0 / p;
  b.alpha_upper_slack = 1.0 - alpha;
  b.beta_upper = 1.0 / (3.0 + alpha - 6.0 / p);
  b.beta_lower_slack = beta;
  b.beta_upper_slack = b.beta_upper - beta;
  b.ok = b.p_slack > 0 && b.alpha_lower_slack > 0 && b.alpha_upper_slack > 0 && b.beta_lower_slack > 0 &&
         b.beta_upper_slack > 0;
  return b;
}

}  // namespace nsalpha
