#include "mshf/scale.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mshf/error.hpp"

namespace mshf {
namespace {

double poly(const double* c, int n, double x) {
  double acc = c[n - 1];
  for (int i = n - 2; i >= 0; --i) acc = acc * x + c[i];
  return acc;
}

// Largest quantile argument used; Phi^-1(1 - 1e-12) ~ 7.03.
constexpr double kMaxQuantileArg = 1.0 - 1e-12;

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "normal_quantile needs p in (0, 1)");
  }
  static constexpr double a[] = {
      3.3871328727963666080e0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
      1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
      3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[] = {
      1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2,
      5.3941960214247511077e+3, 2.1213794301586595867e+4, 3.9307895800092710610e+4,
      2.8729085735721942674e+4, 5.2264952788528545610e+3};
  static constexpr double c[] = {
      1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {
      1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double e[] = {
      6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {
      1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, 8, r) / poly(b, 8, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = poly(c, 8, r) / poly(d, 8, r);
  } else {
    r -= 5.0;
    val = poly(e, 8, r) / poly(f, 8, r);
  }
  return q < 0.0 ? -val : val;
}

std::size_t resolve_k(const ScaleConfig& cfg, std::size_t n) {
  if (n == 0) return 0;
  std::size_t k;
  if (cfg.k_absolute) {
    k = *cfg.k_absolute;
  } else {
    if (!(cfg.k_fraction > 0.0 && cfg.k_fraction <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "k_fraction must lie in (0, 1]");
    }
    k = static_cast<std::size_t>(std::llround(cfg.k_fraction * static_cast<double>(n)));
  }
  return std::clamp<std::size_t>(k, 1, n);
}

ScaleEstimate ikose_scale(std::span<const double> abs_residuals, const ScaleConfig& cfg) {
  const std::size_t n = abs_residuals.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "ikose_scale needs residuals");
  if (cfg.max_iterations < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_iterations must be positive");
  }
  for (double r : abs_residuals) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw Error(ErrorCode::kInvalidArgument, "residuals must be finite and nonnegative");
    }
  }
  const std::size_t k = resolve_k(cfg, n);

  std::vector<double> sorted(abs_residuals.begin(), abs_residuals.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   sorted.end());
  const double r_k = sorted[k - 1];

  ScaleEstimate est;
  if (r_k == 0.0) {
    est.scale = kScaleFloor;
    est.status = ScaleStatus::kZeroScale;
    est.inlier_count = static_cast<std::size_t>(
        std::count_if(abs_residuals.begin(), abs_residuals.end(),
                      [](double r) { return r <= kInlierBand * kScaleFloor; }));
    return est;
  }

  std::size_t inliers = n;
  double previous = 0.0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const double kappa = static_cast<double>(k) / static_cast<double>(inliers);
    const double arg = std::min(0.5 * (1.0 + kappa), kMaxQuantileArg);
    const double s = r_k / normal_quantile(arg);
    est.scale = s;
    est.iterations = it;
    if (it > 1 && std::abs(s - previous) <= cfg.convergence_tol * previous) break;
    const double band = kInlierBand * s;
    const auto count = static_cast<std::size_t>(std::count_if(
        abs_residuals.begin(), abs_residuals.end(), [band](double r) { return r <= band; }));
    if (count < k) {
      // The band no longer holds K residuals, so this iterate is invalid.
      // Fall back to the last iterate whose band did; on the first
      // iteration, to the smallest scale whose band holds K residuals.
      est.status = ScaleStatus::kDiverged;
      est.scale = it > 1 ? previous : r_k / kInlierBand;
      est.inlier_count = it > 1 ? inliers : static_cast<std::size_t>(std::count_if(
                                                 abs_residuals.begin(), abs_residuals.end(),
                                                 [&](double r) { return r <= r_k; }));
      return est;
    }
    inliers = count;
    previous = s;
  }
  est.inlier_count = inliers;
  return est;
}

}  // namespace mshf
