#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace mshf {

// Inlier band multiplier: a residual r is an inlier of a hypothesis with
// scale s when r <= kInlierBand * s (about 98% of a Gaussian).
inline constexpr double kInlierBand = 2.5;

// Returned instead of a zero scale when the K-th residual is exactly zero.
inline constexpr double kScaleFloor = 1e-12;

struct ScaleConfig {
  double k_fraction = 0.10;
  std::optional<std::size_t> k_absolute;
  int max_iterations = 50;
  double convergence_tol = 1e-6;
};

// K = k_absolute if set, else round(k_fraction * n), clamped to [1, n].
std::size_t resolve_k(const ScaleConfig& cfg, std::size_t n);

enum class ScaleStatus {
  kOk,
  kZeroScale,  // K-th residual was zero; scale is kScaleFloor
  kDiverged,   // inlier count fell below K; scale is the last iterate whose
               // 2.5-scale band held K residuals
};

struct ScaleEstimate {
  double scale = kScaleFloor;
  ScaleStatus status = ScaleStatus::kOk;
  int iterations = 0;
  std::size_t inlier_count = 0;
};

// Standard normal quantile (Wichura's AS241, relative accuracy ~1e-16).
// p must lie in (0, 1).
double normal_quantile(double p);

// Iterative K-th ordered scale estimator. With r_K the K-th smallest residual
// and n_in the current inlier count (all residuals at first):
//   s <- r_K / Phi^-1((1 + K / n_in) / 2)
//   n_in <- #{ r <= kInlierBand * s }
// repeated until the relative change of s drops below convergence_tol or
// max_iterations is reached.
ScaleEstimate ikose_scale(std::span<const double> abs_residuals, const ScaleConfig& cfg);

}  // namespace mshf
