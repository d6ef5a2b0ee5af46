#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mshf/dataset.hpp"
#include "mshf/model_kernels.hpp"

namespace mshf {

struct SamplerConfig {
  std::size_t hypothesis_count = 5000;
  // Scale of the proximity kernel exp(-d^2 / sigma^2). Unset means 10% of
  // the data bounding-box diagonal.
  std::optional<double> proximity_sigma;
  std::uint64_t rng_seed = 0;
  std::size_t max_retries_per_hypothesis = 100;
};

struct HypothesisPool {
  std::vector<ModelParams> hypotheses;
  // Indices of the minimal subset each hypothesis was fitted to.
  std::vector<std::vector<std::size_t>> subsets;
  // Draw slots abandoned after max_retries_per_hypothesis degenerate fits.
  std::size_t skipped_draws = 0;
  double proximity_sigma = 0.0;
};

double default_proximity_sigma(const DataSet& data);

// Proximity sampling of minimal subsets: the first member is uniform, each
// further member is drawn without replacement with probability proportional
// to exp(-d^2 / sigma^2), d being the Euclidean distance to the first member.
// Returns exactly cfg.hypothesis_count hypotheses. Throws
// Error(kInsufficientData) when the data cannot hold one minimal subset and
// Error(kTooManyDegenerate) once more than half of the requested count of draw
// slots had to be skipped.
HypothesisPool sample_hypotheses(const DataSet& data, ModelKind kind,
                                 const SamplerConfig& cfg);

}  // namespace mshf
