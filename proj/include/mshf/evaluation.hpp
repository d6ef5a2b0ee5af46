#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mshf/dataset.hpp"
#include "mshf/model_kernels.hpp"
#include "mshf/pipeline.hpp"

namespace mshf {

enum class SceneFamily {
  kLines2D,
  kLines3D,
  kStar5,
  kCircles,
  kUnbalancedLines,
  kHomography,
  kTwoView,
};

// Parsed template name. Accepted forms:
//   <k>-lines-2d (k = 3..7)    <k>-lines-3d (k = 3..7)    star5
//   <k>-circles (k = 3..16)    unbalanced-3-lines[:ratio]
//   homography                 two-view
// Unset overrides take the template defaults.
struct SceneSpec {
  SceneFamily family = SceneFamily::kLines3D;
  int structures = 3;
  double ratio = 1.0;
  std::optional<double> inlier_sigma;
  std::optional<std::size_t> inliers_per_structure;
  std::optional<std::size_t> outliers;

  std::string name() const;
};

SceneSpec parse_scene_spec(const std::string& name);

ModelKind scene_kind(const SceneSpec& spec);

// One representative of every template family, used by the end-to-end and
// variant-agreement checks.
std::vector<std::string> standard_templates();

struct SyntheticScene {
  DataSet data;  // carries true_labels as its labels
  std::vector<int> true_labels;
  ModelKind kind = ModelKind::kLine2D;
  std::vector<ModelParams> true_params;
  double inlier_sigma = 0.0;
  std::size_t outlier_count = 0;
  std::vector<std::size_t> inlier_counts;  // per structure
};

// Deterministic in `seed`. Inliers are on-model points perturbed by Gaussian
// noise (perpendicular for lines and circles, per-coordinate pixel noise for
// correspondences); outliers are uniform in the template's bounding region.
// Points are shuffled so labels carry no positional information.
SyntheticScene generate_scene(const SceneSpec& spec, std::uint64_t seed);

// Mislabeling percentage after matching estimated structure labels to true
// ones with a maximum-agreement one-to-one assignment. Label 0 (outlier) only
// matches 0; unmatched estimated structures count as mislabeled. Throws
// Error(kLengthMismatch) on unequal lengths.
double fitting_error(std::span<const int> estimated, std::span<const int> truth);

struct TrialRecord {
  std::uint64_t seed = 0;
  double error = 0.0;
  std::size_t instances = 0;
  double seconds = 0.0;  // excludes hypothesis sampling
  double mode_seeking_seconds = 0.0;
  std::vector<std::size_t> modes;  // hypothesis indices, sorted
};

struct TrialReport {
  std::string scene;
  RunConfig config;
  std::size_t trials = 0;
  std::uint64_t base_seed = 0;
  double std_error = 0.0;  // population standard deviation
  double avg_error = 0.0;
  double min_error = 0.0;
  double avg_seconds = 0.0;
  std::map<std::size_t, std::size_t> instance_histogram;
  std::vector<TrialRecord> records;
};

// Trial t uses seed base_seed + t for both the scene and the sampler.
// `cfg.kind` is overridden by the scene's model kind.
TrialReport run_trials(const SceneSpec& spec, const RunConfig& cfg, std::size_t trials,
                       std::uint64_t base_seed);

std::string report_to_json(const TrialReport& report);

// Aligned-column "Std. / Avg. / Min. / Time" block plus the instance-count
// histogram.
std::string report_to_text(const TrialReport& report);

}  // namespace mshf
