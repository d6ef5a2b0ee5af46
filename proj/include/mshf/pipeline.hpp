#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mshf/dataset.hpp"
#include "mshf/hypergraph.hpp"
#include "mshf/mode_seeking.hpp"
#include "mshf/model_kernels.hpp"
#include "mshf/sampler.hpp"
#include "mshf/scale.hpp"

namespace mshf {

// Hypothesis counts used for the synthetic and real-image experiments:
// 5,000 for lines and circles, 10,000 for homographies, 20,000 for
// fundamental matrices.
std::size_t default_hypothesis_count(ModelKind kind);

struct RunConfig {
  ModelKind kind = ModelKind::kLine2D;
  std::size_t hypothesis_count = 0;  // 0 selects default_hypothesis_count(kind)
  double k_fraction = 0.10;
  std::optional<std::size_t> k_absolute;
  double epsilon = 0.8;
  Variant variant = Variant::kMSHF2;
  double xi = kDefaultXi;
  std::optional<double> proximity_sigma;  // unset: 10% of the bbox diagonal
  std::uint64_t rng_seed = 0;
  NeighborOverlap neighbor_overlap = NeighborOverlap::kContainment;
  PeakFallback peak_fallback = PeakFallback::kGlobal;
  std::size_t max_retries_per_hypothesis = 100;
  int ikose_max_iterations = 50;
  double ikose_tolerance = 1e-6;

  std::size_t effective_hypothesis_count() const;
  ScaleConfig scale_config() const;
  ModeSeekingConfig mode_seeking_config() const;
  SamplerConfig sampler_config() const;

  // Every setting as ordered key/value strings, defaults resolved. Keys match
  // the flat config-file keys accepted by set().
  std::vector<std::pair<std::string, std::string>> materialized() const;

  // Sets one key from its text form. Throws Error(kParseError) on an unknown
  // key or malformed value.
  void set(const std::string& key, const std::string& value);
};

struct Mode {
  std::size_t vertex = 0;            // position in the reduced hypergraph
  std::size_t hypothesis_index = 0;  // position in the sampled pool
  ModelParams params;
  double scale = 0.0;
  double weight = 0.0;
  double mtd = 0.0;
  std::vector<HyperedgeIndex> inliers;
};

// One row per vertex of the unreduced hypergraph.
struct DecisionGraphRow {
  std::size_t hypothesis_index = 0;
  double weight = 0.0;
  std::optional<double> mtd;  // set for retained vertices
  bool retained = false;
  bool mode = false;
};

struct StageTimings {
  double sampling = 0.0;
  double construction = 0.0;
  double reduction = 0.0;
  double mode_seeking = 0.0;
  double labeling = 0.0;
};

struct FitResult {
  RunConfig config;
  double proximity_sigma = 0.0;
  std::size_t skipped_draws = 0;
  std::size_t vertex_count = 0;
  std::size_t retained_count = 0;
  bool reduction_vacuous = false;
  double entropy = 0.0;
  ModeSelection selection;
  std::vector<Mode> modes;
  std::vector<int> labels;
  std::vector<DecisionGraphRow> decision_graph;  // weight non-decreasing
  StageTimings seconds;
};

// Runs sampling, hypergraph construction, reduction, minimum T-distance,
// largest-drop selection and labeling. Errors propagate as mshf::Error with
// the failing stage prefixed to the message.
FitResult fit(const DataSet& data, const RunConfig& cfg);

}  // namespace mshf
