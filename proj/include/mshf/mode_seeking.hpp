#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mshf/hypergraph.hpp"

namespace mshf {

// Sparse preference of a vertex over the n hyperedges:
// exp(-r_e / s) on its inliers, zero elsewhere.
class PreferenceVector {
 public:
  PreferenceVector() = default;
  PreferenceVector(std::size_t n, std::vector<HyperedgeIndex> support,
                   std::vector<double> values);

  static PreferenceVector from_dense(std::span<const double> dense);

  std::size_t size() const { return n_; }
  const std::vector<HyperedgeIndex>& support() const { return support_; }
  const std::vector<double>& values() const { return values_; }
  double squared_norm() const { return squared_norm_; }
  bool is_zero() const { return squared_norm_ == 0.0; }

  double value(std::size_t e) const;
  std::vector<double> dense() const;

 private:
  std::size_t n_ = 0;
  std::vector<HyperedgeIndex> support_;
  std::vector<double> values_;
  double squared_norm_ = 0.0;
};

// From a residual vector over all hyperedges.
PreferenceVector preference_vector(const Vertex& vertex, std::span<const double> residuals);

// From the residuals stored with the vertex.
PreferenceVector preference_vector(const Vertex& vertex, std::size_t num_hyperedges);

// 1 - <a,b> / (|a|^2 + |b|^2 - <a,b>). Two zero vectors are at distance 1;
// `both_zero` (optional) reports that case.
double tanimoto_distance(const PreferenceVector& a, const PreferenceVector& b,
                         bool* both_zero = nullptr);

// How the shared-hyperedge ratio between two incidence sets A, B is measured:
//   dice           2 |A n B| / (|A| + |B|)
//   jaccard        |A n B| / |A u B|
//   sum-ratio      |A n B| / (|A| + |B|)   (never exceeds 0.5)
//   containment    |A n B| / min(|A|, |B|)
enum class NeighborOverlap { kDice, kJaccard, kSumRatio, kContainment };

std::string_view to_string(NeighborOverlap overlap);
NeighborOverlap parse_neighbor_overlap(std::string_view name);

double overlap_ratio(std::size_t intersection, std::size_t size_a, std::size_t size_b,
                     NeighborOverlap overlap);

// Vertices j != i whose overlap ratio with i exceeds epsilon, ascending.
std::vector<std::size_t> neighbor_set(const Hypergraph& g, std::size_t i, double epsilon,
                                      NeighborOverlap overlap = NeighborOverlap::kContainment);

// MSHF1 compares a vertex against every higher-weighted vertex; MSHF2 only
// against higher-weighted neighbors.
enum class Variant { kMSHF1, kMSHF2 };

std::string_view to_string(Variant variant);
Variant parse_variant(std::string_view name);

// MSHF2 treatment of a vertex with no higher-weighted neighbor:
//   neighbor-max  maximum T-distance over its neighbors, 1 without neighbors
//   global        the MSHF1 value (minimum over all higher-weighted vertices;
//                 maximum over all others for the top vertex)
enum class PeakFallback { kNeighborMax, kGlobal };

std::string_view to_string(PeakFallback fallback);
PeakFallback parse_peak_fallback(std::string_view name);

struct ModeSeekingConfig {
  Variant variant = Variant::kMSHF2;
  double epsilon = 0.8;
  NeighborOverlap overlap = NeighborOverlap::kContainment;
  PeakFallback peak_fallback = PeakFallback::kGlobal;
};

struct DecisionGraphEntry {
  std::size_t vertex_index = 0;
  double weight = 0.0;
  double mtd = 1.0;
  // No higher-weighted vertex was eligible for comparison.
  bool omega_empty = false;
};

// True when vertex j outranks vertex i: strictly higher weight, or equal weight
// and a lower index.
bool outranks(const Hypergraph& g, std::size_t j, std::size_t i);

// Minimum T-distance of every vertex against the vertices that outrank it.
// The top-ranked vertex takes the maximum T-distance over its comparison set
// instead. One entry per vertex, in vertex order.
std::vector<DecisionGraphEntry> minimum_t_distance(const Hypergraph& g,
                                                   const ModeSeekingConfig& cfg);

struct ModeSelection {
  std::vector<std::size_t> modes;  // vertex indices, highest MTD first
  std::size_t drop_position = 0;
  std::vector<double> sorted_mtd;  // non-increasing
  bool degenerate = false;         // every MTD equal; top-weighted vertex only
};

// Sorts entries by MTD (non-increasing; ties by weight, then index), finds
// the largest consecutive drop (earliest on ties) and keeps everything above
// it.
ModeSelection select_modes(std::span<const DecisionGraphEntry> entries);

// Point e takes label k + 1 when modes[k] is the incident mode with the
// smallest r_e / s (earlier modes win exact ties); 0 if no mode contains e.
std::vector<int> derive_labels(const Hypergraph& g, std::span<const std::size_t> modes);

}  // namespace mshf
