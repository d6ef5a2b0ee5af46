#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mshf/dataset.hpp"
#include "mshf/model_kernels.hpp"
#include "mshf/scale.hpp"

namespace mshf {

using HyperedgeIndex = std::uint32_t;

// One model hypothesis. `incidence` is the sorted inlier set (the row of the
// incidence matrix) and `incident_residuals[k]` the residual of hyperedge
// incidence[k].
struct Vertex {
  std::size_t hypothesis_index = 0;
  ModelParams params;
  double scale = 0.0;
  ScaleStatus scale_status = ScaleStatus::kOk;
  double bandwidth = 0.0;
  double weight = 0.0;
  std::vector<HyperedgeIndex> incidence;
  std::vector<double> incident_residuals;

  std::size_t degree() const { return incidence.size(); }
};

// Vertices are hypotheses, hyperedges are data points. Immutable once built.
class Hypergraph {
 public:
  Hypergraph(ModelKind kind, std::size_t num_hyperedges, std::vector<Vertex> vertices);

  ModelKind kind() const { return kind_; }
  std::size_t num_hyperedges() const { return num_hyperedges_; }
  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  const Vertex& operator[](std::size_t i) const { return vertices_[i]; }
  const std::vector<Vertex>& vertices() const { return vertices_; }

  // Sub-hypergraph over the given vertex positions (in order); the hyperedge
  // universe is unchanged.
  Hypergraph subgraph(std::span<const std::size_t> keep) const;

 private:
  ModelKind kind_;
  std::size_t num_hyperedges_;
  std::vector<Vertex> vertices_;
};

// Epanechnikov kernel 0.75 (1 - x^2) on [-1, 1], zero outside.
double epanechnikov(double x);

// b = [243 R(Psi) / (35 n mu2(Psi))]^(1/5) * scale, with R(Psi) = int Psi^2 and
// mu2(Psi) = int x^2 Psi over [-1, 1].
double kernel_bandwidth(double int_psi_squared, double int_x2_psi, double scale,
                        std::size_t n);

// kernel_bandwidth with the Epanechnikov constants R = 3/5, mu2 = 1/5.
double epanechnikov_bandwidth(double scale, std::size_t n);

// Kernel density score over the incident hyperedges only:
// (1/|incidence|) * sum_e Psi(r_e / b) / (s * b). `residuals` is indexed by
// hyperedge.
double vertex_weight(std::span<const double> residuals,
                     std::span<const HyperedgeIndex> incidence, double scale,
                     double bandwidth);

// Residuals against every point, IKOSE scale, inliers within kInlierBand *
// scale, bandwidth and weight per vertex. Hypotheses with fewer inliers than
// the minimal subset size are dropped; Error(kEmptyHypergraph) if none
// remain. `hypothesis_index` records each vertex's position in `hypotheses`.
Hypergraph build_hypergraph(const DataSet& data, std::span<const ModelParams> hypotheses,
                            const ScaleConfig& scale_cfg);

struct ReductionReport {
  std::vector<double> prior;
  double entropy = 0.0;
  std::vector<std::size_t> retained;
  double xi = 0.0;
  // No vertex lies below the mean weight; the input is returned unchanged.
  bool vacuous = false;
};

struct Reduction {
  Hypergraph reduced;
  ReductionReport report;
};

inline constexpr double kDefaultXi = 1e-12;

// Entropy-thresholded pruning. With q_i = mean(w) - w_i, the prior is
// p_i = q_i / sum_{q_j > 0} q_j for q_i > 0 and xi otherwise; E = -sum p log p
// (natural log) and vertex i survives iff -log p_i > E.
Reduction reduce_hypergraph(const Hypergraph& g, double xi = kDefaultXi);

}  // namespace mshf
