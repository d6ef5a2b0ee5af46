#include "mshf/hypergraph.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "mshf/error.hpp"

namespace mshf {

Hypergraph::Hypergraph(ModelKind kind, std::size_t num_hyperedges,
                       std::vector<Vertex> vertices)
    : kind_(kind), num_hyperedges_(num_hyperedges), vertices_(std::move(vertices)) {
  for (const auto& v : vertices_) {
    if (v.incidence.size() != v.incident_residuals.size()) {
      throw Error(ErrorCode::kInvalidArgument, "incidence/residual length mismatch");
    }
    for (std::size_t k = 0; k < v.incidence.size(); ++k) {
      if (v.incidence[k] >= num_hyperedges_ || (k > 0 && v.incidence[k - 1] >= v.incidence[k])) {
        throw Error(ErrorCode::kInvalidArgument,
                    "incidence must be sorted, unique and below the hyperedge count");
      }
    }
  }
}

Hypergraph Hypergraph::subgraph(std::span<const std::size_t> keep) const {
  std::vector<Vertex> kept;
  kept.reserve(keep.size());
  for (std::size_t i : keep) kept.push_back(vertices_.at(i));
  return Hypergraph(kind_, num_hyperedges_, std::move(kept));
}

double epanechnikov(double x) {
  return std::abs(x) <= 1.0 ? 0.75 * (1.0 - x * x) : 0.0;
}

double kernel_bandwidth(double int_psi_squared, double int_x2_psi, double scale,
                        std::size_t n) {
  if (!(scale > 0.0) || n == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth needs scale > 0 and n >= 1");
  }
  const double ratio =
      243.0 * int_psi_squared / (35.0 * static_cast<double>(n) * int_x2_psi);
  return std::pow(ratio, 0.2) * scale;
}

double epanechnikov_bandwidth(double scale, std::size_t n) {
  return kernel_bandwidth(0.6, 0.2, scale, n);
}

double vertex_weight(std::span<const double> residuals,
                     std::span<const HyperedgeIndex> incidence, double scale,
                     double bandwidth) {
  if (incidence.empty()) throw Error(ErrorCode::kInvalidArgument, "empty incidence");
  if (!(scale > 0.0) || !(bandwidth > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scale and bandwidth must be positive");
  }
  double sum = 0.0;
  for (HyperedgeIndex e : incidence) sum += epanechnikov(residuals[e] / bandwidth);
  return sum / (scale * bandwidth) / static_cast<double>(incidence.size());
}

Hypergraph build_hypergraph(const DataSet& data, std::span<const ModelParams> hypotheses,
                            const ScaleConfig& scale_cfg) {
  if (data.empty()) throw Error(ErrorCode::kInvalidArgument, "empty data set");
  if (hypotheses.empty()) throw Error(ErrorCode::kInvalidArgument, "no hypotheses");
  const ModelKind kind = hypotheses.front().kind;
  const std::size_t n = data.size();
  const std::size_t min_degree = minimal_subset_size(kind);

  std::vector<Vertex> vertices;
  std::vector<double> r(n);
  std::vector<HyperedgeIndex> incidence;
  for (std::size_t h = 0; h < hypotheses.size(); ++h) {
    const ModelParams& params = hypotheses[h];
    if (params.kind != kind) {
      throw Error(ErrorCode::kInvalidArgument, "hypotheses mix model kinds");
    }
    residuals(params, data, r);
    const ScaleEstimate est = ikose_scale(r, scale_cfg);
    const double band = kInlierBand * est.scale;
    incidence.clear();
    for (std::size_t e = 0; e < n; ++e) {
      if (r[e] <= band) incidence.push_back(static_cast<HyperedgeIndex>(e));
    }
    if (incidence.size() < min_degree) continue;

    Vertex v;
    v.hypothesis_index = h;
    v.params = params;
    v.scale = est.scale;
    v.scale_status = est.status;
    v.bandwidth = epanechnikov_bandwidth(est.scale, n);
    v.weight = vertex_weight(r, incidence, v.scale, v.bandwidth);
    v.incidence = incidence;
    v.incident_residuals.reserve(incidence.size());
    for (HyperedgeIndex e : incidence) v.incident_residuals.push_back(r[e]);
    vertices.push_back(std::move(v));
  }
  if (vertices.empty()) {
    throw Error(ErrorCode::kEmptyHypergraph,
                "every hypothesis has fewer than " + std::to_string(min_degree) + " inliers");
  }
  return Hypergraph(kind, n, std::move(vertices));
}

Reduction reduce_hypergraph(const Hypergraph& g, double xi) {
  if (g.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot reduce an empty hypergraph");
  if (!(xi > 0.0)) throw Error(ErrorCode::kInvalidArgument, "xi must be positive");
  const std::size_t m = g.size();

  double mean = 0.0;
  for (const auto& v : g.vertices()) mean += v.weight;
  mean /= static_cast<double>(m);

  std::vector<double> gap(m);
  double positive_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    gap[i] = mean - g[i].weight;
    if (gap[i] > 0.0) positive_sum += gap[i];
  }

  ReductionReport report;
  report.xi = xi;
  report.prior.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    report.prior[i] = gap[i] > 0.0 ? gap[i] / positive_sum : xi;
  }
  for (double p : report.prior) report.entropy -= p * std::log(p);

  if (!(positive_sum > 0.0)) {
    report.vacuous = true;
    report.retained.resize(m);
    std::iota(report.retained.begin(), report.retained.end(), std::size_t{0});
    return {g, std::move(report)};
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (-std::log(report.prior[i]) > report.entropy) report.retained.push_back(i);
  }
  Hypergraph reduced = g.subgraph(report.retained);
  return {std::move(reduced), std::move(report)};
}

}  // namespace mshf
