#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mshf/dataset.hpp"

namespace mshf {

// Parameter layouts:
//   Line2D       (a, b, c) with a*x + b*y + c = 0 and a^2 + b^2 = 1
//   Line3D       (px, py, pz, dx, dy, dz), unit direction d
//   Circle2D     (cx, cy, radius)
//   Homography   row-major 3x3 H with x' ~ H x, unit Frobenius norm
//   Fundamental  row-major 3x3 F with x'^T F x = 0, unit Frobenius norm,
//                rank 2
struct ModelParams {
  ModelKind kind = ModelKind::kLine2D;
  std::vector<double> values;
};

// Solver systems whose condition number exceeds this are treated as
// degenerate.
inline constexpr double kMaxConditionNumber = 1e12;

std::size_t minimal_subset_size(ModelKind kind);

// Number of parameter values stored for a kind.
std::size_t parameter_count(ModelKind kind);

// Exact fit through a minimal subset. Returns one model for every kind except
// Fundamental, where the seven-point solver yields one to three rank-2
// solutions. Throws Error(kDegenerateSubset) when the subset does not
// determine a model and Error(kInvalidArgument) on a size or dimension
// mismatch.
std::vector<ModelParams> fit_minimal(ModelKind kind,
                                     std::span<const Observation> subset);

// Absolute geometric residual: point-to-line distance, radial offset for
// circles, Sampson distance for homographies and fundamental matrices.
double residual(const ModelParams& params, Observation obs);

// Residuals of every observation in `data`; `out` must hold data.size()
// values.
void residuals(const ModelParams& params, const DataSet& data,
               std::span<double> out);

}  // namespace mshf
