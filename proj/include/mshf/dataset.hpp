#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mshf {

enum class ModelKind { kLine2D, kLine3D, kCircle2D, kHomography, kFundamental };

std::string_view to_string(ModelKind kind);

// Accepts the names produced by to_string (case-insensitive). Throws
// Error(kParseError) on anything else.
ModelKind parse_model_kind(std::string_view name);

// Coordinates per observation: 2 or 3 for points, 4 for a correspondence
// (x, y, x', y').
int observation_dim(ModelKind kind);

using Observation = std::span<const double>;

// Row-major observation matrix with optional ground-truth labels
// (0 = outlier, k > 0 = structure k).
class DataSet {
 public:
  DataSet() = default;
  DataSet(int dim, std::vector<double> coords, std::vector<int> labels = {});

  int dim() const { return dim_; }
  std::size_t size() const { return dim_ > 0 ? coords_.size() / dim_ : 0; }
  bool empty() const { return size() == 0; }

  Observation operator[](std::size_t i) const {
    return {coords_.data() + i * dim_, static_cast<std::size_t>(dim_)};
  }

  const std::vector<double>& coords() const { return coords_; }
  const std::vector<int>& labels() const { return labels_; }
  bool has_labels() const { return !labels_.empty(); }

  // Diagonal of the axis-aligned bounding box over all coordinates.
  double bounding_box_diagonal() const;

 private:
  int dim_ = 0;
  std::vector<double> coords_;
  std::vector<int> labels_;
};

}  // namespace mshf
