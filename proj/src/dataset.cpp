#include "mshf/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "mshf/error.hpp"

namespace mshf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDegenerateSubset: return "DegenerateSubset";
    case ErrorCode::kInsufficientData: return "InsufficientData";
    case ErrorCode::kTooManyDegenerate: return "TooManyDegenerate";
    case ErrorCode::kEmptyHypergraph: return "EmptyHypergraph";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kUnknownTemplate: return "UnknownTemplate";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLine2D: return "line2d";
    case ModelKind::kLine3D: return "line3d";
    case ModelKind::kCircle2D: return "circle2d";
    case ModelKind::kHomography: return "homography";
    case ModelKind::kFundamental: return "fundamental";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (auto kind : {ModelKind::kLine2D, ModelKind::kLine3D, ModelKind::kCircle2D,
                    ModelKind::kHomography, ModelKind::kFundamental}) {
    if (lower == to_string(kind)) return kind;
  }
  throw Error(ErrorCode::kParseError, "unknown model kind '" + std::string(name) + "'");
}

int observation_dim(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLine2D: return 2;
    case ModelKind::kLine3D: return 3;
    case ModelKind::kCircle2D: return 2;
    case ModelKind::kHomography: return 4;
    case ModelKind::kFundamental: return 4;
  }
  return 0;
}

DataSet::DataSet(int dim, std::vector<double> coords, std::vector<int> labels)
    : dim_(dim), coords_(std::move(coords)), labels_(std::move(labels)) {
  if (dim_ <= 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  if (coords_.size() % static_cast<std::size_t>(dim_) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "coordinate count is not a multiple of dim");
  }
  for (double v : coords_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "non-finite coordinate");
  }
  if (!labels_.empty() && labels_.size() != size()) {
    throw Error(ErrorCode::kLengthMismatch, "label count differs from observation count");
  }
  for (int l : labels_) {
    if (l < 0) throw Error(ErrorCode::kInvalidArgument, "labels must be nonnegative");
  }
}

double DataSet::bounding_box_diagonal() const {
  if (empty()) return 0.0;
  double sum = 0.0;
  for (int d = 0; d < dim_; ++d) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < size(); ++i) {
      lo = std::min(lo, coords_[i * dim_ + d]);
      hi = std::max(hi, coords_[i * dim_ + d]);
    }
    sum += (hi - lo) * (hi - lo);
  }
  return std::sqrt(sum);
}

}  // namespace mshf
