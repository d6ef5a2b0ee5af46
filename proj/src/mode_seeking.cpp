#include "mshf/mode_seeking.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <string>

#include "mshf/error.hpp"
#include "mshf/scale.hpp"

namespace mshf {
namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Incidence sets as bit rows, for fast intersection counts.
class IncidenceBits {
 public:
  explicit IncidenceBits(const Hypergraph& g)
      : words_((g.num_hyperedges() + 63) / 64), bits_(g.size() * words_, 0) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::uint64_t* row = bits_.data() + i * words_;
      for (HyperedgeIndex e : g[i].incidence) row[e / 64] |= std::uint64_t{1} << (e % 64);
    }
  }

  std::size_t intersection(std::size_t i, std::size_t j) const {
    const std::uint64_t* a = bits_.data() + i * words_;
    const std::uint64_t* b = bits_.data() + j * words_;
    std::size_t count = 0;
    for (std::size_t w = 0; w < words_; ++w) count += static_cast<std::size_t>(std::popcount(a[w] & b[w]));
    return count;
  }

 private:
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

// Neighbor test with a cheap size-only bound before counting.
class NeighborTest {
 public:
  NeighborTest(const Hypergraph& g, double epsilon, NeighborOverlap overlap)
      : g_(g), bits_(g), epsilon_(epsilon), overlap_(overlap) {}

  bool operator()(std::size_t i, std::size_t j) const {
    const std::size_t di = g_[i].degree();
    const std::size_t dj = g_[j].degree();
    if (overlap_ratio(std::min(di, dj), di, dj, overlap_) <= epsilon_) return false;
    return overlap_ratio(bits_.intersection(i, j), di, dj, overlap_) > epsilon_;
  }

 private:
  const Hypergraph& g_;
  IncidenceBits bits_;
  double epsilon_;
  NeighborOverlap overlap_;
};

// Dense preference rows in rank order, so that T-distances reduce to dot
// products.
class PreferenceRows {
 public:
  static constexpr std::size_t kSparseDivisor = 8;

  PreferenceRows(const Hypergraph& g, const std::vector<std::size_t>& order)
      : rows_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.size()),
                                    static_cast<Eigen::Index>(g.num_hyperedges()))),
        norms_(g.size()),
        supports_(g.size()) {
    for (std::size_t r = 0; r < order.size(); ++r) {
      const PreferenceVector p = preference_vector(g[order[r]], g.num_hyperedges());
      for (std::size_t k = 0; k < p.support().size(); ++k) {
        rows_(static_cast<Eigen::Index>(r), p.support()[k]) = p.values()[k];
      }
      norms_[r] = p.squared_norm();
      supports_[r] = p.support();
    }
  }

  double distance_from_dot(std::size_t r, std::size_t q, double dot) const {
    const double denom = norms_[r] + norms_[q] - dot;
    if (!(denom > 0.0)) return 1.0;
    return std::clamp(1.0 - dot / denom, 0.0, 1.0);
  }

  // Same value, summing only over the smaller support.
  double sparse_distance(std::size_t r, std::size_t q) const {
    const std::vector<HyperedgeIndex>& support =
        supports_[r].size() <= supports_[q].size() ? supports_[r] : supports_[q];
    const auto a = rows_.row(static_cast<Eigen::Index>(r));
    const auto b = rows_.row(static_cast<Eigen::Index>(q));
    double dot = 0.0;
    for (HyperedgeIndex e : support) dot += a[static_cast<Eigen::Index>(e)] * b[static_cast<Eigen::Index>(e)];
    return distance_from_dot(r, q, dot);
  }

  // Dot products of rank r against ranks [0, count).
  Eigen::VectorXd dots_with_top(std::size_t r, std::size_t count) const {
    return rows_.topRows(static_cast<Eigen::Index>(count)) *
           rows_.row(static_cast<Eigen::Index>(r)).transpose();
  }

  // Rows with at most n / kSparseDivisor incident points take sparse
  // products.
  bool dense(std::size_t r) const {
    return supports_[r].size() * kSparseDivisor > static_cast<std::size_t>(rows_.cols());
  }

  // Dot products of the listed ranks against ranks [0, end).
  Eigen::MatrixXd gathered_dots(const std::vector<std::size_t>& ranks, std::size_t end) const {
    Eigen::MatrixXd block(static_cast<Eigen::Index>(ranks.size()), rows_.cols());
    for (std::size_t k = 0; k < ranks.size(); ++k) {
      block.row(static_cast<Eigen::Index>(k)) = rows_.row(static_cast<Eigen::Index>(ranks[k]));
    }
    return block * rows_.topRows(static_cast<Eigen::Index>(end)).transpose();
  }

  Eigen::VectorXd dots_with_all(std::size_t r) const {
    return rows_ * rows_.row(static_cast<Eigen::Index>(r)).transpose();
  }

 private:
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows_;
  std::vector<double> norms_;
  std::vector<std::vector<HyperedgeIndex>> supports_;
};

// Vertex positions from highest to lowest rank.
std::vector<std::size_t> rank_order(const Hypergraph& g) {
  std::vector<std::size_t> order(g.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&g](std::size_t a, std::size_t b) { return outranks(g, a, b); });
  return order;
}

}  // namespace

PreferenceVector::PreferenceVector(std::size_t n, std::vector<HyperedgeIndex> support,
                                   std::vector<double> values)
    : n_(n), support_(std::move(support)), values_(std::move(values)) {
  if (support_.size() != values_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "support/value length mismatch");
  }
  for (std::size_t k = 0; k < support_.size(); ++k) {
    if (support_[k] >= n_ || (k > 0 && support_[k - 1] >= support_[k])) {
      throw Error(ErrorCode::kInvalidArgument, "support must be sorted and below n");
    }
    if (!(values_[k] >= 0.0 && values_[k] <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "preference values must lie in [0, 1]");
    }
    squared_norm_ += values_[k] * values_[k];
  }
}

PreferenceVector PreferenceVector::from_dense(std::span<const double> dense) {
  std::vector<HyperedgeIndex> support;
  std::vector<double> values;
  for (std::size_t e = 0; e < dense.size(); ++e) {
    if (dense[e] > 0.0) {
      support.push_back(static_cast<HyperedgeIndex>(e));
      values.push_back(dense[e]);
    }
  }
  return PreferenceVector(dense.size(), std::move(support), std::move(values));
}

double PreferenceVector::value(std::size_t e) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), e);
  return it != support_.end() && *it == e ? values_[it - support_.begin()] : 0.0;
}

std::vector<double> PreferenceVector::dense() const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t k = 0; k < support_.size(); ++k) out[support_[k]] = values_[k];
  return out;
}

PreferenceVector preference_vector(const Vertex& vertex, std::span<const double> residuals) {
  if (!(vertex.scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scale must be positive");
  const double band = kInlierBand * vertex.scale;
  std::vector<HyperedgeIndex> support;
  std::vector<double> values;
  for (HyperedgeIndex e : vertex.incidence) {
    const double r = residuals[e];
    if (r <= band) {
      support.push_back(e);
      values.push_back(std::exp(-r / vertex.scale));
    }
  }
  return PreferenceVector(residuals.size(), std::move(support), std::move(values));
}

PreferenceVector preference_vector(const Vertex& vertex, std::size_t num_hyperedges) {
  if (!(vertex.scale > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scale must be positive");
  std::vector<double> values;
  values.reserve(vertex.incidence.size());
  for (double r : vertex.incident_residuals) values.push_back(std::exp(-r / vertex.scale));
  return PreferenceVector(num_hyperedges, vertex.incidence, std::move(values));
}

double tanimoto_distance(const PreferenceVector& a, const PreferenceVector& b,
                         bool* both_zero) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "preference vectors differ in length");
  }
  const auto& sa = a.support();
  const auto& sb = b.support();
  const auto& va = a.values();
  const auto& vb = b.values();
  double dot = 0.0;
  std::size_t i = 0, j = 0;
  while (i < sa.size() && j < sb.size()) {
    if (sa[i] < sb[j]) {
      ++i;
    } else if (sb[j] < sa[i]) {
      ++j;
    } else {
      dot += va[i++] * vb[j++];
    }
  }
  const double denom = a.squared_norm() + b.squared_norm() - dot;
  const bool zero = !(denom > 0.0);
  if (both_zero) *both_zero = zero;
  if (zero) return 1.0;
  return std::clamp(1.0 - dot / denom, 0.0, 1.0);
}

std::string_view to_string(NeighborOverlap overlap) {
  switch (overlap) {
    case NeighborOverlap::kDice: return "dice";
    case NeighborOverlap::kJaccard: return "jaccard";
    case NeighborOverlap::kSumRatio: return "sum-ratio";
    case NeighborOverlap::kContainment: return "containment";
  }
  return "dice";
}

NeighborOverlap parse_neighbor_overlap(std::string_view name) {
  const std::string s = lowercase(name);
  if (s == "dice") return NeighborOverlap::kDice;
  if (s == "jaccard") return NeighborOverlap::kJaccard;
  if (s == "sum-ratio") return NeighborOverlap::kSumRatio;
  if (s == "containment") return NeighborOverlap::kContainment;
  throw Error(ErrorCode::kParseError, "unknown neighbor overlap '" + std::string(name) + "'");
}

double overlap_ratio(std::size_t intersection, std::size_t size_a, std::size_t size_b,
                     NeighborOverlap overlap) {
  const auto inter = static_cast<double>(intersection);
  const auto total = static_cast<double>(size_a + size_b);
  if (total == 0.0) return 0.0;
  switch (overlap) {
    case NeighborOverlap::kDice: return 2.0 * inter / total;
    case NeighborOverlap::kJaccard: return inter / (total - inter);
    case NeighborOverlap::kSumRatio: return inter / total;
    case NeighborOverlap::kContainment: {
      const auto smaller = static_cast<double>(std::min(size_a, size_b));
      return smaller == 0.0 ? 0.0 : inter / smaller;
    }
  }
  return 0.0;
}

std::vector<std::size_t> neighbor_set(const Hypergraph& g, std::size_t i, double epsilon,
                                      NeighborOverlap overlap) {
  if (i >= g.size()) throw Error(ErrorCode::kInvalidArgument, "vertex index out of range");
  const NeighborTest is_neighbor(g, epsilon, overlap);
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < g.size(); ++j) {
    if (j != i && is_neighbor(i, j)) out.push_back(j);
  }
  return out;
}

std::string_view to_string(Variant variant) {
  return variant == Variant::kMSHF1 ? "mshf1" : "mshf2";
}

Variant parse_variant(std::string_view name) {
  const std::string s = lowercase(name);
  if (s == "mshf1") return Variant::kMSHF1;
  if (s == "mshf2") return Variant::kMSHF2;
  throw Error(ErrorCode::kParseError, "unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(PeakFallback fallback) {
  return fallback == PeakFallback::kNeighborMax ? "neighbor-max" : "global";
}

PeakFallback parse_peak_fallback(std::string_view name) {
  const std::string s = lowercase(name);
  if (s == "neighbor-max") return PeakFallback::kNeighborMax;
  if (s == "global") return PeakFallback::kGlobal;
  throw Error(ErrorCode::kParseError, "unknown peak fallback '" + std::string(name) + "'");
}

bool outranks(const Hypergraph& g, std::size_t j, std::size_t i) {
  const double wj = g[j].weight;
  const double wi = g[i].weight;
  return wj > wi || (wj == wi && j < i);
}

std::vector<DecisionGraphEntry> minimum_t_distance(const Hypergraph& g,
                                                   const ModeSeekingConfig& cfg) {
  if (g.empty()) throw Error(ErrorCode::kInvalidArgument, "empty hypergraph");
  if (cfg.variant == Variant::kMSHF2 && !(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must lie in (0, 1)");
  }
  const std::size_t m = g.size();
  std::vector<DecisionGraphEntry> entries(m);
  for (std::size_t i = 0; i < m; ++i) {
    entries[i].vertex_index = i;
    entries[i].weight = g[i].weight;
  }
  if (m == 1) {
    entries[0].mtd = 1.0;
    entries[0].omega_empty = true;
    return entries;
  }

  const std::vector<std::size_t> order = rank_order(g);
  const PreferenceRows prefs(g, order);
  const bool restricted = cfg.variant == Variant::kMSHF2;
  std::optional<NeighborTest> neighbor;
  if (restricted) neighbor.emplace(g, cfg.epsilon, cfg.overlap);
  auto eligible = [&](std::size_t r, std::size_t q) {
    return !restricted || (*neighbor)(order[r], order[q]);
  };

  // Unrestricted value for rank r: maximum over all others for the top
  // vertex, otherwise minimum over every higher rank.
  auto global_mtd = [&](std::size_t r) {
    if (r == 0) {
      const Eigen::VectorXd dots = prefs.dots_with_all(0);
      double best = 0.0;
      for (std::size_t q = 1; q < m; ++q) best = std::max(best, prefs.distance_from_dot(0, q, dots[q]));
      return best;
    }
    const Eigen::VectorXd dots = prefs.dots_with_top(r, r);
    double best = 1.0;
    for (std::size_t q = 0; q < r; ++q) best = std::min(best, prefs.distance_from_dot(r, q, dots[q]));
    return best;
  };

  // Minimum over eligible higher ranks given every distance of rank r.
  // Candidates are tested nearest first, so few neighbor tests run.
  auto nearest_eligible = [&](std::size_t r, std::vector<double>& dist) {
    constexpr int kProbes = 8;
    for (int probe = 0; probe < kProbes; ++probe) {
      const auto it = std::min_element(dist.begin(), dist.end());
      if (!std::isfinite(*it)) return std::numeric_limits<double>::infinity();
      const auto q = static_cast<std::size_t>(it - dist.begin());
      if (eligible(r, q)) return *it;
      *it = std::numeric_limits<double>::infinity();
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < dist.size(); ++q) {
      if (dist[q] < best && eligible(r, q)) best = dist[q];
    }
    return best;
  };

  // Both variants share one kernel: rows with many incident points go
  // through blocked matrix products, the rest through sparse dot products.
  // MSHF2 runs the neighbor test before a sparse product, not after.
  std::vector<double> best(m, std::numeric_limits<double>::infinity());
  constexpr std::size_t kBlock = 256;
  std::vector<std::size_t> dense_ranks;
  std::vector<double> dist;
  for (std::size_t begin = 1; begin < m; begin += kBlock) {
    const std::size_t end = std::min(m, begin + kBlock);
    dense_ranks.clear();
    for (std::size_t r = begin; r < end; ++r) {
      if (prefs.dense(r)) dense_ranks.push_back(r);
    }
    if (!dense_ranks.empty()) {
      const Eigen::MatrixXd dots = prefs.gathered_dots(dense_ranks, end);
      for (std::size_t k = 0; k < dense_ranks.size(); ++k) {
        const std::size_t r = dense_ranks[k];
        dist.resize(r);
        for (std::size_t q = 0; q < r; ++q) {
          dist[q] = prefs.distance_from_dot(r, q, dots(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(q)));
        }
        best[r] = restricted ? nearest_eligible(r, dist) : *std::min_element(dist.begin(), dist.end());
      }
    }
    for (std::size_t r = begin; r < end; ++r) {
      if (prefs.dense(r)) continue;
      for (std::size_t q = 0; q < r; ++q) {
        if (eligible(r, q)) best[r] = std::min(best[r], prefs.sparse_distance(r, q));
      }
    }
  }

  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = order[r];
    if (std::isfinite(best[r])) {
      entries[i].mtd = best[r];
      continue;
    }
    entries[i].omega_empty = true;
    if (!restricted || cfg.peak_fallback == PeakFallback::kGlobal) {
      entries[i].mtd = global_mtd(r);
      continue;
    }
    // Every neighbor of an empty-Omega vertex ranks below it.
    bool any = false;
    double worst = 0.0;
    for (std::size_t q = r + 1; q < m; ++q) {
      if (eligible(r, q)) {
        any = true;
        worst = std::max(worst, prefs.sparse_distance(r, q));
      }
    }
    entries[i].mtd = any ? worst : 1.0;
  }
  return entries;
}

ModeSelection select_modes(std::span<const DecisionGraphEntry> entries) {
  if (entries.empty()) throw Error(ErrorCode::kInvalidArgument, "no decision graph entries");
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&entries](std::size_t a, std::size_t b) {
    const auto& x = entries[a];
    const auto& y = entries[b];
    if (x.mtd != y.mtd) return x.mtd > y.mtd;
    if (x.weight != y.weight) return x.weight > y.weight;
    return x.vertex_index < y.vertex_index;
  });

  ModeSelection sel;
  sel.sorted_mtd.reserve(entries.size());
  for (std::size_t k : order) sel.sorted_mtd.push_back(entries[k].mtd);

  // Drops closer than this are ties, and the earliest position wins.
  constexpr double kTieTolerance = 1e-12;
  double best_drop = 0.0;
  std::size_t position = 0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const double drop = sel.sorted_mtd[k] - sel.sorted_mtd[k + 1];
    if (drop > best_drop + kTieTolerance) {
      best_drop = drop;
      position = k + 1;
    }
  }
  if (position == 0) {
    // Single entry, or every MTD equal.
    sel.degenerate = entries.size() > 1;
    std::size_t top = 0;
    for (std::size_t k = 1; k < entries.size(); ++k) {
      const auto& a = entries[k];
      const auto& b = entries[top];
      if (a.weight > b.weight || (a.weight == b.weight && a.vertex_index < b.vertex_index)) top = k;
    }
    sel.modes = {entries[top].vertex_index};
    sel.drop_position = 1;
    return sel;
  }
  sel.drop_position = position;
  for (std::size_t k = 0; k < position; ++k) sel.modes.push_back(entries[order[k]].vertex_index);
  return sel;
}

std::vector<int> derive_labels(const Hypergraph& g, std::span<const std::size_t> modes) {
  if (modes.empty()) throw Error(ErrorCode::kInvalidArgument, "no modes to label from");
  std::vector<int> labels(g.num_hyperedges(), 0);
  std::vector<double> best(g.num_hyperedges(), std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const Vertex& v = g[modes[k]];
    for (std::size_t t = 0; t < v.incidence.size(); ++t) {
      const HyperedgeIndex e = v.incidence[t];
      const double normalized = v.incident_residuals[t] / v.scale;
      if (normalized < best[e]) {
        best[e] = normalized;
        labels[e] = static_cast<int>(k + 1);
      }
    }
  }
  return labels;
}

}  // namespace mshf
