#include "mshf/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mshf/error.hpp"
#include "mshf/random.hpp"

namespace mshf {
namespace {

double squared_distance(Observation a, Observation b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double t = a[d] - b[d];
    s += t * t;
  }
  return s;
}

class ProximitySubsetDrawer {
 public:
  ProximitySubsetDrawer(const DataSet& data, std::size_t subset_size, double sigma)
      : data_(data), subset_size_(subset_size), inv_sigma2_(1.0 / (sigma * sigma)),
        weights_(data.size()) {}

  void draw(Rng& rng, std::vector<std::size_t>* subset) {
    const std::size_t n = data_.size();
    subset->clear();
    const std::size_t first = rng.index(n);
    subset->push_back(first);
    for (std::size_t i = 0; i < n; ++i) {
      weights_[i] = i == first ? 0.0
                               : std::exp(-squared_distance(data_[i], data_[first]) *
                                          inv_sigma2_);
    }
    while (subset->size() < subset_size_) {
      double total = 0.0;
      for (double w : weights_) total += w;
      std::size_t pick = n;
      if (total > 0.0 && std::isfinite(total)) {
        const double target = rng.uniform() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          if (weights_[i] <= 0.0) continue;
          acc += weights_[i];
          pick = i;
          if (acc > target) break;
        }
      } else {
        // Every remaining candidate underflowed: fall back to uniform over the
        // points not yet chosen.
        std::size_t remaining = n - subset->size();
        std::size_t k = rng.index(remaining);
        for (std::size_t i = 0; i < n; ++i) {
          if (std::find(subset->begin(), subset->end(), i) != subset->end()) continue;
          if (k-- == 0) {
            pick = i;
            break;
          }
        }
      }
      subset->push_back(pick);
      weights_[pick] = 0.0;
    }
  }

 private:
  const DataSet& data_;
  std::size_t subset_size_;
  double inv_sigma2_;
  std::vector<double> weights_;
};

}  // namespace

double default_proximity_sigma(const DataSet& data) {
  const double diag = data.bounding_box_diagonal();
  return diag > 0.0 ? 0.1 * diag : 1.0;
}

HypothesisPool sample_hypotheses(const DataSet& data, ModelKind kind,
                                 const SamplerConfig& cfg) {
  const std::size_t m = minimal_subset_size(kind);
  if (data.dim() != observation_dim(kind) && !data.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "data dimension does not match " +
                                                 std::string(to_string(kind)));
  }
  if (data.size() < m) {
    throw Error(ErrorCode::kInsufficientData,
                "need at least " + std::to_string(m) + " observations, got " +
                    std::to_string(data.size()));
  }
  if (cfg.hypothesis_count == 0) {
    throw Error(ErrorCode::kInvalidArgument, "hypothesis_count must be positive");
  }
  if (cfg.max_retries_per_hypothesis == 0) {
    throw Error(ErrorCode::kInvalidArgument, "max_retries_per_hypothesis must be positive");
  }
  const double sigma = cfg.proximity_sigma.value_or(default_proximity_sigma(data));
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "proximity_sigma must be positive");
  }

  HypothesisPool pool;
  pool.proximity_sigma = sigma;
  pool.hypotheses.reserve(cfg.hypothesis_count);
  pool.subsets.reserve(cfg.hypothesis_count);

  Rng rng(cfg.rng_seed);
  ProximitySubsetDrawer drawer(data, m, sigma);
  std::vector<std::size_t> subset;
  std::vector<Observation> obs(m);

  while (pool.hypotheses.size() < cfg.hypothesis_count) {
    bool fitted = false;
    for (std::size_t attempt = 0; attempt < cfg.max_retries_per_hypothesis; ++attempt) {
      drawer.draw(rng, &subset);
      for (std::size_t k = 0; k < m; ++k) obs[k] = data[subset[k]];
      std::vector<ModelParams> models;
      try {
        models = fit_minimal(kind, obs);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDegenerateSubset) throw;
        continue;
      }
      for (auto& model : models) {
        if (pool.hypotheses.size() == cfg.hypothesis_count) break;
        pool.hypotheses.push_back(std::move(model));
        pool.subsets.push_back(subset);
      }
      fitted = true;
      break;
    }
    if (!fitted) {
      ++pool.skipped_draws;
      if (2 * pool.skipped_draws > cfg.hypothesis_count) {
        throw Error(ErrorCode::kTooManyDegenerate,
                    "more than half of the draws were degenerate (" +
                        std::to_string(pool.skipped_draws) + " skipped)");
      }
    }
  }
  return pool;
}

}  // namespace mshf
