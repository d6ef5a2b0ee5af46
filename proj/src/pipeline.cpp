#include "mshf/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <string>

#include "mshf/error.hpp"

namespace mshf {
namespace {

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kParseError, "bad number for " + key + ": '" + text + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParseError, "bad integer for " + key + ": '" + text + "'");
  }
  return v;
}

class StageTimer {
 public:
  explicit StageTimer(double* sink) : sink_(sink), start_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    *sink_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  double* sink_;
  std::chrono::steady_clock::time_point start_;
};

template <typename F>
auto run_stage(const char* stage, double* seconds, F&& body) {
  StageTimer timer(seconds);
  try {
    return body();
  } catch (const Error& e) {
    throw Error(e.code(), std::string(stage) + ": " + e.what());
  }
}

}  // namespace

std::size_t default_hypothesis_count(ModelKind kind) {
  switch (kind) {
    case ModelKind::kHomography: return 10000;
    case ModelKind::kFundamental: return 20000;
    default: return 5000;
  }
}

std::size_t RunConfig::effective_hypothesis_count() const {
  return hypothesis_count > 0 ? hypothesis_count : default_hypothesis_count(kind);
}

ScaleConfig RunConfig::scale_config() const {
  ScaleConfig s;
  s.k_fraction = k_fraction;
  s.k_absolute = k_absolute;
  s.max_iterations = ikose_max_iterations;
  s.convergence_tol = ikose_tolerance;
  return s;
}

ModeSeekingConfig RunConfig::mode_seeking_config() const {
  return {variant, epsilon, neighbor_overlap, peak_fallback};
}

SamplerConfig RunConfig::sampler_config() const {
  SamplerConfig s;
  s.hypothesis_count = effective_hypothesis_count();
  s.proximity_sigma = proximity_sigma;
  s.rng_seed = rng_seed;
  s.max_retries_per_hypothesis = max_retries_per_hypothesis;
  return s;
}

std::vector<std::pair<std::string, std::string>> RunConfig::materialized() const {
  return {
      {"kind", std::string(to_string(kind))},
      {"hypothesis_count", std::to_string(effective_hypothesis_count())},
      {"k_fraction", format_number(k_fraction)},
      {"k_absolute", k_absolute ? std::to_string(*k_absolute) : "none"},
      {"epsilon", format_number(epsilon)},
      {"variant", std::string(to_string(variant))},
      {"xi", format_number(xi)},
      {"proximity_sigma", proximity_sigma ? format_number(*proximity_sigma) : "auto"},
      {"rng_seed", std::to_string(rng_seed)},
      {"neighbor_overlap", std::string(to_string(neighbor_overlap))},
      {"peak_fallback", std::string(to_string(peak_fallback))},
      {"max_retries_per_hypothesis", std::to_string(max_retries_per_hypothesis)},
      {"ikose_max_iterations", std::to_string(ikose_max_iterations)},
      {"ikose_tolerance", format_number(ikose_tolerance)},
  };
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "kind") {
    kind = parse_model_kind(value);
  } else if (key == "hypothesis_count") {
    hypothesis_count = parse_unsigned(key, value);
  } else if (key == "k_fraction") {
    k_fraction = parse_double(key, value);
    if (!(k_fraction > 0.0 && k_fraction <= 1.0)) {
      throw Error(ErrorCode::kParseError, "k_fraction must lie in (0, 1]");
    }
  } else if (key == "k_absolute") {
    if (value == "none") {
      k_absolute.reset();
    } else {
      k_absolute = parse_unsigned(key, value);
      if (*k_absolute == 0) throw Error(ErrorCode::kParseError, "k_absolute must be positive");
    }
  } else if (key == "epsilon") {
    epsilon = parse_double(key, value);
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
      throw Error(ErrorCode::kParseError, "epsilon must lie in (0, 1)");
    }
  } else if (key == "variant") {
    variant = parse_variant(value);
  } else if (key == "xi") {
    xi = parse_double(key, value);
    if (!(xi > 0.0)) throw Error(ErrorCode::kParseError, "xi must be positive");
  } else if (key == "proximity_sigma") {
    if (value == "auto") {
      proximity_sigma.reset();
    } else {
      proximity_sigma = parse_double(key, value);
      if (!(*proximity_sigma > 0.0)) {
        throw Error(ErrorCode::kParseError, "proximity_sigma must be positive");
      }
    }
  } else if (key == "rng_seed" || key == "seed") {
    rng_seed = parse_unsigned(key, value);
  } else if (key == "neighbor_overlap" || key == "neighbor-overlap") {
    neighbor_overlap = parse_neighbor_overlap(value);
  } else if (key == "peak_fallback") {
    peak_fallback = parse_peak_fallback(value);
  } else if (key == "max_retries_per_hypothesis") {
    max_retries_per_hypothesis = parse_unsigned(key, value);
    if (max_retries_per_hypothesis == 0) {
      throw Error(ErrorCode::kParseError, "max_retries_per_hypothesis must be positive");
    }
  } else if (key == "ikose_max_iterations") {
    ikose_max_iterations = static_cast<int>(parse_unsigned(key, value));
    if (ikose_max_iterations < 1) {
      throw Error(ErrorCode::kParseError, "ikose_max_iterations must be positive");
    }
  } else if (key == "ikose_tolerance") {
    ikose_tolerance = parse_double(key, value);
    if (!(ikose_tolerance > 0.0)) throw Error(ErrorCode::kParseError, "ikose_tolerance must be positive");
  } else {
    throw Error(ErrorCode::kParseError, "unknown config key '" + key + "'");
  }
}

FitResult fit(const DataSet& data, const RunConfig& cfg) {
  FitResult result;
  result.config = cfg;
  if (data.dim() != observation_dim(cfg.kind)) {
    throw Error(ErrorCode::kInvalidArgument,
                "input: " + std::to_string(data.dim()) + "-dimensional data cannot be fitted with " +
                    std::string(to_string(cfg.kind)));
  }

  const HypothesisPool pool = run_stage("sampling", &result.seconds.sampling, [&] {
    return sample_hypotheses(data, cfg.kind, cfg.sampler_config());
  });
  result.proximity_sigma = pool.proximity_sigma;
  result.skipped_draws = pool.skipped_draws;

  const Hypergraph graph = run_stage("hypergraph construction", &result.seconds.construction, [&] {
    return build_hypergraph(data, pool.hypotheses, cfg.scale_config());
  });
  result.vertex_count = graph.size();

  const Reduction reduction = run_stage("hypergraph reduction", &result.seconds.reduction, [&] {
    return reduce_hypergraph(graph, cfg.xi);
  });
  const Hypergraph& reduced = reduction.reduced;
  result.retained_count = reduced.size();
  result.reduction_vacuous = reduction.report.vacuous;
  result.entropy = reduction.report.entropy;

  std::vector<DecisionGraphEntry> entries;
  run_stage("mode seeking", &result.seconds.mode_seeking, [&] {
    entries = minimum_t_distance(reduced, cfg.mode_seeking_config());
    result.selection = select_modes(entries);
    return 0;
  });

  run_stage("labeling", &result.seconds.labeling, [&] {
    result.labels = derive_labels(reduced, result.selection.modes);
    return 0;
  });

  for (std::size_t v : result.selection.modes) {
    const Vertex& vx = reduced[v];
    result.modes.push_back(
        {v, vx.hypothesis_index, vx.params, vx.scale, vx.weight, entries[v].mtd, vx.incidence});
  }

  // Decision graph over every vertex of the unreduced hypergraph.
  std::vector<bool> is_mode(reduced.size(), false);
  for (std::size_t v : result.selection.modes) is_mode[v] = true;
  result.decision_graph.resize(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    result.decision_graph[i].hypothesis_index = graph[i].hypothesis_index;
    result.decision_graph[i].weight = graph[i].weight;
  }
  for (std::size_t k = 0; k < reduction.report.retained.size(); ++k) {
    auto& row = result.decision_graph[reduction.report.retained[k]];
    row.retained = true;
    row.mtd = entries[k].mtd;
    row.mode = is_mode[k];
  }
  std::stable_sort(result.decision_graph.begin(), result.decision_graph.end(),
                   [](const DecisionGraphRow& a, const DecisionGraphRow& b) {
                     return a.weight < b.weight;
                   });
  return result;
}

}  // namespace mshf
