#include "mshf/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mshf/error.hpp"

namespace mshf {
namespace {

// Minimum-cost perfect assignment on a square matrix (shortest augmenting
// paths with potentials). Returns row -> column.
std::vector<std::size_t> hungarian(const std::vector<std::vector<long long>>& cost) {
  const std::size_t n = cost.size();
  constexpr long long kInf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<long long> minv(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      long long delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const long long cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n, 0);
  for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

double fitting_error(std::span<const int> estimated, std::span<const int> truth) {
  if (estimated.size() != truth.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "label sequences differ in length (" + std::to_string(estimated.size()) + " vs " +
                    std::to_string(truth.size()) + ")");
  }
  const std::size_t n = estimated.size();
  if (n == 0) return 0.0;

  std::map<int, std::size_t> est_ids, true_ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (estimated[i] < 0 || truth[i] < 0) {
      throw Error(ErrorCode::kInvalidArgument, "labels must be nonnegative");
    }
    if (estimated[i] > 0) est_ids.emplace(estimated[i], 0);
    if (truth[i] > 0) true_ids.emplace(truth[i], 0);
  }
  std::size_t k = 0;
  for (auto& [id, pos] : est_ids) pos = k++;
  k = 0;
  for (auto& [id, pos] : true_ids) pos = k++;

  const std::size_t size = std::max(est_ids.size(), true_ids.size());
  std::vector<std::vector<long long>> agree(size, std::vector<long long>(size, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (estimated[i] == 0 || truth[i] == 0) {
      if (estimated[i] == truth[i]) ++correct;
      continue;
    }
    ++agree[est_ids[estimated[i]]][true_ids[truth[i]]];
  }
  if (size > 0) {
    long long max_agree = 0;
    for (const auto& row : agree) max_agree = std::max(max_agree, *std::max_element(row.begin(), row.end()));
    std::vector<std::vector<long long>> cost(size, std::vector<long long>(size));
    for (std::size_t a = 0; a < size; ++a) {
      for (std::size_t b = 0; b < size; ++b) cost[a][b] = max_agree - agree[a][b];
    }
    const auto assignment = hungarian(cost);
    for (std::size_t a = 0; a < size; ++a) correct += static_cast<std::size_t>(agree[a][assignment[a]]);
  }
  return 100.0 * static_cast<double>(n - correct) / static_cast<double>(n);
}

TrialReport run_trials(const SceneSpec& spec, const RunConfig& cfg, std::size_t trials,
                       std::uint64_t base_seed) {
  if (trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be at least 1");
  TrialReport report;
  report.scene = spec.name();
  report.config = cfg;
  report.config.kind = scene_kind(spec);
  report.trials = trials;
  report.base_seed = base_seed;

  for (std::size_t t = 0; t < trials; ++t) {
    const std::uint64_t seed = base_seed + t;
    const SyntheticScene scene = generate_scene(spec, seed);
    RunConfig run = report.config;
    run.rng_seed = seed;
    const FitResult result = fit(scene.data, run);

    TrialRecord rec;
    rec.seed = seed;
    rec.error = fitting_error(result.labels, scene.true_labels);
    rec.instances = result.modes.size();
    rec.seconds = result.seconds.construction + result.seconds.reduction +
                  result.seconds.mode_seeking + result.seconds.labeling;
    rec.mode_seeking_seconds = result.seconds.mode_seeking;
    for (const Mode& m : result.modes) rec.modes.push_back(m.hypothesis_index);
    std::sort(rec.modes.begin(), rec.modes.end());
    ++report.instance_histogram[rec.instances];
    report.records.push_back(std::move(rec));
  }

  double sum = 0.0, seconds = 0.0;
  report.min_error = std::numeric_limits<double>::infinity();
  for (const TrialRecord& r : report.records) {
    sum += r.error;
    seconds += r.seconds;
    report.min_error = std::min(report.min_error, r.error);
  }
  const double count = static_cast<double>(trials);
  report.avg_error = sum / count;
  report.avg_seconds = seconds / count;
  double var = 0.0;
  for (const TrialRecord& r : report.records) var += (r.error - report.avg_error) * (r.error - report.avg_error);
  report.std_error = std::sqrt(var / count);
  return report;
}

std::string report_to_json(const TrialReport& report) {
  nlohmann::ordered_json j;
  j["scene"] = report.scene;
  nlohmann::ordered_json config;
  for (const auto& [key, value] : report.config.materialized()) config[key] = value;
  j["config"] = config;
  j["trials"] = report.trials;
  j["base_seed"] = report.base_seed;
  j["std_error"] = report.std_error;
  j["avg_error"] = report.avg_error;
  j["min_error"] = report.min_error;
  j["avg_seconds"] = report.avg_seconds;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [instances, count] : report.instance_histogram) hist[std::to_string(instances)] = count;
  j["instance_histogram"] = hist;
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (const TrialRecord& r : report.records) {
    records.push_back({{"seed", r.seed},
                       {"error", r.error},
                       {"instances", r.instances},
                       {"seconds", r.seconds},
                       {"mode_seeking_seconds", r.mode_seeking_seconds},
                       {"modes", r.modes}});
  }
  j["records"] = records;
  return j.dump(2) + "\n";
}

std::string report_to_text(const TrialReport& report) {
  std::ostringstream out;
  out << "scene " << report.scene << "  trials " << report.trials << "  base_seed "
      << report.base_seed << "\n";
  char line[128];
  std::snprintf(line, sizeof(line), "%-8s %8s %8s %8s %8s\n", "", "Std.", "Avg.", "Min.", "Time");
  out << line;
  std::snprintf(line, sizeof(line), "%-8s %8s %8s %8s %8s\n",
                std::string(to_string(report.config.variant)).c_str(),
                fixed2(report.std_error).c_str(), fixed2(report.avg_error).c_str(),
                fixed2(report.min_error).c_str(), fixed2(report.avg_seconds).c_str());
  out << line;
  out << "instances";
  for (const auto& [instances, count] : report.instance_histogram) {
    out << "  " << instances << ":" << count;
  }
  out << "\n";
  return out.str();
}

}  // namespace mshf
