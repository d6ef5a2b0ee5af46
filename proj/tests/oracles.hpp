#pragma once

// Independent reference implementations shared by the unit tests and the
// acceptance binary. They follow the definitions directly and trade speed
// for obviousness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "mshf/hypergraph.hpp"
#include "mshf/mode_seeking.hpp"
#include "mshf/random.hpp"

namespace oracle {

// Composite Simpson rule on [-1, 1].
template <class F>
double simpson(F f, int intervals = 20000) {
  const double h = 2.0 / intervals;
  double sum = f(-1.0) + f(1.0);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(-1.0 + i * h);
  return sum * h / 3.0;
}

inline double psi(double x) { return std::abs(x) <= 1.0 ? 0.75 * (1.0 - x * x) : 0.0; }

// Bandwidth with both kernel integrals taken by quadrature.
inline double quadrature_bandwidth(double scale, std::size_t n) {
  const double r = simpson([](double x) { return psi(x) * psi(x); });
  const double mu2 = simpson([](double x) { return x * x * psi(x); });
  return std::pow(243.0 * r / (35.0 * mu2 * static_cast<double>(n)), 0.2) * scale;
}

inline mshf::Vertex make_vertex(std::vector<mshf::HyperedgeIndex> incidence, std::vector<double> residuals,
                                double scale, double weight) {
  mshf::Vertex v;
  v.params = {mshf::ModelKind::kLine2D, {0, 1, 0}};
  v.scale = scale;
  v.bandwidth = 1.0;
  v.weight = weight;
  v.incidence = std::move(incidence);
  v.incident_residuals = std::move(residuals);
  return v;
}

inline mshf::Hypergraph graph(std::vector<mshf::Vertex> vs, std::size_t n) {
  for (std::size_t i = 0; i < vs.size(); ++i) vs[i].hypothesis_index = i;
  return mshf::Hypergraph(mshf::ModelKind::kLine2D, n, std::move(vs));
}

// Bare vertices carrying only a weight, for reduction checks.
inline mshf::Hypergraph weighted(const std::vector<double>& weights) {
  std::vector<mshf::Vertex> vs;
  for (double w : weights) vs.push_back(make_vertex({0, 1}, {0.0, 0.0}, 1.0, w));
  return graph(std::move(vs), 2);
}

// Random hypergraph with at most 200 vertices whose incidence sets perturb a
// few base sets, so many pairs overlap strongly. Roughly a third of the base
// sets are dense and some weights tie.
inline mshf::Hypergraph random_graph(mshf::Rng& rng) {
  const std::size_t n = 20 + rng.index(120);
  const std::size_t m = 2 + rng.index(199);
  std::vector<std::vector<mshf::HyperedgeIndex>> bases;
  for (int b = 0; b < 4; ++b) {
    std::vector<mshf::HyperedgeIndex> base;
    const double density = rng.uniform() < 0.35 ? rng.uniform(0.2, 0.9) : rng.uniform(0.02, 0.12);
    for (std::size_t e = 0; e < n; ++e) {
      if (rng.uniform() < density) base.push_back(static_cast<mshf::HyperedgeIndex>(e));
    }
    if (base.empty()) base.push_back(static_cast<mshf::HyperedgeIndex>(rng.index(n)));
    bases.push_back(base);
  }
  std::vector<mshf::Vertex> vs;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& base = bases[rng.index(bases.size())];
    std::set<mshf::HyperedgeIndex> inc;
    for (mshf::HyperedgeIndex e : base) {
      if (rng.uniform() < 0.9) inc.insert(e);
    }
    const std::size_t extra = rng.index(3);
    for (std::size_t k = 0; k < extra; ++k) inc.insert(static_cast<mshf::HyperedgeIndex>(rng.index(n)));
    if (inc.empty()) inc.insert(base[0]);
    const double s = rng.uniform(0.5, 2.0);
    std::vector<double> r;
    for (std::size_t k = 0; k < inc.size(); ++k) r.push_back(rng.uniform(0.0, 2.5 * s));
    const double w = rng.uniform() < 0.1 ? 1.0 : rng.uniform(0.0, 2.0);
    vs.push_back(make_vertex({inc.begin(), inc.end()}, r, s, w));
  }
  return graph(std::move(vs), n);
}

// Double-loop minimum T-distance over dense preference vectors.
struct Mtd {
  const mshf::Hypergraph& g;
  std::vector<std::vector<double>> pref;

  explicit Mtd(const mshf::Hypergraph& graph) : g(graph) {
    for (const auto& v : g.vertices()) {
      std::vector<double> p(g.num_hyperedges(), 0.0);
      for (std::size_t k = 0; k < v.incidence.size(); ++k) {
        p[v.incidence[k]] = std::exp(-v.incident_residuals[k] / v.scale);
      }
      pref.push_back(p);
    }
  }

  double tanimoto(std::size_t a, std::size_t b) const {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t e = 0; e < g.num_hyperedges(); ++e) {
      ab += pref[a][e] * pref[b][e];
      aa += pref[a][e] * pref[a][e];
      bb += pref[b][e] * pref[b][e];
    }
    return 1.0 - ab / (aa + bb - ab);
  }

  bool higher(std::size_t j, std::size_t i) const {
    return g[j].weight > g[i].weight || (g[j].weight == g[i].weight && j < i);
  }

  // Containment overlap |A n B| / min(|A|, |B|) above eps.
  bool neighbors(std::size_t i, std::size_t j, double eps) const {
    std::vector<mshf::HyperedgeIndex> common;
    std::set_intersection(g[i].incidence.begin(), g[i].incidence.end(), g[j].incidence.begin(),
                          g[j].incidence.end(), std::back_inserter(common));
    const double smaller = static_cast<double>(std::min(g[i].degree(), g[j].degree()));
    return static_cast<double>(common.size()) / smaller > eps;
  }

  double mshf1(std::size_t i) const {
    bool top = true;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j == i) continue;
      const double t = tanimoto(i, j);
      hi = std::max(hi, t);
      if (higher(j, i)) {
        top = false;
        lo = std::min(lo, t);
      }
    }
    return top ? hi : lo;
  }

  // (mtd, omega_empty) under the neighbor constraint.
  std::pair<double, bool> mshf2(std::size_t i, double eps, mshf::PeakFallback fallback) const {
    double lo = std::numeric_limits<double>::infinity(), nmax = 0.0;
    bool any_neighbor = false;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (j == i || !neighbors(i, j, eps)) continue;
      const double t = tanimoto(i, j);
      any_neighbor = true;
      nmax = std::max(nmax, t);
      if (higher(j, i)) lo = std::min(lo, t);
    }
    if (std::isfinite(lo)) return {lo, false};
    if (fallback == mshf::PeakFallback::kGlobal) return {mshf1(i), true};
    return {any_neighbor ? nmax : 1.0, true};
  }
};

// Best agreement over every partial one-to-one map from estimated ids
// 1..k_est to truth ids 1..k_true; outliers (0) match only outliers.
inline std::size_t best_agreement(const std::vector<int>& est, const std::vector<int>& truth, int k_est,
                                  int k_true, int id, std::vector<int>& map, std::vector<bool>& used) {
  if (id > k_est) {
    std::size_t agree = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (est[i] == 0) {
        agree += truth[i] == 0;
      } else if (map[est[i]] != 0 && map[est[i]] == truth[i]) {
        ++agree;
      }
    }
    return agree;
  }
  map[id] = 0;
  std::size_t best = best_agreement(est, truth, k_est, k_true, id + 1, map, used);
  for (int t = 1; t <= k_true; ++t) {
    if (used[t]) continue;
    used[t] = true;
    map[id] = t;
    best = std::max(best, best_agreement(est, truth, k_est, k_true, id + 1, map, used));
    used[t] = false;
  }
  map[id] = 0;
  return best;
}

// Labels must use ids 0..k without gaps on each side.
inline double fitting_error(const std::vector<int>& est, const std::vector<int>& truth) {
  const int k_est = *std::max_element(est.begin(), est.end());
  const int k_true = *std::max_element(truth.begin(), truth.end());
  std::vector<int> map(k_est + 1, 0);
  std::vector<bool> used(k_true + 1, false);
  const std::size_t agree = best_agreement(est, truth, k_est, k_true, 1, map, used);
  const std::size_t n = est.size();
  return 100.0 * static_cast<double>(n - agree) / static_cast<double>(n);
}

// Random label pair with at most 5 clusters per side, correlated so that the
// matching matters.
inline std::pair<std::vector<int>, std::vector<int>> random_label_pair(mshf::Rng& rng) {
  const std::size_t n = 1 + rng.index(60);
  const int k_true = 1 + static_cast<int>(rng.index(5));
  const int k_est = 1 + static_cast<int>(rng.index(5));
  std::vector<int> truth(n), est(n);
  for (std::size_t i = 0; i < n; ++i) {
    truth[i] = static_cast<int>(rng.index(k_true + 1));
    est[i] = rng.uniform() < 0.6 ? std::min(truth[i], k_est) : static_cast<int>(rng.index(k_est + 1));
  }
  return {est, truth};
}

// Random preference vector pair with partial support overlap; a is nonzero.
inline std::pair<std::vector<double>, std::vector<double>> random_preference_pair(mshf::Rng& rng) {
  const std::size_t n = 1 + rng.index(40);
  std::vector<double> a(n), b(n);
  for (std::size_t e = 0; e < n; ++e) {
    a[e] = rng.uniform() < 0.5 ? std::exp(-rng.uniform(0, 2.5)) : 0.0;
    b[e] = rng.uniform() < 0.3 ? a[e] : (rng.uniform() < 0.5 ? std::exp(-rng.uniform(0, 2.5)) : 0.0);
  }
  a[rng.index(n)] = 1.0;
  return {a, b};
}

// Random weight set: mostly uniform with a heavy upper tail.
inline std::vector<double> random_weights(mshf::Rng& rng) {
  std::vector<double> w(2 + rng.index(300));
  for (double& x : w) x = rng.uniform() < 0.1 ? 5.0 * rng.uniform() : rng.uniform();
  return w;
}

}  // namespace oracle
