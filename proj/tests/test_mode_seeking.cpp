#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "mshf/error.hpp"
#include "mshf/evaluation.hpp"
#include "mshf/mode_seeking.hpp"
#include "mshf/random.hpp"

namespace {

using mshf::HyperedgeIndex;
using mshf::ModeSeekingConfig;
using mshf::NeighborOverlap;
using mshf::PeakFallback;
using mshf::Variant;

mshf::Vertex make_vertex(std::vector<HyperedgeIndex> incidence, std::vector<double> residuals, double scale,
                         double weight) {
  mshf::Vertex v;
  v.params = {mshf::ModelKind::kLine2D, {0, 1, 0}};
  v.scale = scale;
  v.bandwidth = 1.0;
  v.weight = weight;
  v.incidence = std::move(incidence);
  v.incident_residuals = std::move(residuals);
  return v;
}

mshf::Hypergraph graph(std::vector<mshf::Vertex> vs, std::size_t n) {
  for (std::size_t i = 0; i < vs.size(); ++i) vs[i].hypothesis_index = i;
  return mshf::Hypergraph(mshf::ModelKind::kLine2D, n, std::move(vs));
}

// Random hypergraph whose incidence sets are perturbations of a few base sets,
// so that many pairs overlap strongly. Roughly a third of the vertices have a
// dense support and some weights tie.
mshf::Hypergraph random_graph(mshf::Rng& rng) {
  const std::size_t n = 20 + rng.index(120);
  const std::size_t m = 2 + rng.index(199);
  std::vector<std::vector<HyperedgeIndex>> bases;
  for (int b = 0; b < 4; ++b) {
    std::vector<HyperedgeIndex> base;
    const double density = rng.uniform() < 0.35 ? rng.uniform(0.2, 0.9) : rng.uniform(0.02, 0.12);
    for (std::size_t e = 0; e < n; ++e) {
      if (rng.uniform() < density) base.push_back(static_cast<HyperedgeIndex>(e));
    }
    if (base.empty()) base.push_back(static_cast<HyperedgeIndex>(rng.index(n)));
    bases.push_back(base);
  }
  std::vector<mshf::Vertex> vs;
  for (std::size_t i = 0; i < m; ++i) {
    const auto& base = bases[rng.index(bases.size())];
    std::set<HyperedgeIndex> inc;
    for (HyperedgeIndex e : base) {
      if (rng.uniform() < 0.9) inc.insert(e);
    }
    const std::size_t extra = rng.index(3);
    for (std::size_t k = 0; k < extra; ++k) inc.insert(static_cast<HyperedgeIndex>(rng.index(n)));
    if (inc.empty()) inc.insert(base[0]);
    const double s = rng.uniform(0.5, 2.0);
    std::vector<double> r;
    for (std::size_t k = 0; k < inc.size(); ++k) r.push_back(rng.uniform(0.0, 2.5 * s));
    const double w = rng.uniform() < 0.1 ? 1.0 : rng.uniform(0.0, 2.0);
    vs.push_back(make_vertex({inc.begin(), inc.end()}, r, s, w));
  }
  return graph(std::move(vs), n);
}

// Reference implementation, written directly from the definitions.
struct Oracle {
  const mshf::Hypergraph& g;
  std::vector<std::vector<double>> pref;

  explicit Oracle(const mshf::Hypergraph& graph) : g(graph) {
    for (const auto& v : g.vertices()) {
      std::vector<double> p(g.num_hyperedges(), 0.0);
      for (std::size_t k = 0; k < v.incidence.size(); ++k) p[v.incidence[k]] = std::exp(-v.incident_residuals[k] / v.scale);
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

  bool neighbors(std::size_t i, std::size_t j, double eps) const {
    std::vector<HyperedgeIndex> common;
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

  // Returns (mtd, omega_empty) under MSHF2 with containment overlap.
  std::pair<double, bool> mshf2(std::size_t i, double eps, PeakFallback fallback) const {
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
    if (fallback == PeakFallback::kGlobal) return {mshf1(i), true};
    return {any_neighbor ? nmax : 1.0, true};
  }
};

ModeSeekingConfig config(Variant variant, PeakFallback fallback = PeakFallback::kGlobal) {
  ModeSeekingConfig cfg;
  cfg.variant = variant;
  cfg.peak_fallback = fallback;
  return cfg;
}

std::vector<mshf::DecisionGraphEntry> entries_from(const std::vector<double>& mtd) {
  std::vector<mshf::DecisionGraphEntry> out;
  for (std::size_t i = 0; i < mtd.size(); ++i) {
    mshf::DecisionGraphEntry e;
    e.vertex_index = i;
    e.weight = static_cast<double>(mtd.size() - i);
    e.mtd = mtd[i];
    out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_CASE("preference values follow the exponential with the inlier mask") {
  const auto v = make_vertex({0, 1}, {0.0, 2.0}, 2.0, 1.0);
  const std::vector<double> residuals = {0.0, 2.0, 6.0};
  const auto p = mshf::preference_vector(v, residuals);
  CHECK(p.value(0) == 1.0);
  CHECK(p.value(1) == doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(p.value(2) == 0.0);
  CHECK(p.support() == v.incidence);
  const auto stored = mshf::preference_vector(v, 3);
  CHECK(stored.dense() == p.dense());
}

TEST_CASE("Tanimoto distance examples") {
  const std::vector<double> a = {1, 0}, b = {1, 1}, c = {0, 1}, z = {0, 0};
  const auto pa = mshf::PreferenceVector::from_dense(a);
  const auto pb = mshf::PreferenceVector::from_dense(b);
  const auto pc = mshf::PreferenceVector::from_dense(c);
  const auto pz = mshf::PreferenceVector::from_dense(z);
  CHECK(mshf::tanimoto_distance(pa, pb) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mshf::tanimoto_distance(pb, pb) == 0.0);
  CHECK(mshf::tanimoto_distance(pa, pc) == 1.0);
  bool both_zero = false;
  CHECK(mshf::tanimoto_distance(pz, pz, &both_zero) == 1.0);
  CHECK(both_zero);
  CHECK(mshf::tanimoto_distance(pa, pz, &both_zero) == 1.0);
  CHECK(!both_zero);
}

TEST_CASE("Tanimoto distance is symmetric, bounded and separates distinct vectors") {
  mshf::Rng rng(1);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + rng.index(40);
    std::vector<double> a(n), b(n);
    for (std::size_t e = 0; e < n; ++e) {
      a[e] = rng.uniform() < 0.5 ? std::exp(-rng.uniform(0, 2.5)) : 0.0;
      b[e] = rng.uniform() < 0.3 ? a[e] : (rng.uniform() < 0.5 ? std::exp(-rng.uniform(0, 2.5)) : 0.0);
    }
    a[rng.index(n)] = 1.0;
    const auto pa = mshf::PreferenceVector::from_dense(a);
    const auto pb = mshf::PreferenceVector::from_dense(b);
    const double ab = mshf::tanimoto_distance(pa, pb);
    CHECK(ab == mshf::tanimoto_distance(pb, pa));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(std::abs(mshf::tanimoto_distance(pa, pa)) <= 1e-15);
    if (a != b) CHECK(ab > 0.0);
  }
}

TEST_CASE("overlap ratios and neighbor sets") {
  CHECK(mshf::overlap_ratio(9, 10, 10, NeighborOverlap::kDice) == doctest::Approx(0.9));
  CHECK(mshf::overlap_ratio(9, 10, 10, NeighborOverlap::kContainment) == doctest::Approx(0.9));
  CHECK(mshf::overlap_ratio(9, 10, 10, NeighborOverlap::kJaccard) == doctest::Approx(9.0 / 11.0));
  CHECK(mshf::overlap_ratio(10, 10, 10, NeighborOverlap::kSumRatio) == doctest::Approx(0.5));
  CHECK(mshf::overlap_ratio(5, 5, 50, NeighborOverlap::kContainment) == 1.0);
  CHECK(mshf::overlap_ratio(0, 5, 50, NeighborOverlap::kDice) == 0.0);

  std::vector<HyperedgeIndex> ten(10), nine_of_ten(10), other(10);
  std::iota(ten.begin(), ten.end(), 0u);
  std::iota(nine_of_ten.begin(), nine_of_ten.end(), 1u);  // shares 1..9
  std::iota(other.begin(), other.end(), 20u);
  const std::vector<double> zeros(10, 0.0);
  const auto g = graph({make_vertex(ten, zeros, 1, 1), make_vertex(ten, zeros, 1, 2),
                        make_vertex(nine_of_ten, zeros, 1, 3), make_vertex(other, zeros, 1, 4)},
                       40);
  for (auto overlap : {NeighborOverlap::kDice, NeighborOverlap::kContainment, NeighborOverlap::kJaccard}) {
    CHECK(mshf::neighbor_set(g, 0, 0.8, overlap) == std::vector<std::size_t>{1, 2});
    CHECK(mshf::neighbor_set(g, 3, 0.8, overlap).empty());
  }
  CHECK(mshf::neighbor_set(g, 0, 0.8, NeighborOverlap::kSumRatio).empty());
}

TEST_CASE("three vertices at pairwise distance 0.9") {
  // Vertex i holds preference 1 on its own point 1 + i and p on the shared
  // point 0, so T = 1 - p^2 / (2 + p^2); p^2 = 2/9 makes every T equal 0.9.
  const double c2 = 2.0 / 9.0;
  std::vector<mshf::Vertex> ws;
  for (int i = 0; i < 3; ++i) {
    ws.push_back(make_vertex({0, static_cast<HyperedgeIndex>(1 + i)}, {-0.5 * std::log(c2), 0.0}, 1.0, 1.0 + i));
  }
  const auto e9 = mshf::minimum_t_distance(graph(ws, 4), config(Variant::kMSHF1));
  for (const auto& entry : e9) CHECK(entry.mtd == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(e9[2].omega_empty);
  CHECK(!e9[0].omega_empty);
}

TEST_CASE("an exact lower-weighted twin has zero MTD") {
  const auto a = make_vertex({0, 1, 2, 3}, {0.1, 0.2, 0.3, 0.4}, 1.0, 2.0);
  auto twin = a;
  twin.weight = 1.0;
  const auto other = make_vertex({5, 6, 7}, {0.0, 0.0, 0.0}, 1.0, 1.5);
  const auto g = graph({a, twin, other}, 8);
  for (auto variant : {Variant::kMSHF1, Variant::kMSHF2}) {
    const auto e = mshf::minimum_t_distance(g, config(variant));
    CHECK(e[1].mtd == 0.0);
  }
}

TEST_CASE("single vertex gets MTD 1") {
  const auto g = graph({make_vertex({0, 1}, {0, 0}, 1, 1)}, 2);
  const auto e = mshf::minimum_t_distance(g, config(Variant::kMSHF2));
  REQUIRE(e.size() == 1);
  CHECK(e[0].mtd == 1.0);
  CHECK(e[0].omega_empty);
}

TEST_CASE("neighbor-max fallback with no neighbors gives 1 everywhere") {
  // Staggered incidence sets: no set contains another and Dice stays below
  // 0.999.
  std::vector<mshf::Vertex> vs;
  for (int i = 0; i < 6; ++i) {
    vs.push_back(make_vertex({static_cast<HyperedgeIndex>(i), static_cast<HyperedgeIndex>(i + 1)}, {0, 0}, 1, i));
  }
  const auto g = graph(vs, 8);
  auto cfg = config(Variant::kMSHF2, PeakFallback::kNeighborMax);
  cfg.epsilon = 0.999;
  for (auto overlap : {NeighborOverlap::kDice, NeighborOverlap::kContainment}) {
    cfg.overlap = overlap;
    for (const auto& entry : mshf::minimum_t_distance(g, cfg)) {
      CHECK(entry.mtd == 1.0);
      CHECK(entry.omega_empty);
    }
  }
}

TEST_CASE("MTD matches the brute-force oracle on random hypergraphs") {
  mshf::Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = random_graph(rng);
    const Oracle oracle(g);
    const auto e1 = mshf::minimum_t_distance(g, config(Variant::kMSHF1));
    const auto e2 = mshf::minimum_t_distance(g, config(Variant::kMSHF2));
    const auto e3 = mshf::minimum_t_distance(g, config(Variant::kMSHF2, PeakFallback::kNeighborMax));
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(std::abs(e1[i].mtd - oracle.mshf1(i)) <= 1e-12);
      const auto [mtd2, empty2] = oracle.mshf2(i, 0.8, PeakFallback::kGlobal);
      CHECK(std::abs(e2[i].mtd - mtd2) <= 1e-12);
      CHECK(e2[i].omega_empty == empty2);
      const auto [mtd3, empty3] = oracle.mshf2(i, 0.8, PeakFallback::kNeighborMax);
      CHECK(std::abs(e3[i].mtd - mtd3) <= 1e-12);
      CHECK(e3[i].omega_empty == empty3);
      CHECK(e2[i].mtd >= e1[i].mtd - 1e-15);
    }
  }
}

TEST_CASE("select_modes examples") {
  auto sel = mshf::select_modes(entries_from({0.9, 0.85, 0.8, 0.2, 0.15}));
  CHECK(sel.drop_position == 3);
  CHECK(sel.modes == std::vector<std::size_t>{0, 1, 2});

  sel = mshf::select_modes(entries_from({0.9, 0.1}));
  CHECK(sel.modes == std::vector<std::size_t>{0});

  sel = mshf::select_modes(entries_from({0.9, 0.5, 0.1}));
  CHECK(sel.drop_position == 1);
  CHECK(sel.modes.size() == 1);

  sel = mshf::select_modes(entries_from({0.4, 0.4, 0.4}));
  CHECK(sel.degenerate);
  CHECK(sel.modes == std::vector<std::size_t>{0});
}

TEST_CASE("select_modes ignores input order") {
  mshf::Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t m = 2 + rng.index(60);
    std::vector<mshf::DecisionGraphEntry> entries;
    for (std::size_t i = 0; i < m; ++i) {
      mshf::DecisionGraphEntry e;
      e.vertex_index = i;
      e.weight = rng.uniform();
      e.mtd = rng.uniform() < 0.2 ? 0.5 : rng.uniform();
      entries.push_back(e);
    }
    const auto base = mshf::select_modes(entries);
    CHECK(std::is_sorted(base.sorted_mtd.rbegin(), base.sorted_mtd.rend()));
    for (std::size_t k = m - 1; k > 0; --k) std::swap(entries[k], entries[rng.index(k + 1)]);
    const auto shuffled = mshf::select_modes(entries);
    CHECK(shuffled.modes == base.modes);
    CHECK(shuffled.sorted_mtd == base.sorted_mtd);
  }
}

TEST_CASE("monotone relabeling of weights leaves MTD and modes unchanged") {
  mshf::Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = random_graph(rng);
    std::vector<mshf::Vertex> vs = g.vertices();
    for (auto& v : vs) v.weight = std::exp(3.0 * v.weight) + 7.0;
    const auto h = graph(vs, g.num_hyperedges());
    for (auto variant : {Variant::kMSHF1, Variant::kMSHF2}) {
      const auto a = mshf::minimum_t_distance(g, config(variant));
      const auto b = mshf::minimum_t_distance(h, config(variant));
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].mtd == b[i].mtd);
        CHECK(a[i].omega_empty == b[i].omega_empty);
      }
      CHECK(mshf::select_modes(a).modes == mshf::select_modes(b).modes);
    }
  }
}

TEST_CASE("labels prefer the mode with the smaller normalized residual") {
  // Point 0 lies on both modes at residual 0.5; mode B has the larger scale,
  // hence the smaller r / s (and the larger preference exp(-r / s)).
  const auto a = make_vertex({0, 1}, {0.5, 0.0}, 1.0, 2.0);
  const auto b = make_vertex({0, 2}, {0.5, 0.0}, 2.0, 1.0);
  const auto g = graph({a, b, make_vertex({4, 5}, {0, 0}, 1, 0.5)}, 4 + 2);
  CHECK(mshf::derive_labels(g, std::vector<std::size_t>{0, 1}) == std::vector<int>{2, 1, 2, 0, 0, 0});
  CHECK(mshf::derive_labels(g, std::vector<std::size_t>{1, 0}) == std::vector<int>{1, 2, 1, 0, 0, 0});

  // Exact ties go to the earlier mode.
  const auto c = make_vertex({0, 1}, {0.0, 0.0}, 1.0, 2.0);
  const auto d = make_vertex({0, 2}, {0.0, 0.0}, 2.0, 1.0);
  const auto t = graph({c, d}, 3);
  CHECK(mshf::derive_labels(t, std::vector<std::size_t>{1, 0}) == std::vector<int>{1, 2, 1});
}

TEST_CASE("labels stay inside the modes' inlier bands on a real scene") {
  const auto scene = mshf::generate_scene(mshf::parse_scene_spec("3-lines-2d"), 5);
  mshf::SamplerConfig sc;
  sc.hypothesis_count = 400;
  const auto pool = mshf::sample_hypotheses(scene.data, mshf::ModelKind::kLine2D, sc);
  const auto g = mshf::build_hypergraph(scene.data, pool.hypotheses, {});
  const auto red = mshf::reduce_hypergraph(g);
  const auto sel = mshf::select_modes(mshf::minimum_t_distance(red.reduced, config(Variant::kMSHF2)));
  const auto labels = mshf::derive_labels(red.reduced, sel.modes);
  REQUIRE(labels.size() == scene.data.size());
  for (std::size_t e = 0; e < labels.size(); ++e) {
    if (labels[e] == 0) continue;
    const auto& mode = red.reduced[sel.modes[labels[e] - 1]];
    CHECK(mshf::residual(mode.params, scene.data[e]) <= mshf::kInlierBand * mode.scale);
  }
}

TEST_CASE("invalid mode-seeking input") {
  const auto g = graph({make_vertex({0, 1}, {0, 0}, 1, 1), make_vertex({0, 1}, {0, 0}, 1, 2)}, 2);
  auto cfg = config(Variant::kMSHF2);
  cfg.epsilon = 1.0;
  CHECK_THROWS_AS(mshf::minimum_t_distance(g, cfg), mshf::Error);
  CHECK_THROWS_AS(mshf::select_modes(std::vector<mshf::DecisionGraphEntry>{}), mshf::Error);
  CHECK_THROWS_AS(mshf::derive_labels(g, std::vector<std::size_t>{}), mshf::Error);
  CHECK(mshf::parse_neighbor_overlap("Containment") == NeighborOverlap::kContainment);
  CHECK(mshf::parse_variant("mshf1") == Variant::kMSHF1);
  CHECK(mshf::parse_peak_fallback("neighbor-max") == PeakFallback::kNeighborMax);
  CHECK_THROWS_AS(mshf::parse_variant("mshf3"), mshf::Error);
}
