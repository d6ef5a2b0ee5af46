// Synthetic scene templates. Geometry is fixed per template; only noise,
// positions along structures and outliers depend on the seed.

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

#include "mshf/error.hpp"
#include "mshf/evaluation.hpp"
#include "mshf/random.hpp"

namespace mshf {
namespace {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

constexpr double kDeg = std::numbers::pi / 180.0;

struct Segment3 {
  Vector3d a, b;
};

struct Circle {
  double cx, cy, r;
};

[[noreturn]] void unknown(const std::string& name) {
  throw Error(ErrorCode::kUnknownTemplate, "unknown scene template '" + name + "'");
}

int parse_count(const std::string& text, const std::string& name) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) unknown(name);
  return v;
}

std::vector<Segment3> lines3d_geometry(int k) {
  const Vector3d p1(-15, -10, 0);
  const Vector3d p2(20, 15, 5);
  auto through = [](const Vector3d& c, Vector3d d, double half) {
    d.normalize();
    return Segment3{c - half * d, c + half * d};
  };
  if (k == 3) {
    // Pairwise skew and well separated.
    return {{{-40, -25, -20}, {40, -25, -20}},
            {{-25, -40, 15}, {-25, 40, 15}},
            {{20, 20, -40}, {20, 20, 40}}};
  }
  if (k == 4) {
    // All four meet at the origin.
    const Vector3d o = Vector3d::Zero();
    return {through(o, {1, 0, 0}, 40), through(o, {0, 1, 0}, 40), through(o, {0, 0, 1}, 40),
            through(o, {1, 1, 1}, 40)};
  }
  // Three lines through p1 and two through p2, then extra skew lines.
  std::vector<Segment3> s = {through(p1, {1, 0, 0}, 35), through(p1, {0, 1, 0}, 35),
                             through(p1, {0, 0, 1}, 35), through(p2, {0, 1, 1}, 35),
                             through(p2, {1, 0, -1}, 35)};
  if (k >= 6) s.push_back({{30, -40, -35}, {30, 40, -35}});
  if (k >= 7) s.push_back({{-40, 35, -30}, {40, 35, 30}});
  return s;
}

// Chords of the radius-45 disc; angles spread over [0, pi) with offsets from
// the origin cycling through -15, 0, 15 so intersections are scattered.
std::vector<std::pair<Vector2d, Vector2d>> lines2d_geometry(int k) {
  std::vector<std::pair<Vector2d, Vector2d>> out;
  for (int i = 0; i < k; ++i) {
    const double theta = (i + 0.5) * std::numbers::pi / k;
    const Vector2d dir(std::cos(theta), std::sin(theta));
    const Vector2d normal(-dir.y(), dir.x());
    const double rho = 15.0 * ((i % 3) - 1);
    const double half = std::sqrt(45.0 * 45.0 - rho * rho);
    const Vector2d c = rho * normal;
    out.emplace_back(c - half * dir, c + half * dir);
  }
  return out;
}

std::vector<std::pair<Vector2d, Vector2d>> star5_geometry() {
  std::vector<Vector2d> v;
  for (int i = 0; i < 5; ++i) {
    const double a = (90.0 + 72.0 * i) * kDeg;
    v.emplace_back(40.0 * std::cos(a), 40.0 * std::sin(a));
  }
  std::vector<std::pair<Vector2d, Vector2d>> out;
  for (int i = 0; i < 5; ++i) out.emplace_back(v[i], v[(i + 2) % 5]);
  return out;
}

std::vector<Circle> circles_geometry(int k) {
  if (k == 3) {
    std::vector<Circle> c;
    for (double a : {90.0, 210.0, 330.0}) {
      c.push_back({11.5 * std::cos(a * kDeg), 11.5 * std::sin(a * kDeg), 15.0});
    }
    return c;
  }
  // Four and five circles of different radii on a ring; each crosses its two
  // ring neighbours and no other circle.
  if (k == 4 || k == 5) {
    const double ring = k == 4 ? 14.0 : 17.0;
    const std::vector<double> radii = k == 4 ? std::vector<double>{13, 10, 12, 11}
                                             : std::vector<double>{14, 11, 13, 10, 12};
    std::vector<Circle> c;
    for (int i = 0; i < k; ++i) {
      const double a = (90.0 + 360.0 * i / k) * kDeg;
      c.push_back({ring * std::cos(a), ring * std::sin(a), radii[i]});
    }
    return c;
  }
  // Equal circles on a square grid; neighbours intersect.
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
  const int rows = (k + cols - 1) / cols;
  std::vector<Circle> c;
  for (int i = 0; i < k; ++i) {
    const int row = i / cols, col = i % cols;
    c.push_back({18.0 * (col - 0.5 * (cols - 1)), 18.0 * (row - 0.5 * (rows - 1)), 10.0});
  }
  return c;
}

// Two unit vectors spanning the plane orthogonal to d.
std::pair<Vector3d, Vector3d> orthonormal_complement(const Vector3d& d) {
  const Vector3d u = d.unitOrthogonal();
  return {u, d.normalized().cross(u)};
}

Matrix3d rotation(double rx, double ry, double rz) {
  return (Eigen::AngleAxisd(rz * kDeg, Vector3d::UnitZ()) *
          Eigen::AngleAxisd(ry * kDeg, Vector3d::UnitY()) *
          Eigen::AngleAxisd(rx * kDeg, Vector3d::UnitX()))
      .toRotationMatrix();
}

Matrix3d intrinsics() {
  Matrix3d k;
  k << 500, 0, 320, 0, 500, 240, 0, 0, 1;
  return k;
}

Matrix3d skew(const Vector3d& t) {
  Matrix3d s;
  s << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;
  return s;
}

ModelParams matrix_params(ModelKind kind, const Matrix3d& m) {
  Matrix3d n = m / m.norm();
  int best = 0;
  for (int i = 1; i < 9; ++i) {
    if (std::abs(n(i / 3, i % 3)) > std::abs(n(best / 3, best % 3))) best = i;
  }
  if (n(best / 3, best % 3) < 0.0) n = -n;
  return {kind, {n(0, 0), n(0, 1), n(0, 2), n(1, 0), n(1, 1), n(1, 2), n(2, 0), n(2, 1), n(2, 2)}};
}

class SceneBuilder {
 public:
  SceneBuilder(int dim, std::uint64_t seed) : dim_(dim), rng_(seed) {}

  Rng& rng() { return rng_; }

  void add(std::initializer_list<double> coords, int label) {
    points_.emplace_back(coords);
    labels_.push_back(label);
  }

  void add(const std::vector<double>& coords, int label) {
    points_.push_back(coords);
    labels_.push_back(label);
  }

  SyntheticScene finish(ModelKind kind) {
    // Fisher-Yates shuffle with the scene's own stream.
    for (std::size_t i = points_.size(); i > 1; --i) {
      const std::size_t j = rng_.index(i);
      std::swap(points_[i - 1], points_[j]);
      std::swap(labels_[i - 1], labels_[j]);
    }
    std::vector<double> coords;
    coords.reserve(points_.size() * dim_);
    for (const auto& p : points_) coords.insert(coords.end(), p.begin(), p.end());
    SyntheticScene scene;
    scene.kind = kind;
    scene.true_labels = labels_;
    scene.data = DataSet(dim_, std::move(coords), labels_);
    return scene;
  }

 private:
  int dim_;
  Rng rng_;
  std::vector<std::vector<double>> points_;
  std::vector<int> labels_;
};

void add_uniform_outliers(SceneBuilder& b, std::size_t count, const std::vector<double>& lo,
                          const std::vector<double>& hi) {
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<double> p(lo.size());
    for (std::size_t d = 0; d < lo.size(); ++d) p[d] = b.rng().uniform(lo[d], hi[d]);
    b.add(p, 0);
  }
}

SyntheticScene lines3d_scene(const std::vector<Segment3>& segments,
                             const std::vector<std::size_t>& counts, double sigma,
                             std::size_t outliers, std::uint64_t seed) {
  SceneBuilder b(3, seed);
  std::vector<ModelParams> params;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const Vector3d a = segments[k].a;
    const Vector3d d = segments[k].b - a;
    const auto [u, w] = orthonormal_complement(d);
    for (std::size_t i = 0; i < counts[k]; ++i) {
      const Vector3d p = a + b.rng().uniform() * d + sigma * (b.rng().normal() * u + b.rng().normal() * w);
      b.add({p.x(), p.y(), p.z()}, static_cast<int>(k + 1));
    }
    const Vector3d dir = d.normalized();
    params.push_back({ModelKind::kLine3D, {a.x(), a.y(), a.z(), dir.x(), dir.y(), dir.z()}});
  }
  add_uniform_outliers(b, outliers, {-50, -50, -50}, {50, 50, 50});
  SyntheticScene scene = b.finish(ModelKind::kLine3D);
  scene.true_params = std::move(params);
  scene.inlier_counts = counts;
  return scene;
}

SyntheticScene lines2d_scene(const std::vector<std::pair<Vector2d, Vector2d>>& segments,
                             std::size_t per_line, double sigma, std::size_t outliers,
                             std::uint64_t seed) {
  SceneBuilder b(2, seed);
  std::vector<ModelParams> params;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const Vector2d a = segments[k].first;
    const Vector2d d = segments[k].second - a;
    const Vector2d n = Vector2d(-d.y(), d.x()).normalized();
    for (std::size_t i = 0; i < per_line; ++i) {
      const Vector2d p = a + b.rng().uniform() * d + sigma * b.rng().normal() * n;
      b.add({p.x(), p.y()}, static_cast<int>(k + 1));
    }
    params.push_back({ModelKind::kLine2D, {n.x(), n.y(), -n.dot(a)}});
  }
  add_uniform_outliers(b, outliers, {-50, -50}, {50, 50});
  SyntheticScene scene = b.finish(ModelKind::kLine2D);
  scene.true_params = std::move(params);
  scene.inlier_counts.assign(segments.size(), per_line);
  return scene;
}

SyntheticScene circles_scene(const std::vector<Circle>& circles, std::size_t per_circle,
                             double sigma, std::size_t outliers, std::uint64_t seed) {
  SceneBuilder b(2, seed);
  std::vector<ModelParams> params;
  for (std::size_t k = 0; k < circles.size(); ++k) {
    const Circle& c = circles[k];
    for (std::size_t i = 0; i < per_circle; ++i) {
      const double a = 2.0 * std::numbers::pi * b.rng().uniform();
      const double r = c.r + sigma * b.rng().normal();
      b.add({c.cx + r * std::cos(a), c.cy + r * std::sin(a)}, static_cast<int>(k + 1));
    }
    params.push_back({ModelKind::kCircle2D, {c.cx, c.cy, c.r}});
  }
  add_uniform_outliers(b, outliers, {-60, -60}, {60, 60});
  SyntheticScene scene = b.finish(ModelKind::kCircle2D);
  scene.true_params = std::move(params);
  scene.inlier_counts.assign(circles.size(), per_circle);
  return scene;
}

Vector2d project(const Matrix3d& k, const Vector3d& x) {
  const Vector3d h = k * x;
  return h.hnormalized();
}

SyntheticScene homography_scene(std::size_t per_plane, double sigma, std::size_t outliers,
                                 std::uint64_t seed) {
  struct Patch {
    Vector3d center, u, v;
  };
  // Two walls meeting at a vertical edge and a floor below them, so every
  // pair of planes is separated by parallax well beyond the noise.
  const std::vector<Patch> patches = {
      {{-1.6, -0.5, 8.0}, {0, 1, 0}, Vector3d(1, 0, 1).normalized()},
      {{1.6, -0.5, 8.0}, {0, 1, 0}, Vector3d(-1, 0, 1).normalized()},
      {{0.0, 2.0, 7.0}, {1, 0, 0}, {0, 0, 1}},
  };
  const Matrix3d k = intrinsics();
  const Matrix3d r = rotation(3.0, 8.0, 2.0);
  const Vector3d t(-1.5, 0.3, 0.4);

  SceneBuilder b(4, seed);
  std::vector<ModelParams> params;
  for (std::size_t p = 0; p < patches.size(); ++p) {
    const Patch& patch = patches[p];
    for (std::size_t i = 0; i < per_plane; ++i) {
      const Vector3d x = patch.center + b.rng().uniform(-1.5, 1.5) * patch.u +
                         b.rng().uniform(-1.5, 1.5) * patch.v;
      const Vector2d x1 = project(k, x);
      const Vector2d x2 = project(k, r * x + t);
      b.add({x1.x() + sigma * b.rng().normal(), x1.y() + sigma * b.rng().normal(),
             x2.x() + sigma * b.rng().normal(), x2.y() + sigma * b.rng().normal()},
            static_cast<int>(p + 1));
    }
    // Plane n^T X = d in the first camera frame: H = K (R + t n^T / d) K^-1.
    const Vector3d n = patch.u.cross(patch.v).normalized();
    const double d = n.dot(patch.center);
    params.push_back(matrix_params(ModelKind::kHomography,
                                   k * (r + t * n.transpose() / d) * k.inverse()));
  }
  add_uniform_outliers(b, outliers, {0, 0, 0, 0}, {640, 480, 640, 480});
  SyntheticScene scene = b.finish(ModelKind::kHomography);
  scene.true_params = std::move(params);
  scene.inlier_counts.assign(patches.size(), per_plane);
  return scene;
}

SyntheticScene two_view_scene(std::size_t per_object, double sigma, std::size_t outliers,
                              std::uint64_t seed) {
  struct Body {
    Vector3d center;
    Matrix3d r;
    Vector3d t;
  };
  const std::vector<Body> bodies = {
      {{-2.0, 0.0, 8.0}, rotation(0, 5, 0), {0.8, 0.0, 0.0}},
      {{2.0, -0.5, 9.0}, rotation(4, 0, 0), {0.0, 0.7, 0.2}},
      {{0.0, 2.0, 7.0}, rotation(0, -3, 6), {-0.5, 0.3, 0.6}},
  };
  const Matrix3d k = intrinsics();
  const Matrix3d k_inv = k.inverse();

  SceneBuilder b(4, seed);
  std::vector<ModelParams> params;
  for (std::size_t o = 0; o < bodies.size(); ++o) {
    const Body& body = bodies[o];
    for (std::size_t i = 0; i < per_object; ++i) {
      const Vector3d x = body.center + Vector3d(b.rng().uniform(-1.5, 1.5),
                                                b.rng().uniform(-1.5, 1.5),
                                                b.rng().uniform(-1.5, 1.5));
      const Vector2d x1 = project(k, x);
      const Vector2d x2 = project(k, body.r * x + body.t);
      b.add({x1.x() + sigma * b.rng().normal(), x1.y() + sigma * b.rng().normal(),
             x2.x() + sigma * b.rng().normal(), x2.y() + sigma * b.rng().normal()},
            static_cast<int>(o + 1));
    }
    params.push_back(matrix_params(ModelKind::kFundamental,
                                   k_inv.transpose() * skew(body.t) * body.r * k_inv));
  }
  add_uniform_outliers(b, outliers, {0, 0, 0, 0}, {640, 480, 640, 480});
  SyntheticScene scene = b.finish(ModelKind::kFundamental);
  scene.true_params = std::move(params);
  scene.inlier_counts.assign(bodies.size(), per_object);
  return scene;
}

}  // namespace

std::string SceneSpec::name() const {
  switch (family) {
    case SceneFamily::kLines2D: return std::to_string(structures) + "-lines-2d";
    case SceneFamily::kLines3D: return std::to_string(structures) + "-lines-3d";
    case SceneFamily::kStar5: return "star5";
    case SceneFamily::kCircles: return std::to_string(structures) + "-circles";
    case SceneFamily::kUnbalancedLines: {
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof(buf), ratio);
      return "unbalanced-3-lines:" + std::string(buf, res.ptr);
    }
    case SceneFamily::kHomography: return "homography";
    case SceneFamily::kTwoView: return "two-view";
  }
  return "";
}

SceneSpec parse_scene_spec(const std::string& name) {
  SceneSpec spec;
  auto ends_with = [&name](const std::string& suffix) {
    return name.size() > suffix.size() &&
           name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  if (name == "star5") {
    spec.family = SceneFamily::kStar5;
    spec.structures = 5;
  } else if (name == "homography") {
    spec.family = SceneFamily::kHomography;
  } else if (name == "two-view") {
    spec.family = SceneFamily::kTwoView;
  } else if (name.rfind("unbalanced-3-lines", 0) == 0) {
    spec.family = SceneFamily::kUnbalancedLines;
    const std::string rest = name.substr(std::string("unbalanced-3-lines").size());
    if (!rest.empty()) {
      if (rest[0] != ':') unknown(name);
      const std::string text = rest.substr(1);
      const auto res = std::from_chars(text.data(), text.data() + text.size(), spec.ratio);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size() ||
          !(spec.ratio >= 1.0) || !(spec.ratio <= 100.0)) {
        unknown(name);
      }
    }
  } else if (ends_with("-lines-2d") || ends_with("-lines-3d")) {
    spec.family = ends_with("-lines-2d") ? SceneFamily::kLines2D : SceneFamily::kLines3D;
    spec.structures = parse_count(name.substr(0, name.size() - 9), name);
    if (spec.structures < 3 || spec.structures > 7) unknown(name);
  } else if (ends_with("-circles")) {
    spec.family = SceneFamily::kCircles;
    spec.structures = parse_count(name.substr(0, name.size() - 8), name);
    if (spec.structures < 3 || spec.structures > 16) unknown(name);
  } else {
    unknown(name);
  }
  return spec;
}

ModelKind scene_kind(const SceneSpec& spec) {
  switch (spec.family) {
    case SceneFamily::kLines2D:
    case SceneFamily::kStar5: return ModelKind::kLine2D;
    case SceneFamily::kLines3D:
    case SceneFamily::kUnbalancedLines: return ModelKind::kLine3D;
    case SceneFamily::kCircles: return ModelKind::kCircle2D;
    case SceneFamily::kHomography: return ModelKind::kHomography;
    case SceneFamily::kTwoView: return ModelKind::kFundamental;
  }
  return ModelKind::kLine2D;
}

std::vector<std::string> standard_templates() {
  return {"3-lines-3d", "4-lines-3d", "5-lines-3d", "6-lines-3d", "4-lines-2d", "star5",
          "3-circles", "4-circles", "5-circles", "16-circles", "unbalanced-3-lines:4",
          "homography", "two-view"};
}

SyntheticScene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  const bool circles = spec.family == SceneFamily::kCircles;
  const bool images = spec.family == SceneFamily::kHomography || spec.family == SceneFamily::kTwoView;
  double sigma = circles ? 0.5 : 1.0;
  if (spec.family == SceneFamily::kTwoView) sigma = 0.5;
  sigma = spec.inlier_sigma.value_or(sigma);
  const std::size_t per = spec.inliers_per_structure.value_or(100);
  const std::size_t outliers = spec.outliers.value_or(images ? 100 : 400);
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "inlier sigma must be nonnegative");
  }

  SyntheticScene scene;
  switch (spec.family) {
    case SceneFamily::kLines3D:
      scene = lines3d_scene(lines3d_geometry(spec.structures),
                            std::vector<std::size_t>(spec.structures, per), sigma, outliers, seed);
      break;
    case SceneFamily::kUnbalancedLines: {
      // Two lines gain inliers and the third loses them so that the largest
      // to smallest count ratio equals `ratio` with the total near 3 * per.
      const auto small = static_cast<std::size_t>(
          std::llround(3.0 * static_cast<double>(per) / (2.0 * spec.ratio + 1.0)));
      const auto large = static_cast<std::size_t>(std::llround(spec.ratio * static_cast<double>(small)));
      scene = lines3d_scene(lines3d_geometry(3), {large, large, small}, sigma, outliers, seed);
      break;
    }
    case SceneFamily::kLines2D:
      scene = lines2d_scene(lines2d_geometry(spec.structures), per, sigma, outliers, seed);
      break;
    case SceneFamily::kStar5:
      scene = lines2d_scene(star5_geometry(), per, sigma, outliers, seed);
      break;
    case SceneFamily::kCircles:
      scene = circles_scene(circles_geometry(spec.structures), per, sigma, outliers, seed);
      break;
    case SceneFamily::kHomography:
      scene = homography_scene(per, sigma, outliers, seed);
      break;
    case SceneFamily::kTwoView:
      scene = two_view_scene(per, sigma, outliers, seed);
      break;
  }
  scene.inlier_sigma = sigma;
  scene.outlier_count = outliers;
  return scene;
}

}  // namespace mshf
