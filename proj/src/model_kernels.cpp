#include "mshf/model_kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "mshf/error.hpp"

namespace mshf {
namespace {

using Eigen::Matrix3d;
using Eigen::Vector2d;
using Eigen::Vector3d;

[[noreturn]] void degenerate(const char* what) {
  throw Error(ErrorCode::kDegenerateSubset, what);
}

// Unit Frobenius norm with the largest-magnitude entry made positive so that
// identical inputs always produce identical parameter vectors.
std::vector<double> normalized_values(const Matrix3d& m) {
  Matrix3d n = m / m.norm();
  int best = 0;
  for (int i = 1; i < 9; ++i) {
    if (std::abs(n(i / 3, i % 3)) > std::abs(n(best / 3, best % 3))) best = i;
  }
  if (n(best / 3, best % 3) < 0.0) n = -n;
  return {n(0, 0), n(0, 1), n(0, 2), n(1, 0), n(1, 1),
          n(1, 2), n(2, 0), n(2, 1), n(2, 2)};
}

// Similarity transform moving the centroid to the origin with mean distance
// sqrt(2).
Matrix3d isotropic_normalization(std::span<const Vector2d> pts) {
  Vector2d centroid = Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 0.0)) degenerate("coincident points");
  const double s = std::sqrt(2.0) / mean_dist;
  Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

bool any_three_collinear(std::span<const Vector3d> pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = j + 1; k < n; ++k) {
        const double det = pts[i].dot(pts[j].cross(pts[k]));
        const double scale = pts[i].norm() * pts[j].norm() * pts[k].norm();
        if (std::abs(det) * kMaxConditionNumber <= scale) return true;
      }
    }
  }
  return false;
}

double max_abs_coord(std::span<const Observation> subset) {
  double m = 1.0;
  for (const auto& obs : subset) {
    for (double v : obs) m = std::max(m, std::abs(v));
  }
  return m;
}

ModelParams fit_line2d(std::span<const Observation> s) {
  const Vector2d p(s[0][0], s[0][1]);
  const Vector2d q(s[1][0], s[1][1]);
  const Vector2d d = q - p;
  const double len = d.norm();
  if (len * kMaxConditionNumber <= max_abs_coord(s)) degenerate("coincident points");
  const double a = -d.y() / len;
  const double b = d.x() / len;
  return {ModelKind::kLine2D, {a, b, -(a * p.x() + b * p.y())}};
}

ModelParams fit_line3d(std::span<const Observation> s) {
  const Vector3d p(s[0][0], s[0][1], s[0][2]);
  const Vector3d q(s[1][0], s[1][1], s[1][2]);
  const Vector3d d = q - p;
  const double len = d.norm();
  if (len * kMaxConditionNumber <= max_abs_coord(s)) degenerate("coincident points");
  const Vector3d u = d / len;
  return {ModelKind::kLine3D, {p.x(), p.y(), p.z(), u.x(), u.y(), u.z()}};
}

ModelParams fit_circle(std::span<const Observation> s) {
  // Center relative to the first point solves the two perpendicular-bisector
  // equations (p_k - p_1) . c = |p_k - p_1|^2 / 2.
  const Vector2d p1(s[0][0], s[0][1]);
  const Vector2d d2 = Vector2d(s[1][0], s[1][1]) - p1;
  const Vector2d d3 = Vector2d(s[2][0], s[2][1]) - p1;
  Eigen::Matrix2d m;
  m << d2.x(), d2.y(), d3.x(), d3.y();
  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
  const auto sv = svd.singularValues();
  if (!(sv(1) > 0.0) || sv(0) > kMaxConditionNumber * sv(1)) {
    degenerate("collinear circle points");
  }
  const Vector2d rhs(0.5 * d2.squaredNorm(), 0.5 * d3.squaredNorm());
  const Vector2d c = m.partialPivLu().solve(rhs);
  const double radius = c.norm();
  if (!(radius > 0.0) || !std::isfinite(radius)) degenerate("zero radius");
  const Vector2d center = p1 + c;
  return {ModelKind::kCircle2D, {center.x(), center.y(), radius}};
}

void split_correspondences(std::span<const Observation> s,
                           std::vector<Vector2d>* x1,
                           std::vector<Vector2d>* x2) {
  for (const auto& obs : s) {
    x1->emplace_back(obs[0], obs[1]);
    x2->emplace_back(obs[2], obs[3]);
  }
}

ModelParams fit_homography(std::span<const Observation> s) {
  std::vector<Vector2d> x1, x2;
  split_correspondences(s, &x1, &x2);
  const Matrix3d t1 = isotropic_normalization(x1);
  const Matrix3d t2 = isotropic_normalization(x2);

  std::array<Vector3d, 4> n1, n2;
  for (int i = 0; i < 4; ++i) {
    n1[i] = t1 * x1[i].homogeneous();
    n2[i] = t2 * x2[i].homogeneous();
  }
  if (any_three_collinear(n1) || any_three_collinear(n2)) {
    degenerate("collinear homography correspondences");
  }

  // Two rows per correspondence of the DLT system A h = 0.
  Eigen::Matrix<double, 8, 9> a;
  for (int i = 0; i < 4; ++i) {
    const Vector3d& p = n1[i];
    const double u = n2[i].x();
    const double v = n2[i].y();
    a.row(2 * i) << 0, 0, 0, -p.x(), -p.y(), -1, v * p.x(), v * p.y(), v;
    a.row(2 * i + 1) << p.x(), p.y(), 1, 0, 0, 0, -u * p.x(), -u * p.y(), -u;
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 8, 9>> svd(a, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  if (!(sv(7) > 0.0) || sv(0) > kMaxConditionNumber * sv(7)) {
    degenerate("rank-deficient homography system");
  }
  const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
  Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

  const Eigen::JacobiSVD<Matrix3d> hsvd(hn);
  const auto hsv = hsvd.singularValues();
  if (!(hsv(2) > 0.0) || hsv(0) > kMaxConditionNumber * hsv(2)) {
    degenerate("singular homography");
  }
  const Matrix3d hm = t2.inverse() * hn * t1;
  return {ModelKind::kHomography, normalized_values(hm)};
}

// Real roots of c[3] x^3 + c[2] x^2 + c[1] x + c[0].
std::vector<double> real_cubic_roots(const std::array<double, 4>& c) {
  const double scale = std::max({std::abs(c[0]), std::abs(c[1]),
                                 std::abs(c[2]), std::abs(c[3])});
  std::vector<double> roots;
  if (!(scale > 0.0)) return roots;
  const double a3 = c[3] / scale, a2 = c[2] / scale, a1 = c[1] / scale,
               a0 = c[0] / scale;
  if (std::abs(a3) < 1e-10) {
    if (std::abs(a2) < 1e-10) {
      if (std::abs(a1) >= 1e-10) roots.push_back(-a0 / a1);
      return roots;
    }
    const double disc = a1 * a1 - 4.0 * a2 * a0;
    if (disc < 0.0) return roots;
    // Numerically stable quadratic roots.
    const double q = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
    roots.push_back(q / a2);
    if (q != 0.0) roots.push_back(a0 / q);
    return roots;
  }
  Matrix3d companion = Matrix3d::Zero();
  companion(0, 0) = -a2 / a3;
  companion(0, 1) = -a1 / a3;
  companion(0, 2) = -a0 / a3;
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  const Eigen::EigenSolver<Matrix3d> es(companion, false);
  for (int i = 0; i < 3; ++i) {
    const auto z = es.eigenvalues()(i);
    if (std::abs(z.imag()) > 1e-8 * std::max(1.0, std::abs(z.real()))) continue;
    double x = z.real();
    for (int it = 0; it < 3; ++it) {
      const double f = ((a3 * x + a2) * x + a1) * x + a0;
      const double df = (3.0 * a3 * x + 2.0 * a2) * x + a1;
      if (df == 0.0) break;
      x -= f / df;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<ModelParams> fit_fundamental(std::span<const Observation> s) {
  std::vector<Vector2d> x1, x2;
  split_correspondences(s, &x1, &x2);
  const Matrix3d t1 = isotropic_normalization(x1);
  const Matrix3d t2 = isotropic_normalization(x2);

  // Each correspondence gives x2^T F x1 = 0, linear in the entries of F.
  Eigen::Matrix<double, 7, 9> a;
  for (int i = 0; i < 7; ++i) {
    const Vector3d p = t1 * x1[i].homogeneous();
    const Vector3d q = t2 * x2[i].homogeneous();
    a.row(i) << q.x() * p.x(), q.x() * p.y(), q.x(), q.y() * p.x(),
        q.y() * p.y(), q.y(), p.x(), p.y(), 1.0;
  }
  const Eigen::JacobiSVD<Eigen::Matrix<double, 7, 9>> svd(a, Eigen::ComputeFullV);
  const auto sv = svd.singularValues();
  if (!(sv(6) > 0.0) || sv(0) > kMaxConditionNumber * sv(6)) {
    degenerate("rank-deficient seven-point system");
  }
  Matrix3d f1, f2;
  {
    const auto v1 = svd.matrixV().col(7);
    const auto v2 = svd.matrixV().col(8);
    f1 << v1(0), v1(1), v1(2), v1(3), v1(4), v1(5), v1(6), v1(7), v1(8);
    f2 << v2(0), v2(1), v2(2), v2(3), v2(4), v2(5), v2(6), v2(7), v2(8);
  }

  // det(F2 + x (F1 - F2)) as a cubic in x, from its values at 0, +1, -1 and
  // the leading coefficient det(F1 - F2).
  const Matrix3d d = f1 - f2;
  const double c0 = f2.determinant();
  const double c3 = d.determinant();
  const double p_plus = f1.determinant();
  const double p_minus = (f2 - d).determinant();
  const double c2 = 0.5 * (p_plus + p_minus) - c0;
  const double c1 = 0.5 * (p_plus - p_minus) - c3;
  if (std::max({std::abs(c0), std::abs(c1), std::abs(c2), std::abs(c3)}) < 1e-12) {
    degenerate("seven-point determinant vanishes identically");
  }

  std::vector<ModelParams> out;
  for (double x : real_cubic_roots({c0, c1, c2, c3})) {
    const Matrix3d fn = f2 + x * d;
    Matrix3d f = t2.transpose() * fn * t1;
    const Eigen::JacobiSVD<Matrix3d> fsvd(f, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector3d fs = fsvd.singularValues();
    if (!(fs(1) > 0.0)) continue;
    fs(2) = 0.0;
    f = fsvd.matrixU() * fs.asDiagonal() * fsvd.matrixV().transpose();
    out.push_back({ModelKind::kFundamental, normalized_values(f)});
  }
  if (out.empty()) degenerate("no real seven-point solution");
  return out;
}

double line2d_residual(const double* p, const double* x) {
  return std::abs(p[0] * x[0] + p[1] * x[1] + p[2]) / std::hypot(p[0], p[1]);
}

double line3d_residual(const double* p, const double* x) {
  const Vector3d d(p[3], p[4], p[5]);
  const Vector3d r(x[0] - p[0], x[1] - p[1], x[2] - p[2]);
  return r.cross(d).norm() / d.norm();
}

double circle_residual(const double* p, const double* x) {
  return std::abs(std::hypot(x[0] - p[0], x[1] - p[1]) - p[2]);
}

// First-order geometric error of the two independent DLT equations
// e = J^T (J J^T)^-1 e over the 4-vector (x, y, x', y').
double homography_sampson(const double* h, const double* x) {
  const double u = x[0], v = x[1], up = x[2], vp = x[3];
  const double hx1 = h[0] * u + h[1] * v + h[2];
  const double hx2 = h[3] * u + h[4] * v + h[5];
  const double hx3 = h[6] * u + h[7] * v + h[8];
  const double e1 = -hx2 + vp * hx3;
  const double e2 = hx1 - up * hx3;
  // Jacobian rows with respect to (x, y, x', y').
  const double j11 = -h[3] + vp * h[6], j12 = -h[4] + vp * h[7], j13 = 0.0,
               j14 = hx3;
  const double j21 = h[0] - up * h[6], j22 = h[1] - up * h[7], j23 = -hx3,
               j24 = 0.0;
  const double s11 = j11 * j11 + j12 * j12 + j13 * j13 + j14 * j14;
  const double s12 = j11 * j21 + j12 * j22 + j13 * j23 + j14 * j24;
  const double s22 = j21 * j21 + j22 * j22 + j23 * j23 + j24 * j24;
  const double det = s11 * s22 - s12 * s12;
  const double trace = s11 + s22;
  double err2;
  if (det > 1e-14 * trace * trace) {
    err2 = (s22 * e1 * e1 - 2.0 * s12 * e1 * e2 + s11 * e2 * e2) / det;
  } else {
    err2 = (e1 * e1 + e2 * e2) / std::max(trace, std::numeric_limits<double>::min());
  }
  return std::sqrt(std::max(err2, 0.0));
}

double fundamental_sampson(const double* f, const double* x) {
  const double u = x[0], v = x[1], up = x[2], vp = x[3];
  const double fx0 = f[0] * u + f[1] * v + f[2];
  const double fx1 = f[3] * u + f[4] * v + f[5];
  const double fx2 = f[6] * u + f[7] * v + f[8];
  const double ftx0 = f[0] * up + f[3] * vp + f[6];
  const double ftx1 = f[1] * up + f[4] * vp + f[7];
  const double e = up * fx0 + vp * fx1 + fx2;
  const double denom = fx0 * fx0 + fx1 * fx1 + ftx0 * ftx0 + ftx1 * ftx1;
  return std::abs(e) / std::sqrt(std::max(denom, std::numeric_limits<double>::min()));
}

using ResidualFn = double (*)(const double*, const double*);

ResidualFn residual_fn(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLine2D: return &line2d_residual;
    case ModelKind::kLine3D: return &line3d_residual;
    case ModelKind::kCircle2D: return &circle_residual;
    case ModelKind::kHomography: return &homography_sampson;
    case ModelKind::kFundamental: return &fundamental_sampson;
  }
  return &line2d_residual;
}

void check_params(const ModelParams& params) {
  if (params.values.size() != parameter_count(params.kind)) {
    throw Error(ErrorCode::kInvalidArgument,
                "parameter vector has wrong length for " +
                    std::string(to_string(params.kind)));
  }
}

}  // namespace

std::size_t minimal_subset_size(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLine2D: return 2;
    case ModelKind::kLine3D: return 2;
    case ModelKind::kCircle2D: return 3;
    case ModelKind::kHomography: return 4;
    case ModelKind::kFundamental: return 7;
  }
  return 0;
}

std::size_t parameter_count(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLine2D: return 3;
    case ModelKind::kLine3D: return 6;
    case ModelKind::kCircle2D: return 3;
    case ModelKind::kHomography: return 9;
    case ModelKind::kFundamental: return 9;
  }
  return 0;
}

std::vector<ModelParams> fit_minimal(ModelKind kind,
                                     std::span<const Observation> subset) {
  if (subset.size() != minimal_subset_size(kind)) {
    throw Error(ErrorCode::kInvalidArgument, "subset size does not match " +
                                                 std::string(to_string(kind)));
  }
  const auto dim = static_cast<std::size_t>(observation_dim(kind));
  for (const auto& obs : subset) {
    if (obs.size() != dim) {
      throw Error(ErrorCode::kInvalidArgument,
                  "observation dimension does not match " + std::string(to_string(kind)));
    }
  }
  switch (kind) {
    case ModelKind::kLine2D: return {fit_line2d(subset)};
    case ModelKind::kLine3D: return {fit_line3d(subset)};
    case ModelKind::kCircle2D: return {fit_circle(subset)};
    case ModelKind::kHomography: return {fit_homography(subset)};
    case ModelKind::kFundamental: return fit_fundamental(subset);
  }
  return {};
}

double residual(const ModelParams& params, Observation obs) {
  check_params(params);
  if (obs.size() != static_cast<std::size_t>(observation_dim(params.kind))) {
    throw Error(ErrorCode::kInvalidArgument, "observation dimension mismatch");
  }
  return residual_fn(params.kind)(params.values.data(), obs.data());
}

void residuals(const ModelParams& params, const DataSet& data,
               std::span<double> out) {
  check_params(params);
  if (data.dim() != observation_dim(params.kind) || out.size() != data.size()) {
    throw Error(ErrorCode::kInvalidArgument, "residual buffer or dimension mismatch");
  }
  const ResidualFn fn = residual_fn(params.kind);
  const double* p = params.values.data();
  const double* x = data.coords().data();
  const auto dim = static_cast<std::size_t>(data.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(p, x + i * dim);
}

}  // namespace mshf
