#include "polyb/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace polyb {

namespace {

void check_unit(const Vec& n, const char* what) {
  if (std::abs(n.norm() - 1.0) > kUnitTol)
    fail(errc::invalid_input, std::string(what) + " must be a unit vector");
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

Frame::Frame(int ambient_dim) : basis_(ambient_dim, 0) {
  if (ambient_dim < 1) fail(errc::invalid_input, "ambient dimension must be positive");
}

Frame Frame::from_orthonormal(Mat columns) {
  if (columns.rows() < 1) fail(errc::invalid_input, "ambient dimension must be positive");
  if (columns.cols() > columns.rows())
    fail(errc::invalid_input, "more basis vectors than ambient dimension");
  Mat g = columns.transpose() * columns;
  g -= Mat::Identity(columns.cols(), columns.cols());
  if (columns.cols() > 0 && g.cwiseAbs().maxCoeff() > 1e2 * kUnitTol)
    fail(errc::invalid_input, "columns are not orthonormal");
  Frame f(static_cast<int>(columns.rows()));
  f.basis_ = std::move(columns);
  return f;
}

Vec Frame::project(const Vec& u) const {
  if (dim() == 0) return Vec::Zero(ambient());
  return basis_ * (basis_.transpose() * u);
}

Frame Frame::complement() const {
  // Full orthogonal decomposition via Householder QR of the basis.
  if (dim() == 0) return from_orthonormal(Mat::Identity(ambient(), ambient()));
  Eigen::HouseholderQR<Mat> qr(basis_);
  Mat q = qr.householderQ();
  return from_orthonormal(q.rightCols(ambient() - dim()));
}

bool Frame::contains(const Vec& u, double tol) const {
  double n = u.norm();
  if (n == 0.0) return true;
  return (u - project(u)).norm() <= tol * n;
}

Vec project_onto_normal(const Vec& u, const Vec& unit_normal) {
  check_unit(unit_normal, "normal");
  return unit_normal.dot(u) * unit_normal;
}

Vec reflect(const Vec& u, const Vec& unit_normal) {
  check_unit(unit_normal, "normal");
  return u - 2.0 * unit_normal.dot(u) * unit_normal;
}

Vec parallel_project(const Vec& u, const Vec& v, const Vec& unit_normal) {
  check_unit(unit_normal, "normal");
  double vn = v.dot(unit_normal);
  if (std::abs(vn) < kUnitTol)
    fail(errc::grazing_direction, "direction is parallel to the target hyperplane");
  return u - (u.dot(unit_normal) / vn) * v;
}

double angle_vec_subspace(const Vec& w, const Frame& e) {
  double n = w.norm();
  if (n == 0.0) fail(errc::invalid_input, "zero vector has no angle");
  if (e.dim() == 0) return M_PI_2;
  Vec unit = w / n;
  double s = clamp01((unit - e.project(unit)).norm());
  return std::asin(s);
}

double grassmann_angle(const Frame& e, const Frame& f) {
  if (e.ambient() != f.ambient()) fail(errc::invalid_input, "ambient dimensions differ");
  if (e.dim() != f.dim()) fail(errc::invalid_input, "grassmann_angle needs equal dimensions");
  if (e.dim() == 0) return 0.0;
  // Principal cosines are the singular values of F^T E; the largest
  // principal angle is arccos of the smallest one.
  Mat m = f.basis().transpose() * e.basis();
  Eigen::JacobiSVD<Mat> svd(m);
  double cmin = clamp01(svd.singularValues().minCoeff());
  return std::acos(cmin);
}

double min_angle(const Frame& e, const Frame& f) {
  if (e.ambient() != f.ambient()) fail(errc::invalid_input, "ambient dimensions differ");
  if (e.dim() > e.ambient() - f.dim())
    fail(errc::invalid_input, "min_angle needs dim E <= ambient - dim F");
  if (e.dim() == 0 || f.dim() == 0) return M_PI_2;
  Mat m = f.basis().transpose() * e.basis();
  Eigen::JacobiSVD<Mat> svd(m);
  double cmax = clamp01(svd.singularValues().maxCoeff());
  return std::acos(cmax);
}

Frame orthonormalize(const std::vector<Vec>& vectors, int ambient_dim) {
  Mat q(ambient_dim, 0);
  for (const Vec& v : vectors) {
    if (v.size() != ambient_dim)
      fail(errc::invalid_input, "inconsistent ambient dimension");
    double n0 = v.norm();
    if (n0 < 1e-300) continue;
    Vec r = v;
    for (int pass = 0; pass < 2; ++pass)
      if (q.cols() > 0) r -= q * (q.transpose() * r);
    double rn = r.norm();
    if (rn < kRankTol * n0) continue;
    q.conservativeResize(Eigen::NoChange, q.cols() + 1);
    q.col(q.cols() - 1) = r / rn;
  }
  return Frame::from_orthonormal(std::move(q));
}

double wedge_norm(const std::vector<Vec>& vectors) {
  if (vectors.empty()) return 1.0;
  const auto k = static_cast<int>(vectors.size());
  Mat gram(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) gram(i, j) = gram(j, i) = vectors[i].dot(vectors[j]);
  double det = gram.determinant();
  return std::sqrt(std::max(0.0, det));
}

ExpansionScalar::ExpansionScalar(double v) : value(v) {
  if (!(v >= 0.0 && v <= 1.0))
    fail(errc::invalid_input, "expansion scalar outside [0,1]");
}

ExpansionScalar oplus(ExpansionScalar a, ExpansionScalar b) {
  return ExpansionScalar(a.value + b.value - a.value * b.value);
}

ExpansionScalar oplus_n(ExpansionScalar x, int n) {
  if (n < 1) fail(errc::invalid_input, "oplus_n needs n >= 1");
  // x (+) ... (+) x = 1 - (1-x)^n through the multiplicative isomorphism.
  ExpansionScalar acc = x;
  for (int i = 1; i < n; ++i) acc = oplus(acc, x);
  return acc;
}

double sigma_bound(double eps_angle, double lambda, int dim) {
  if (!(eps_angle > 0.0 && eps_angle <= M_PI_2))
    fail(errc::invalid_input, "angle must lie in (0, pi/2]");
  if (!(lambda > 1.0)) fail(errc::invalid_input, "lambda must exceed 1");
  if (dim < 2) fail(errc::invalid_input, "dimension must be at least 2");
  double s = std::sin(eps_angle);
  ExpansionScalar transversal = oplus_n(ExpansionScalar(clamp01(1.0 - s * s)), dim - 1);
  ExpansionScalar gain = oplus_n(ExpansionScalar(1.0 / (lambda * lambda)), dim);
  double inner = oplus(transversal, gain).value;
  return 1.0 / std::sqrt(inner);
}

}  // namespace polyb
