#include "polyb/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace polyb {

namespace {

// Lexicographic k-subsets of {0..n-1}.
bool next_combination(std::vector<int>& idx, int n) {
  const int k = static_cast<int>(idx.size());
  for (int i = k - 1; i >= 0; --i) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::vector<int> first_combination(int k) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  return idx;
}

double smallest_singular_value(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues().minCoeff();
}

// The recession cone {y : <eta_i,y> >= 0 for all i} is trivial iff the
// normals span R^d and no extreme-ray candidate (null direction of a
// (d-1)-subset of rank d-1) satisfies all constraints.
bool recession_cone_trivial(const std::vector<Halfspace>& faces, int d) {
  const int n = static_cast<int>(faces.size());
  Mat all(n, d);
  for (int i = 0; i < n; ++i) all.row(i) = faces[i].normal.transpose();
  Eigen::JacobiSVD<Mat> svd(all);
  if (svd.singularValues().minCoeff() <= kRankTol) return false;

  auto feasible = [&](const Vec& y) {
    for (const auto& f : faces)
      if (f.normal.dot(y) < -kRankTol) return false;
    return true;
  };

  if (d == 1) return false;  // a single half-line is never blocked
  auto idx = first_combination(d - 1);
  do {
    Mat sub(d - 1, d);
    for (int i = 0; i < d - 1; ++i) sub.row(i) = faces[idx[i]].normal.transpose();
    Eigen::JacobiSVD<Mat> s(sub, Eigen::ComputeFullV);
    if (s.singularValues().minCoeff() <= kRankTol) continue;  // rank < d-1
    Vec ray = s.matrixV().col(d - 1);
    if (feasible(ray) || feasible(-ray)) return false;
  } while (next_combination(idx, n));
  return true;
}

}  // namespace

double Polytope::margin(const Vec& x, int i) const {
  return faces_[i].normal.dot(x) - faces_[i].offset;
}

double Polytope::min_margin(const Vec& x) const {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < num_faces(); ++i) m = std::min(m, margin(x, i));
  return m;
}

Vec Polytope::interior_point() const {
  Vec c = Vec::Zero(dim_);
  for (const auto& v : vertices_) c += v.point;
  return c / static_cast<double>(vertices_.size());
}

double Polytope::diameter() const {
  double d2 = 0.0;
  for (int i = 0; i < num_vertices(); ++i)
    for (int j = i + 1; j < num_vertices(); ++j)
      d2 = std::max(d2, (vertices_[i].point - vertices_[j].point).squaredNorm());
  return std::sqrt(d2);
}

Polytope Polytope::scaled_to_unit_diameter() const {
  const double s = diameter();
  const Vec c = interior_point();
  std::vector<Halfspace> hs = faces_;
  for (auto& f : hs) f.offset = (f.offset - f.normal.dot(c)) / s;
  return from_inward_halfspaces(std::move(hs), name_);
}

std::optional<std::vector<Vec>> Polytope::generators() const {
  std::vector<Vec> gen;
  gen.reserve(faces_.size());
  for (const auto& f : faces_) {
    if (f.offset >= -kActiveTol) return std::nullopt;  // origin not interior
    gen.push_back(f.offset * f.normal);
  }
  return gen;
}

void Polytope::enumerate_vertices() {
  const int n = num_faces();
  const int d = dim_;
  vertices_.clear();
  if (n < d) return;

  auto idx = first_combination(d);
  do {
    Mat a(d, d);
    Vec b(d);
    for (int i = 0; i < d; ++i) {
      a.row(i) = faces_[idx[i]].normal.transpose();
      b(i) = faces_[idx[i]].offset;
    }
    Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() <= kRankTol * svd.singularValues().maxCoeff())
      continue;
    Vec x = svd.solve(b);
    if (min_margin(x) < -kActiveTol * std::max(1.0, x.norm())) continue;

    bool duplicate = false;
    for (const auto& v : vertices_)
      if ((v.point - x).norm() <= 1e-8) {
        duplicate = true;
        break;
      }
    if (duplicate) continue;

    PolytopeVertex v;
    v.point = std::move(x);
    vertices_.push_back(std::move(v));
  } while (next_combination(idx, n));

  // Deterministic order, then incidence annotations.
  std::sort(vertices_.begin(), vertices_.end(),
            [](const PolytopeVertex& a, const PolytopeVertex& b) {
              for (int i = 0; i < a.point.size(); ++i) {
                if (a.point(i) < b.point(i) - 1e-12) return true;
                if (a.point(i) > b.point(i) + 1e-12) return false;
              }
              return false;
            });
  for (auto& v : vertices_) {
    const double scale = std::max(1.0, v.point.norm());
    for (int i = 0; i < n; ++i)
      if (std::abs(margin(v.point, i)) <= kActiveTol * scale) v.faces.push_back(i);
  }
}

void Polytope::validate() {
  const int d = dim_;
  if (d < 2) fail(errc::invalid_input, "dimension must be at least 2");
  if (num_faces() < d + 1) fail(errc::invalid_input, "need at least dim+1 faces");

  for (int i = 0; i < num_faces(); ++i)
    for (int j = i + 1; j < num_faces(); ++j)
      if ((faces_[i].normal - faces_[j].normal).norm() < 1e-9 &&
          std::abs(faces_[i].offset - faces_[j].offset) < 1e-9)
        fail(errc::degenerate_input,
             "faces " + std::to_string(i) + " and " + std::to_string(j) + " coincide");

  if (!recession_cone_trivial(faces_, d))
    fail(errc::unbounded_polyhedron, "half-space intersection is unbounded");

  enumerate_vertices();
  if (vertices_.empty()) fail(errc::invalid_input, "empty polytope");

  // Every face must carry a genuine facet: at least d incident vertices
  // spanning an affine (d-1)-flat.
  for (int i = 0; i < num_faces(); ++i) {
    std::vector<Vec> pts;
    for (const auto& v : vertices_)
      if (std::find(v.faces.begin(), v.faces.end(), i) != v.faces.end())
        pts.push_back(v.point);
    bool ok = static_cast<int>(pts.size()) >= d;
    if (ok) {
      std::vector<Vec> diffs;
      for (size_t k = 1; k < pts.size(); ++k) diffs.push_back(pts[k] - pts[0]);
      ok = orthonormalize(diffs, d).dim() >= d - 1;
    }
    if (!ok)
      fail(errc::degenerate_input, "face " + std::to_string(i) + " is redundant");
  }

  if (min_margin(interior_point()) <= kActiveTol)
    fail(errc::degenerate_input, "polytope has empty interior");
}

Polytope Polytope::from_inward_halfspaces(std::vector<Halfspace> faces, std::string name) {
  Polytope p;
  if (faces.empty()) fail(errc::invalid_input, "no half-spaces");
  p.dim_ = static_cast<int>(faces.front().normal.size());
  for (auto& f : faces) {
    if (f.normal.size() != p.dim_)
      fail(errc::invalid_input, "inconsistent normal dimensions");
    double n = f.normal.norm();
    if (n < 1e-14) fail(errc::invalid_input, "zero face normal");
    f.normal /= n;
    f.offset /= n;
  }
  p.faces_ = std::move(faces);
  p.name_ = std::move(name);
  p.validate();
  return p;
}

Polytope Polytope::from_generators(const std::vector<Vec>& generators, std::string name) {
  if (generators.empty()) fail(errc::invalid_input, "no generators");
  const int d = static_cast<int>(generators.front().size());
  if (static_cast<int>(generators.size()) < d + 1)
    fail(errc::invalid_input, "need at least dim+1 generators");
  std::vector<Halfspace> hs;
  hs.reserve(generators.size());
  for (const Vec& g : generators) {
    double n = g.norm();
    if (n < 1e-14) fail(errc::invalid_input, "zero generator");
    // <x,g> <= <g,g>  becomes  <x,-g/|g|> >= -|g|.
    hs.push_back({-g / n, -n});
  }
  return from_inward_halfspaces(std::move(hs), std::move(name));
}

Polytope simplex_family(int d, double h) {
  if (d < 2) fail(errc::invalid_input, "simplex family needs d >= 2");
  if (!(h > 0.0)) fail(errc::invalid_input, "height must be positive");

  // Vertices in R^{d+1}.
  std::vector<Vec> raw(d + 1, Vec::Zero(d + 1));
  for (int j = 0; j < d; ++j) raw[j](j) = 1.0;
  for (int j = 0; j < d; ++j) raw[d](j) = (1.0 - h) / d;
  raw[d](d) = h;

  // Orthonormal coordinates of the affine hull: base-tangent directions
  // first, then the unit vector from the base centroid toward the apex.
  Vec centroid = Vec::Zero(d + 1);
  for (int j = 0; j < d; ++j) centroid += raw[j];
  centroid /= d;
  std::vector<Vec> tangent;
  for (int j = 1; j < d; ++j) tangent.push_back(raw[j] - raw[0]);
  Frame base = orthonormalize(tangent, d + 1);
  if (base.dim() != d - 1) fail(errc::internal, "degenerate base tangent");
  Vec up = raw[d] - centroid;
  up -= base.project(up);
  up.normalize();

  auto hull_coords = [&](const Vec& x) {
    Vec rel = x - centroid;
    Vec out(d);
    for (int i = 0; i < d - 1; ++i) out(i) = base.col(i).dot(rel);
    out(d - 1) = up.dot(rel);
    return out;
  };
  std::vector<Vec> w(d + 1);
  for (int j = 0; j <= d; ++j) w[j] = hull_coords(raw[j]);

  // Face i is the hyperplane through all vertices but w[i], oriented inward.
  std::vector<Halfspace> hs;
  for (int i = 0; i <= d; ++i) {
    std::vector<Vec> pts;
    for (int j = 0; j <= d; ++j)
      if (j != i) pts.push_back(w[j]);
    std::vector<Vec> diffs;
    for (size_t k = 1; k < pts.size(); ++k) diffs.push_back(pts[k] - pts[0]);
    Vec normal = orthonormalize(diffs, d).complement().col(0);
    if (normal.dot(w[i] - pts[0]) < 0) normal = -normal;
    hs.push_back({normal, normal.dot(pts[0])});
  }

  char label[64];
  std::snprintf(label, sizeof label, "simplex_d%d_h%.17g", d, h);
  return Polytope::from_inward_halfspaces(std::move(hs), label);
}

double regular_simplex_height(int d) {
  if (d < 2) fail(errc::invalid_input, "simplex family needs d >= 2");
  // All edges of simplex_family(d, h) have length sqrt(2) exactly at h = 1,
  // independent of d.
  return 1.0;
}

GeneralPositionReport is_general_position(const Polytope& p) {
  GeneralPositionReport rep;
  const int d = p.dim();
  const int n = p.num_faces();

  auto idx = first_combination(d);
  do {
    Mat m(d, d);
    for (int i = 0; i < d; ++i) m.col(i) = p.face(idx[i]).normal;
    if (smallest_singular_value(m) <= kRankTol) {
      rep.ok = false;
      rep.dependent_faces = idx;
      return rep;
    }
  } while (next_combination(idx, n));

  for (int v = 0; v < p.num_vertices(); ++v) {
    const auto& incident = p.vertex(v).faces;
    bool ok = static_cast<int>(incident.size()) == d;
    if (ok) {
      Mat m(d, d);
      for (int i = 0; i < d; ++i) m.col(i) = p.face(incident[i]).normal;
      ok = smallest_singular_value(m) > kRankTol;
    }
    if (!ok) {
      rep.ok = false;
      rep.bad_vertex = v;
      return rep;
    }
  }
  rep.ok = true;
  return rep;
}

SpanningReport spanning_epsilon(const Polytope& p) {
  SpanningReport rep;
  rep.epsilon = M_PI_2;
  const int d = p.dim();
  const int n = p.num_faces();

  auto idx = first_combination(d);
  do {
    for (int a = 0; a < d; ++a) {
      std::vector<Vec> rest;
      for (int i = 0; i < d; ++i)
        if (i != a) rest.push_back(p.face(idx[i]).normal);
      double angle = angle_vec_subspace(p.face(idx[a]).normal, orthonormalize(rest, d));
      if (angle < rep.epsilon) {
        rep.epsilon = angle;
        rep.witness.clear();
        rep.witness.push_back(idx[a]);
        for (int i = 0; i < d; ++i)
          if (i != a) rep.witness.push_back(idx[i]);
      }
    }
  } while (next_combination(idx, n));
  return rep;
}

ConeSpec vertex_cone(const Polytope& p, int vertex_index) {
  if (vertex_index < 0 || vertex_index >= p.num_vertices())
    fail(errc::invalid_input, "vertex index out of range");
  const auto& v = p.vertex(vertex_index);
  const int d = p.dim();
  if (static_cast<int>(v.faces.size()) != d)
    fail(errc::degenerate_vertex,
         "vertex " + std::to_string(vertex_index) + " has " +
             std::to_string(v.faces.size()) + " incident faces");
  ConeSpec cone;
  cone.normals.resize(d, d);
  for (int i = 0; i < d; ++i) cone.normals.col(i) = p.face(v.faces[i]).normal;
  cone.apex = v.point;
  if (smallest_singular_value(cone.normals) <= kRankTol)
    fail(errc::degenerate_vertex,
         "incident normals at vertex " + std::to_string(vertex_index) + " are dependent");
  return cone;
}

double barycentric_angle(const ConeSpec& cone) {
  const int d = cone.dim();
  if (cone.normals.cols() != d) fail(errc::degenerate_cone, "need d normals in R^d");
  for (int i = 0; i < d; ++i)
    if (std::abs(cone.normals.col(i).norm() - 1.0) > 1e-9)
      fail(errc::degenerate_cone, "cone normals must be unit vectors");
  Mat a = cone.normals.transpose();
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.singularValues().minCoeff() <= kRankTol * svd.singularValues().maxCoeff())
    fail(errc::degenerate_cone, "cone normals are linearly dependent");
  Vec x = svd.solve(Vec::Ones(d));
  const double ell = 1.0 / x.norm();
  Vec e = x * ell;
  for (int i = 0; i < d; ++i)
    if (std::abs(cone.normals.col(i).dot(e) - ell) > 1e-10)
      fail(errc::internal, "barycentric direction check failed");
  return std::asin(std::min(1.0, ell));
}

double skeleton_distance(const Polytope& p, const Vec& point, int face_index) {
  if (face_index < 0 || face_index >= p.num_faces())
    fail(errc::invalid_input, "face index out of range");
  const double scale = std::max(1.0, point.norm());
  if (std::abs(p.margin(point, face_index)) > kActiveTol * scale)
    fail(errc::invalid_input, "point does not lie on the face hyperplane");

  const Vec& eta = p.face(face_index).normal;
  double dist = std::numeric_limits<double>::infinity();
  for (int j = 0; j < p.num_faces(); ++j) {
    if (j == face_index) continue;
    Vec tang = p.face(j).normal - p.face(j).normal.dot(eta) * eta;
    const double tn = tang.norm();
    if (tn <= kRankTol) continue;  // parallel face, no ridge with face i
    dist = std::min(dist, p.margin(point, j) / tn);
  }
  return std::max(0.0, dist);
}

}  // namespace polyb
