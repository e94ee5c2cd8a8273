#include "polyb/chamber.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "polyb/hyperbolicity.hpp"
#include "polyb/sampling.hpp"

namespace polyb {

namespace {

using Eigen::Vector2d;

constexpr int kBaseFace = 3;  // simplex_family(3,h): face i is opposite vertex i

Vec lift(const Vector2d& q) {
  Vec x(3);
  x << q.x(), q.y(), 0.0;
  return x;
}

Vector2d drop(const Vec& x) { return Vector2d(x(0), x(1)); }

// Intersection of the line a + t(b - a) with the line through c
// perpendicular to dir.
Vector2d line_perp_intersect(const Vector2d& a, const Vector2d& b, const Vector2d& c,
                             const Vector2d& dir) {
  const Vector2d ab = b - a;
  const double denom = dir.dot(ab);
  if (std::abs(denom) < 1e-14) fail(errc::internal, "degenerate chamber lines");
  const double t = dir.dot(c - a) / denom;
  return a + t * ab;
}

// Signed-distance test against every edge of a convex polygon in cyclic
// order. margin > 0 demands the point be inside with that clearance;
// a negative margin tolerates boundary contact.
template <size_t N>
bool inside_convex(const std::array<Vector2d, N>& poly, const Vector2d& q, double margin) {
  double area2 = 0.0;  // polygon orientation from the shoelace sum
  for (size_t i = 0; i < N; ++i) {
    const Vector2d& a = poly[i];
    const Vector2d& b = poly[(i + 1) % N];
    area2 += a.x() * b.y() - b.x() * a.y();
  }
  const double orientation = area2 >= 0 ? 1.0 : -1.0;
  for (size_t i = 0; i < N; ++i) {
    const Vector2d& a = poly[i];
    const Vector2d& b = poly[(i + 1) % N];
    const Vector2d e = b - a;
    const double len = e.norm();
    if (len < 1e-15) continue;
    const double cross = e.x() * (q.y() - a.y()) - e.y() * (q.x() - a.x());
    if (cross * orientation < margin * len) return false;
  }
  return true;
}

struct Geometry {
  Polytope p;
  std::array<Vector2d, 3> a;
  Vector2d c0;
  std::array<Vector2d, 3> c;
  std::array<Vector2d, 6> hexagon;
  std::array<std::array<Vector2d, 5>, 3> pentagons;
  bool defined = false;
};

// Second slap images of the apex and the hexagon they span.
Geometry build_geometry(double h) {
  Geometry g{simplex_family(3, h), {}, Vector2d::Zero(), {}, {}, {}, false};
  const Polytope& p = g.p;

  // Vertex opposite face i is the one not incident to it.
  std::array<Vec, 4> verts;
  for (int i = 0; i < 4; ++i) {
    for (int v = 0; v < p.num_vertices(); ++v) {
      const auto& fs = p.vertex(v).faces;
      if (std::find(fs.begin(), fs.end(), i) == fs.end()) verts[i] = p.vertex(v).point;
    }
  }
  for (int k = 0; k < 3; ++k) g.a[k] = drop(verts[k]);
  const Vec apex = verts[kBaseFace];
  g.c0 = drop(apex);  // foot of the apex; the base plane is {z = 0}

  // C_k: from the apex along the inward normal of the lateral face
  // opposite A_k, expected to land in the open base face.
  bool all_on_base = true;
  for (int k = 0; k < 3; ++k) {
    const Vec& eta = p.face(k).normal;
    Vec q = apex;
    q -= p.margin(q, k) * eta;  // put the apex exactly on face k's plane
    auto images = slap_step(p, k, q);
    bool on_base = images.size() == 1 && images.front().first == kBaseFace &&
                   skeleton_distance(p, images.front().second, kBaseFace) > kActiveTol;
    if (!on_base) {
      all_on_base = false;
      continue;
    }
    g.c[k] = drop(images.front().second);
  }
  if (!all_on_base) return g;

  // Hexagon vertices: at corner A_k the edge through C_k perpendicular to
  // A_k C0, cut by the two cevians A_k C_j (j != k).
  std::array<Vector2d, 6> pts;
  int idx = 0;
  std::array<std::array<int, 2>, 3> slot{};  // slot[k][0] -> M_{k,j} with j = other(k,0)
  for (int k = 0; k < 3; ++k) {
    const Vector2d dir = g.a[k] - g.c0;
    int s = 0;
    for (int j = 0; j < 3; ++j) {
      if (j == k) continue;
      slot[k][s] = idx;
      pts[idx++] = line_perp_intersect(g.a[k], g.c[j], g.c[k], dir);
      ++s;
    }
  }

  // Cyclic order around the centroid, starting at M1 = A1C2 ^ perp at C1
  // and proceeding toward M2 = A2C1 ^ perp at C2.
  Vector2d centre = Vector2d::Zero();
  for (const auto& q : pts) centre += q;
  centre /= 6.0;
  std::array<int, 6> order{0, 1, 2, 3, 4, 5};
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    return std::atan2(pts[x].y() - centre.y(), pts[x].x() - centre.x()) <
           std::atan2(pts[y].y() - centre.y(), pts[y].x() - centre.x());
  });
  const int m1 = slot[0][1];  // pair (k=0, j=1)
  const int m2 = slot[1][0];  // pair (k=1, j=0)
  int pos1 = 0;
  for (int i = 0; i < 6; ++i)
    if (order[i] == m1) pos1 = i;
  const bool forward = order[(pos1 + 1) % 6] == m2;
  for (int i = 0; i < 6; ++i)
    g.hexagon[i] = pts[order[forward ? (pos1 + i) % 6 : (pos1 + 6 - i) % 6]];

  // Pentagon over the side A_a A_b: [C0, C_b, M_{b,a}, M_{a,b}, C_a].
  auto m_of = [&](int k, int j) { return pts[slot[k][j < k ? j : j - 1]]; };
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    g.pentagons[a] = {g.c0, g.c[b], m_of(b, a), m_of(a, b), g.c[a]};
  }
  g.defined = true;
  return g;
}

// Second slap iterate restricted to the base. The slap map is multi-valued
// on the skeleton, so every branch is followed; `closed` means each branch
// came back to the base in exactly two slaps.
struct SlapSquare {
  bool closed = true;
  std::vector<Vector2d> images;
};

SlapSquare slap_square(const Polytope& p, const Vector2d& q) {
  SlapSquare out;
  for (const auto& [face1, hit1] : slap_step(p, kBaseFace, lift(q))) {
    if (face1 == kBaseFace) {
      out.closed = false;
      continue;
    }
    for (const auto& [face2, hit2] : slap_step(p, face1, hit1)) {
      if (face2 == kBaseFace)
        out.images.push_back(drop(hit2));
      else
        out.closed = false;
    }
  }
  return out;
}

template <size_t N>
std::vector<Vector2d> polygon_grid(const std::array<Vector2d, N>& poly, int target) {
  Vector2d lo = poly[0], hi = poly[0];
  for (const auto& q : poly) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  std::vector<Vector2d> out;
  if (target <= 0) return out;
  // Oversample the bounding box so roughly `target` points land inside.
  // The irrational offset keeps grid lines off the symmetry axes, where
  // the slap map is multi-valued.
  const double off = 0.38196601125010515;
  const int side = std::max(2, static_cast<int>(std::ceil(std::sqrt(2.0 * target))));
  for (int i = 0; i <= side; ++i)
    for (int j = 0; j <= side; ++j) {
      Vector2d q(lo.x() + (hi.x() - lo.x()) * (i + off) / (side + 1),
                 lo.y() + (hi.y() - lo.y()) * (j + off) / (side + 1));
      if (inside_convex(poly, q, 1e-12)) out.push_back(q);
    }
  return out;
}

}  // namespace

ChamberReport chamber_analysis(double h, int grid_target, double inflate, int escape_horizon) {
  if (!(h > 0.0)) fail(errc::invalid_input, "height must be positive");
  if (!(inflate >= 1.0)) fail(errc::invalid_input, "inflate factor must be >= 1");
  ChamberReport rep;
  rep.h = h;
  rep.inflate = inflate;
  rep.escape_horizon = escape_horizon;

  Geometry g = build_geometry(h);
  rep.defined = g.defined;
  for (int k = 0; k < 3; ++k) rep.base_vertices[k] = g.a[k];
  rep.c0 = g.c0;
  if (!g.defined) return rep;
  rep.c_images = g.c;
  rep.hexagon = g.hexagon;
  if (grid_target <= 0) return rep;

  // Inflated neighborhood of the hexagon, still inside the base triangle.
  Vector2d centre = Vector2d::Zero();
  for (const auto& q : g.hexagon) centre += q;
  centre /= 6.0;
  std::array<Vector2d, 6> nbhd;
  for (int i = 0; i < 6; ++i) nbhd[i] = centre + inflate * (g.hexagon[i] - centre);
  for (const auto& q : nbhd)
    if (skeleton_distance(g.p, lift(q), kBaseFace) <= kActiveTol) {
      rep.defined = false;  // neighborhood pokes out of the base
      return rep;
    }

  // Pentagon second images stay inside the (closed) hexagon; contact on
  // the boundary is allowed.
  for (const auto& pent : g.pentagons) {
    for (const auto& q : polygon_grid(pent, grid_target / 3)) {
      ++rep.pentagon_samples;
      SlapSquare img = slap_square(g.p, q);
      bool ok = img.closed && !img.images.empty();
      for (const auto& y : img.images) ok = ok && inside_convex(g.hexagon, y, -1e-9);
      if (!ok) ++rep.pentagon_escapes;
    }
  }

  // Invariance of the inflated neighborhood under the second iterate,
  // and the escaping time over its grid.
  ReflectionLaw slap = ReflectionLaw::linear(0.0);
  for (const auto& q : polygon_grid(nbhd, grid_target)) {
    ++rep.invariance_samples;
    SlapSquare img = slap_square(g.p, q);
    bool ok = img.closed && !img.images.empty();
    for (const auto& y : img.images) ok = ok && inside_convex(nbhd, y, 1e-12);
    if (!ok) ++rep.invariance_escapes;

    if (skeleton_distance(g.p, lift(q), kBaseFace) <= 1e-12) continue;
    PhaseState x{kBaseFace, lift(q), g.p.face(kBaseFace).normal};
    EscapingTime et = escaping_time(g.p, slap, x, escape_horizon);
    if (et.truncated && !et.k) {
      ++rep.escape_unresolved;
    } else if (!et.k) {
      rep.escape_exceeded = true;
    } else {
      rep.max_escape_time = std::max(rep.max_escape_time, *et.k);
    }
  }

  // Every sampled base point should fall into the neighborhood under the
  // second iterate; report coverage over a base-triangle grid.
  const int entry_horizon = 200;
  std::array<Vector2d, 3> base{g.a[0], g.a[1], g.a[2]};
  for (Vector2d q : polygon_grid(base, grid_target / 4)) {
    // Keep strictly inside the base.
    q = 0.995 * q;
    ++rep.entry_samples;
    bool entered = false, lost = false;
    for (int it = 0; it < entry_horizon && !entered && !lost; ++it) {
      if (inside_convex(nbhd, q, 1e-12)) {
        entered = true;
        rep.max_entry_time = std::max(rep.max_entry_time, it);
        break;
      }
      SlapSquare next = slap_square(g.p, q);
      if (!next.closed || next.images.size() != 1)
        lost = true;
      else
        q = next.images.front();
    }
    if (lost)
      ++rep.entry_unresolved;
    else if (!entered)
      ++rep.entry_failures;
  }
  return rep;
}

double chamber_h0(double lo, double hi, double tol) {
  if (!(lo > 0.0 && hi > lo && tol > 0.0)) fail(errc::invalid_input, "bad bisection bracket");
  auto defined = [](double h) { return chamber_analysis(h, 0).defined; };
  if (!defined(lo)) fail(errc::invalid_input, "chamber undefined at the lower bracket");
  if (defined(hi)) fail(errc::invalid_input, "chamber defined at the upper bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (defined(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double chamber_lambda0_estimate(double h, int point_samples, int dir_samples,
                                std::uint64_t seed, double tol) {
  ChamberReport rep = chamber_analysis(h, 0);
  if (!rep.defined) return 0.0;
  Geometry g = build_geometry(h);

  Vector2d centre = Vector2d::Zero();
  for (const auto& q : g.hexagon) centre += q;
  centre /= 6.0;
  std::array<Vector2d, 6> nbhd;
  for (int i = 0; i < 6; ++i) nbhd[i] = centre + 1.02 * (g.hexagon[i] - centre);

  // Halton points over the neighborhood.
  Vector2d lo = nbhd[0], hi = nbhd[0];
  for (const auto& q : nbhd) {
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  std::vector<Vector2d> pts;
  for (std::uint64_t i = 0; pts.size() < static_cast<size_t>(point_samples) && i < 100000; ++i) {
    Vector2d q(lo.x() + (hi.x() - lo.x()) * halton(i, 2),
               lo.y() + (hi.y() - lo.y()) * halton(i, 3));
    if (inside_convex(nbhd, q, 1e-9)) pts.push_back(q);
  }

  const Vec eta = g.p.face(kBaseFace).normal;
  auto returns = [&](double lambda) {
    ReflectionLaw law = ReflectionLaw::linear(lambda);
    const double cap = lambda * M_PI_2;
    for (size_t i = 0; i < pts.size(); ++i) {
      for (int s = 0; s < dir_samples; ++s) {
        const std::uint64_t key = splitmix64(seed + 977 * i + s);
        const double alpha = cap * 0.999 * std::sqrt(uniform01(key));
        const double phi = 2.0 * M_PI * uniform01(splitmix64(key));
        Vec v(3);
        v << std::sin(alpha) * std::cos(phi), std::sin(alpha) * std::sin(phi),
            std::cos(alpha);
        PhaseState x{kBaseFace, lift(pts[i]), v};
        StepResult one = step(g.p, law, x);
        if (one.status != StepStatus::ok) return false;
        StepResult two = step(g.p, law, one.state);
        if (two.status != StepStatus::ok) return false;
        if (two.state.face != kBaseFace) return false;
        if (!inside_convex(nbhd, drop(two.state.point), 1e-12)) return false;
        if (two.state.velocity.dot(eta) <= std::cos(cap)) return false;
      }
    }
    return true;
  };

  double left = 1e-3, right = 0.5;
  if (!returns(left)) return 0.0;
  if (returns(right)) return right;
  while (right - left > tol) {
    const double mid = 0.5 * (left + right);
    (returns(mid) ? left : right) = mid;
  }
  return left;
}

}  // namespace polyb
