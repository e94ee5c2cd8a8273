#include "polyb/sampling.hpp"

#include <cmath>

namespace polyb {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ull;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebull;
  x ^= x >> 31;
  return x;
}

double uniform01(std::uint64_t key) {
  return static_cast<double>(splitmix64(key) >> 11) * 0x1.0p-53;
}

double halton(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  std::uint64_t i = index + 1;  // skip the degenerate zeroth point
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

Vec sample_face_point(const Polytope& p, int face, std::uint64_t seed, std::uint64_t index) {
  std::vector<const Vec*> corners;
  for (const auto& v : p.vertices())
    for (int f : v.faces)
      if (f == face) corners.push_back(&v.point);
  if (corners.empty()) fail(errc::internal, "face without vertices");

  const std::uint64_t key = splitmix64(seed ^ 0x5face5ull) + index;
  Vec centroid = Vec::Zero(p.dim());
  for (const Vec* c : corners) centroid += *c;
  centroid /= static_cast<double>(corners.size());

  // Dirichlet(1,...,1) weights from exponential draws.
  double total = 0.0;
  Vec point = Vec::Zero(p.dim());
  for (size_t k = 0; k < corners.size(); ++k) {
    double u = uniform01(splitmix64(key) + k);
    double w = -std::log(std::max(u, 1e-300));
    point += w * (*corners[k]);
    total += w;
  }
  point /= total;
  // Pull toward the centroid to stay clear of the face boundary.
  return 0.8 * point + 0.2 * centroid;
}

Vec sample_inward_direction(const Polytope& p, int face, std::uint64_t seed,
                            std::uint64_t index) {
  const int d = p.dim();
  const Vec& eta = p.face(face).normal;
  Frame tangent = orthonormalize({eta}, d).complement();

  const std::uint64_t scramble = splitmix64(seed ^ 0xd1ull);
  // Gaussian direction in the tangent space via Box-Muller on Halton pairs.
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17};
  Vec g(d - 1);
  for (int i = 0; i < d - 1; ++i) {
    double u1 = halton(index + (scramble % 4096), primes[(2 * i) % 7]);
    double u2 = halton(index + (scramble % 4096), primes[(2 * i + 1) % 7]);
    u1 = std::min(std::max(u1, 1e-12), 1.0 - 1e-12);
    g(i) = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  double gn = g.norm();
  if (gn < 1e-12) g(0) = 1.0, gn = 1.0;
  g /= gn;

  // Uniform radius in the unit ball, then lift: cosine-weighted hemisphere.
  double u = uniform01(splitmix64(seed ^ 0xba11ull) + index);
  double radius = std::pow(u, 1.0 / (d - 1));
  radius = std::min(radius, 1.0 - 1e-9);
  Vec v = std::sqrt(1.0 - radius * radius) * eta;
  for (int i = 0; i < d - 1; ++i) v += radius * g(i) * tangent.col(i);
  return v.normalized();
}

PhaseState sample_state(const Polytope& p, std::uint64_t seed, std::uint64_t index) {
  for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
    const std::uint64_t key = index * 64 + attempt;
    int face = static_cast<int>((key + splitmix64(seed)) % p.num_faces());
    Vec point = sample_face_point(p, face, seed, key);
    Vec dir = sample_inward_direction(p, face, seed, key);
    if (dir.dot(p.face(face).normal) < 1e-6) continue;
    if (skeleton_distance(p, point, face) < 1e-6) continue;
    return PhaseState{face, std::move(point), std::move(dir)};
  }
  fail(errc::internal, "could not sample a valid start state");
}

}  // namespace polyb
