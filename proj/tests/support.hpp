#pragma once

// Shared helpers for the test suites: deterministic random vectors and
// frames, and a tiny fixed-seed generator independent of the library's
// sampling code.

#include <cmath>
#include <cstdint>
#include <vector>

#include "polyb/geometry.hpp"

namespace testsupport {

struct Rng {
  std::uint64_t state;
  explicit Rng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double gaussian() {
    double u1 = std::max(uniform(), 1e-300);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
};

inline polyb::Vec random_vector(Rng& rng, int d) {
  polyb::Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = rng.gaussian();
  return v;
}

inline polyb::Vec random_unit(Rng& rng, int d) {
  polyb::Vec v = random_vector(rng, d);
  while (v.norm() < 1e-6) v = random_vector(rng, d);
  return v.normalized();
}

inline polyb::Frame random_frame(Rng& rng, int d, int k) {
  std::vector<polyb::Vec> cols;
  for (int i = 0; i < k; ++i) cols.push_back(random_vector(rng, d));
  polyb::Frame f = polyb::orthonormalize(cols, d);
  while (f.dim() < k) {
    cols.push_back(random_vector(rng, d));
    f = polyb::orthonormalize(cols, d);
  }
  return f;
}

}  // namespace testsupport
