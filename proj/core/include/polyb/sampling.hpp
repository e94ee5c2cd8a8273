#pragma once

// Deterministic sampling helpers: counter-based uniforms, Halton points,
// face-point and cosine-weighted direction samplers. Everything is a pure
// function of (seed, index), so sweeps reproduce exactly for any worker
// count.

#include <cstdint>

#include "polyb/billiard.hpp"

namespace polyb {

std::uint64_t splitmix64(std::uint64_t x);

/// Uniform double in [0,1) from a counter key.
double uniform01(std::uint64_t key);

/// Halton radical inverse for index >= 0 in the given prime base.
double halton(std::uint64_t index, int base);

/// Point strictly inside the given face: a Dirichlet-weighted combination
/// of the face's vertices mixed toward the face centroid.
Vec sample_face_point(const Polytope& p, int face, std::uint64_t seed, std::uint64_t index);

/// Unit inward direction at the face, cosine-weighted about the normal
/// (uniform on the tangent disk, lifted to the hemisphere).
Vec sample_inward_direction(const Polytope& p, int face, std::uint64_t seed,
                            std::uint64_t index);

/// Deterministic start state number `index`: faces are visited round-robin
/// and positions/directions come from Halton points scrambled by the seed.
PhaseState sample_state(const Polytope& p, std::uint64_t seed, std::uint64_t index);

}  // namespace polyb
