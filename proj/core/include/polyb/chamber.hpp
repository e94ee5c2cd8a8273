#pragma once

// Slap-map analysis of the 3-simplex family: the second-iterate images of
// the apex ray on the base triangle, the trapping hexagon built from them,
// and numerical invariance checks on an inflated neighborhood.

#include <array>
#include <cstdint>

#include "polyb/billiard.hpp"

namespace polyb {

/// All planar points are given in base-plane coordinates: the hull frame
/// of simplex_family(3, h) with the vertical axis dropped, so the base
/// triangle is centred at the origin.
struct ChamberReport {
  double h = 0.0;
  bool defined = false;  // all three second apex images land inside the base

  std::array<Eigen::Vector2d, 3> base_vertices;  // A1 A2 A3
  Eigen::Vector2d c0;                            // foot of the apex
  std::array<Eigen::Vector2d, 3> c_images;       // C_k via the lateral face opposite A_k
  std::array<Eigen::Vector2d, 6> hexagon;        // cyclic, starting at M1

  double inflate = 0.0;  // neighborhood = hexagon scaled by this about its centroid
  int invariance_samples = 0;
  int invariance_escapes = 0;
  int pentagon_samples = 0;
  int pentagon_escapes = 0;

  int max_escape_time = -1;  // windowed escaping time maximum over the neighborhood grid
  bool escape_exceeded = false;
  int escape_horizon = 0;
  int escape_unresolved = 0;  // grid orbits that met the skeleton

  // Statistical coverage of the trapping claim: second-iterate orbits
  // started on a grid over the whole base triangle, followed until they
  // enter the neighborhood. Coverage, not proof.
  int entry_samples = 0;
  int entry_failures = 0;    // did not enter within the horizon
  int entry_unresolved = 0;  // met the skeleton before entering
  int max_entry_time = 0;    // second-iterate count until entry
};

/// Builds the chamber for simplex_family(3, h) and runs the grid checks.
/// grid_target == 0 constructs the geometry only. Heights at which some
/// second image leaves the base give defined == false (no exception).
ChamberReport chamber_analysis(double h, int grid_target = 10000, double inflate = 1.02,
                               int escape_horizon = 400);

/// Bisection on the predicate "the chamber is defined" between a defined
/// lo and an undefined hi.
double chamber_h0(double lo = 0.25, double hi = 1.0, double tol = 1e-4);

/// Largest linear-law contraction for which two billiard steps return all
/// sampled states (points over the neighborhood, velocities in the cap
/// <v,eta_base> > cos(lambda pi/2)) to the set; bisected over (0, 1/2].
/// Returns 0 when the chamber is undefined at this height.
double chamber_lambda0_estimate(double h, int point_samples = 200, int dir_samples = 5,
                                std::uint64_t seed = 7, double tol = 1e-3);

}  // namespace polyb
