#pragma once

// The derivative of the billiard map in Jacobi coordinates (v-perp pairs),
// the velocity tangent flow along orbits, the stable bundle, Lyapunov
// spectra, velocity/normal fronts and collinearity detection.

#include <vector>

#include "polyb/billiard.hpp"

namespace polyb {

/// Orthonormal basis of velocity-perp at a state; columns of basis span
/// the orthogonal complement of state.velocity.
struct JacobiFrame {
  PhaseState state;
  Mat basis;  // d x (d-1)
};

/// Deterministic initial frame: coordinate vectors projected onto v-perp
/// and orthonormalized in index order.
JacobiFrame initial_jacobi_frame(const PhaseState& x);

/// Frame transport along the orbit: the previous basis is projected onto
/// the new velocity-perp and re-orthonormalized; deficiencies are filled
/// from the coordinate directions in index order. Deterministic, so runs
/// reproduce bit-for-bit in one floating-point environment.
JacobiFrame transport_frame(const JacobiFrame& prev, const PhaseState& next);

/// One step of the derivative cocycle in Jacobi coordinates,
///   (J, J') -> (A J + B J', C J'),
/// expressed in the source and target frame bases. B equals tau * A.
struct CocycleStep {
  StepStatus status = StepStatus::ok;
  Mat A, B, C;
  JacobiFrame source, target;
  double tau = 0.0;
  double theta = 0.0;  // incidence angle at the target face
  int face = -1;
};

/// Derivative at a single state, with a fresh deterministic source frame.
CocycleStep dstep(const Polytope& p, const ReflectionLaw& law, const PhaseState& x);

/// Cocycle steps along a recorded orbit with consistently transported
/// frames: steps[k].target is steps[k+1].source.
std::vector<CocycleStep> cocycle_steps(const Polytope& p, const ReflectionLaw& law,
                                       const OrbitRecord& orbit);

/// Product of A-blocks over [i,j]: the velocity tangent flow
/// v_i-perp -> v_j-perp in frame coordinates. The empty interval gives
/// the identity.
Mat velocity_flow(const std::vector<CocycleStep>& steps, int i, int j);

struct StableBundle {
  Mat h;               // graph map on v0-perp in frame coordinates
  double tail_bound;   // geometric bound on the dropped series tail
  double contraction;  // max C-block norm entering the series
  int truncation;
};

/// Truncated series for the stable graph H^s at the orbit start:
///   sum_j (-1)^j A_0^-1...A_j^-1 B_j C_{j-1}...C_0,  j < truncation.
/// The stable subspace in Jacobi coordinates is {(-H J', J')}; one step of
/// the cocycle maps it to the corresponding subspace downstream.
/// Fails with not-applicable when the C-blocks do not contract and with
/// insufficient-data when fewer than `truncation` steps are available.
StableBundle stable_bundle(const std::vector<CocycleStep>& steps, int truncation);

/// Same partial sum computed by the backward graph-transform recursion
/// seeded with zero at depth `truncation`; agrees with stable_bundle up
/// to roundoff.
Mat stable_bundle_graph_transform(const std::vector<CocycleStep>& steps, int truncation);

/// One backward graph-transform step, A^-1 B - A^-1 h_next C. Applying it
/// to the bundle computed one step downstream reproduces the bundle at the
/// current state up to exactly the first dropped series term.
Mat backward_graph_transform(const CocycleStep& s, const Mat& h_next);

struct LyapunovResult {
  std::vector<double> exponents;      // sorted descending, 2(d-1) values
  std::vector<double> half_spread;    // |first-half - second-half| / 2
  int steps_completed = 0;
  bool truncated = false;             // orbit ended before n_steps
  int reorth_interval = 10;
};

/// Lyapunov spectrum of the full block cocycle by QR re-orthonormalization.
LyapunovResult lyapunov_spectrum(const Polytope& p, const ReflectionLaw& law,
                                 const PhaseState& x0, int n_steps,
                                 int reorth_interval = 10);

struct FrontPair {
  int i = 0, j = 0;
  Frame velocity_front;  // span of velocities over [i,j]
  Frame normal_front;    // span of face normals over [i,j]
};

FrontPair fronts(const OrbitRecord& orbit, int i, int j);

struct Collinearity {
  int i = 0, j = 0;
  double angle = 0.0;  // Grassmann angle between the two fronts
  int dim = 0;
  bool minimal = false;
};

/// All windows [i,j] with j-i <= max_window whose velocity and normal
/// fronts have equal dimension and Grassmann angle below delta. Windows
/// containing no reported proper subinterval are flagged minimal.
/// max_window < 0 selects the default 4*dim.
std::vector<Collinearity> collinearity_scan(const OrbitRecord& orbit, double delta,
                                            int max_window = -1);

struct AlphaBeta {
  double alpha = 0.0;
  double beta = 0.0;
};

/// Decomposition v_next = alpha * eta + beta * v_prev for coplanar unit
/// vectors. When v_prev and eta are (numerically) parallel the convention
/// (alpha, beta) = (<v_next,eta>, 0) applies.
AlphaBeta alpha_beta(const Vec& v_prev, const Vec& eta, const Vec& v_next);

}  // namespace polyb
