#pragma once

// Euclidean subspace geometry: projections, reflections, principal angles
// between subspaces, and the scalar expansion algebra behind composition
// bounds. Everything here is a pure function of its inputs.

#include <Eigen/Dense>

#include <vector>

#include "polyb/error.hpp"

namespace polyb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Tolerance for unit-norm and orthonormality checks.
inline constexpr double kUnitTol = 1e-12;
/// Rank decisions and basis drop tolerance, relative.
inline constexpr double kRankTol = 1e-10;

/// An orthonormal basis of a linear subspace of R^d, possibly empty.
/// Basis vectors are the columns of basis().
class Frame {
public:
  explicit Frame(int ambient_dim);
  /// Wraps an already orthonormal set of columns; verifies orthonormality
  /// within kUnitTol.
  static Frame from_orthonormal(Mat columns);

  int ambient() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }
  Vec col(int i) const { return basis_.col(i); }

  /// Orthogonal projection of u onto the spanned subspace.
  Vec project(const Vec& u) const;
  /// Orthonormal basis of the orthogonal complement.
  Frame complement() const;
  bool contains(const Vec& u, double tol = kRankTol) const;

private:
  Mat basis_;
};

/// Orthogonal projection of u onto the line spanned by a unit vector.
Vec project_onto_normal(const Vec& u, const Vec& unit_normal);

/// Reflection of u about the hyperplane orthogonal to a unit vector:
/// u - 2<u,n>n.
Vec reflect(const Vec& u, const Vec& unit_normal);

/// Projection of u along direction v onto the hyperplane orthogonal to
/// unit_normal: u - (<u,n>/<v,n>) v. Fails with grazing-direction when
/// |<v,n>| < kUnitTol.
Vec parallel_project(const Vec& u, const Vec& v, const Vec& unit_normal);

/// Angle in [0,pi/2] between a nonzero vector and a subspace; pi/2 for the
/// zero subspace.
double angle_vec_subspace(const Vec& w, const Frame& e);

/// Largest principal angle between subspaces of equal dimension
/// (the Grassmann metric). Zero iff the subspaces coincide.
double grassmann_angle(const Frame& e, const Frame& f);

/// Smallest principal angle between E and F; positive iff the intersection
/// is trivial. Requires dim E <= ambient - dim F.
double min_angle(const Frame& e, const Frame& f);

/// Modified Gram-Schmidt with re-orthogonalization. Vectors whose residual
/// norm falls below kRankTol times their input norm are discarded, so the
/// result is a rank-revealing orthonormal frame of the span.
Frame orthonormalize(const std::vector<Vec>& vectors, int ambient_dim);

/// Norm of the wedge of the given vectors, computed as the square root of
/// the Gram determinant.
double wedge_norm(const std::vector<Vec>& vectors);

/// A scalar in [0,1] under the a+b-ab semigroup.
struct ExpansionScalar {
  explicit ExpansionScalar(double v);
  double value;
};

ExpansionScalar oplus(ExpansionScalar a, ExpansionScalar b);
/// n-fold oplus of equal terms; n >= 1.
ExpansionScalar oplus_n(ExpansionScalar x, int n);

/// Composition expansion bound
///   1 / sqrt( (+)_{d-1}(1 - sin^2 eps) (+) (+)_d lambda^{-2} ) > 1.
/// Takes the geometric angle eps in (0, pi/2] and applies the sine
/// internally; lambda > 1 is the per-step tangential expansion.
double sigma_bound(double eps_angle, double lambda, int dim);

}  // namespace polyb
