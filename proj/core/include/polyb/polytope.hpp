#pragma once

// H-representation polytopes with enumerated vertices, the simplex family,
// genericity and spanning certification, vertex cones and barycentric
// angles. Polytopes are immutable after construction.

#include <optional>
#include <string>
#include <vector>

#include "polyb/geometry.hpp"

namespace polyb {

/// Half-space {x : <x,normal> >= offset} with a unit inward normal.
struct Halfspace {
  Vec normal;
  double offset = 0.0;
};

struct PolytopeVertex {
  Vec point;
  std::vector<int> faces;  // indices of faces active at the vertex
};

/// Tolerance for deciding which constraints are active at a point.
inline constexpr double kActiveTol = 1e-10;

class Polytope {
public:
  /// Builds the polytope cut out by the half-spaces <x,p_j> <= <p_j,p_j>
  /// for nonzero generator points p_j. The origin is always interior.
  /// Fails if the intersection is unbounded or some generator does not
  /// contribute a genuine face.
  static Polytope from_generators(const std::vector<Vec>& generators,
                                  std::string name = {});

  /// Builds from inward half-spaces directly; normals are normalized to
  /// unit length. Same boundedness and redundancy validation.
  static Polytope from_inward_halfspaces(std::vector<Halfspace> faces,
                                         std::string name = {});

  int dim() const { return dim_; }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  const Halfspace& face(int i) const { return faces_.at(i); }
  const PolytopeVertex& vertex(int i) const { return vertices_.at(i); }
  const std::vector<Halfspace>& faces() const { return faces_; }
  const std::vector<PolytopeVertex>& vertices() const { return vertices_; }
  const std::string& name() const { return name_; }

  /// Signed margin of x against face i: <x,eta_i> - c_i (>= 0 inside).
  double margin(const Vec& x, int i) const;
  /// Least margin over all faces.
  double min_margin(const Vec& x) const;
  /// Average of the vertices; strictly interior for valid polytopes.
  Vec interior_point() const;
  /// Largest pairwise vertex distance.
  double diameter() const;
  /// Copy rescaled about the vertex centroid to unit diameter.
  Polytope scaled_to_unit_diameter() const;

  /// Generator points of the chart form, available when the origin is
  /// strictly interior: p_j = c_j * eta_j (note c_j < 0).
  std::optional<std::vector<Vec>> generators() const;

private:
  Polytope() = default;
  void enumerate_vertices();
  void validate();

  int dim_ = 0;
  std::vector<Halfspace> faces_;
  std::vector<PolytopeVertex> vertices_;
  std::string name_;
};

/// The d-simplex with base vertices e_1..e_d and apex
/// ((1-h)/d) sum e_j + h e_{d+1}, re-expressed in orthonormal coordinates
/// of its affine hull so the result lives in a genuine d-dimensional
/// space. Face i is opposite vertex i; the base face has index d.
/// Vertex i of the result corresponds to the i-th listed vertex (the apex
/// is last), and the hull frame puts the base centroid at the origin with
/// the apex on the positive last axis.
Polytope simplex_family(int d, double h);

/// Height parameter for which simplex_family(d, h) has all edges equal.
double regular_simplex_height(int d);

struct GeneralPositionReport {
  bool ok = false;
  /// On failure, either a d-subset of faces with dependent normals ...
  std::vector<int> dependent_faces;
  /// ... or a vertex whose incident normals are dependent (or more than d).
  std::optional<int> bad_vertex;
};

/// Checks that every d-subset of face normals is linearly independent and
/// that each vertex has exactly d incident faces with independent normals.
GeneralPositionReport is_general_position(const Polytope& p);

struct SpanningReport {
  double epsilon = 0.0;        // min over d-subsets of angle(eta_a, span rest)
  std::vector<int> witness;    // argmin subset, distinguished face first
};

/// Least angle between one normal of a d-subset and the span of the other
/// d-1; positive iff every d normals are linearly independent.
SpanningReport spanning_epsilon(const Polytope& p);

/// Polyhedral cone given by d linearly independent unit inward normals
/// (columns) and an apex.
struct ConeSpec {
  Mat normals;
  Vec apex;
  int dim() const { return static_cast<int>(normals.rows()); }
};

/// Cone of the faces incident to a vertex. Fails with degenerate-vertex if
/// the vertex does not have exactly dim independent incident normals.
ConeSpec vertex_cone(const Polytope& p, int vertex_index);

/// Aperture angle phi in (0, pi/2): sin(phi) is the distance from the
/// origin to the affine hyperplane through the cone's unit normals.
double barycentric_angle(const ConeSpec& cone);

/// Distance from a point on face i's hyperplane to the boundary of that
/// face within the hyperplane (0 on ridges and vertices).
double skeleton_distance(const Polytope& p, const Vec& point, int face_index);

}  // namespace polyb
