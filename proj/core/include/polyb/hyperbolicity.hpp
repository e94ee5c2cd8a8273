#pragma once

// Escaping times, cone escape certificates, the lambda_0(h) admissible
// curve for the simplex family, zigzag lengths, and aggregate
// hyperbolicity verdicts over sampled orbits.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "polyb/cocycle.hpp"

namespace polyb {

struct GeneratingCheck {
  bool ok = false;
  int first_failing_window = -1;  // start index of the first k-window of rank < d
};

/// True iff every window of k consecutive face normals along the record
/// has rank d (threshold kRankTol). Fails with insufficient-data when the
/// record holds fewer than k normals.
GeneratingCheck is_k_generating(const OrbitRecord& orbit, int k);

struct EscapingTime {
  std::optional<int> k;  // least certified window size; nullopt = exceeds horizon
  int horizon = 0;
  bool truncated = false;  // record ended before the horizon
};

/// Least k <= horizon such that every k-window of the orbit's normals up
/// to the horizon has rank d. Computed on the available prefix with a
/// truncation flag if the orbit terminates early.
EscapingTime escaping_time(const Polytope& p, const ReflectionLaw& law,
                           const PhaseState& x, int horizon,
                           const IterateOptions& opts = {});
EscapingTime escaping_time_of_record(const OrbitRecord& orbit, int dim, int horizon);

struct EscapeCertificate {
  double phi = 0.0;               // barycentric angle of the cone
  double mu = 0.0;                // phi + (f(pi/2) - pi/2)/2
  double zigzag_bound = 0.0;      // 2 / sin(mu)
  double step_lower_bound = 0.0;  // 2 cos((f(pi/2) + pi/2)/2)
  int reflection_bound = 0;       // ceil(zigzag_bound / step_lower_bound)
  bool valid = false;             // mu > 0, i.e. 2 phi > pi/2 - f(pi/2)
};

/// Escape bounds for a polyhedral cone under the given law; invalid
/// certificates are returned with valid == false rather than failing.
EscapeCertificate cone_certificate(const ConeSpec& cone, const ReflectionLaw& law);

struct Lambda0Point {
  double h = 0.0;
  double lambda0 = 0.0;
  double phi1 = 0.0;  // base-vertex barycentric angle
  double phi2 = 0.0;  // apex barycentric angle
};

struct Lambda0Curve {
  std::vector<Lambda0Point> points;
  int tip_index = -1;  // argmin of lambda0 over the grid
};

/// lambda_0(h) = 1 - 4 min(phi1, phi2)/pi over the given h-grid for the
/// d-simplex family.
Lambda0Curve lambda0_curve(int d, const std::vector<double>& h_grid);

/// Sum of velocity increments |v_{k+1} - v_k| along the record.
double zigzag_length(const OrbitRecord& orbit);

/// Billiard run inside a polyhedral cone, reflecting until the ray leaves
/// through the open end or max_reflections is reached.
struct ConeRun {
  int reflections = 0;
  double zigzag = 0.0;
  bool escaped = false;
  bool clean = true;  // false if a grazing or near-apex hit occurred
  std::vector<Vec> velocities;
};

ConeRun cone_run(const ConeSpec& cone, const ReflectionLaw& law, const Vec& point,
                 const Vec& velocity, int max_reflections = 100000);

/// Edge rays of the cone: column k satisfies <eta_i, r_k> = delta_ik.
Mat cone_edge_rays(const ConeSpec& cone);

enum class VerdictClass {
  uniformly_hyperbolic_evidence,
  inconclusive,
  obstruction_found,
};

const char* to_string(VerdictClass c) noexcept;

struct SamplingConfig {
  int n_orbits = 1000;
  int n_steps = 1000;
  int horizon = 1000;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct Verdict {
  std::string polytope;
  double spanning_eps = 0.0;
  std::vector<int> spanning_witness;
  std::vector<EscapeCertificate> vertex_certificates;
  std::map<int, int> t_histogram;  // finite escaping times
  std::optional<int> t_max;        // max finite T over resolved orbits
  int exceeded = 0;                // orbits whose T exceeds the horizon
  int unresolved = 0;              // orbits terminated before the horizon
  int orbits_sampled = 0;
  double sigma_empirical = 0.0;    // min window expansion over samples
  int sigma_window = 0;            // 2 * t_max
  VerdictClass classification = VerdictClass::inconclusive;
  std::string witness;
};

/// Samples orbits, certifies spanning and vertex cones, measures escaping
/// times and windowed minimum expansion, and aggregates the evidence.
Verdict verdict(const Polytope& p, const ReflectionLaw& law, const SamplingConfig& cfg);

}  // namespace polyb
