#pragma once

// The billiard step: straight flight to the next face, specular reflection,
// then the angle-contracting law. Orbits are recorded with flight times and
// incidence angles; skeleton hits and grazing flights terminate a record
// instead of throwing.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "polyb/polytope.hpp"

namespace polyb {

/// Angle map f on [0, pi/2) with f(0)=0 together with its derivative.
/// The linear family f(t) = lambda*t covers the slap (lambda=0) and
/// specular (lambda=1) labels; genuinely contracting laws have
/// sup|f'| < 1. Custom laws supply f' analytically.
class ReflectionLaw {
public:
  static ReflectionLaw linear(double lambda);
  static ReflectionLaw custom(std::string name, std::function<double(double)> f,
                              std::function<double(double)> df, double lambda_sup);

  double f(double theta) const;
  double df(double theta) const;
  /// sup |f'| over [0, pi/2).
  double lambda_sup() const { return lambda_sup_; }
  /// One-sided limit f(pi/2-).
  double f_at_right_angle() const;
  /// Operator-norm contraction of the induced sphere map: the maximum of
  /// |f'(theta)| and sin f(theta)/sin theta over [0, pi/2). Exceeds
  /// lambda_sup in general (the rotational directions stretch by
  /// sin f/sin theta).
  double sphere_contraction() const;

  bool is_linear() const { return kind_ == Kind::linear; }
  bool is_specular() const { return kind_ == Kind::linear && lambda_sup_ == 1.0; }
  bool is_slap() const { return kind_ == Kind::linear && lambda_sup_ == 0.0; }
  bool is_contracting() const { return lambda_sup_ > 0.0 && lambda_sup_ < 1.0; }
  const std::string& name() const { return name_; }

private:
  enum class Kind { linear, custom };
  Kind kind_ = Kind::linear;
  double lambda_sup_ = 1.0;
  std::function<double(double)> f_, df_;
  std::string name_;
};

/// A reflection: point in the open face, unit outgoing velocity with
/// positive component along the face's inward normal.
struct PhaseState {
  int face = -1;
  Vec point;
  Vec velocity;
};

/// Validates the PhaseState invariants against the polytope and returns
/// the state (velocity re-normalized). Fails with invalid-input otherwise.
PhaseState make_state(const Polytope& p, int face, Vec point, Vec velocity);

enum class StepStatus { ok, hit_skeleton, grazing };

struct FlightHit {
  StepStatus status = StepStatus::ok;
  int face = -1;       // face hit
  double tau = 0.0;    // flight time
  Vec point;           // hit point, snapped onto the face hyperplane
};

/// Default guard distance around the (d-2)-skeleton, quoted for polytopes
/// at unit-diameter scale.
inline constexpr double kSkeletonGuard = 1e-9;
/// A flight meeting the new face with |<v,eta>| below this is grazing.
inline constexpr double kGrazingTol = 1e-10;

/// Advances from x along its velocity to the first face hit. Reports
/// hit_skeleton when the hit lands within guard of the face boundary and
/// grazing when the hit is nearly tangential.
FlightHit flight(const Polytope& p, const PhaseState& x, double guard = kSkeletonGuard);

/// Applies the contracting law about unit normal eta to a unit vector v
/// with <v,eta> > 0: the result stays in span{v,eta} on the same side of
/// the face, making angle f(theta) with eta. At theta ~ 0 returns eta.
Vec apply_law(const ReflectionLaw& law, const Vec& eta, const Vec& v);

struct StepResult {
  StepStatus status = StepStatus::ok;
  PhaseState state;    // valid when status == ok
  double tau = 0.0;
  double theta = 0.0;  // incidence angle at the new face
};

/// One application of the billiard map: flight, specular reflection,
/// contracting law.
StepResult step(const Polytope& p, const ReflectionLaw& law, const PhaseState& x);

struct Termination {
  enum class Kind { completed, hit_skeleton, grazing };
  Kind kind = Kind::completed;
  int step = -1;  // step index at which the orbit stopped, -1 if none
};

struct OrbitRecord {
  std::vector<PhaseState> states;
  std::vector<double> flight_times;  // tau of the step into states[j+1]
  std::vector<double> angles;        // incidence angle at states[j+1]
  std::vector<Vec> normals;          // inward normal at each state's face
  Termination termination;

  int steps() const { return static_cast<int>(states.size()) - 1; }
  bool completed() const { return termination.kind == Termination::Kind::completed; }
};

struct IterateOptions {
  double guard = kSkeletonGuard;
  /// Retry a skeleton-bound step with the velocity jittered by
  /// perturb_angle radians instead of terminating. Off by default;
  /// sweeps opt in.
  bool perturb_on_skeleton = false;
  double perturb_angle = 1e-8;
  int max_retries = 8;
  std::uint64_t seed = 0;
};

OrbitRecord iterate(const Polytope& p, const ReflectionLaw& law, const PhaseState& x0,
                    int n_steps, const IterateOptions& opts = {});

/// The slap image(s) of a point on a face: advance along the face's inward
/// normal to the opposite boundary point q. Interior hits give one image;
/// if q lies on the skeleton every face active at q is returned.
std::vector<std::pair<int, Vec>> slap_step(const Polytope& p, int face, const Vec& point,
                                           double skeleton_tol = kSkeletonGuard);

}  // namespace polyb
