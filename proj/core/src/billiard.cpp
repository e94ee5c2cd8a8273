#include "polyb/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polyb {

namespace {

constexpr double kThetaPole = 1e-8;  // below this the law returns the normal

double clamp(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

// Deterministic tangential jitter used by the perturbation retry mode.
Vec jitter_velocity(const Vec& v, double angle, std::uint64_t salt) {
  std::uint64_t z = salt + 0x9e3779b97f4a7c15ull;
  auto next = [&z]() {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
  };
  Vec t(v.size());
  for (int i = 0; i < t.size(); ++i)
    t(i) = static_cast<double>(next() >> 11) * 0x1.0p-53 - 0.5;
  t -= t.dot(v) * v;
  double n = t.norm();
  if (n < 1e-12) return v;
  Vec out = std::cos(angle) * v + std::sin(angle) * (t / n);
  return out.normalized();
}

}  // namespace

ReflectionLaw ReflectionLaw::linear(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    fail(errc::invalid_input, "linear law needs lambda in [0,1]");
  ReflectionLaw law;
  law.kind_ = Kind::linear;
  law.lambda_sup_ = lambda;
  if (lambda == 0.0)
    law.name_ = "slap";
  else if (lambda == 1.0)
    law.name_ = "specular";
  else
    law.name_ = "linear:" + std::to_string(lambda);
  return law;
}

ReflectionLaw ReflectionLaw::custom(std::string name, std::function<double(double)> f,
                                    std::function<double(double)> df, double lambda_sup) {
  if (!f || !df) fail(errc::invalid_input, "custom law needs f and f'");
  if (!(lambda_sup > 0.0 && lambda_sup < 1.0))
    fail(errc::invalid_input, "custom law needs sup|f'| in (0,1)");
  if (std::abs(f(0.0)) > 1e-12) fail(errc::invalid_input, "law must fix 0");
  ReflectionLaw law;
  law.kind_ = Kind::custom;
  law.lambda_sup_ = lambda_sup;
  law.f_ = std::move(f);
  law.df_ = std::move(df);
  law.name_ = std::move(name);
  return law;
}

double ReflectionLaw::f(double theta) const {
  if (kind_ == Kind::linear) return lambda_sup_ * theta;
  return f_(theta);
}

double ReflectionLaw::df(double theta) const {
  if (kind_ == Kind::linear) return lambda_sup_;
  return df_(theta);
}

double ReflectionLaw::f_at_right_angle() const {
  if (kind_ == Kind::linear) return lambda_sup_ * M_PI_2;
  return f_(M_PI_2 - 1e-9);
}

double ReflectionLaw::sphere_contraction() const {
  if (kind_ == Kind::linear) {
    // sin(lambda t)/sin t increases in t, with supremum sin(lambda pi/2).
    if (lambda_sup_ == 0.0) return 0.0;
    return std::max(lambda_sup_, std::sin(lambda_sup_ * M_PI_2));
  }
  double s = 0.0;
  const int n = 20000;
  for (int i = 0; i <= n; ++i) {
    double t = (M_PI_2 - 1e-9) * i / n;
    double rot = t < 1e-6 ? df_(0.0) : std::sin(f_(t)) / std::sin(t);
    s = std::max({s, std::abs(df_(t)), rot});
  }
  return s;
}

PhaseState make_state(const Polytope& p, int face, Vec point, Vec velocity) {
  if (face < 0 || face >= p.num_faces()) fail(errc::invalid_input, "face index out of range");
  const double vn = velocity.norm();
  if (vn < 1e-14) fail(errc::invalid_input, "zero velocity");
  velocity /= vn;
  const Vec& eta = p.face(face).normal;
  if (std::abs(p.margin(point, face)) > kActiveTol * std::max(1.0, point.norm()))
    fail(errc::invalid_input, "point does not lie on the face hyperplane");
  if (skeleton_distance(p, point, face) <= 0.0)
    fail(errc::invalid_input, "point lies on the face boundary");
  if (velocity.dot(eta) <= 0.0)
    fail(errc::invalid_input, "velocity does not point inward");
  return PhaseState{face, std::move(point), std::move(velocity)};
}

FlightHit flight(const Polytope& p, const PhaseState& x, double guard) {
  FlightHit hit;
  double best = std::numeric_limits<double>::infinity();
  int best_face = -1;
  for (int j = 0; j < p.num_faces(); ++j) {
    if (j == x.face) continue;
    const double vn = x.velocity.dot(p.face(j).normal);
    if (vn >= 0.0) continue;  // moving away from or parallel to face j
    const double t = -p.margin(x.point, j) / vn;
    if (t <= 0.0) continue;
    if (t < best) {
      best = t;
      best_face = j;
    }
  }
  if (best_face < 0) fail(errc::internal, "flight found no face in a bounded polytope");

  hit.face = best_face;
  hit.tau = best;
  hit.point = x.point + best * x.velocity;
  // Snap onto the hyperplane so margins stay clean over long orbits.
  hit.point -= p.margin(hit.point, best_face) * p.face(best_face).normal;

  if (std::abs(x.velocity.dot(p.face(best_face).normal)) < kGrazingTol)
    hit.status = StepStatus::grazing;
  else if (skeleton_distance(p, hit.point, best_face) < guard)
    hit.status = StepStatus::hit_skeleton;
  else
    hit.status = StepStatus::ok;
  return hit;
}

Vec apply_law(const ReflectionLaw& law, const Vec& eta, const Vec& v) {
  const double ct = v.dot(eta);
  if (ct <= 0.0) fail(errc::invalid_input, "velocity must point to the normal side");
  if (law.is_specular()) return v;
  const double theta = std::acos(clamp(ct, -1.0, 1.0));
  if (theta < kThetaPole) return eta;
  Vec tang = v - ct * eta;
  tang.normalize();
  const double ft = law.f(theta);
  Vec out = std::cos(ft) * eta + std::sin(ft) * tang;
  return out.normalized();
}

StepResult step(const Polytope& p, const ReflectionLaw& law, const PhaseState& x) {
  StepResult res;
  FlightHit hit = flight(p, x);
  res.status = hit.status;
  res.tau = hit.tau;
  if (hit.status != StepStatus::ok) return res;

  const Vec& eta = p.face(hit.face).normal;
  res.theta = std::acos(clamp(std::abs(x.velocity.dot(eta)), 0.0, 1.0));
  Vec u = reflect(x.velocity, eta);  // specular part; <u,eta> > 0 now
  res.state.face = hit.face;
  res.state.point = std::move(hit.point);
  res.state.velocity = apply_law(law, eta, u);
  return res;
}

OrbitRecord iterate(const Polytope& p, const ReflectionLaw& law, const PhaseState& x0,
                    int n_steps, const IterateOptions& opts) {
  OrbitRecord rec;
  rec.states.push_back(x0);
  rec.normals.push_back(p.face(x0.face).normal);
  PhaseState x = x0;
  for (int k = 0; k < n_steps; ++k) {
    FlightHit hit = flight(p, x, opts.guard);
    if (hit.status == StepStatus::hit_skeleton && opts.perturb_on_skeleton) {
      for (int r = 0; r < opts.max_retries && hit.status == StepStatus::hit_skeleton; ++r) {
        PhaseState retry = x;
        retry.velocity = jitter_velocity(
            x.velocity, opts.perturb_angle,
            opts.seed ^ (static_cast<std::uint64_t>(k) << 20) ^ static_cast<std::uint64_t>(r));
        if (retry.velocity.dot(p.face(x.face).normal) <= 0.0) continue;
        FlightHit again = flight(p, retry, opts.guard);
        if (again.status != StepStatus::hit_skeleton) {
          x = retry;
          hit = again;
        }
      }
    }
    if (hit.status != StepStatus::ok) {
      rec.termination.kind = hit.status == StepStatus::grazing
                                 ? Termination::Kind::grazing
                                 : Termination::Kind::hit_skeleton;
      rec.termination.step = k + 1;
      return rec;
    }
    const Vec& eta = p.face(hit.face).normal;
    const double theta = std::acos(clamp(std::abs(x.velocity.dot(eta)), 0.0, 1.0));
    Vec u = reflect(x.velocity, eta);
    PhaseState next;
    next.face = hit.face;
    next.point = std::move(hit.point);
    next.velocity = apply_law(law, eta, u);
    rec.flight_times.push_back(hit.tau);
    rec.angles.push_back(theta);
    rec.normals.push_back(eta);
    rec.states.push_back(next);
    x = std::move(next);
  }
  rec.termination.kind = Termination::Kind::completed;
  return rec;
}

std::vector<std::pair<int, Vec>> slap_step(const Polytope& p, int face, const Vec& point,
                                           double skeleton_tol) {
  if (face < 0 || face >= p.num_faces()) fail(errc::invalid_input, "face index out of range");
  if (std::abs(p.margin(point, face)) > kActiveTol * std::max(1.0, point.norm()))
    fail(errc::invalid_input, "point does not lie on the face hyperplane");
  const Vec& eta = p.face(face).normal;

  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j < p.num_faces(); ++j) {
    if (j == face) continue;
    const double vn = eta.dot(p.face(j).normal);
    if (vn >= 0.0) continue;
    const double t = -p.margin(point, j) / vn;
    if (t > 0.0 && t < best) best = t;
  }
  if (!std::isfinite(best)) fail(errc::internal, "slap ray found no face");
  Vec q = point + best * eta;

  std::vector<std::pair<int, Vec>> images;
  for (int j = 0; j < p.num_faces(); ++j) {
    if (j == face) continue;
    if (std::abs(p.margin(q, j)) <= skeleton_tol) {
      Vec snapped = q - p.margin(q, j) * p.face(j).normal;
      images.emplace_back(j, std::move(snapped));
    }
  }
  if (images.empty()) fail(errc::internal, "slap hit no face plane");
  return images;
}

}  // namespace polyb
