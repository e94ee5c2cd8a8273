#include "polyb/cocycle.hpp"

#include <algorithm>
#include <cmath>

namespace polyb {

namespace {

constexpr double kThetaPole = 1e-8;

// Orthonormal basis of v-perp from candidate columns, deficiencies filled
// from coordinate directions in index order. Candidates whose projection
// onto v-perp nearly vanishes are discarded outright; keeping them would
// normalize roundoff residue into the basis.
Mat vperp_basis(const Vec& v, const std::vector<Vec>& candidates) {
  const int d = static_cast<int>(v.size());
  std::vector<Vec> cols;
  cols.reserve(candidates.size() + d);
  auto add = [&](const Vec& c) {
    Vec r = c - c.dot(v) * v;
    const double n = r.norm();
    if (n > 1e-8) cols.push_back(r / n);
  };
  for (const Vec& c : candidates) add(c);
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e(i) = 1.0;
    add(e);
  }
  Frame f = orthonormalize(cols, d);
  if (f.dim() != d - 1) fail(errc::internal, "velocity-perp basis construction failed");
  return f.basis();
}

struct StepGeometry {
  const Vec* eta;   // inward normal at the face hit
  double tau;
  double theta;     // incidence angle
  const Vec* v_in;  // incoming velocity
  const Vec* v_out; // outgoing velocity after the law
  int face;
};

// Blocks of the derivative in the given source frame; also produces the
// transported target frame.
CocycleStep make_blocks(const ReflectionLaw& law, const JacobiFrame& source,
                        const StepGeometry& g) {
  const int d = static_cast<int>(g.eta->size());
  const Vec& eta = *g.eta;
  const Vec& v = *g.v_in;
  const Vec& vp = *g.v_out;

  CocycleStep s;
  s.status = StepStatus::ok;
  s.source = source;
  s.target.state.face = g.face;
  s.target.state.velocity = vp;
  s.tau = g.tau;
  s.theta = g.theta;
  s.face = g.face;

  std::vector<Vec> carried;
  for (int b = 0; b < d - 1; ++b) carried.push_back(source.basis.col(b));
  s.target.basis = vperp_basis(vp, carried);

  const Mat& src = source.basis;
  const Mat& dst = s.target.basis;
  s.A.resize(d - 1, d - 1);
  s.C.resize(d - 1, d - 1);

  const double vdn = v.dot(eta);  // -cos(theta), negative at a genuine hit
  const double ft = law.f(g.theta);
  const double dft = law.df(g.theta);

  // Sphere tangents within the plane span{v, eta} at the reflected and
  // outgoing velocities, both oriented toward increasing incidence angle:
  // the polar direction of the law's sphere map.
  Vec u = reflect(v, eta);
  Vec azim = u - u.dot(eta) * eta;
  const bool pole = g.theta < kThetaPole || azim.norm() < kThetaPole;
  Vec tu, tvp;
  if (!pole) {
    azim.normalize();
    tu = std::cos(g.theta) * azim - std::sin(g.theta) * eta;
    tvp = std::cos(ft) * azim - std::sin(ft) * eta;
  }
  const double rot = pole ? dft : std::sin(ft) / std::sin(g.theta);

  for (int b = 0; b < d - 1; ++b) {
    // First component: parallel projection along v onto eta-perp, then
    // orthogonal projection onto v'-perp.
    Vec y = src.col(b) - (src.col(b).dot(eta) / vdn) * v;
    y -= y.dot(vp) * vp;
    s.A.col(b) = dst.transpose() * y;

    // Second component: reflection followed by the law's sphere derivative,
    // f' along the plane of incidence and sin f/sin theta across it.
    Vec w = reflect(src.col(b), eta);
    Vec out;
    if (pole) {
      out = dft * w;
    } else {
      const double t = tu.dot(w);
      out = dft * t * tvp + rot * (w - t * tu);
    }
    s.C.col(b) = dst.transpose() * out;
  }
  s.B = g.tau * s.A;
  return s;
}

}  // namespace

JacobiFrame initial_jacobi_frame(const PhaseState& x) {
  JacobiFrame f;
  f.state = x;
  f.basis = vperp_basis(x.velocity, {});
  return f;
}

JacobiFrame transport_frame(const JacobiFrame& prev, const PhaseState& next) {
  JacobiFrame f;
  f.state = next;
  std::vector<Vec> carried;
  for (int b = 0; b < prev.basis.cols(); ++b) carried.push_back(prev.basis.col(b));
  f.basis = vperp_basis(next.velocity, carried);
  return f;
}

CocycleStep dstep(const Polytope& p, const ReflectionLaw& law, const PhaseState& x) {
  StepResult r = step(p, law, x);
  if (r.status != StepStatus::ok) {
    CocycleStep s;
    s.status = r.status;
    return s;
  }
  StepGeometry g{&p.face(r.state.face).normal, r.tau, r.theta,
                 &x.velocity, &r.state.velocity, r.state.face};
  CocycleStep s = make_blocks(law, initial_jacobi_frame(x), g);
  s.target.state = r.state;
  return s;
}

std::vector<CocycleStep> cocycle_steps(const Polytope& p, const ReflectionLaw& law,
                                       const OrbitRecord& orbit) {
  std::vector<CocycleStep> steps;
  if (orbit.states.empty()) return steps;
  steps.reserve(orbit.steps());
  JacobiFrame frame = initial_jacobi_frame(orbit.states.front());
  for (int k = 0; k < orbit.steps(); ++k) {
    StepGeometry g{&orbit.normals[k + 1], orbit.flight_times[k], orbit.angles[k],
                   &orbit.states[k].velocity, &orbit.states[k + 1].velocity,
                   orbit.states[k + 1].face};
    CocycleStep s = make_blocks(law, frame, g);
    s.target.state = orbit.states[k + 1];
    frame = s.target;
    steps.push_back(std::move(s));
  }
  return steps;
}

Mat velocity_flow(const std::vector<CocycleStep>& steps, int i, int j) {
  const int n = static_cast<int>(steps.size());
  if (i > j || i < 0 || j > n) fail(errc::invalid_input, "bad flow interval");
  const int m = steps.empty() ? 0 : static_cast<int>(steps.front().A.rows());
  Mat acc = Mat::Identity(m, m);
  for (int k = i; k < j; ++k) acc = steps[k].A * acc;
  return acc;
}

StableBundle stable_bundle(const std::vector<CocycleStep>& steps, int truncation) {
  if (truncation < 1) fail(errc::invalid_input, "truncation must be positive");
  if (static_cast<int>(steps.size()) < truncation)
    fail(errc::insufficient_data, "orbit shorter than the requested truncation");
  const int m = static_cast<int>(steps.front().A.rows());

  double cmax = 0.0, bmax = 0.0;
  for (int j = 0; j < truncation; ++j) {
    cmax = std::max(cmax, steps[j].C.operatorNorm());
    bmax = std::max(bmax, steps[j].B.operatorNorm());
  }
  if (cmax >= 1.0)
    fail(errc::not_applicable, "law is not contracting along this orbit");

  Mat h = Mat::Zero(m, m);
  Mat prefix_a_inv = Mat::Identity(m, m);  // A_0^-1 ... A_j^-1
  Mat c_prod = Mat::Identity(m, m);        // C_{j-1} ... C_0
  double sign = 1.0;
  for (int j = 0; j < truncation; ++j) {
    if (j > 0) c_prod = steps[j - 1].C * c_prod;
    prefix_a_inv = prefix_a_inv * steps[j].A.inverse();
    h += sign * prefix_a_inv * steps[j].B * c_prod;
    sign = -sign;
  }

  StableBundle out;
  out.h = std::move(h);
  out.contraction = cmax;
  out.truncation = truncation;
  out.tail_bound = bmax * std::pow(cmax, truncation) / (1.0 - cmax);
  return out;
}

Mat stable_bundle_graph_transform(const std::vector<CocycleStep>& steps, int truncation) {
  if (truncation < 1) fail(errc::invalid_input, "truncation must be positive");
  if (static_cast<int>(steps.size()) < truncation)
    fail(errc::insufficient_data, "orbit shorter than the requested truncation");
  const int m = static_cast<int>(steps.front().A.rows());
  Mat h = Mat::Zero(m, m);
  for (int j = truncation - 1; j >= 0; --j) h = backward_graph_transform(steps[j], h);
  return h;
}

Mat backward_graph_transform(const CocycleStep& s, const Mat& h_next) {
  Mat a_inv = s.A.inverse();
  return a_inv * s.B - a_inv * h_next * s.C;
}

LyapunovResult lyapunov_spectrum(const Polytope& p, const ReflectionLaw& law,
                                 const PhaseState& x0, int n_steps, int reorth_interval) {
  if (n_steps < 1) fail(errc::invalid_input, "need at least one step");
  if (reorth_interval < 1) fail(errc::invalid_input, "re-orthonormalization interval must be positive");
  const int d = static_cast<int>(x0.velocity.size());
  const int m = 2 * (d - 1);

  LyapunovResult res;
  res.reorth_interval = reorth_interval;
  Eigen::VectorXd sums = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd first_half = Eigen::VectorXd::Zero(m);

  Mat w = Mat::Identity(m, m);
  JacobiFrame frame = initial_jacobi_frame(x0);
  PhaseState x = x0;
  int done = 0;
  const int half = n_steps / 2;

  auto reorth = [&](bool half_mark) {
    Eigen::HouseholderQR<Mat> qr(w);
    Mat q = qr.householderQ();
    Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < m; ++i) sums(i) += std::log(std::abs(r(i, i)));
    // Keep column signs deterministic.
    for (int i = 0; i < m; ++i)
      if (r(i, i) < 0) q.col(i) = -q.col(i);
    w = q;
    if (half_mark) first_half = sums;
  };

  for (int k = 0; k < n_steps; ++k) {
    StepResult r = step(p, law, x);
    if (r.status != StepStatus::ok) {
      res.truncated = true;
      break;
    }
    StepGeometry g{&p.face(r.state.face).normal, r.tau, r.theta,
                   &x.velocity, &r.state.velocity, r.state.face};
    CocycleStep s = make_blocks(law, frame, g);
    s.target.state = r.state;

    Mat block(m, m);
    block.topLeftCorner(d - 1, d - 1) = s.A;
    block.topRightCorner(d - 1, d - 1) = s.B;
    block.bottomLeftCorner(d - 1, d - 1).setZero();
    block.bottomRightCorner(d - 1, d - 1) = s.C;
    w = block * w;

    frame = s.target;
    x = r.state;
    ++done;
    if (done % reorth_interval == 0 || done == half) reorth(done == half);
  }
  if (done == 0) fail(errc::insufficient_data, "orbit terminated before the first step");
  if (done % reorth_interval != 0 && done != half) reorth(false);

  res.steps_completed = done;
  res.exponents.resize(m);
  res.half_spread.assign(m, 0.0);
  std::vector<int> order(m);
  for (int i = 0; i < m; ++i) order[i] = i;
  Eigen::VectorXd rate = sums / static_cast<double>(done);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return rate(a) > rate(b); });
  for (int i = 0; i < m; ++i) res.exponents[i] = rate(order[i]);
  if (done > half && half > 0) {
    for (int i = 0; i < m; ++i) {
      double l1 = first_half(order[i]) / half;
      double l2 = (sums(order[i]) - first_half(order[i])) / (done - half);
      res.half_spread[i] = 0.5 * std::abs(l1 - l2);
    }
  }
  return res;
}

FrontPair fronts(const OrbitRecord& orbit, int i, int j) {
  const int n = orbit.steps();
  if (i < 0 || j < i || j > n) fail(errc::invalid_input, "front interval out of range");
  const int d = static_cast<int>(orbit.states.front().velocity.size());
  std::vector<Vec> vs, ns;
  for (int l = i; l <= j; ++l) {
    vs.push_back(orbit.states[l].velocity);
    ns.push_back(orbit.normals[l]);
  }
  return FrontPair{i, j, orthonormalize(vs, d), orthonormalize(ns, d)};
}

std::vector<Collinearity> collinearity_scan(const OrbitRecord& orbit, double delta,
                                            int max_window) {
  if (!(delta >= 0.0 && delta < M_PI_2))
    fail(errc::invalid_input, "delta must lie in [0, pi/2)");
  const int n = orbit.steps();
  if (n < 0) return {};
  const int d = static_cast<int>(orbit.states.front().velocity.size());
  if (max_window < 0) max_window = 4 * d;

  std::vector<Collinearity> hits;
  for (int i = 0; i <= n; ++i) {
    for (int j = i; j <= std::min(n, i + max_window); ++j) {
      FrontPair fp = fronts(orbit, i, j);
      if (fp.velocity_front.dim() != fp.normal_front.dim()) continue;
      double angle = grassmann_angle(fp.velocity_front, fp.normal_front);
      if (angle < delta)
        hits.push_back({i, j, angle, fp.velocity_front.dim(), false});
    }
  }
  for (auto& h : hits) {
    h.minimal = true;
    for (const auto& other : hits) {
      if (&other == &h) continue;
      if (other.i >= h.i && other.j <= h.j) {
        h.minimal = false;
        break;
      }
    }
  }
  return hits;
}

AlphaBeta alpha_beta(const Vec& v_prev, const Vec& eta, const Vec& v_next) {
  Frame plane = orthonormalize({v_prev, eta}, static_cast<int>(v_prev.size()));
  if ((v_next - plane.project(v_next)).norm() > 1e-10)
    fail(errc::invalid_input, "vectors are not coplanar");
  const double c = v_prev.dot(eta);
  const double det = 1.0 - c * c;  // Gram determinant of {eta, v_prev}
  if (det < 1e-14) return {v_next.dot(eta), 0.0};
  const double rn = v_next.dot(eta);
  const double rv = v_next.dot(v_prev);
  return {(rn - c * rv) / det, (rv - c * rn) / det};
}

}  // namespace polyb
