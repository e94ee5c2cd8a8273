#include "polyb/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "polyb/sampling.hpp"

namespace polyb {

namespace {

constexpr int kNever = std::numeric_limits<int>::max();

// Incremental rank of appended unit vectors at the kRankTol threshold.
struct RankTracker {
  Mat basis;
  explicit RankTracker(int d) : basis(d, 0) {}
  int rank() const { return static_cast<int>(basis.cols()); }
  void add(const Vec& v) {
    Vec r = v;
    for (int pass = 0; pass < 2; ++pass)
      if (basis.cols() > 0) r -= basis * (basis.transpose() * r);
    double rn = r.norm();
    if (rn < kRankTol * v.norm()) return;
    basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
    basis.col(basis.cols() - 1) = r / rn;
  }
};

// m[t] = least m such that normals[t..t+m-1] span R^d, kNever if the whole
// suffix from t does not span. Once one suffix fails, all later ones do.
std::vector<int> first_spanning_lengths(const std::vector<Vec>& normals, int d, int count) {
  std::vector<int> m(count, kNever);
  for (int t = 0; t < count; ++t) {
    RankTracker tracker(d);
    int reached = kNever;
    for (int e = t; e < count; ++e) {
      tracker.add(normals[e]);
      if (tracker.rank() == d) {
        reached = e - t + 1;
        break;
      }
    }
    if (reached == kNever) break;  // every later suffix is a subset
    m[t] = reached;
  }
  return m;
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace

GeneratingCheck is_k_generating(const OrbitRecord& orbit, int k) {
  if (k < 1) fail(errc::invalid_input, "window size must be positive");
  const int count = static_cast<int>(orbit.normals.size());
  if (count < k) fail(errc::insufficient_data, "orbit shorter than the window");
  const int d = static_cast<int>(orbit.normals.front().size());
  auto m = first_spanning_lengths(orbit.normals, d, count);
  for (int t = 0; t + k <= count; ++t)
    if (m[t] > k) return {false, t};
  return {true, -1};
}

EscapingTime escaping_time_of_record(const OrbitRecord& orbit, int dim, int horizon) {
  if (horizon < 1) fail(errc::invalid_input, "horizon must be positive");
  EscapingTime out;
  out.horizon = horizon;
  const int available = static_cast<int>(orbit.normals.size()) - 1;  // steps recorded
  out.truncated = available < horizon;
  const int count = std::min(available, horizon) + 1;  // usable normals
  if (count < dim) return out;                         // nothing can span

  auto m = first_spanning_lengths(orbit.normals, dim, count);
  std::vector<int> prefix_max(count);
  int acc = 0;
  for (int t = 0; t < count; ++t) {
    acc = std::max(acc, m[t]);
    prefix_max[t] = acc;
  }
  for (int k = dim; k <= std::min(horizon, count); ++k) {
    if (prefix_max[count - k] <= k) {
      out.k = k;
      return out;
    }
  }
  return out;
}

EscapingTime escaping_time(const Polytope& p, const ReflectionLaw& law, const PhaseState& x,
                           int horizon, const IterateOptions& opts) {
  OrbitRecord rec = iterate(p, law, x, horizon, opts);
  return escaping_time_of_record(rec, p.dim(), horizon);
}

EscapeCertificate cone_certificate(const ConeSpec& cone, const ReflectionLaw& law) {
  EscapeCertificate cert;
  cert.phi = barycentric_angle(cone);
  const double f_half = law.f_at_right_angle();
  cert.mu = cert.phi + 0.5 * (f_half - M_PI_2);
  cert.step_lower_bound = 2.0 * std::cos(0.5 * (f_half + M_PI_2));
  cert.valid = cert.mu > 0.0;
  if (cert.valid) {
    cert.zigzag_bound = 2.0 / std::sin(cert.mu);
    cert.reflection_bound =
        static_cast<int>(std::ceil(cert.zigzag_bound / cert.step_lower_bound));
  }
  return cert;
}

Lambda0Curve lambda0_curve(int d, const std::vector<double>& h_grid) {
  Lambda0Curve curve;
  const int base_face = d;  // face opposite the apex
  for (double h : h_grid) {
    Polytope p = simplex_family(d, h);
    int apex_vertex = -1, base_vertex = -1;
    for (int v = 0; v < p.num_vertices(); ++v) {
      const auto& faces = p.vertex(v).faces;
      bool on_base = std::find(faces.begin(), faces.end(), base_face) != faces.end();
      if (on_base)
        base_vertex = v;
      else
        apex_vertex = v;
    }
    if (apex_vertex < 0 || base_vertex < 0) fail(errc::internal, "simplex vertex labels");
    Lambda0Point pt;
    pt.h = h;
    pt.phi1 = barycentric_angle(vertex_cone(p, base_vertex));
    pt.phi2 = barycentric_angle(vertex_cone(p, apex_vertex));
    pt.lambda0 = 1.0 - 4.0 * std::min(pt.phi1, pt.phi2) / M_PI;
    curve.points.push_back(pt);
  }
  for (int i = 0; i < static_cast<int>(curve.points.size()); ++i)
    if (curve.tip_index < 0 || curve.points[i].lambda0 < curve.points[curve.tip_index].lambda0)
      curve.tip_index = i;
  return curve;
}

double zigzag_length(const OrbitRecord& orbit) {
  double total = 0.0;
  for (size_t k = 0; k + 1 < orbit.states.size(); ++k)
    total += (orbit.states[k + 1].velocity - orbit.states[k].velocity).norm();
  return total;
}

Mat cone_edge_rays(const ConeSpec& cone) {
  // Columns r_k with <eta_i, r_k> = delta_ik.
  return cone.normals * (cone.normals.transpose() * cone.normals).inverse();
}

ConeRun cone_run(const ConeSpec& cone, const ReflectionLaw& law, const Vec& point,
                 const Vec& velocity, int max_reflections) {
  const int d = cone.dim();
  ConeRun run;
  Vec p = point - cone.apex;  // work apex-centred
  Vec v = velocity.normalized();
  run.velocities.push_back(v);

  for (int n = 0; n < max_reflections; ++n) {
    double best = std::numeric_limits<double>::infinity();
    int face = -1;
    for (int j = 0; j < d; ++j) {
      const Vec eta = cone.normals.col(j);
      const double vn = v.dot(eta);
      if (vn >= 0.0) continue;
      const double t = -p.dot(eta) / vn;
      if (t > 1e-12 && t < best) {
        best = t;
        face = j;
      }
    }
    if (face < 0) {
      run.escaped = true;
      break;
    }
    Vec q = p + best * v;
    const Vec eta = cone.normals.col(face);
    if (std::abs(v.dot(eta)) < kGrazingTol || q.norm() < 1e-10 * (1.0 + p.norm())) {
      run.clean = false;
      break;
    }
    v = apply_law(law, eta, reflect(v, eta));
    p = q;
    ++run.reflections;
    run.velocities.push_back(v);
  }
  for (size_t k = 0; k + 1 < run.velocities.size(); ++k)
    run.zigzag += (run.velocities[k + 1] - run.velocities[k]).norm();
  return run;
}

const char* to_string(VerdictClass c) noexcept {
  switch (c) {
    case VerdictClass::uniformly_hyperbolic_evidence: return "uniformly-hyperbolic-evidence";
    case VerdictClass::inconclusive: return "inconclusive";
    case VerdictClass::obstruction_found: return "obstruction-found";
  }
  return "unknown";
}

Verdict verdict(const Polytope& p, const ReflectionLaw& law, const SamplingConfig& cfg) {
  if (cfg.n_orbits < 1 || cfg.n_steps < 1 || cfg.horizon < 1)
    fail(errc::invalid_input, "sampling counts must be positive");
  Verdict out;
  out.polytope = p.name();
  out.orbits_sampled = cfg.n_orbits;

  SpanningReport span = spanning_epsilon(p);
  out.spanning_eps = span.epsilon;
  out.spanning_witness = span.witness;

  for (int v = 0; v < p.num_vertices(); ++v) {
    try {
      out.vertex_certificates.push_back(cone_certificate(vertex_cone(p, v), law));
    } catch (const Error&) {
      out.vertex_certificates.push_back(EscapeCertificate{});  // degenerate vertex
    }
  }

  IterateOptions opts;
  opts.perturb_on_skeleton = true;
  opts.seed = cfg.seed;

  struct OrbitStat {
    std::optional<int> t;
    bool truncated = false;
  };
  std::vector<OrbitStat> stats(cfg.n_orbits);
  std::vector<PhaseState> starts(cfg.n_orbits);
  for (int i = 0; i < cfg.n_orbits; ++i) starts[i] = sample_state(p, cfg.seed, i);

  parallel_for(cfg.n_orbits, cfg.workers, [&](int i) {
    OrbitRecord rec = iterate(p, law, starts[i], cfg.n_steps, opts);
    EscapingTime et = escaping_time_of_record(rec, p.dim(), cfg.horizon);
    stats[i].t = et.k;
    stats[i].truncated = et.truncated;
  });

  for (const auto& s : stats) {
    if (s.truncated) {
      ++out.unresolved;
      continue;
    }
    if (!s.t) {
      ++out.exceeded;
      continue;
    }
    ++out.t_histogram[*s.t];
    if (!out.t_max || *s.t > *out.t_max) out.t_max = *s.t;
  }

  double sigma = std::numeric_limits<double>::infinity();
  bool any_window = false;
  if (out.t_max) {
    const int w = 2 * *out.t_max;
    out.sigma_window = w;
    std::vector<double> per_orbit(cfg.n_orbits,
                                  std::numeric_limits<double>::infinity());
    parallel_for(cfg.n_orbits, cfg.workers, [&](int i) {
      OrbitRecord rec = iterate(p, law, starts[i], cfg.n_steps, opts);
      if (rec.steps() < w) return;
      auto steps = cocycle_steps(p, law, rec);
      for (int a = 0; a + w <= rec.steps(); ++a) {
        Mat flow = velocity_flow(steps, a, a + w);
        Eigen::JacobiSVD<Mat> svd(flow);
        per_orbit[i] = std::min(per_orbit[i], svd.singularValues().minCoeff());
      }
    });
    for (double s : per_orbit)
      if (std::isfinite(s)) {
        sigma = std::min(sigma, s);
        any_window = true;
      }
  }
  out.sigma_empirical = any_window ? sigma : 0.0;

  if (out.spanning_eps < 1e-9) {
    out.classification = VerdictClass::obstruction_found;
    out.witness = "spanning failure on faces";
    for (int f : out.spanning_witness) out.witness += " " + std::to_string(f);
  } else if (out.exceeded > 0) {
    out.classification = VerdictClass::obstruction_found;
    out.witness = std::to_string(out.exceeded) + " sampled orbits exceeded the horizon " +
                  std::to_string(cfg.horizon);
  } else if (out.unresolved > cfg.n_orbits / 100 || !out.t_max || !any_window) {
    out.classification = VerdictClass::inconclusive;
  } else if (out.sigma_empirical > 1.0) {
    out.classification = VerdictClass::uniformly_hyperbolic_evidence;
  } else {
    out.classification = VerdictClass::inconclusive;
  }
  return out;
}

}  // namespace polyb
