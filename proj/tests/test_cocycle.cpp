#include <doctest.h>

#include <cmath>

#include "polyb/cocycle.hpp"
#include "polyb/sampling.hpp"
#include "support.hpp"

using namespace polyb;
using testsupport::Rng;

namespace {

Vec vv(std::initializer_list<double> xs) {
  Vec v(xs.size());
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Polytope box(int d, double r = 0.5) {
  std::vector<Vec> gen;
  for (int i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e(i) = r;
    gen.push_back(e);
    gen.push_back(-e);
  }
  return Polytope::from_generators(gen, "box");
}

// Central finite differences of one billiard step in Jacobi coordinates,
// independent of the analytic block construction.
struct FdBlocks {
  Mat A, B, C;
  bool ok = false;
};

FdBlocks fd_blocks(const Polytope& p, const ReflectionLaw& law, const CocycleStep& s,
                   double eps = 1e-5) {
  const int d = p.dim();
  const PhaseState& x = s.source.state;
  const Vec& eta_in = p.face(x.face).normal;
  const Vec& vp = s.target.state.velocity;
  FdBlocks fd;
  fd.A.resize(d - 1, d - 1);
  fd.B.resize(d - 1, d - 1);
  fd.C.resize(d - 1, d - 1);
  for (int b = 0; b < d - 1; ++b) {
    Vec J = s.source.basis.col(b);
    // Point perturbation along the face realizing the Jacobi coordinate J.
    Vec u = J - (J.dot(eta_in) / x.velocity.dot(eta_in)) * x.velocity;
    PhaseState xp = x, xm = x;
    xp.point += eps * u;
    xm.point -= eps * u;
    StepResult rp = step(p, law, xp), rm = step(p, law, xm);
    if (rp.status != StepStatus::ok || rm.status != StepStatus::ok ||
        rp.state.face != s.face || rm.state.face != s.face)
      return fd;
    Vec dq = (rp.state.point - rm.state.point) / (2 * eps);
    fd.A.col(b) = s.target.basis.transpose() * (dq - dq.dot(vp) * vp);

    // Velocity perturbation.
    PhaseState yp = x, ym = x;
    yp.velocity = (x.velocity + eps * J).normalized();
    ym.velocity = (x.velocity - eps * J).normalized();
    StepResult qp = step(p, law, yp), qm = step(p, law, ym);
    if (qp.status != StepStatus::ok || qm.status != StepStatus::ok ||
        qp.state.face != s.face || qm.state.face != s.face)
      return fd;
    Vec dqv = (qp.state.point - qm.state.point) / (2 * eps);
    Vec dvv = (qp.state.velocity - qm.state.velocity) / (2 * eps);
    fd.B.col(b) = s.target.basis.transpose() * (dqv - dqv.dot(vp) * vp);
    fd.C.col(b) = s.target.basis.transpose() * dvv;
  }
  fd.ok = true;
  return fd;
}

}  // namespace

TEST_SUITE("cocycle") {

TEST_CASE("derivative blocks match finite differences") {
  int checked = 0;
  for (int d : {2, 3, 4}) {
    Polytope p = simplex_family(d, 0.8);
    for (double lambda : {0.1, 0.5, 0.9}) {
      ReflectionLaw law = ReflectionLaw::linear(lambda);
      for (int t = 0; t < 8; ++t) {
        PhaseState x = sample_state(p, 7 * d + static_cast<int>(10 * lambda), t);
        CocycleStep s = dstep(p, law, x);
        if (s.status != StepStatus::ok) continue;
        FdBlocks fd = fd_blocks(p, law, s);
        if (!fd.ok) continue;
        CHECK((s.A - fd.A).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((s.B - fd.B).cwiseAbs().maxCoeff() < 1e-6);
        CHECK((s.C - fd.C).cwiseAbs().maxCoeff() < 1e-6);
        CHECK(s.B.isApprox(s.tau * s.A, 1e-12));
        ++checked;
      }
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("A-block singular values and C-block norms") {
  for (int d : {2, 3, 4}) {
    Polytope p = simplex_family(d, 1.1);
    ReflectionLaw law = ReflectionLaw::linear(0.6);
    OrbitRecord rec = iterate(p, law, sample_state(p, 3, 1), 300);
    REQUIRE(rec.completed());
    auto steps = cocycle_steps(p, law, rec);
    for (const auto& s : steps) {
      Eigen::JacobiSVD<Mat> svd(s.A);
      Vec sv = svd.singularValues();
      const double ratio = std::cos(law.f(s.theta)) / std::cos(s.theta);
      CHECK(std::abs(sv(0) - ratio) < 1e-9);
      for (int i = 1; i < sv.size(); ++i) CHECK(std::abs(sv(i) - 1.0) < 1e-9);
      CHECK(sv.minCoeff() >= 1.0 - 1e-9);
      // The C-block observes the sphere-map contraction; its rotational
      // directions carry the factor sin f(theta)/sin theta.
      CHECK(s.C.operatorNorm() <= law.sphere_contraction() + 1e-9);
      if (d == 2) CHECK(s.C.operatorNorm() <= law.lambda_sup() + 1e-9);
    }
  }
}

TEST_CASE("head-on bounce gives identity A and scaled C") {
  Polytope cube = box(3);
  int bottom = -1;
  for (int i = 0; i < 6; ++i)
    if ((cube.face(i).normal - vv({0, 0, 1})).norm() < 1e-12) bottom = i;
  REQUIRE(bottom >= 0);
  PhaseState x = make_state(cube, bottom, vv({0.1, -0.2, -0.5}), vv({0, 0, 1}));
  CocycleStep s = dstep(cube, ReflectionLaw::linear(0.5), x);
  REQUIRE(s.status == StepStatus::ok);
  CHECK(s.theta < 1e-12);
  CHECK((s.A - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((s.C - 0.5 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("velocity flow is a cocycle with unit minimum expansion") {
  Polytope p = simplex_family(3, 0.9);
  ReflectionLaw law = ReflectionLaw::linear(0.5);
  OrbitRecord rec = iterate(p, law, sample_state(p, 12, 0), 200);
  REQUIRE(rec.completed());
  auto steps = cocycle_steps(p, law, rec);
  const int n = static_cast<int>(steps.size());

  CHECK(velocity_flow(steps, 5, 5).isIdentity(1e-14));
  CHECK(velocity_flow(steps, 4, 5).isApprox(steps[4].A, 1e-14));

  Rng rng(14);
  Mat full = velocity_flow(steps, 0, n);
  for (int t = 0; t < 5; ++t) {
    int j = 1 + static_cast<int>(rng.next() % (n - 1));
    Mat split = velocity_flow(steps, j, n) * velocity_flow(steps, 0, j);
    CHECK((split - full).cwiseAbs().maxCoeff() < 1e-9 * full.cwiseAbs().maxCoeff());
  }
  for (int t = 0; t < 40; ++t) {
    int i = static_cast<int>(rng.next() % n);
    int j = i + static_cast<int>(rng.next() % (n - i + 1));
    Eigen::JacobiSVD<Mat> svd(velocity_flow(steps, i, j));
    CHECK(svd.singularValues().minCoeff() >= 1.0 - 1e-9);
  }
  CHECK_THROWS_AS(velocity_flow(steps, 3, 2), Error);
}

TEST_CASE("fixed subspaces of a step and of flows") {
  Polytope p = simplex_family(4, 0.7);
  ReflectionLaw law = ReflectionLaw::linear(0.4);
  OrbitRecord rec = iterate(p, law, sample_state(p, 21, 2), 120);
  REQUIRE(rec.completed());
  auto steps = cocycle_steps(p, law, rec);

  // eta-perp ^ v-perp is fixed pointwise by the A-block.
  for (size_t k = 0; k < steps.size(); k += 7) {
    const auto& s = steps[k];
    const Vec& eta = rec.normals[k + 1];
    const Vec& vin = rec.states[k].velocity;
    Frame fixed = orthonormalize({eta, vin}, 4).complement();
    for (int c = 0; c < fixed.dim(); ++c) {
      Vec z = fixed.col(c);
      Vec lhs = s.A * (s.source.basis.transpose() * z);
      Vec rhs = s.target.basis.transpose() * z;
      CHECK((lhs - rhs).norm() < 1e-10);
    }
  }

  // The flow acts as the identity on the complement of the velocity front.
  Rng rng(3);
  for (int t = 0; t < 25; ++t) {
    int i = static_cast<int>(rng.next() % (steps.size() - 3));
    int j = i + 1 + static_cast<int>(rng.next() % 3);
    FrontPair fp = fronts(rec, i, j);
    Frame comp = fp.velocity_front.complement();
    Mat flow = velocity_flow(steps, i, j);
    for (int c = 0; c < comp.dim(); ++c) {
      Vec z = comp.col(c);
      Vec lhs = flow * (steps[i].source.basis.transpose() * z);
      Vec rhs = steps[j - 1].target.basis.transpose() * z;
      CHECK((lhs - rhs).norm() < 1e-9);
    }
  }
}

TEST_CASE("stable bundle: series, graph transform, invariance") {
  Polytope p = simplex_family(3, 0.9);

  // Slap law: the series terminates after one term, tau * identity. The
  // flat simplex traps slap orbits away from the skeleton.
  Polytope flat = simplex_family(3, 0.3);
  OrbitRecord srec = iterate(flat, ReflectionLaw::linear(0.0), sample_state(flat, 5, 1), 50);
  REQUIRE(srec.steps() >= 10);
  auto sl = cocycle_steps(flat, ReflectionLaw::linear(0.0), srec);
  StableBundle hb = stable_bundle(sl, 10);
  CHECK((hb.h - srec.flight_times[0] * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(hb.tail_bound == 0.0);

  ReflectionLaw law = ReflectionLaw::linear(0.5);
  OrbitRecord rec = iterate(p, law, sample_state(p, 5, 1), 400);
  REQUIRE(rec.completed());
  auto steps = cocycle_steps(p, law, rec);

  // Two truncation depths agree within the geometric tail.
  StableBundle h30 = stable_bundle(steps, 30);
  StableBundle h60 = stable_bundle(steps, 60);
  CHECK((h30.h - h60.h).operatorNorm() <= h30.tail_bound + 1e-12);
  CHECK(h30.tail_bound < 1e-3);

  // The backward graph-transform recursion reproduces the series.
  CHECK((stable_bundle_graph_transform(steps, 30) - h30.h).cwiseAbs().maxCoeff() < 1e-12);

  // Backward transport of the bundle computed one step downstream matches
  // the bundle here within the dropped tail term.
  std::vector<CocycleStep> shifted(steps.begin() + 1, steps.end());
  const int n = 40;
  StableBundle here = stable_bundle(steps, n);
  Mat there = stable_bundle(shifted, n).h;
  Mat back = backward_graph_transform(steps[0], there);
  CHECK((back - here.h).operatorNorm() <= here.tail_bound + 1e-8);

  // Vectors on the stable graph {(-H J', J')} are uniformly contracted by
  // the block cocycle.
  Rng rng(9);
  const double lam_bar = law.sphere_contraction();
  for (int t = 0; t < 20; ++t) {
    Vec jp = testsupport::random_unit(rng, 2);
    Vec top = -here.h * jp;
    double before = std::sqrt(top.squaredNorm() + jp.squaredNorm());
    Vec top_next = steps[0].A * top + steps[0].B * jp;
    Vec jp_next = steps[0].C * jp;
    double after = std::sqrt(top_next.squaredNorm() + jp_next.squaredNorm());
    CHECK(after <= (lam_bar + 1e-6) * before);
  }

  // Specular labels are not contracting: not applicable.
  OrbitRecord spec = iterate(p, ReflectionLaw::linear(1.0), sample_state(p, 6, 2), 60);
  auto sp = cocycle_steps(p, ReflectionLaw::linear(1.0), spec);
  CHECK_THROWS_AS(stable_bundle(sp, 20), Error);
  CHECK_THROWS_AS(stable_bundle(steps, 1000), Error);  // longer than the orbit
}

TEST_CASE("lyapunov spectrum: flat, stable and hyperbolic cases") {
  // Specular square: the 45-degree orbit is parabolic, exponents vanish
  // like log(n)/n.
  Polytope sq = box(2);
  int bottom = -1;
  for (int i = 0; i < 4; ++i)
    if ((sq.face(i).normal - vv({0, 1})).norm() < 1e-12) bottom = i;
  PhaseState x0 = make_state(sq, bottom, vv({0, -0.5}), vv({1, 1}).normalized());
  LyapunovResult flat = lyapunov_spectrum(sq, ReflectionLaw::linear(1.0), x0, 100000);
  REQUIRE_FALSE(flat.truncated);
  for (double e : flat.exponents) CHECK(std::abs(e) < 1e-3);

  // Contracting law on the simplex: two exponents below the sphere-map
  // contraction rate and two positive ones.
  Polytope p = simplex_family(3, 1.0);
  ReflectionLaw law = ReflectionLaw::linear(0.5);
  LyapunovResult lr = lyapunov_spectrum(p, law, sample_state(p, 8, 4), 20000);
  REQUIRE_FALSE(lr.truncated);
  REQUIRE(lr.exponents.size() == 4);
  CHECK(lr.exponents[0] > 0.01);
  CHECK(lr.exponents[1] > 0.01);
  CHECK(lr.exponents[2] <= std::log(law.sphere_contraction()) + 0.05);
  CHECK(lr.exponents[3] <= std::log(law.sphere_contraction()) + 0.05);
  for (size_t i = 0; i + 1 < lr.exponents.size(); ++i)
    CHECK(lr.exponents[i] >= lr.exponents[i + 1]);

  // Re-orthonormalization cadence does not change the estimates.
  LyapunovResult dense = lyapunov_spectrum(p, law, sample_state(p, 8, 4), 2000, 1);
  LyapunovResult sparse = lyapunov_spectrum(p, law, sample_state(p, 8, 4), 2000, 10);
  for (size_t i = 0; i < dense.exponents.size(); ++i)
    CHECK(dense.exponents[i] == doctest::Approx(sparse.exponents[i]).epsilon(1e-8));

  CHECK_THROWS_AS(lyapunov_spectrum(p, law, sample_state(p, 8, 4), 0), Error);
}

TEST_CASE("fronts and their decomposition") {
  Polytope p = simplex_family(3, 0.9);
  ReflectionLaw law = ReflectionLaw::linear(0.5);
  OrbitRecord rec = iterate(p, law, sample_state(p, 10, 0), 60);
  REQUIRE(rec.completed());

  FrontPair single = fronts(rec, 4, 4);
  CHECK(single.velocity_front.dim() == 1);
  CHECK(single.normal_front.dim() == 1);

  // V_{[i,j]} = span{v_i} + N_{[i+1,j]}: equal dimensions and mutual
  // containment of the generators.
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    int i = static_cast<int>(rng.next() % 50);
    int j = i + 1 + static_cast<int>(rng.next() % 8);
    FrontPair fp = fronts(rec, i, j);
    std::vector<Vec> gen{rec.states[i].velocity};
    for (int l = i + 1; l <= j; ++l) gen.push_back(rec.normals[l]);
    Frame decomp = orthonormalize(gen, 3);
    REQUIRE(decomp.dim() == fp.velocity_front.dim());
    for (const Vec& g : gen) CHECK(fp.velocity_front.contains(g, 1e-9));
    for (int l = i; l <= j; ++l) CHECK(decomp.contains(rec.states[l].velocity, 1e-9));
  }
  CHECK_THROWS_AS(fronts(rec, 10, 5), Error);

  // A planar orbit in a prism never grows a full-rank normal front.
  std::vector<Halfspace> prism;
  prism.push_back({vv({0, 0, 1}), 0.0});
  prism.push_back({vv({0, 0, -1}), -1.0});
  prism.push_back({vv({0, 1, 0}), 0.0});
  prism.push_back({vv({1, 0, 0}), 0.0});
  prism.push_back({vv({-1, -1, 0}).normalized(), -std::sqrt(0.5)});
  Polytope tri_prism = Polytope::from_inward_halfspaces(prism, "prism");
  OrbitRecord flatrec;
  for (double slope : {-0.2347, -0.3101, -0.1733, -0.2779}) {
    PhaseState planar =
        make_state(tri_prism, 2, vv({0.4, 0.0, 0.5}), vv({slope, 1, 0}).normalized());
    flatrec = iterate(tri_prism, ReflectionLaw::linear(1.0), planar, 40);
    if (flatrec.steps() >= 10) break;
  }
  REQUIRE(flatrec.steps() >= 10);
  FrontPair fp = fronts(flatrec, 0, flatrec.steps());
  CHECK(fp.normal_front.dim() == 2);
}

TEST_CASE("collinearity scan") {
  // Specular square orbit: fronts fill the plane, collinearities appear.
  Polytope sq = box(2);
  int bottom = -1;
  for (int i = 0; i < 4; ++i)
    if ((sq.face(i).normal - vv({0, 1})).norm() < 1e-12) bottom = i;
  PhaseState x0 = make_state(sq, bottom, vv({0.13, -0.5}), vv({1, 2}).normalized());
  OrbitRecord rec = iterate(sq, ReflectionLaw::linear(1.0), x0, 30);
  REQUIRE(rec.completed());
  auto hits = collinearity_scan(rec, 0.5);
  CHECK_FALSE(hits.empty());
  bool found_full = false;
  for (const auto& c : hits) found_full = found_full || c.dim == 2;
  CHECK(found_full);
  for (const auto& c : hits) {
    if (!c.minimal) continue;
    for (const auto& other : hits)
      if (!(other.i == c.i && other.j == c.j))
        CHECK_FALSE((other.i >= c.i && other.j <= c.j));
  }

  // Slap orbits align velocities with normals: singletons appear for any
  // positive delta.
  Polytope p = simplex_family(3, 0.4);
  OrbitRecord slap = iterate(p, ReflectionLaw::linear(0.0), sample_state(p, 3, 3), 20);
  auto singles = collinearity_scan(slap, 1e-6);
  bool found_single = false;
  for (const auto& c : singles) found_single = found_single || (c.i == c.j && c.i >= 1);
  CHECK(found_single);

  // Exact mode on a generic contracting orbit finds nothing.
  OrbitRecord gen = iterate(p, ReflectionLaw::linear(0.5), sample_state(p, 4, 4), 60);
  CHECK(collinearity_scan(gen, 0.0).empty());
  CHECK_THROWS_AS(collinearity_scan(gen, 2.0), Error);
}

TEST_CASE("alpha-beta decomposition") {
  Vec eta = vv({0, 0, 1});
  AlphaBeta pole = alpha_beta(eta, eta, eta);
  CHECK(pole.alpha == doctest::Approx(1.0));
  CHECK(pole.beta == doctest::Approx(0.0));

  ReflectionLaw law = ReflectionLaw::linear(0.5);
  const double theta = M_PI / 3;
  Vec vprev = vv({std::sin(theta), 0, -std::cos(theta)});
  Vec u = reflect(vprev, eta);
  Vec vnext = apply_law(law, eta, u);
  AlphaBeta ab = alpha_beta(vprev, eta, vnext);
  // Closed form from the law: alpha = (a+b) cos(theta), beta = b.
  const double a = std::cos(law.f(theta)) / std::cos(theta);
  const double b = std::sin(law.f(theta)) / std::sin(theta);
  CHECK(ab.alpha == doctest::Approx((a + b) * std::cos(theta)).epsilon(1e-12));
  CHECK(ab.beta == doctest::Approx(b).epsilon(1e-12));

  // The lemma's bounds hold along orbits; slap pins (1, 0).
  Polytope p = simplex_family(3, 0.8);
  for (double lambda : {0.0, 0.2, 0.5, 0.9}) {
    ReflectionLaw l = ReflectionLaw::linear(lambda);
    OrbitRecord rec = iterate(p, l, sample_state(p, 19, 1), 300);
    REQUIRE(rec.steps() > 100);
    for (int j = 1; j <= rec.steps(); ++j) {
      AlphaBeta d =
          alpha_beta(rec.states[j - 1].velocity, rec.normals[j], rec.states[j].velocity);
      CHECK(d.alpha > std::cos(M_PI_2 * l.lambda_sup()) - 1e-12);
      CHECK(d.alpha < 2.0);
      CHECK(d.beta >= 0.0);
      CHECK(d.beta < 1.0);
      if (lambda == 0.0) {
        CHECK(d.alpha == doctest::Approx(1.0));
        CHECK(std::abs(d.beta) < 1e-12);
      }
    }
  }

  CHECK_THROWS_AS(alpha_beta(vv({1, 0, 0}), vv({0, 1, 0}), vv({0, 0, 1})), Error);
}

}  // TEST_SUITE
