#include <doctest.h>

#include <cmath>

#include "polyb/billiard.hpp"
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
  return Polytope::from_generators(gen, d == 2 ? "square" : "cube");
}

int face_with_normal(const Polytope& p, const Vec& eta) {
  for (int i = 0; i < p.num_faces(); ++i)
    if ((p.face(i).normal - eta).norm() < 1e-12) return i;
  return -1;
}

}  // namespace

TEST_SUITE("billiard") {

TEST_CASE("reflection laws") {
  ReflectionLaw half = ReflectionLaw::linear(0.5);
  CHECK(half.f(0.6) == doctest::Approx(0.3));
  CHECK(half.df(0.6) == doctest::Approx(0.5));
  CHECK(half.lambda_sup() == 0.5);
  CHECK(half.f_at_right_angle() == doctest::Approx(M_PI_2 * 0.5));
  CHECK(half.is_contracting());
  // The sphere map also stretches rotational directions by
  // sin f(t)/sin t, whose supremum exceeds sup|f'| for linear laws.
  CHECK(half.sphere_contraction() == doctest::Approx(std::sin(0.25 * M_PI)));
  CHECK(half.sphere_contraction() > half.lambda_sup());

  CHECK(ReflectionLaw::linear(0.0).is_slap());
  CHECK(ReflectionLaw::linear(1.0).is_specular());
  CHECK(ReflectionLaw::linear(0.0).sphere_contraction() == 0.0);

  ReflectionLaw sine = ReflectionLaw::custom(
      "sine", [](double t) { return 0.7 * std::sin(t); },
      [](double t) { return 0.7 * std::cos(t); }, 0.7);
  CHECK(sine.f(M_PI / 3) == doctest::Approx(0.7 * std::sin(M_PI / 3)));
  CHECK(sine.sphere_contraction() >= 0.7 - 1e-9);
  CHECK(sine.sphere_contraction() < 1.0);

  CHECK_THROWS_AS(ReflectionLaw::linear(1.5), Error);
  CHECK_THROWS_AS(ReflectionLaw::custom("bad", nullptr, nullptr, 0.5), Error);
  CHECK_THROWS_AS(ReflectionLaw::custom(
                      "bad", [](double t) { return t + 0.1; },
                      [](double) { return 0.5; }, 0.5),
                  Error);
}

TEST_CASE("flight in squares and cubes") {
  Polytope sq = box(2);
  const int bottom = face_with_normal(sq, vv({0, 1}));
  const int top = face_with_normal(sq, vv({0, -1}));
  REQUIRE(bottom >= 0);
  PhaseState x = make_state(sq, bottom, vv({0, -0.5}), vv({0, 1}));
  FlightHit hit = flight(sq, x);
  CHECK(hit.status == StepStatus::ok);
  CHECK(hit.face == top);
  CHECK(hit.tau == doctest::Approx(1.0));
  CHECK((hit.point - vv({0, 0.5})).norm() < 1e-12);

  Polytope cube = box(3);
  const int front = face_with_normal(cube, vv({1, 0, 0}));
  const int back = face_with_normal(cube, vv({-1, 0, 0}));
  PhaseState c = make_state(cube, front, vv({-0.5, 0.07, -0.11}), vv({1, 0, 0}));
  FlightHit oh = flight(cube, c);
  CHECK(oh.face == back);
  CHECK(oh.tau == doctest::Approx(1.0));

  // Aimed exactly at a corner: a skeleton hit.
  PhaseState corner = make_state(sq, bottom, vv({0, -0.5}), vv({0.5, 1}).normalized());
  CHECK(flight(sq, corner).status == StepStatus::hit_skeleton);
}

TEST_CASE("grazing arrivals are flagged") {
  // A long strip makes a mid-face hit with |<v,eta>| below the grazing
  // tolerance geometrically possible.
  const double len = 2e10;
  std::vector<Halfspace> hs;
  hs.push_back({vv({0, 1}), 0.0});     // y >= 0
  hs.push_back({vv({0, -1}), -1.0});   // y <= 1
  hs.push_back({vv({1, 0}), -1.0});    // x >= -1
  hs.push_back({vv({-1, 0}), -(len + 1.0)});  // x <= len + 1
  Polytope strip = Polytope::from_inward_halfspaces(hs, "strip");
  PhaseState x = make_state(strip, 0, vv({0, 0}), vv({len, 1.0}).normalized());
  FlightHit hit = flight(strip, x);
  CHECK(hit.status == StepStatus::grazing);
}

TEST_CASE("law application in the plane of incidence") {
  Vec eta = vv({0, 1});
  ReflectionLaw half = ReflectionLaw::linear(0.5);
  CHECK((apply_law(half, eta, eta) - eta).norm() < 1e-15);

  // Specular label leaves velocities unchanged.
  Vec v = vv({std::sin(1.1), std::cos(1.1)});
  CHECK((apply_law(ReflectionLaw::linear(1.0), eta, v) - v).norm() == 0.0);

  // Angle halving at theta = pi/3.
  Vec u = vv({std::sin(M_PI / 3), std::cos(M_PI / 3)});
  Vec w = apply_law(half, eta, u);
  CHECK((w - vv({std::sin(M_PI / 6), std::cos(M_PI / 6)})).norm() < 1e-14);

  // Slap returns the normal.
  CHECK((apply_law(ReflectionLaw::linear(0.0), eta, u) - eta).norm() < 1e-15);

  CHECK_THROWS_AS(apply_law(half, eta, vv({1, -0.2}).normalized()), Error);

  // Unit output, same side, in-plane, angle f(theta); d=3.
  Rng rng(6);
  Vec n3 = vv({0, 0, 1});
  for (int t = 0; t < 200; ++t) {
    Vec dir = testsupport::random_unit(rng, 3);
    if (dir(2) <= 1e-3) continue;
    Vec out = apply_law(half, n3, dir);
    CHECK(out.norm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out(2) > 0.0);
    const double theta = std::acos(dir(2));
    CHECK(std::acos(std::min(1.0, out(2))) == doctest::Approx(0.5 * theta).epsilon(1e-9));
    Frame plane = orthonormalize({dir, n3}, 3);
    CHECK((out - plane.project(out)).norm() < 1e-12);
  }
}

TEST_CASE("square billiard: specular four-periodic orbit") {
  Polytope sq = box(2);
  const int bottom = face_with_normal(sq, vv({0, 1}));
  PhaseState x0 = make_state(sq, bottom, vv({0, -0.5}), vv({1, 1}).normalized());
  OrbitRecord rec = iterate(sq, ReflectionLaw::linear(1.0), x0, 8);
  REQUIRE(rec.completed());
  REQUIRE(rec.steps() == 8);
  for (int j = 0; j + 4 < static_cast<int>(rec.states.size()); ++j) {
    CHECK((rec.states[j].point - rec.states[j + 4].point).norm() < 1e-12);
    CHECK((rec.states[j].velocity - rec.states[j + 4].velocity).norm() < 1e-12);
  }
  // Specular label: incidence equals reflection, speed preserved exactly.
  for (int j = 1; j < static_cast<int>(rec.states.size()); ++j) {
    CHECK(rec.states[j].velocity.norm() == doctest::Approx(1.0).epsilon(1e-14));
    const Vec& eta = rec.normals[j];
    CHECK(std::abs(std::abs(rec.states[j - 1].velocity.dot(eta)) -
                   std::abs(rec.states[j].velocity.dot(eta))) < 1e-12);
  }
}

TEST_CASE("slap step geometry") {
  Polytope sq = box(2);
  const int bottom = face_with_normal(sq, vv({0, 1}));
  const int top = face_with_normal(sq, vv({0, -1}));
  auto images = slap_step(sq, bottom, vv({0.1, -0.5}));
  REQUIRE(images.size() == 1);
  CHECK(images.front().first == top);
  CHECK((images.front().second - vv({0.1, 0.5})).norm() < 1e-12);

  // The base centre of the 3-simplex maps to the apex, with one image per
  // lateral face.
  Polytope s = simplex_family(3, 0.2);
  Vec c0 = vv({0, 0, 0});
  auto multi = slap_step(s, 3, c0);
  CHECK(multi.size() == 3);
  for (const auto& [face, point] : multi) {
    CHECK(face != 3);
    CHECK(std::abs(s.margin(point, face)) < 1e-9);
  }
  // A generic base point has a single image.
  CHECK(slap_step(s, 3, vv({0.31, 0.17, 0})).size() == 1);
}

TEST_CASE("any-law step invariants along simplex orbits") {
  Polytope s = simplex_family(3, 0.9);
  Rng rng(31);
  for (double lambda : {0.3, 0.5, 0.85}) {
    ReflectionLaw law = ReflectionLaw::linear(lambda);
    const double f_sup = law.f_at_right_angle();
    PhaseState x0 = sample_state(s, 55, 3);
    OrbitRecord rec = iterate(s, law, x0, 400);
    REQUIRE(rec.completed());
    double path = 0.0;
    for (int j = 0; j < rec.steps(); ++j) {
      const Vec& eta = rec.normals[j + 1];
      const Vec& vin = rec.states[j].velocity;
      const Vec& vout = rec.states[j + 1].velocity;
      const double theta = rec.angles[j];
      CHECK(theta >= 0.0);
      CHECK(theta < M_PI_2);
      // Post-reflection angle lies in the range of f.
      CHECK(std::acos(std::min(1.0, vout.dot(eta))) <= f_sup + 1e-9);
      // Expansion ratio of the normal components.
      const double ratio = std::abs(vout.dot(eta) / vin.dot(eta));
      CHECK(ratio == doctest::Approx(std::cos(law.f(theta)) / std::cos(theta)).epsilon(1e-10));
      if (theta > 1e-6) CHECK(ratio > 1.0);
      // Coplanarity of incoming velocity, normal, outgoing velocity.
      Frame plane = orthonormalize({vin, eta}, 3);
      CHECK((vout - plane.project(vout)).norm() < 1e-10);
      // Segment consistency.
      const Vec seg = rec.states[j + 1].point - rec.states[j].point;
      path += seg.norm();
      CHECK((seg - rec.flight_times[j] * vin).norm() <= 1e-9 * std::max(1.0, path));
      CHECK((seg / seg.norm() - vin).norm() < 1e-10);
    }
  }
  (void)rng;
}

TEST_CASE("iterate edge cases and termination reporting") {
  Polytope cube = box(3);
  const int bottom = face_with_normal(cube, vv({0, 0, 1}));
  PhaseState x0 = make_state(cube, bottom, vv({-0.0375, 0.1, -0.5}), vv({0, 0, 1}));

  // Zero steps: the record holds only the start.
  OrbitRecord nothing = iterate(cube, ReflectionLaw::linear(0.5), x0, 0);
  CHECK(nothing.states.size() == 1);
  CHECK(nothing.completed());

  // Two-periodic bounce between parallel faces under the specular label.
  OrbitRecord bounce = iterate(cube, ReflectionLaw::linear(1.0), x0, 50);
  REQUIRE(bounce.completed());
  for (int j = 0; j + 2 < static_cast<int>(bounce.states.size()); ++j) {
    CHECK((bounce.states[j].point - bounce.states[j + 2].point).norm() < 1e-12);
    CHECK(bounce.flight_times[j] == doctest::Approx(1.0));
  }

  // A corner-bound start terminates with a skeleton report.
  PhaseState to_corner =
      make_state(cube, bottom, vv({0, 0, -0.5}), vv({0.5, 0.5, 1}).normalized());
  OrbitRecord stopped = iterate(cube, ReflectionLaw::linear(1.0), to_corner, 10);
  CHECK(stopped.termination.kind == Termination::Kind::hit_skeleton);
  CHECK(stopped.termination.step == 1);
  CHECK(stopped.steps() == 0);

  // The perturbation mode pushes through the same start.
  IterateOptions opts;
  opts.perturb_on_skeleton = true;
  opts.seed = 9;
  OrbitRecord rescued = iterate(cube, ReflectionLaw::linear(1.0), to_corner, 10, opts);
  CHECK(rescued.steps() == 10);

  // Long orbit on the simplex completes and keeps its invariants.
  Polytope s = simplex_family(3, 0.9);
  OrbitRecord grind = iterate(s, ReflectionLaw::linear(0.3), sample_state(s, 1, 0), 10000);
  CHECK(grind.completed());
  CHECK(grind.steps() == 10000);
}

TEST_CASE("state validation") {
  Polytope sq = box(2);
  const int bottom = face_with_normal(sq, vv({0, 1}));
  CHECK_THROWS_AS(make_state(sq, bottom, vv({0, -0.4}), vv({0, 1})), Error);   // off plane
  CHECK_THROWS_AS(make_state(sq, bottom, vv({0.5, -0.5}), vv({0, 1})), Error); // on ridge
  CHECK_THROWS_AS(make_state(sq, bottom, vv({0, -0.5}), vv({1, -0.1})), Error); // outward
  CHECK_THROWS_AS(make_state(sq, 17, vv({0, -0.5}), vv({0, 1})), Error);
}

}  // TEST_SUITE
