#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pllab/flow.hpp"
#include "test_helpers.hpp"

using namespace pllab;
using oracle::make_vec;

TEST_CASE("radial quadratic flow has the closed form exp(-2t) x") {
  Landscape q = parse_scalar_field("x1^2 + x2^2", 2);
  Trajectory traj = integrate_gradient_flow(q, make_vec({1, 0}), 1.0);
  REQUIRE(traj.status == TrajectoryStatus::kCompleted);
  CHECK((traj.last() - make_vec({std::exp(-2.0), 0})).norm() <= 1e-6);
  // values non-increasing
  for (std::size_t i = 1; i < traj.values.size(); ++i)
    CHECK(traj.values[i] <= traj.values[i - 1] + 1e-12);
}

TEST_CASE("cylinder flow decouples: x3 decays, x1 x2 frozen") {
  Landscape cyl = builtin("cylinder");
  Trajectory traj = integrate_gradient_flow(cyl, make_vec({1, 0, 2}), 3.0);
  REQUIRE(traj.status == TrajectoryStatus::kCompleted);
  Vec end = traj.last();
  CHECK(end[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(end[1] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(end[2] == doctest::Approx(2.0 * std::exp(-6.0)).epsilon(1e-6));
}

TEST_CASE("backward integration of the blowup example diverges") {
  Landscape l = builtin("backward_blowup");
  Trajectory traj = integrate_gradient_flow(l, make_vec({0.5}), -10.0);
  CHECK(traj.status == TrajectoryStatus::kDiverged);
}

TEST_CASE("semigroup property on builtins") {
  oracle::BoxSampler tpick(make_vec({0, 0}), make_vec({2, 2}), 31);
  for (const auto& name : {"fig2", "quadratic_aniso", "cylinder"}) {
    Landscape l = builtin(name);
    CAPTURE(name);
    oracle::BoxSampler sampler(l.box.lo, l.box.hi, 17);
    for (int i = 0; i < 5; ++i) {
      Point x = l.box.to_point(sampler.next());
      Vec ts = tpick.next();
      const double t1 = ts[0], t2 = ts[1];
      if (t1 < 1e-3 || t2 < 1e-3) continue;
      Point a = integrate_gradient_flow(l, x, t1 + t2).last();
      Point mid = integrate_gradient_flow(l, x, t1).last();
      Point b = integrate_gradient_flow(l, mid, t2).last();
      CHECK((a - b).norm() <= 1e-6 * std::max(1.0, a.norm()));
    }
  }
}

TEST_CASE("endpoint of the radial quadratic saturates the length bound") {
  Landscape q = parse_scalar_field("x1^2 + x2^2", 2);
  EndpointResult r = endpoint(q, make_vec({3, 4}));
  REQUIRE(r.status == EndpointStatus::kConverged);
  CHECK(r.limit.norm() <= 1e-6);
  CHECK(r.path_length == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(r.grad_norm_at_limit <= 1e-8);
}

TEST_CASE("endpoint preserves the conserved coordinate of x2^2") {
  Landscape l = parse_scalar_field("x2^2", 2);
  EndpointResult r = endpoint(l, make_vec({7, -2}));
  REQUIRE(r.status == EndpointStatus::kConverged);
  CHECK(r.limit[0] == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(std::abs(r.limit[1]) <= 1e-6);
}

TEST_CASE("endpoint of fig2 lands on the sine curve") {
  Landscape fig2 = builtin("fig2");
  EndpointResult r = endpoint(fig2, make_vec({0, 1}));
  REQUIRE(r.status == EndpointStatus::kConverged);
  CHECK(std::abs(r.limit[1] - 0.25 * std::sin(4.0 * r.limit[0])) <= 1e-6);
}

TEST_CASE("endpoint short-circuits at near-critical starts") {
  Landscape fig2 = builtin("fig2");
  Vec on_s = make_vec({0.3, 0.25 * std::sin(1.2)});
  EndpointResult r = endpoint(fig2, on_s);
  CHECK(r.status == EndpointStatus::kConverged);
  CHECK((r.limit - on_s).norm() == 0.0);  // exact short-circuit
  CHECK(r.path_length == 0.0);
}

TEST_CASE("pi is flow invariant") {
  Landscape fig2 = builtin("fig2");
  Vec x = make_vec({0.4, 1.1});
  Point base = endpoint(fig2, x).limit;
  for (double t : {0.5, 1.0, 2.0}) {
    Point moved = integrate_gradient_flow(fig2, x, t).last();
    Point lim = endpoint(fig2, moved).limit;
    CHECK((lim - base).norm() <= 1e-5);
  }
}

TEST_CASE("trajectory length bound from the PL constant") {
  for (const auto& name : {"fig2", "cylinder", "mobius", "ts2"}) {
    Landscape l = builtin(name);
    CAPTURE(name);
    const double mu = *l.mu_claim;
    oracle::BoxSampler sampler(l.box.lo, l.box.hi, 41);
    for (int i = 0; i < 20; ++i) {
      Point x0 = l.box.to_point(sampler.next());
      const double gap = l.f(x0) - *l.f_star;
      if (gap < 1e-8) continue;
      EndpointResult r = endpoint(l, x0);
      REQUIRE(r.status == EndpointStatus::kConverged);
      const double bound = std::sqrt(2.0 * gap / mu);
      CHECK(r.path_length <= bound * (1.0 + 1e-3));
    }
  }
}

TEST_CASE("cylinder vertical trajectory saturates the length bound") {
  Landscape cyl = builtin("cylinder");
  EndpointResult r = endpoint(cyl, make_vec({1, 0, 2}));
  REQUIRE(r.status == EndpointStatus::kConverged);
  // f = 4, mu = 2: bound sqrt(2*4/2) = 2, and the vertical flow attains it
  CHECK(r.path_length == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(r.path_length <= 2.0 * (1.0 + 1e-3));
}

TEST_CASE("rescaled flow moves the value affinely") {
  Landscape q = parse_scalar_field("x1^2 + x2^2", 2);
  Point up = rescaled_flow(q, make_vec({1, 0}), 3.0);
  CHECK((up - make_vec({2, 0})).norm() <= 1e-8);
  Point down = rescaled_flow(q, make_vec({2, 0}), -3.0);
  CHECK((down - make_vec({1, 0})).norm() <= 1e-8);
  Point same = rescaled_flow(q, make_vec({1.3, 0.4}), 0.0);
  CHECK((same - make_vec({1.3, 0.4})).norm() == 0.0);
}

TEST_CASE("value affinity of the rescaled flow on curved landscapes") {
  for (const auto& name : {"fig2", "quadratic_aniso", "cylinder"}) {
    Landscape l = builtin(name);
    CAPTURE(name);
    oracle::BoxSampler sampler(l.box.lo, l.box.hi, 23);
    int done = 0;
    for (int i = 0; i < 40 && done < 12; ++i) {
      Point x = l.box.to_point(sampler.next());
      const double f0 = l.f(x);
      if (f0 - *l.f_star < 1e-3) continue;
      for (double dv : {0.5, -0.4 * (f0 - *l.f_star)}) {
        Point y = rescaled_flow(l, x, dv);
        CHECK(std::abs(l.f(y) - f0 - dv) <= 1e-8 * std::max(1.0, std::abs(f0)));
      }
      ++done;
    }
    CHECK(done >= 8);
  }
}

TEST_CASE("rescaled flow rejects critical starts and sub-minimum targets") {
  Landscape q = parse_scalar_field("x1^2 + x2^2", 2);
  q.f_star = 0.0;
  CHECK_THROWS_AS(rescaled_flow(q, make_vec({0, 0}), 1.0), Error);
  CHECK_THROWS_AS(rescaled_flow(q, make_vec({1, 0}), -1.5), Error);
}

TEST_CASE("retraction homotopy endpoints") {
  Landscape fig2 = builtin("fig2");
  Vec p = make_vec({0, 1});
  CHECK((retraction_homotopy(fig2, p, 0.0) - p).norm() == 0.0);
  Point at_one = retraction_homotopy(fig2, p, 1.0);
  CHECK(std::abs(at_one[1] - 0.25 * std::sin(4.0 * at_one[0])) <= 1e-6);

  Landscape cubic = parse_scalar_field("x1^2", 1);
  Point mid = retraction_homotopy(cubic, Vec::Constant(1, 1.0), 0.5);
  CHECK(mid[0] == doctest::Approx(std::exp(-2.0)).epsilon(1e-7));

  CHECK_THROWS_AS(retraction_homotopy(fig2, p, 1.5), Error);
}

TEST_CASE("mobius trajectories never leave the strip and wrap is consistent") {
  Landscape l = builtin("mobius");
  Trajectory traj = integrate_gradient_flow(l, make_vec({0.4, 1.5}), 2.0);
  REQUIRE(traj.status == TrajectoryStatus::kCompleted);
  for (const auto& p : traj.points) {
    CHECK(p[0] >= -0.5);
    CHECK(p[0] < 0.5);
  }
  CHECK(traj.last()[0] == doctest::Approx(0.4));
  CHECK(traj.last()[1] == doctest::Approx(1.5 * std::exp(-4.0)).epsilon(1e-6));

  // a start outside the strip is the same quotient point as its wrap image:
  // same values, same path length, strip-interior samples throughout
  Trajectory outside = integrate_gradient_flow(l, make_vec({0.7, 1.3}), 2.0);
  Trajectory inside = integrate_gradient_flow(l, make_vec({-0.3, -1.3}), 2.0);
  REQUIRE(outside.status == TrajectoryStatus::kCompleted);
  CHECK(outside.path_length == doctest::Approx(inside.path_length).epsilon(1e-9));
  CHECK((outside.last() - inside.last()).norm() <= 1e-9);
}

TEST_CASE("flow criteria validation") {
  Landscape q = parse_scalar_field("x1^2", 1);
  FlowCriteria bad;
  bad.eps_grad = -1.0;
  CHECK_THROWS_AS(integrate_gradient_flow(q, Vec::Constant(1, 1.0), 1.0, bad), Error);
  CHECK_THROWS_AS(integrate_gradient_flow(q, Vec::Constant(1, 1.0), 0.0), Error);
}
