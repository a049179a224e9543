#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pllab/calculus.hpp"
#include "pllab/landscape.hpp"
#include "test_helpers.hpp"

using namespace pllab;
using oracle::make_vec;

TEST_CASE("parse_scalar_field evaluates f and derivatives") {
  Landscape l = parse_scalar_field("0.5*(0.25*sin(4*x1) - x2)^2", 2);
  // hand-evaluated: 0.5*(0.25 sin 0 - 1)^2 = 0.5
  CHECK(l.f(make_vec({0, 1})) == doctest::Approx(0.5));

  Landscape q = parse_scalar_field("x1^2 + x2^2", 2);
  CHECK(q.f(make_vec({0, 0})) == 0.0);
  Vec g = q.grad_f(make_vec({1, 2}));
  CHECK(g[0] == doctest::Approx(2.0));
  CHECK(g[1] == doctest::Approx(4.0));
}

TEST_CASE("parse_scalar_field rejects malformed input and abs") {
  CHECK_THROWS_AS(parse_scalar_field("x1 + )", 1), ParseError);
  CHECK_THROWS_AS(parse_scalar_field("abs(x1)", 1), DifferentiationError);
  CHECK_THROWS_AS(parse_scalar_field("x2", 1), ParseError);
}

TEST_CASE("builtin registry") {
  for (const auto& name : builtin_names()) {
    CAPTURE(name);
    Landscape l = builtin(name);
    CHECK(l.name == name);
    CHECK(l.dim_ambient > 0);
    CHECK(l.box.lo.size() == l.box.hi.size());
  }
  CHECK_THROWS_AS(builtin("nope"), Error);
  try {
    builtin("nope");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("fig2") != std::string::npos);
  }
}

TEST_CASE("cylinder values from the worked example") {
  Landscape cyl = builtin("cylinder");
  Vec p = make_vec({1, 0, 2});
  CHECK(cyl.f(p) == doctest::Approx(4.0));
  TangentVector g = gradient(cyl, p);
  CHECK(g.vec[0] == doctest::Approx(0.0));
  CHECK(g.vec[1] == doctest::Approx(0.0));
  CHECK(g.vec[2] == doctest::Approx(4.0));
  // PL ratio |grad|^2 / (2 f) = 16 / 8 = 2
  CHECK(g.vec.squaredNorm() / (2.0 * cyl.f(p)) == doctest::Approx(2.0));
}

TEST_CASE("ts2 values from the worked example") {
  Landscape ts2 = builtin("ts2");
  Vec p = make_vec({0, 0, 1, 1, 1, 0});
  CHECK(ts2.f(p) == doctest::Approx(1.0));
  TangentVector g = gradient(ts2, p);
  Vec expected = make_vec({0, 0, 0, 1, 1, 0});
  CHECK((g.vec - expected).norm() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g.vec.squaredNorm() / (2.0 * ts2.f(p)) == doctest::Approx(1.0));
}

TEST_CASE("fig2 closed-form gradient at pi/8") {
  Landscape l = builtin("fig2");
  Vec p = make_vec({M_PI / 8.0, 0.0});
  CHECK(l.f(p) == doctest::Approx(1.0 / 32.0));
  Vec g = l.grad_f(p);
  CHECK(g[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(-0.25));
  CHECK(g.squaredNorm() / (2.0 * l.f(p)) == doctest::Approx(1.0));
}

TEST_CASE("validate_point") {
  Landscape cyl = builtin("cylinder");
  CHECK_NOTHROW(validate_point(cyl, make_vec({1, 0, 2})));
  try {
    validate_point(cyl, make_vec({2, 0, 0}));
    CHECK(false);
  } catch (const OffManifoldError& e) {
    CHECK(e.residual == doctest::Approx(3.0));
  }
  Landscape fig2 = builtin("fig2");
  CHECK_THROWS_AS(validate_point(fig2, make_vec({std::nan(""), 0})), NonFiniteError);
  CHECK_THROWS_AS(validate_point(fig2, make_vec({0, 0, 0})), Error);
}

TEST_CASE("every builtin with mu_claim satisfies the PL inequality on its box") {
  for (const auto& name : builtin_names()) {
    Landscape l = builtin(name);
    if (!l.mu_claim) continue;
    CAPTURE(name);
    REQUIRE(l.f_star.has_value());
    oracle::BoxSampler sampler(l.box.lo, l.box.hi, 77);
    int checked = 0;
    for (int i = 0; i < 10000; ++i) {
      Point p = l.box.to_point(sampler.next());
      const double gap = l.f(p) - *l.f_star;
      if (gap <= 1e-12) continue;
      TangentVector g = gradient(l, p);
      const double lhs = metric_norm_sq(l, p, g.vec);
      CHECK(lhs >= 2.0 * (*l.mu_claim) * gap - 1e-9);
      ++checked;
    }
    CHECK(checked > 9000);
  }
}

TEST_CASE("invex_not_pl: both critical points reach f = 0 and the grid ratio collapses") {
  Landscape l = builtin("invex_not_pl");
  for (const auto& cp : l.known_critical_points) {
    CHECK(l.f(cp) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(l.grad_f(cp).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }
  // 200x200 grid on [-3,3]^2: the infimum of the PL ratio over f > 1e-6 drops
  // below 1e-2 (the low-ratio strip sits near x1 ~ 0 at the box edge)
  double best = 1e30;
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      Vec p = make_vec({-3.0 + 6.0 * i / 199.0, -3.0 + 6.0 * j / 199.0});
      const double f = l.f(p);
      if (f <= 1e-6) continue;
      best = std::min(best, l.grad_f(p).squaredNorm() / (2.0 * f));
    }
  }
  CHECK(best < 1e-2);
}

TEST_CASE("mobius wrap rule preserves f") {
  Landscape l = builtin("mobius");
  Vec p = make_vec({0.7, 1.3});
  Vec w = wrap_point(l, p);
  CHECK(w[0] == doctest::Approx(-0.3));
  CHECK(w[1] == doctest::Approx(-1.3));
  CHECK(l.f(w) == doctest::Approx(l.f(p)));
  Vec q = make_vec({-0.6, 0.5});
  Vec wq = wrap_point(l, q);
  CHECK(wq[0] == doctest::Approx(0.4));
  CHECK(wq[1] == doctest::Approx(-0.5));
}

TEST_CASE("backward_blowup infimum is log 2") {
  Landscape l = builtin("backward_blowup");
  REQUIRE(l.f_star.has_value());
  CHECK(*l.f_star == doctest::Approx(std::log(2.0)));
  CHECK(l.f(Vec::Zero(1)) == doctest::Approx(std::log(2.0)));
  CHECK(l.f(make_vec({1.5})) > *l.f_star);
}

TEST_CASE("s_model parametrizations land on the critical set") {
  for (const auto& name : {"fig2", "cylinder", "mobius", "ts2"}) {
    Landscape l = builtin(name);
    CAPTURE(name);
    REQUIRE(l.s_model);
    const auto& s = *l.s_model;
    oracle::BoxSampler sampler(s.u_lo, s.u_hi, 5);
    for (int i = 0; i < 50; ++i) {
      Vec u = sampler.next();
      Point p = s.param(u);
      TangentVector g = gradient(l, p);
      CHECK(g.vec.norm() <= 1e-9);
      Vec u_back = s.param_inverse(p);
      CHECK((u_back - u).norm() <= 1e-8);
    }
    CHECK((s.param(s.u_bar) - s.x_bar).norm() <= 1e-12);
  }
}
