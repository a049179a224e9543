#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pllab/calculus.hpp"
#include "pllab/construct.hpp"
#include "pllab/verify.hpp"
#include "test_helpers.hpp"

using namespace pllab;
using oracle::make_vec;

namespace {

// S = {0} in R^2: psi1 is empty, psi2 the identity.
DiffeoPair identity_diffeo() {
  DiffeoPair d;
  d.dim = 2;
  d.dim_s = 0;
  d.dim_k = 2;
  d.psi1 = [](const Point&) { return Vec(0); };
  d.psi2 = [](const Point& y) { return y; };
  d.inverse = [](const Vec&, const Vec& z) { return z; };
  return d;
}

// Shear along the sine curve: S = graph of 0.25 sin(4 u).
DiffeoPair sine_shear_diffeo(bool with_jacobian) {
  DiffeoPair d;
  d.dim = 2;
  d.dim_s = 1;
  d.dim_k = 1;
  d.psi1 = [](const Point& y) { return Vec::Constant(1, y[0]); };
  d.psi2 = [](const Point& y) {
    return Vec::Constant(1, y[1] - 0.25 * std::sin(4.0 * y[0]));
  };
  d.inverse = [](const Vec& u, const Vec& z) {
    return make_vec({u[0], 0.25 * std::sin(4.0 * u[0]) + z[0]});
  };
  if (with_jacobian) {
    d.jacobian_inverse = [](const Vec& u, const Vec&) {
      Mat j(2, 2);
      j << 1.0, 0.0, std::cos(4.0 * u[0]), 1.0;
      return j;
    };
  }
  return d;
}

}  // namespace

TEST_CASE("identity diffeo reproduces the squared norm") {
  Landscape l = pl_from_diffeo(identity_diffeo());
  oracle::BoxSampler sampler(make_vec({-2, -2}), make_vec({2, 2}), 2);
  for (int i = 0; i < 40; ++i) {
    Vec y = sampler.next();
    CHECK(l.f(y) == doctest::Approx(y.squaredNorm()).epsilon(1e-10));
  }
  CHECK(*l.mu_claim == 1.0);
  CHECK(*l.f_star == 0.0);
}

TEST_CASE("sine shear reproduces the closed form (y2 - 0.25 sin 4 y1)^2") {
  for (bool analytic : {false, true}) {
    CAPTURE(analytic);
    Landscape l = pl_from_diffeo(sine_shear_diffeo(analytic));
    oracle::BoxSampler sampler(make_vec({-2, -2}), make_vec({2, 2}), 4);
    for (int i = 0; i < 40; ++i) {
      Vec y = sampler.next();
      const double expected = std::pow(y[1] - 0.25 * std::sin(4.0 * y[0]), 2);
      CHECK(l.f(y) == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
    }
    CHECK(l.f(make_vec({0, 1})) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("constructed landscapes are 1-PL at sampled points") {
  for (int which = 0; which < 2; ++which) {
    Landscape l = which == 0 ? pl_from_diffeo(identity_diffeo())
                             : pl_from_diffeo(sine_shear_diffeo(true));
    CAPTURE(which);
    HaltonSampler sampler(2, 1);
    int checked = 0;
    for (int i = 0; i < 2000; ++i) {
      Vec c = sampler.next();
      Vec y = 4.0 * (c.array() - 0.5).matrix();
      const double f = l.f(y);
      if (f < 1e-8) continue;
      Vec g = fd_gradient(l.f, y);
      CHECK(g.squaredNorm() >= 2.0 * f * (1.0 - 1e-6));
      ++checked;
    }
    CHECK(checked > 1500);
  }
}

TEST_CASE("zero set of the construction matches psi2 = 0") {
  Landscape l = pl_from_diffeo(sine_shear_diffeo(true));
  DiffeoPair d = sine_shear_diffeo(true);
  HaltonSampler sampler(2, 5);
  for (int i = 0; i < 300; ++i) {
    Vec c = sampler.next();
    Vec y = 4.0 * (c.array() - 0.5).matrix();
    const bool f_zero = l.f(y) <= 1e-10;
    const bool on_s = d.psi2(y).norm() <= 1e-6;
    if (on_s) CHECK(f_zero);
    if (f_zero) CHECK(d.psi2(y).norm() <= 1e-4);
  }
}

TEST_CASE("directional identity residual") {
  {
    Landscape l = pl_from_diffeo(identity_diffeo());
    DiffeoPair d = identity_diffeo();
    // exact for the quadratic: Df(y)[y] = 2|y|^2 = f + |y|^2
    CHECK(directional_identity_residual(l, d, make_vec({1, 1})) <= 1e-8);
  }
  {
    Landscape l = pl_from_diffeo(sine_shear_diffeo(true));
    DiffeoPair d = sine_shear_diffeo(true);
    // both sides equal 2 at (0, 1) by the closed form
    CHECK(directional_identity_residual(l, d, make_vec({0, 1})) <= 1e-6);
    CHECK_THROWS_AS(directional_identity_residual(l, d, make_vec({0.3, 0.25 * std::sin(1.2)})),
                    Error);
  }
}

TEST_CASE("quadrature stability under panel doubling") {
  DiffeoPair d = sine_shear_diffeo(false);
  ConstructOptions o8;
  o8.panels = 8;
  ConstructOptions o16;
  o16.panels = 16;
  Landscape l8 = pl_from_diffeo(d, {}, o8);
  Landscape l16 = pl_from_diffeo(d, {}, o16);
  oracle::BoxSampler sampler(make_vec({-2, -2}), make_vec({2, 2}), 6);
  for (int i = 0; i < 20; ++i) {
    Vec y = sampler.next();
    CHECK(std::abs(l8.f(y) - l16.f(y)) <= 1e-9 * (1.0 + std::abs(l8.f(y))));
  }
}

TEST_CASE("warped chart metric keeps the construction 1-PL") {
  MetricSpec warped;
  warped.kind = MetricSpec::Kind::kChartMatrix;
  warped.chart_matrix = [](const Vec& x) {
    Mat g = Mat::Identity(2, 2);
    g(0, 0) = 1.0 + x[0] * x[0];
    return g;
  };
  Landscape l = pl_from_diffeo(identity_diffeo(), warped);
  HaltonSampler sampler(2, 9);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    Vec c = sampler.next();
    Vec y = 3.0 * (c.array() - 0.5).matrix();
    const double f = l.f(y);
    if (f < 1e-6) continue;
    // Riemannian gradient norm^2 = df^T G^{-1} df
    Vec df = fd_gradient(l.f, y);
    Mat g = warped.chart_matrix(y);
    const double norm_sq = df.dot(g.llt().solve(df));
    CHECK(norm_sq >= 2.0 * f * (1.0 - 1e-5));
    ++checked;
  }
  CHECK(checked > 400);
}

TEST_CASE("bad diffeos are rejected") {
  DiffeoPair broken = sine_shear_diffeo(false);
  broken.inverse = [](const Vec& u, const Vec& z) { return make_vec({u[0], z[0]}); };
  CHECK_THROWS_AS(pl_from_diffeo(broken), Error);

  DiffeoPair mismatched = identity_diffeo();
  mismatched.dim_k = 1;
  CHECK_THROWS_AS(pl_from_diffeo(mismatched), Error);
}
