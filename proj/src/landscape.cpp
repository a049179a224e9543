#include "pllab/landscape.hpp"

#include <cmath>
#include <sstream>

namespace pllab {

void validate_point(const Landscape& l, const Point& p, const Tolerances& tol) {
  if (p.size() != l.dim_ambient) {
    std::ostringstream msg;
    msg << "point has dimension " << p.size() << ", landscape expects " << l.dim_ambient;
    throw Error(msg.str());
  }
  if (!p.allFinite()) throw NonFiniteError("point has non-finite coordinates");
  if (l.constraint) {
    const double res = l.constraint->h(p).cwiseAbs().maxCoeff();
    if (res > tol.on_manifold_tol) {
      std::ostringstream msg;
      msg << "point is off the manifold: |h(p)|_inf = " << res;
      throw OffManifoldError(msg.str(), res);
    }
  }
}

Point wrap_point(const Landscape& l, Point p) {
  if (!l.mobius_wrap) return p;
  while (p[0] >= 0.5) {
    p[0] -= 1.0;
    p[1] = -p[1];
  }
  while (p[0] < -0.5) {
    p[0] += 1.0;
    p[1] = -p[1];
  }
  return p;
}

Landscape parse_scalar_field(const std::string& text, int dim) {
  using expr::Expression;
  Expression f = expr::parse(text, dim);
  if (f.contains(expr::NodeKind::kAbs))
    throw DifferentiationError("abs() is not differentiable; cannot build gradient field");

  std::vector<Expression> grad(dim);
  std::vector<Expression> hess(static_cast<std::size_t>(dim) * dim);
  for (int i = 0; i < dim; ++i) {
    grad[i] = f.derivative(i);
    for (int j = 0; j <= i; ++j) hess[i * dim + j] = grad[i].derivative(j);
  }

  Landscape l;
  l.dim_ambient = dim;
  l.dim_manifold = dim;
  l.name = text;
  l.f = [f](const Point& p) { return f.eval(p); };
  l.grad_f = [grad, dim](const Point& p) {
    Vec g(dim);
    for (int i = 0; i < dim; ++i) g[i] = grad[i].eval(p);
    return g;
  };
  l.hess_f = [hess, dim](const Point& p) {
    Mat h(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = hess[i * dim + j].eval(p);
    return h;
  };
  l.box.lo = Vec::Constant(dim, -2.0);
  l.box.hi = Vec::Constant(dim, 2.0);
  return l;
}

namespace {

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec vec3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

Landscape make_fig2() {
  Landscape l = parse_scalar_field("0.5*(0.25*sin(4*x1) - x2)^2", 2);
  l.name = "fig2";
  l.f_star = 0.0;
  l.mu_claim = 1.0;
  l.mu_upper_slack = 1e-3;  // Halton resolution of the cos^2 infimum on the box
  l.box.lo = vec2(-M_PI, -2.0);
  l.box.hi = vec2(M_PI, 2.0);
  auto s = std::make_shared<SModel>();
  s->dim_s = 1;
  s->param = [](const Vec& u) { return vec2(u[0], 0.25 * std::sin(4.0 * u[0])); };
  s->param_inverse = [](const Point& p) { return Vec::Constant(1, p[0]); };
  s->x_bar = vec2(0.0, 0.0);
  s->u_bar = Vec::Zero(1);
  s->u_lo = Vec::Constant(1, -2.0);
  s->u_hi = Vec::Constant(1, 2.0);
  l.s_model = s;
  return l;
}

Landscape make_cylinder() {
  Landscape l;
  l.name = "cylinder";
  l.dim_ambient = 3;
  l.dim_manifold = 2;
  l.f = [](const Point& p) { return p[2] * p[2]; };
  l.grad_f = [](const Point& p) { return vec3(0.0, 0.0, 2.0 * p[2]); };
  l.hess_f = [](const Point&) {
    Mat h = Mat::Zero(3, 3);
    h(2, 2) = 2.0;
    return h;
  };
  l.metric.kind = MetricSpec::Kind::kInduced;
  Constraint c;
  c.codim = 1;
  c.h = [](const Vec& p) { return Vec::Constant(1, p[0] * p[0] + p[1] * p[1] - 1.0); };
  c.jacobian_h = [](const Vec& p) {
    Mat j(1, 3);
    j << 2.0 * p[0], 2.0 * p[1], 0.0;
    return j;
  };
  l.constraint = c;
  l.f_star = 0.0;
  l.mu_claim = 2.0;
  l.mu_upper_slack = 1e-9;  // the ratio is constant on the cylinder
  // chart (theta, x3)
  l.box.lo = vec2(-M_PI, -3.0);
  l.box.hi = vec2(M_PI, 3.0);
  l.box.chart_to_point = [](const Vec& c) {
    return vec3(std::cos(c[0]), std::sin(c[0]), c[1]);
  };
  auto s = std::make_shared<SModel>();
  s->dim_s = 1;
  s->param = [](const Vec& u) { return vec3(std::cos(u[0]), std::sin(u[0]), 0.0); };
  s->param_inverse = [](const Point& p) { return Vec::Constant(1, std::atan2(p[1], p[0])); };
  s->x_bar = vec3(1.0, 0.0, 0.0);
  s->u_bar = Vec::Zero(1);
  s->u_lo = Vec::Constant(1, -2.5);
  s->u_hi = Vec::Constant(1, 2.5);
  l.s_model = s;
  return l;
}

Landscape make_mobius() {
  Landscape l = parse_scalar_field("x2^2", 2);
  l.name = "mobius";
  l.f_star = 0.0;
  l.mu_claim = 2.0;
  l.mu_upper_slack = 1e-9;
  l.mobius_wrap = true;
  l.box.lo = vec2(-0.5, -2.0);
  l.box.hi = vec2(0.5, 2.0);
  auto s = std::make_shared<SModel>();
  s->dim_s = 1;
  s->param = [](const Vec& u) {
    double x = u[0];
    // wrap the parameter into the strip; f = x2^2 is invariant under the wrap
    while (x >= 0.5) x -= 1.0;
    while (x < -0.5) x += 1.0;
    return vec2(x, 0.0);
  };
  s->param_inverse = [](const Point& p) { return Vec::Constant(1, p[0]); };
  s->x_bar = vec2(0.0, 0.0);
  s->u_bar = Vec::Zero(1);
  s->u_lo = Vec::Constant(1, -0.45);
  s->u_hi = Vec::Constant(1, 0.45);
  l.s_model = s;
  return l;
}

Landscape make_ts2() {
  Landscape l;
  l.name = "ts2";
  l.dim_ambient = 6;
  l.dim_manifold = 4;
  l.f = [](const Point& p) { return 0.5 * p.tail(3).squaredNorm(); };
  l.grad_f = [](const Point& p) {
    Vec g = Vec::Zero(6);
    g.tail(3) = p.tail(3);
    return g;
  };
  l.hess_f = [](const Point&) {
    Mat h = Mat::Zero(6, 6);
    h.bottomRightCorner(3, 3).setIdentity();
    return h;
  };
  l.metric.kind = MetricSpec::Kind::kInduced;
  Constraint c;
  c.codim = 2;
  c.h = [](const Vec& p) {
    Vec r(2);
    r[0] = p.head(3).squaredNorm() - 1.0;
    r[1] = p.head(3).dot(p.tail(3));
    return r;
  };
  c.jacobian_h = [](const Vec& p) {
    Mat j = Mat::Zero(2, 6);
    j.row(0).head(3) = 2.0 * p.head(3);
    j.row(1).head(3) = p.tail(3);
    j.row(1).tail(3) = p.head(3);
    return j;
  };
  l.constraint = c;
  l.f_star = 0.0;
  l.mu_claim = 1.0;
  l.mu_upper_slack = 1e-9;
  // chart (theta, phi, a, b): base point on the sphere away from the poles,
  // v = a e_theta + b e_phi in the tangent plane
  l.box.lo = (Vec(4) << -M_PI, -1.2, -2.0, -2.0).finished();
  l.box.hi = (Vec(4) << M_PI, 1.2, 2.0, 2.0).finished();
  l.box.chart_to_point = [](const Vec& c) {
    const double th = c[0], ph = c[1];
    Vec x = vec3(std::cos(ph) * std::cos(th), std::cos(ph) * std::sin(th), std::sin(ph));
    Vec e_th = vec3(-std::sin(th), std::cos(th), 0.0);
    Vec e_ph = vec3(-std::sin(ph) * std::cos(th), -std::sin(ph) * std::sin(th), std::cos(ph));
    Vec p(6);
    p.head(3) = x;
    p.tail(3) = c[2] * e_th + c[3] * e_ph;
    return p;
  };
  auto s = std::make_shared<SModel>();
  s->dim_s = 2;
  // gnomonic chart of the upper hemisphere, zero section
  s->param = [](const Vec& u) {
    Vec x = vec3(u[0], u[1], 1.0);
    x /= x.norm();
    Vec p = Vec::Zero(6);
    p.head(3) = x;
    return p;
  };
  s->param_inverse = [](const Point& p) { return vec2(p[0] / p[2], p[1] / p[2]); };
  s->x_bar = (Vec(6) << 0, 0, 1, 0, 0, 0).finished();
  s->u_bar = Vec::Zero(2);
  s->u_lo = Vec::Constant(2, -1.5);
  s->u_hi = Vec::Constant(2, 1.5);
  l.s_model = s;
  return l;
}

Landscape make_quadratic_aniso() {
  Landscape l = parse_scalar_field("x1^2 + 4*x2^2", 2);
  l.name = "quadratic_aniso";
  l.f_star = 0.0;
  l.box.lo = vec2(-2.0, -2.0);
  l.box.hi = vec2(2.0, 2.0);
  l.known_critical_points = {vec2(0.0, 0.0)};
  return l;
}

Landscape make_invex_not_pl() {
  Landscape l = parse_scalar_field("(x1^2*x2 - x1 - 1)^2 + (x1^2 - 1)^2", 2);
  l.name = "invex_not_pl";
  l.f_star = 0.0;
  l.box.lo = vec2(-3.0, -3.0);
  l.box.hi = vec2(3.0, 3.0);
  l.degradation_boxes = {3.0, 10.0, 30.0};
  // the low-ratio strip near x1 ~ 0 at large |x2| is thin; it takes this many
  // quasi-random samples to resolve the monotone decay across the boxes
  l.degradation_samples = 200000;
  l.known_critical_points = {vec2(-1.0, 0.0), vec2(1.0, 2.0)};
  return l;
}

Landscape make_c1_cross() {
  Landscape l;
  l.name = "c1_cross";
  l.dim_ambient = 2;
  l.dim_manifold = 2;
  l.f = [](const Point& p) {
    const double q = p[0] * p[0] + p[1] * p[1];
    if (q == 0.0) return 0.0;
    return p[0] * p[0] * p[1] * p[1] / q;
  };
  // C^1 but not C^2 at the origin; the gradient extends continuously by 0
  l.grad_f = [](const Point& p) {
    const double q = p[0] * p[0] + p[1] * p[1];
    if (q == 0.0) return Vec(Vec::Zero(2));
    const double q2 = q * q;
    return vec2(2.0 * p[0] * std::pow(p[1], 4) / q2, 2.0 * p[1] * std::pow(p[0], 4) / q2);
  };
  l.f_star = 0.0;
  l.box.lo = vec2(-2.0, -2.0);
  l.box.hi = vec2(2.0, 2.0);
  l.expected_fail = {"mb"};
  auto s = std::make_shared<SModel>();
  s->dim_s = 1;  // the x-axis branch; the full minimizer set is a cross
  s->param = [](const Vec& u) { return vec2(u[0], 0.0); };
  s->param_inverse = [](const Point& p) { return Vec::Constant(1, p[0]); };
  s->x_bar = vec2(0.0, 0.0);
  s->u_bar = Vec::Zero(1);
  s->u_lo = Vec::Constant(1, -1.5);
  s->u_hi = Vec::Constant(1, 1.5);
  l.s_model = s;
  return l;
}

Landscape make_backward_blowup() {
  Landscape l = parse_scalar_field("log(exp(x1^2) + exp(x1^4))", 1);
  l.name = "backward_blowup";
  // infimum of log(e^{x^2} + e^{x^4}) is log 2 at x = 0
  l.f_star = std::log(2.0);
  l.box.lo = Vec::Constant(1, -2.0);
  l.box.hi = Vec::Constant(1, 2.0);
  l.known_critical_points = {Vec::Zero(1)};
  return l;
}

}  // namespace

std::vector<std::string> builtin_names() {
  return {"fig2", "cylinder", "mobius", "ts2", "quadratic_aniso", "invex_not_pl",
          "c1_cross", "backward_blowup"};
}

Landscape builtin(const std::string& name) {
  if (name == "fig2") return make_fig2();
  if (name == "cylinder") return make_cylinder();
  if (name == "mobius") return make_mobius();
  if (name == "ts2") return make_ts2();
  if (name == "quadratic_aniso") return make_quadratic_aniso();
  if (name == "invex_not_pl") return make_invex_not_pl();
  if (name == "c1_cross") return make_c1_cross();
  if (name == "backward_blowup") return make_backward_blowup();
  std::ostringstream msg;
  msg << "unknown builtin '" << name << "'; registry:";
  for (const auto& n : builtin_names()) msg << ' ' << n;
  throw Error(msg.str());
}

}  // namespace pllab
