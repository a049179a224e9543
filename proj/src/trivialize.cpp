#include "pllab/trivialize.hpp"

#include <cmath>
#include <sstream>

#include "pllab/calculus.hpp"

namespace pllab {

namespace {

// Project a probe back onto the manifold when constrained; identity otherwise.
Point settle(const Landscape& l, Point p, const Tolerances& tol) {
  if (!l.constraint) return p;
  for (int it = 0; it < 8; ++it) {
    Vec r = l.constraint->h(p);
    if (r.cwiseAbs().maxCoeff() <= tol.on_manifold_tol) return p;
    Mat j = l.constraint->jacobian_h(p);
    p -= j.transpose() * (j * j.transpose()).llt().solve(r);
  }
  return p;
}

struct LiftField {
  const Landscape& l;
  const SModel& s;
  const LiftOptions& opts;
  Vec u_dot;  // constant parameter velocity of the contraction path
  Tolerances tol;

  // gamma' = M^+ [u_dot] in tangent coordinates, orthogonalized against the
  // exactly-known gradient so f-conservation is not at the mercy of
  // finite-difference noise in M.
  Vec velocity(const Point& gamma) const {
    Mat basis = tangent_basis(l, gamma, tol);  // d x n
    const int n = static_cast<int>(basis.cols());
    const int m = s.dim_s;
    Mat m_t(m, n);
    for (int j = 0; j < n; ++j) {
      const double h = opts.fd_step * std::max(1.0, gamma.norm());
      Point pp = settle(l, gamma + h * basis.col(j), tol);
      Point pm = settle(l, gamma - h * basis.col(j), tol);
      Vec up = s.param_inverse(endpoint(l, pp, opts.probe).limit);
      Vec um = s.param_inverse(endpoint(l, pm, opts.probe).limit);
      m_t.col(j) = (up - um) / (2.0 * h);
    }
    Eigen::JacobiSVD<Mat> svd(m_t);
    if (svd.singularValues().minCoeff() <= 1e-6)
      throw RankDeficiencyError("Dpi is rank deficient along the lift",
                                svd.singularValues().minCoeff());
    Mat gram = m_t * m_t.transpose();
    Vec v_t = m_t.transpose() * gram.llt().solve(u_dot);
    Vec v = basis * v_t;
    Vec g = gradient(l, gamma, tol).vec;
    const double gn2 = g.squaredNorm();
    if (gn2 > 1e-24) v -= (v.dot(g) / gn2) * g;
    return v;
  }

  Point rk4_step(const Point& g0, const Vec& k1, double h) const {
    Vec k2 = velocity(settle(l, g0 + 0.5 * h * k1, tol));
    Vec k3 = velocity(settle(l, g0 + 0.5 * h * k2, tol));
    Vec k4 = velocity(settle(l, g0 + h * k3, tol));
    Point g = settle(l, g0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), tol);
    if (l.mobius_wrap) g = wrap_point(l, g);
    return g;
  }

  // Integrates one outer interval with adaptive step-doubling RK4. The lift
  // field can vary over short scales where fibers crowd, so fixed steps are
  // not reliable. Returns false when the substep budget runs out.
  bool advance(Point& g, double h_outer, int& budget) const {
    double remaining = h_outer;
    double h = h_outer;
    while (std::abs(remaining) > 1e-15 * (1.0 + std::abs(h_outer))) {
      if (budget <= 0) return false;
      if (std::abs(h) > std::abs(remaining)) h = remaining;
      Vec k1 = velocity(g);
      Point full = rk4_step(g, k1, h);
      Point half = rk4_step(g, k1, 0.5 * h);
      Point two = rk4_step(half, velocity(half), 0.5 * h);
      const double sc = opts.substep_tol * (1.0 + g.norm());
      const double err = (full - two).norm() / 15.0;
      --budget;
      if (err <= sc || std::abs(h) < 1e-12 * std::abs(h_outer)) {
        g = two + (two - full) / 15.0;  // local extrapolation
        if (l.mobius_wrap) g = wrap_point(l, g);
        remaining -= h;
        const double grow = err > 0 ? std::min(2.0, 0.9 * std::pow(sc / err, 0.2)) : 2.0;
        h *= std::max(1.0, grow);
      } else {
        h *= std::max(0.2, 0.9 * std::pow(sc / err, 0.2));
      }
    }
    return true;
  }
};

}  // namespace

EndpointJacobian endpoint_jacobian(const Landscape& l, const SModel& s, const Point& p,
                                   double fd_step, const FlowCriteria& crit) {
  Tolerances tol;
  validate_point(l, p, tol);
  Mat basis = tangent_basis(l, p, tol);
  const int d = l.dim_ambient;
  const int n = static_cast<int>(basis.cols());
  const int m = s.dim_s;

  EndpointJacobian out;
  out.ambient = Mat::Zero(d, d);
  Mat reduced_t(m, n);
  for (int j = 0; j < n; ++j) {
    const double h = fd_step * std::max(1.0, p.norm());
    Point pp = settle(l, p + h * basis.col(j), tol);
    Point pm = settle(l, p - h * basis.col(j), tol);
    EndpointResult rp = endpoint(l, pp, crit);
    EndpointResult rm = endpoint(l, pm, crit);
    if (rp.status != EndpointStatus::kConverged || rm.status != EndpointStatus::kConverged)
      throw NumericalError("endpoint probe failed while differentiating pi");
    Vec dpi = (rp.limit - rm.limit) / (2.0 * h);
    out.ambient += dpi * basis.col(j).transpose();
    reduced_t.col(j) = (s.param_inverse(rp.limit) - s.param_inverse(rm.limit)) / (2.0 * h);
  }
  out.reduced = reduced_t * basis.transpose();  // m x d in ambient coordinates
  Eigen::JacobiSVD<Mat> svd(reduced_t);
  out.singular_values = svd.singularValues();
  const double floor = std::max(1e-6, 1e-6 * out.singular_values.maxCoeff());
  out.estimated_rank = static_cast<int>((out.singular_values.array() > floor).count());
  return out;
}

double fiber_tangency_residual(const Landscape& l, const SModel& s, const Point& p,
                               const LiftOptions& opts) {
  EndpointJacobian j = endpoint_jacobian(l, s, p, opts.fd_step, opts.probe);
  Vec g = gradient(l, p).vec;
  return (j.reduced * g).norm();
}

LiftResult horizontal_lift(const Landscape& l, const SModel& s, const Point& y, int steps,
                           const LiftOptions& opts) {
  if (steps < 1) throw Error("lift needs at least one step");
  Tolerances tol;
  validate_point(l, y, tol);
  EndpointResult base = endpoint(l, y, opts.probe);
  if (base.status != EndpointStatus::kConverged)
    throw NumericalError("end-point map did not converge at the lift start");
  Vec u0 = s.param_inverse(base.limit);

  LiftField field{l, s, opts, Vec(s.u_bar - u0), tol};
  const double f0 = l.f(y);
  const double drift_budget = 10.0 * opts.lift_tol * (1.0 + std::abs(f0));

  LiftResult out;
  out.times.push_back(0.0);
  out.gamma.push_back(y);
  out.values.push_back(f0);
  out.drifts.push_back(0.0);

  const double h = 1.0 / steps;
  Point g = y;
  int budget = opts.max_substeps;
  for (int i = 0; i < steps; ++i) {
    if (!field.advance(g, h, budget)) {
      out.partial = true;
      break;
    }
    const double drift = std::abs(l.f(g) - f0);
    out.times.push_back((i + 1) * h);
    out.gamma.push_back(g);
    out.values.push_back(l.f(g));
    out.drifts.push_back(drift);
    out.f_drift_max = std::max(out.f_drift_max, drift);
    if (drift > drift_budget) {
      out.partial = true;
      break;
    }
  }
  out.endpoint_in_fiber = g;
  EndpointResult fin = endpoint(l, g, opts.probe);
  out.pi_residual = (fin.limit - s.x_bar).norm();
  out.landing_param_error = s.param_inverse(fin.limit) - s.u_bar;
  return out;
}

namespace {

// One or two Newton corrections along the gradient put f exactly on target;
// the correction stays on (first order) the same trajectory.
Point polish_to_value(const Landscape& l, Point p, double target) {
  for (int it = 0; it < 3; ++it) {
    const double miss = l.f(p) - target;
    if (miss == 0.0) break;
    Vec g = ambient_partials(l, p);
    const double gn2 = g.squaredNorm();
    if (gn2 <= 1e-24) break;
    p -= (miss / gn2) * g;
  }
  return p;
}

Vec normal_from_frame(const SModel& s, const Vec& u) {
  Mat t_frame = fd_jacobian(s.param, u);  // d x m
  Eigen::HouseholderQR<Mat> qr(t_frame);
  Mat q = qr.householderQ();
  Vec normal = q.col(q.cols() - 1);  // orthogonal complement for m = d - 1
  // orientation: positive last ambient coordinate, ties broken by the first
  if (std::abs(normal[normal.size() - 1]) > 1e-12) {
    if (normal[normal.size() - 1] < 0) normal = -normal;
  } else if (normal[0] < 0) {
    normal = -normal;
  }
  return normal;
}

// Bisection along base + s * dir for the point where f - f_star = gap.
Point seed_on_ray(const Landscape& l, const Point& base, const Vec& dir, double f_star,
                  double gap) {
  double hi = 1.0;
  while (l.f(base + hi * dir) - f_star < gap) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (l.f(base + mid * dir) - f_star < gap) lo = mid;
    else hi = mid;
  }
  return base + (0.5 * (lo + hi)) * dir;
}

FlowCriteria tight_flow(FlowCriteria crit) {
  crit.rel_tol = std::min(crit.rel_tol, 1e-12);
  crit.abs_tol = std::min(crit.abs_tol, 1e-12);
  return crit;
}

}  // namespace

GlobalChart::GlobalChart(Landscape l, std::shared_ptr<const SModel> s, FiberRule rule,
                         LiftOptions opts)
    : l_(std::move(l)), s_(std::move(s)), rule_(std::move(rule)), opts_(std::move(opts)) {
  if (!s_) throw Error("global chart needs an S model");
  f_star_ = l_.f_star ? *l_.f_star : l_.f(s_->x_bar);
  const int k = l_.dim_manifold - s_->dim_s;
  if (rule_.k != k) throw UnsupportedCaseError("fiber rule dimension does not match codimension");
  direct_ = (k == 1) && !l_.constraint;
}

Vec GlobalChart::oriented_normal(const Vec& u) const { return normal_from_frame(*s_, u); }

Point GlobalChart::fiber_point_at(const Vec& u, double side, double target_gap) const {
  Point base = s_->param(u);
  if (target_gap <= 0.0) return base;
  Vec dir = side * oriented_normal(u);
  const double gap = std::min(seed_gap_, 0.5 * target_gap);
  Point p0 = seed_on_ray(l_, base, dir, f_star_, gap);
  FlowCriteria flow = tight_flow(opts_.probe);
  Point p = rescaled_flow(l_, p0, (f_star_ + target_gap) - l_.f(p0), flow);
  return polish_to_value(l_, p, f_star_ + target_gap);
}

FiberRule GlobalChart::signed_sqrt_rule(const Landscape& l, const SModel& s,
                                        const FlowCriteria& crit) {
  if (l.dim_manifold - s.dim_s != 1)
    throw UnsupportedCaseError(
        "signed-sqrt fiber rectification exists for codimension one only");
  if (l.constraint)
    throw UnsupportedCaseError("signed-sqrt rule is implemented for chart domains only");
  const double f_star = l.f_star ? *l.f_star : l.f(s.x_bar);
  Vec normal = normal_from_frame(s, s.u_bar);

  Landscape l_copy = l;
  Point x_bar = s.x_bar;
  FiberRule rule;
  rule.k = 1;
  rule.coord = [l_copy, x_bar, normal, f_star](const Point& p) {
    const double gap = std::max(l_copy.f(p) - f_star, 0.0);
    const double side = (p - x_bar).dot(normal);
    if (gap > 1e-12 && std::abs(side) < 1e-9 * (1.0 + p.norm()))
      throw NumericalError("fiber orientation is ambiguous this close to S");
    const double sign = side >= 0 ? 1.0 : -1.0;
    return Vec(Vec::Constant(1, sign * std::sqrt(gap)));
  };
  FlowCriteria flow = tight_flow(crit);
  Landscape l2 = l;
  FiberRule out = rule;
  out.point = [l2, x_bar, normal, f_star, flow](const Vec& z) -> Point {
    const double target = z[0] * z[0];
    if (target == 0.0) return x_bar;
    Vec dir = (z[0] >= 0 ? 1.0 : -1.0) * normal;
    Point p0 = seed_on_ray(l2, x_bar, dir, f_star, std::min(1e-8, 0.5 * target));
    Point p = rescaled_flow(l2, p0, (f_star + target) - l2.f(p0), flow);
    return polish_to_value(l2, p, f_star + target);
  };
  return out;
}

GlobalChart::Image GlobalChart::forward(const Point& y) const {
  EndpointResult base = endpoint(l_, y, opts_.probe);
  if (base.status != EndpointStatus::kConverged)
    throw NumericalError("end-point map did not converge in the chart");
  Image img;
  img.u = s_->param_inverse(base.limit);
  if (!direct_) {
    LiftResult lift = horizontal_lift(l_, *s_, y, opts_.steps, opts_);
    if (lift.partial) throw NumericalError("horizontal lift aborted on drift");
    img.z = rule_.coord(lift.endpoint_in_fiber);
    return img;
  }
  // codim 1: f is conserved along the lift and the lift cannot cross S, so
  // z is the signed sqrt of the value gap with the side read off near pi(y)
  const double gap = std::max(l_.f(y) - f_star_, 0.0);
  if (gap <= 1e-14) {
    img.z = Vec::Zero(1);
    return img;
  }
  const double probe = std::min(probe_gap_, 0.5 * gap);
  Point near_s = y;
  if (gap > probe) {
    FlowCriteria flow = tight_flow(opts_.probe);
    near_s = rescaled_flow(l_, y, (f_star_ + probe) - l_.f(y), flow);
  }
  const double side = (near_s - s_->param(img.u)).dot(oriented_normal(img.u));
  if (std::abs(side) < 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + near_s.norm()))
    throw NumericalError("fiber orientation is ambiguous this close to S");
  img.z = Vec::Constant(1, (side >= 0 ? 1.0 : -1.0) * std::sqrt(gap));
  return img;
}

Point GlobalChart::inverse(const Vec& u, const Vec& z) const {
  if (direct_) return fiber_point_at(u, z[0] >= 0 ? 1.0 : -1.0, z.squaredNorm());
  Point start = rule_.point(z);
  // reverse lift: gamma(1) = fiber point; integrate the same field back to
  // t = 0 along c(t) = param((1-t) u + t u_bar)
  Tolerances tol;
  LiftField field{l_, *s_, opts_, Vec(s_->u_bar - u), tol};
  const double h = 1.0 / opts_.steps;
  Point g = start;
  int budget = opts_.max_substeps;
  for (int i = opts_.steps; i > 0; --i) {
    if (!field.advance(g, -h, budget))
      throw NumericalError("reverse lift ran out of its substep budget");
  }
  return g;
}

VerificationReport convexity_along_rectified_lines(const GlobalChart& chart, int samples,
                                                   long long seed, double z_halfwidth) {
  const SModel& s = chart.s_model();
  const int m = s.dim_s;
  const int k = chart.fiber_dim();
  HaltonSampler sampler(2 * (m + k), 1 + seed);
  VerificationReport rep;
  rep.check_name = "convexity";
  rep.seed = seed;
  double worst = 0.0;
  Vec u_lo = s.u_lo.size() ? s.u_lo : Vec::Constant(m, -1.0);
  Vec u_hi = s.u_hi.size() ? s.u_hi : Vec::Constant(m, 1.0);
  for (int i = 0; i < samples; ++i) {
    Vec c = sampler.next();
    Vec ua(m), ub(m), za(k), zb(k);
    for (int j = 0; j < m; ++j) {
      ua[j] = u_lo[j] + (u_hi[j] - u_lo[j]) * c[j];
      ub[j] = u_lo[j] + (u_hi[j] - u_lo[j]) * c[m + k + j];
    }
    for (int j = 0; j < k; ++j) {
      za[j] = z_halfwidth * (2.0 * c[m + j] - 1.0);
      zb[j] = z_halfwidth * (2.0 * c[m + k + m + j] - 1.0);
    }
    const double fa = chart.landscape().f(chart.inverse(ua, za));
    const double fb = chart.landscape().f(chart.inverse(ub, zb));
    const double fm = chart.landscape().f(chart.inverse(0.5 * (ua + ub), 0.5 * (za + zb)));
    const double violation = fm - 0.5 * (fa + fb);
    if (violation > worst) {
      worst = violation;
      rep.worst_value = violation;
    }
  }
  rep.samples = samples;
  rep.estimate = worst;
  rep.percentile_5 = worst;
  rep.pass = true;  // report-only
  std::ostringstream notes;
  notes << "max midpoint-convexity violation = " << worst;
  rep.notes = notes.str();
  return rep;
}

}  // namespace pllab
