#include "pllab/flow.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <sstream>

namespace pllab {

const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::kCompleted: return "completed";
    case TrajectoryStatus::kMaxTime: return "max_time";
    case TrajectoryStatus::kStepUnderflow: return "step_underflow";
    case TrajectoryStatus::kOffManifold: return "off_manifold";
    case TrajectoryStatus::kDiverged: return "diverged";
  }
  return "?";
}

const char* to_string(EndpointStatus s) {
  switch (s) {
    case EndpointStatus::kConverged: return "converged";
    case EndpointStatus::kMaxTime: return "max_time";
    case EndpointStatus::kDiverged: return "diverged";
  }
  return "?";
}

void FlowCriteria::check() const {
  if (eps_grad <= 0 || eps_x <= 0 || t_max <= 0 || rel_tol <= 0 || abs_tol <= 0)
    throw Error("flow criteria must all be positive");
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepHookResult {
  bool reject = false;
  bool stop = false;
  TrajectoryStatus status = TrajectoryStatus::kCompleted;
};

// Adaptive driver. rhs(t, y) evaluates the field; on_accept may adjust the
// accepted point (projection, wrap), request rejection, or stop the run.
class Dp45 {
 public:
  using Rhs = std::function<Vec(double, const Vec&)>;
  using AcceptHook = std::function<StepHookResult(double, Vec&)>;

  Dp45(Rhs rhs, double rel_tol, double abs_tol) : rhs_(std::move(rhs)), rtol_(rel_tol), atol_(abs_tol) {}

  double h_max = 1.0;

  TrajectoryStatus run(double t0, double t1, Vec y,
                       const AcceptHook& on_accept,
                       const std::function<void(double, const Vec&)>& record) {
    const double dir = t1 >= t0 ? 1.0 : -1.0;
    double t = t0;
    Vec k1 = rhs_(t, y);
    if (!k1.allFinite()) return TrajectoryStatus::kDiverged;
    record(t, y);
    double h = initial_step(t, y, k1, dir, t1);
    const int d = static_cast<int>(y.size());
    Vec k2(d), k3(d), k4(d), k5(d), k6(d), k7(d), ynew(d), yerr(d);
    bool nonfinite_cascade = false;

    for (;;) {
      // the final clamped step may leave a rounding-sized remainder
      if (dir * (t1 - t) <= 1e-14 * std::max(1.0, std::abs(t1)))
        return TrajectoryStatus::kCompleted;
      if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
      const double h_floor = 1e-14 * std::max(1.0, std::abs(t));
      if (std::abs(h) < h_floor)
        return nonfinite_cascade ? TrajectoryStatus::kDiverged
                                 : TrajectoryStatus::kStepUnderflow;

      k2 = rhs_(t + c2 * h, y + h * (a21 * k1));
      k3 = rhs_(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
      k4 = rhs_(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
      k5 = rhs_(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      k6 = rhs_(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      if (!ynew.allFinite()) {
        nonfinite_cascade = true;
        h *= 0.25;
        continue;
      }
      k7 = rhs_(t + h, ynew);
      yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

      double err = 0.0;
      for (int i = 0; i < d; ++i) {
        const double sc = atol_ + rtol_ * std::max(std::abs(y[i]), std::abs(ynew[i]));
        const double q = yerr[i] / sc;
        err += q * q;
      }
      err = std::sqrt(err / d);
      if (!std::isfinite(err)) {
        nonfinite_cascade = true;
        err = 2.0;
      }

      if (err <= 1.0) {
        double t_new = t + h;
        StepHookResult hook = on_accept(t_new, ynew);
        if (hook.reject) {
          h *= 0.5;
          continue;
        }
        t = t_new;
        y = ynew;
        nonfinite_cascade = false;
        record(t, y);
        if (hook.stop) return hook.status;
        k1 = rhs_(t, y);  // FSAL does not survive the projection hook
        if (!k1.allFinite()) return TrajectoryStatus::kDiverged;
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        h = dir * std::min(std::abs(h) * fac, h_max);
      } else {
        const double fac = std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
        h *= fac;
      }
    }
  }

 private:
  Rhs rhs_;
  double rtol_, atol_;

  double initial_step(double t, const Vec& y, const Vec& k1, double dir, double t1) const {
    const double d0 = y.norm();
    const double d1 = k1.norm();
    double h = (d1 > 1e-12) ? 0.01 * std::max(d0, 1.0) / d1 : 1e-4;
    h = std::min({h, h_max, std::abs(t1 - t)});
    return dir * std::max(h, 1e-10);
  }
};

// Newton projection onto h^-1(0); returns false when it fails to converge.
bool project_to_manifold(const Constraint& c, Vec& x, double tol) {
  for (int it = 0; it < 5; ++it) {
    Vec r = c.h(x);
    if (r.cwiseAbs().maxCoeff() <= tol) return true;
    Mat j = c.jacobian_h(x);
    Mat gram = j * j.transpose();
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success) return false;
    x -= j.transpose() * llt.solve(r);
  }
  return c.h(x).cwiseAbs().maxCoeff() <= tol;
}

struct FieldContext {
  const Landscape& l;
  const FlowCriteria& crit;
  Tolerances tol;

  Vec riemannian_grad(const Vec& x) const {
    Vec df = ambient_partials(l, x);
    switch (l.metric.kind) {
      case MetricSpec::Kind::kEuclidean:
        return df;
      case MetricSpec::Kind::kChartMatrix:
        return l.metric.chart_matrix(x).llt().solve(df);
      case MetricSpec::Kind::kInduced: {
        Mat j = l.constraint->jacobian_h(x);
        Mat gram = j * j.transpose();
        return df - j.transpose() * gram.llt().solve(j * df);
      }
    }
    return df;
  }

  double grad_norm(const Vec& x) const {
    Vec g = riemannian_grad(x);
    return std::sqrt(metric_norm_sq(l, x, g));
  }

  double segment_length(const Vec& a, const Vec& b) const {
    Vec delta = b - a;
    if (l.metric.kind == MetricSpec::Kind::kChartMatrix) {
      Vec mid = 0.5 * (a + b);
      return std::sqrt(delta.dot(l.metric.chart_matrix(mid) * delta));
    }
    return delta.norm();
  }
};

}  // namespace

Trajectory integrate_gradient_flow(const Landscape& l, const Point& start_raw, double t_end,
                                   const FlowCriteria& crit) {
  crit.check();
  Tolerances tol;
  validate_point(l, start_raw, tol);
  if (t_end == 0.0) throw Error("t_end must be nonzero");
  const Point start = wrap_point(l, start_raw);  // canonical strip representative
  FieldContext ctx{l, crit, tol};

  Trajectory traj;
  Vec prev = start;
  auto record = [&](double t, const Vec& y) {
    if (!traj.times.empty()) traj.path_length += ctx.segment_length(prev, y);
    prev = y;
    traj.times.push_back(t);
    traj.points.push_back(y);
    traj.values.push_back(l.f(y));
    traj.grad_norms.push_back(ctx.grad_norm(y));
  };

  auto on_accept = [&](double, Vec& y) -> StepHookResult {
    StepHookResult r;
    if (l.constraint) {
      Vec before = y;
      if (!project_to_manifold(*l.constraint, y, tol.on_manifold_tol)) {
        r.stop = true;
        r.status = TrajectoryStatus::kOffManifold;
        return r;
      }
      const double budget = 50.0 * (crit.abs_tol + crit.rel_tol * y.norm());
      if ((y - before).norm() > budget) {
        y = before;
        r.reject = true;
        return r;
      }
    }
    if (l.mobius_wrap) y = wrap_point(l, std::move(y));
    if (std::abs(l.f(y)) > crit.overflow_guard || y.norm() > crit.overflow_guard) {
      r.stop = true;
      r.status = TrajectoryStatus::kDiverged;
      return r;
    }
    return r;
  };

  Dp45 solver([&](double, const Vec& x) { return Vec(-ctx.riemannian_grad(x)); },
              crit.rel_tol, crit.abs_tol);
  TrajectoryStatus st = solver.run(0.0, t_end, start, on_accept, record);
  traj.status = st;
  return traj;
}

EndpointResult endpoint(const Landscape& l, const Point& start_raw, const FlowCriteria& crit) {
  crit.check();
  Tolerances tol;
  validate_point(l, start_raw, tol);
  const Point start = wrap_point(l, start_raw);
  FieldContext ctx{l, crit, tol};

  EndpointResult out;
  const double gn0 = ctx.grad_norm(start);
  if (gn0 <= crit.eps_grad) {
    out.limit = start;
    out.status = EndpointStatus::kConverged;
    out.f_at_limit = l.f(start);
    out.grad_norm_at_limit = gn0;
    return out;
  }

  double path_length = 0.0;
  std::deque<std::pair<double, Vec>> window;  // samples within the last unit of time
  Vec prev = start;
  bool stopped = false;

  auto record = [&](double t, const Vec& y) {
    if (!window.empty()) path_length += ctx.segment_length(prev, y);
    prev = y;
    window.emplace_back(t, y);
    while (window.size() > 2 && window[1].first <= t - 1.0) window.pop_front();
  };

  auto on_accept = [&](double t, Vec& y) -> StepHookResult {
    StepHookResult r;
    if (l.constraint) {
      Vec before = y;
      if (!project_to_manifold(*l.constraint, y, tol.on_manifold_tol)) {
        r.stop = true;
        r.status = TrajectoryStatus::kOffManifold;
        return r;
      }
      const double budget = 50.0 * (crit.abs_tol + crit.rel_tol * y.norm());
      if ((y - before).norm() > budget) {
        y = before;
        r.reject = true;
        return r;
      }
    }
    if (l.mobius_wrap) y = wrap_point(l, std::move(y));
    if (std::abs(l.f(y)) > crit.overflow_guard || y.norm() > crit.overflow_guard) {
      r.stop = true;
      r.status = TrajectoryStatus::kDiverged;
      return r;
    }
    if (ctx.grad_norm(y) <= crit.eps_grad && t >= 1.0 && !window.empty() &&
        window.front().first <= t - 1.0 + 1e-12) {
      if ((y - window.front().second).norm() <= crit.eps_x) {
        r.stop = true;
        stopped = true;
      }
    }
    return r;
  };

  Dp45 solver([&](double, const Vec& x) { return Vec(-ctx.riemannian_grad(x)); },
              crit.rel_tol, crit.abs_tol);
  TrajectoryStatus st = solver.run(0.0, crit.t_max, start, on_accept, record);

  out.limit = window.back().second;
  out.stop_time = window.back().first;
  out.path_length = path_length;
  out.f_at_limit = l.f(out.limit);
  out.grad_norm_at_limit = ctx.grad_norm(out.limit);
  if (stopped)
    out.status = EndpointStatus::kConverged;
  else if (st == TrajectoryStatus::kDiverged || st == TrajectoryStatus::kOffManifold ||
           st == TrajectoryStatus::kStepUnderflow)
    out.status = EndpointStatus::kDiverged;
  else
    out.status = EndpointStatus::kMaxTime;
  return out;
}

Point rescaled_flow(const Landscape& l, const Point& start_raw, double delta_value,
                    const FlowCriteria& crit) {
  crit.check();
  Tolerances tol;
  validate_point(l, start_raw, tol);
  const Point start = wrap_point(l, start_raw);
  FieldContext ctx{l, crit, tol};
  if (delta_value == 0.0) return start;

  const double gn0 = ctx.grad_norm(start);
  if (gn0 <= crit.eps_grad)
    throw Error("rescaled flow started at a critical point (|grad| = " + std::to_string(gn0) + ")");
  if (l.f_star && l.f(start) + delta_value <= *l.f_star)
    throw Error("rescaled flow target value is at or below f_star");

  auto rhs = [&](double, const Vec& x) -> Vec {
    Vec g = ctx.riemannian_grad(x);
    const double n2 = metric_norm_sq(l, x, g);
    if (n2 <= crit.eps_grad * crit.eps_grad)
      throw NumericalError("rescaled flow hit a critical region");
    return Vec(g / n2);
  };

  Vec result = start;
  auto record = [&](double, const Vec& y) { result = y; };
  auto on_accept = [&](double, Vec& y) -> StepHookResult {
    StepHookResult r;
    if (l.constraint) {
      Vec before = y;
      if (!project_to_manifold(*l.constraint, y, tol.on_manifold_tol)) {
        r.stop = true;
        r.status = TrajectoryStatus::kOffManifold;
        return r;
      }
    }
    if (l.mobius_wrap) y = wrap_point(l, std::move(y));
    if (std::abs(l.f(y)) > crit.overflow_guard || y.norm() > crit.overflow_guard) {
      r.stop = true;
      r.status = TrajectoryStatus::kDiverged;
      return r;
    }
    return r;
  };

  Dp45 solver(rhs, crit.rel_tol, crit.abs_tol);
  solver.h_max = std::max(std::abs(delta_value) / 8.0, 1e-6);
  TrajectoryStatus st = solver.run(0.0, delta_value, start, on_accept, record);
  if (st != TrajectoryStatus::kCompleted) {
    std::ostringstream msg;
    msg << "rescaled flow failed: " << to_string(st);
    throw NumericalError(msg.str());
  }
  // the value law f(result) = f(start) + delta is the contract; a Newton
  // correction along the gradient removes the integrator's value slack while
  // staying on the trajectory to first order
  const double target = l.f(start) + delta_value;
  for (int it = 0; it < 2; ++it) {
    const double miss = l.f(result) - target;
    if (miss == 0.0) break;
    Vec g = ctx.riemannian_grad(result);
    const double n2 = metric_norm_sq(l, result, g);
    if (n2 <= crit.eps_grad * crit.eps_grad) break;
    result -= (miss / n2) * g;
    if (l.constraint) project_to_manifold(*l.constraint, result, tol.on_manifold_tol);
  }
  return result;
}

Point retraction_homotopy(const Landscape& l, const Point& p, double s, const FlowCriteria& crit) {
  if (s < 0.0 || s > 1.0) throw Error("homotopy parameter must lie in [0, 1]");
  if (s == 0.0) {
    Tolerances tol;
    validate_point(l, p, tol);
    return p;
  }
  if (s == 1.0) return endpoint(l, p, crit).limit;
  const double t = s / (1.0 - s);
  Trajectory traj = integrate_gradient_flow(l, p, t, crit);
  if (traj.status != TrajectoryStatus::kCompleted)
    throw NumericalError(std::string("homotopy flow failed: ") + to_string(traj.status));
  return traj.last();
}

}  // namespace pllab
