#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pllab/flow.hpp"
#include "pllab/landscape.hpp"
#include "pllab/verify.hpp"

namespace pllab {

/// Finite-difference differential of the end-point map at p.
struct EndpointJacobian {
  Mat ambient;          // d x d, probes along tangent directions
  Mat reduced;          // m x d, differential of u = param_inverse(pi(.))
  Vec singular_values;  // of the reduced matrix
  int estimated_rank = 0;
};

struct LiftOptions {
  int steps = 64;            // outer sampling grid of the lift curve
  double fd_step = 1e-4;
  double lift_tol = 1e-5;
  double substep_tol = 1e-10;  // error control of the adaptive RK4 substeps
  int max_substeps = 40000;
  FlowCriteria probe;  // endpoint criteria for Jacobian probes (tightened)

  LiftOptions() {
    probe.eps_grad = 1e-10;
    probe.eps_x = 1e-12;
    probe.rel_tol = 1e-12;
    probe.abs_tol = 1e-12;
  }
};

/// Central differences of the end-point map, probes tightened so the
/// quotient survives the division by the step.
EndpointJacobian endpoint_jacobian(const Landscape& l, const SModel& s, const Point& p,
                                   double fd_step, const FlowCriteria& crit);

/// | Dpi(p)[grad f(p)] | in parameter coordinates; gradients are tangent to
/// fibers, so this vanishes up to finite-difference noise.
double fiber_tangency_residual(const Landscape& l, const SModel& s, const Point& p,
                               const LiftOptions& opts = {});

/// A horizontal lift run: the sampled curve, its landing point on the fiber
/// of x_bar, and conservation diagnostics.
struct LiftResult {
  std::vector<double> times;
  std::vector<Point> gamma;
  std::vector<double> values;
  std::vector<double> drifts;
  Point endpoint_in_fiber;
  double f_drift_max = 0.0;
  double pi_residual = 0.0;       // ambient distance from pi(gamma(end)) to x_bar
  Vec landing_param_error;        // param_inverse(pi(gamma(end))) - u_bar
  bool partial = false;           // aborted on a drift blow-up
};

/// Lifts the straight-line contraction c(t) = param((1-t) u0 + t u_bar)
/// horizontally through y: gamma' = Dpi(gamma)^+ [c'], f constant along gamma.
LiftResult horizontal_lift(const Landscape& l, const SModel& s, const Point& y, int steps,
                           const LiftOptions& opts = {});

/// Within-fiber rectification rule for the global chart.
struct FiberRule {
  int k = 1;
  // maps a point on the fiber of x_bar to z in R^k
  std::function<Vec(const Point&)> coord;
  // maps z to the point on the fiber of x_bar with f = f_star + |z|^2
  std::function<Point(const Vec&)> point;
};

/// Global rectified chart xi(y) = (param_inverse(pi(y)), phi_fiber(phi_1(y)))
/// with f(xi^{-1}(u, z)) = f_star + |z|^2.
///
/// For codimension one on a chart domain, f is constant along horizontal
/// lifts and lifts cannot cross S, so phi_fiber(phi_1(y)) collapses to the
/// signed sqrt of f(y) - f_star with the side of S read off near pi(y); the
/// chart then rides fibers directly (the value flow), which stays
/// well-conditioned where transverse lifts are not. Landscapes with an
/// analytic fiber rule (the tangent-bundle example) go through the lift.
class GlobalChart {
 public:
  GlobalChart(Landscape l, std::shared_ptr<const SModel> s, FiberRule rule,
              LiftOptions opts = {});

  struct Image {
    Vec u;
    Vec z;
  };

  Image forward(const Point& y) const;
  Point inverse(const Vec& u, const Vec& z) const;

  const Landscape& landscape() const { return l_; }
  const SModel& s_model() const { return *s_; }
  int fiber_dim() const { return rule_.k; }
  double f_star() const { return f_star_; }

  /// Unit normal to S at param(u), oriented to have a positive last ambient
  /// component (ties broken by the first component).
  Vec oriented_normal(const Vec& u) const;

  /// Builds the default codimension-one rule: signed sqrt(f - f_star) with
  /// the orientation fixed by the normal direction at x_bar.
  static FiberRule signed_sqrt_rule(const Landscape& l, const SModel& s,
                                    const FlowCriteria& crit = {});

 private:
  Landscape l_;
  std::shared_ptr<const SModel> s_;
  FiberRule rule_;
  LiftOptions opts_;
  double f_star_ = 0.0;
  bool direct_ = false;        // codim-1 fiber-transport evaluation
  double probe_gap_ = 1e-6;    // f-level for side-of-S probes
  double seed_gap_ = 1e-8;     // f-level where fiber seeds leave S

  Point fiber_point_at(const Vec& u, double side, double target_gap) const;
};

inline GlobalChart global_rectified_chart(Landscape l, std::shared_ptr<const SModel> s,
                                          FiberRule rule, LiftOptions opts = {}) {
  return GlobalChart(std::move(l), std::move(s), std::move(rule), std::move(opts));
}

/// Midpoint-convexity sweep of f in rectified coordinates along random
/// straight segments; reports the worst violation.
VerificationReport convexity_along_rectified_lines(const GlobalChart& chart, int samples,
                                                   long long seed = 0,
                                                   double z_halfwidth = 1.0);

}  // namespace pllab
