#pragma once

#include <vector>

#include "pllab/calculus.hpp"
#include "pllab/landscape.hpp"

namespace pllab {

enum class TrajectoryStatus {
  kCompleted,
  kMaxTime,
  kStepUnderflow,
  kOffManifold,
  kDiverged,
};

enum class EndpointStatus {
  kConverged,
  kMaxTime,
  kDiverged,
};

const char* to_string(TrajectoryStatus s);
const char* to_string(EndpointStatus s);

struct FlowCriteria {
  double eps_grad = 1e-8;
  double eps_x = 1e-9;
  double t_max = 1e3;
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double overflow_guard = 1e12;

  void check() const;
};

/// Sampled flow path: one row per accepted integrator step.
struct Trajectory {
  std::vector<double> times;
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<double> grad_norms;
  TrajectoryStatus status = TrajectoryStatus::kCompleted;
  double path_length = 0.0;  // Riemannian polyline length

  const Point& last() const { return points.back(); }
};

struct EndpointResult {
  Point limit;
  EndpointStatus status = EndpointStatus::kConverged;
  double path_length = 0.0;
  double f_at_limit = 0.0;
  double grad_norm_at_limit = 0.0;
  double stop_time = 0.0;
};

/// Integrates x' = -grad f(x) from 0 to t_end (t_end < 0 integrates
/// backwards and may legitimately end diverged). Adaptive Dormand-Prince
/// 5(4); embedded landscapes are re-projected onto h^-1(0) after each
/// accepted step, and the Moebius wrap rule is applied on strip exit.
Trajectory integrate_gradient_flow(const Landscape& l, const Point& start, double t_end,
                                   const FlowCriteria& crit = {});

/// End-point map pi: integrates until the gradient norm falls below
/// eps_grad and the displacement over the trailing unit of flow time is
/// below eps_x, or until t_max.
EndpointResult endpoint(const Landscape& l, const Point& start, const FlowCriteria& crit = {});

/// Value-parameterized flow nu along grad f / |grad f|^2: moves the value of
/// f by exactly delta_value, f(nu(x, t)) = f(x) + t.
Point rescaled_flow(const Landscape& l, const Point& start, double delta_value,
                    const FlowCriteria& crit = {});

/// Deformation-retraction stage map F(p, s) = Phi^{s/(1-s)}(p), with
/// F(p, 1) = pi(p).
Point retraction_homotopy(const Landscape& l, const Point& p, double s,
                          const FlowCriteria& crit = {});

}  // namespace pllab
