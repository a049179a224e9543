#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pllab/flow.hpp"
#include "pllab/landscape.hpp"

namespace pllab {

/// Local normal form around a nondegenerate minimizer: with
/// H(v) = int_0^1 int_0^t hess f(center + s v) ds dt and H = R^T R,
/// forward(v) = R(v) v satisfies f(center + v) = f(center) + |forward(v)|^2
/// throughout the chart ball.
class MorseChart {
 public:
  MorseChart(const Landscape& l, Point center, double radius, int panels);

  const Point& center() const { return center_; }
  double radius() const { return radius_; }
  int panels() const { return panels_; }

  /// The averaged-Hessian field (the double integral, by quadrature).
  Mat h_field(const Vec& v) const;

  /// Upper-triangular Cholesky factor of h_field(v).
  Mat r_factor(const Vec& v) const;

  Vec forward(const Vec& v) const;

  /// Newton inversion of v -> R(v) v, started from R(0)^{-1} w; falls back
  /// to bisection along the initial ray when Newton stalls.
  Vec forward_inverse(const Vec& w) const;

  /// Worst deviation |f(center+v) - f(center) - |forward(v)|^2| over the
  /// validation probes (a quadrature accuracy report).
  double probe_residual() const { return probe_residual_; }

 private:
  Landscape l_;  // owned copy; charts outlive their builder
  Point center_;
  double radius_;
  int panels_;
  double f_center_;
  Mat r0_;  // R(0)
  std::vector<double> nodes_, weights_;  // Gauss-Legendre on [0,1]
  double probe_residual_ = 0.0;

  friend class Rectifier;
  void validate_on_probes();
};

/// Probe directions used for chart validation and radius selection.
std::vector<Vec> probe_directions(int dim);

MorseChart morse_chart(const Landscape& l, const Point& center, double radius, int panels);

struct RectifierParams {
  double initial_radius = 1.0;
  double radius_factor = 0.7;
  int max_radius_tries = 12;
  int panels = 16;
  double theta = 0.5;  // near/far switch at f_star + (rho*theta)^2
  FlowCriteria flow;
  int uniqueness_probes = 8;
  double probe_box_halfwidth = 2.0;
};

/// The composite quadratic rectification phi: Morse chart near the
/// minimizer, value-flow ray map far from it, with f = f_star + |phi|^2.
class Rectifier {
 public:
  Rectifier(Landscape l, Point x_star, RectifierParams params);

  const Landscape& landscape() const { return l_; }
  const MorseChart& chart() const { return *chart_; }
  const Point& minimizer() const { return x_star_; }
  double f_star() const { return f_star_; }
  double rho() const { return rho_; }
  double theta() const { return params_.theta; }

  bool unique_minimizer_ok() const { return unique_ok_; }
  const std::string& uniqueness_note() const { return uniqueness_note_; }

  /// phi(p): near region returns chart coordinates, far region follows the
  /// trajectory through p to the level f_star + rho^2 and scales that
  /// crossing direction to norm sqrt(f(p) - f_star).
  Vec rectify_point(const Point& p) const;

  /// xi(v): inverse of rectify_point.
  Point unrectify_point(const Vec& v) const;

  /// |  |forward(landing)| - rho  | for a far-region point: how precisely
  /// the flow landing sits on the chart's rho-level set.
  double far_landing_residual(const Point& p) const;

 private:
  Landscape l_;
  Point x_star_;
  RectifierParams params_;
  double f_star_ = 0.0;
  std::optional<MorseChart> chart_;
  double rho_ = 0.0;
  bool unique_ok_ = true;
  std::string uniqueness_note_;

  Vec far_landing_chart(const Point& p) const;
};

Rectifier build_rectifier(const Landscape& l, const Point& x_star,
                          const RectifierParams& params = {});

}  // namespace pllab
