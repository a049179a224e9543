#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "pllab/errors.hpp"
#include "pllab/expression.hpp"
#include "pllab/types.hpp"

namespace pllab {

/// Default numerical tolerances. Every entry is overridable per call site.
struct Tolerances {
  double on_manifold_tol = 1e-9;
  double rank_tol = 1e-8;
  double spd_tol = 1e-12;
  double fd_check_tol = 1e-6;
};

/// Level-set description h(x) = 0 of an embedded submanifold.
struct Constraint {
  int codim = 0;
  std::function<Vec(const Vec&)> h;
  std::function<Mat(const Vec&)> jacobian_h;
};

struct MetricSpec {
  enum class Kind { kEuclidean, kChartMatrix, kInduced };
  Kind kind = Kind::kEuclidean;
  std::function<Mat(const Vec&)> chart_matrix;  // kChartMatrix only
};

/// Parametrized model of the minimizer set S: a chart u -> S, its local
/// inverse, and a reference point on S.
struct SModel {
  int dim_s = 0;
  std::function<Point(const Vec&)> param;          // R^m -> ambient
  std::function<Vec(const Point&)> param_inverse;  // near S -> R^m
  Point x_bar;
  Vec u_bar;
  // parameter window on which param is one-to-one (contractible piece of S)
  Vec u_lo, u_hi;
};

/// Axis-aligned sampling window for verification sweeps. For embedded
/// landscapes the box lives in a chart and `chart_to_point` maps chart
/// coordinates onto the manifold.
struct SamplingBox {
  Vec lo, hi;
  std::function<Point(const Vec&)> chart_to_point;  // identity when empty
  int chart_dim() const { return static_cast<int>(lo.size()); }
  Point to_point(const Vec& c) const { return chart_to_point ? chart_to_point(c) : c; }
};

/// A scalar field together with everything the rest of the library needs:
/// metric, optional embedding constraint, optional analytic derivatives, and
/// minimizer-set metadata. Evaluation is pure; values can be shared freely
/// across threads.
struct Landscape {
  int dim_ambient = 0;
  int dim_manifold = 0;
  std::function<double(const Point&)> f;
  std::function<Vec(const Point&)> grad_f;  // ambient partials; may be empty
  std::function<Mat(const Point&)> hess_f;  // ambient second partials; may be empty
  MetricSpec metric;
  std::optional<Constraint> constraint;
  std::optional<double> f_star;
  std::optional<double> mu_claim;
  std::shared_ptr<const SModel> s_model;
  std::string name;

  // registry metadata
  SamplingBox box;
  bool mobius_wrap = false;
  std::set<std::string> expected_fail;           // checks expected to fail (exit 1)
  std::vector<double> degradation_boxes;         // nested half-widths for PL failure
  int degradation_samples = 0;
  double mu_upper_slack = 0.0;                   // documented slack above mu_claim
  std::vector<Point> known_critical_points;

  bool has_analytic_grad() const { return static_cast<bool>(grad_f); }
  bool has_analytic_hess() const { return static_cast<bool>(hess_f); }
};

/// Checks that p is finite and (if constrained) on the manifold.
void validate_point(const Landscape& l, const Point& p, const Tolerances& tol = {});

/// Applies the Moebius wrap rule (x1+1, -x2) ~ (x1, x2) to land in the strip
/// x1 in [-1/2, 1/2). Identity for non-wrapping landscapes.
Point wrap_point(const Landscape& l, Point p);

/// Builds a Euclidean landscape from an expression string; the gradient and
/// Hessian come from symbolic differentiation of the parsed tree.
Landscape parse_scalar_field(const std::string& text, int dim);

/// Returns a registry landscape by name (throws listing the registry on an
/// unknown name).
Landscape builtin(const std::string& name);

std::vector<std::string> builtin_names();

}  // namespace pllab
