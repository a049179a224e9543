#pragma once

#include <functional>
#include <optional>

#include "pllab/landscape.hpp"

namespace pllab {

/// A trivializing diffeomorphism psi = (psi1, psi2): ambient -> S x R^k with
/// psi2 = 0 exactly on S, plus its inverse.
struct DiffeoPair {
  int dim = 0;    // ambient dimension
  int dim_s = 0;  // m
  int dim_k = 0;  // k
  std::function<Vec(const Point&)> psi1;
  std::function<Vec(const Point&)> psi2;
  std::function<Point(const Vec&, const Vec&)> inverse;
  // optional analytic Jacobian of inverse at (u, z): d x (m + k)
  std::function<Mat(const Vec&, const Vec&)> jacobian_inverse;
};

struct ConstructOptions {
  int panels = 8;          // composite quadrature panels, 4 Gauss nodes each
  double fd_step = 1e-4;   // 4th-order time differences when no Jacobian
  double quad_tol = 1e-9;  // Richardson check between panels and 2*panels
  int probe_samples = 16;  // inverse/zero-set probes of the DiffeoPair
};

/// Squared-speed construction: f(y) = int_0^1 |c_y'(t)|^2 dt with
/// c_y(t) = inverse(psi1(y), t psi2(y)). Globally 1-PL in the given metric,
/// with minimizer set psi2^{-1}(0).
Landscape pl_from_diffeo(const DiffeoPair& d, const MetricSpec& metric = {},
                         const ConstructOptions& opt = {});

/// | Df(y)[c_y'(1)] - f(y) - |c_y'(1)|^2 | with Df by central differences;
/// the directional identity behind the 1-PL bound.
double directional_identity_residual(const Landscape& l, const DiffeoPair& d, const Point& y,
                                     const ConstructOptions& opt = {});

}  // namespace pllab
