#pragma once

#include "pllab/landscape.hpp"
#include "pllab/types.hpp"

namespace pllab {

/// Central finite differences, step cbrt(eps)*max(1,|x_i|) per coordinate.
Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x);

/// Symmetric finite-difference Hessian, step eps^(1/4)*max(1,|x_i|).
Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x);

/// Jacobian of a vector map by central differences.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                double step_scale = 0.0);

/// Ambient partial derivatives of f (analytic when available).
Vec ambient_partials(const Landscape& l, const Point& p);

/// Ambient second partials of f. Prefers the analytic Hessian, then central
/// differences of an analytic gradient, then pure function differences.
Mat ambient_hessian(const Landscape& l, const Point& p);

/// Riemannian gradient at p. Euclidean: raw partials. Chart metric G:
/// solves G(p) g = df(p). Induced: tangent projection of the partials.
TangentVector gradient(const Landscape& l, const Point& p, const Tolerances& tol = {});

/// Squared Riemannian norm of a tangent vector.
double metric_norm_sq(const Landscape& l, const Point& p, const Vec& v);

/// Orthogonal projector onto ker Dh(p): P = I - Dh(p)^+ Dh(p).
LinearMap tangent_projector(const Constraint& c, const Point& p, const Tolerances& tol = {});

/// Orthonormal basis of the tangent space at p (columns). Identity frame for
/// unconstrained landscapes.
Mat tangent_basis(const Landscape& l, const Point& p, const Tolerances& tol = {});

/// Hessian as a symmetric operator on T_p, expressed in an orthonormal
/// tangent basis. For embedded landscapes this is only valid at critical
/// points, where the second fundamental form term vanishes; calling it with
/// a non-negligible gradient throws UnsupportedCaseError.
LinearMap hessian(const Landscape& l, const Point& p, const Tolerances& tol = {});

/// Transporter of Appendix-style projection type: project v into the tangent
/// space at `to`. Identity when to == from.
TangentVector transport(const Constraint& c, const Point& from, const Point& to,
                        const TangentVector& v, const Tolerances& tol = {});

/// Minimum-norm solution of m x = w for a full-row-rank m, via a Cholesky
/// solve of the Gram matrix m m^T.
Vec pseudoinverse_apply(const LinearMap& m, const Vec& w);

}  // namespace pllab
