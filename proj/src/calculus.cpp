#include "pllab/calculus.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace pllab {

namespace {
const double kEps = std::numeric_limits<double>::epsilon();
const double kGradStep = std::cbrt(kEps);
const double kHessStep = std::pow(kEps, 0.25);
}  // namespace

Vec fd_gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
  const int d = static_cast<int>(x.size());
  Vec g(d);
  Vec xp = x, xm = x;
  for (int i = 0; i < d; ++i) {
    const double h = kGradStep * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return g;
}

Mat fd_hessian(const std::function<double(const Vec&)>& f, const Vec& x) {
  const int d = static_cast<int>(x.size());
  Mat h(d, d);
  const double f0 = f(x);
  Vec step(d);
  for (int i = 0; i < d; ++i) step[i] = kHessStep * std::max(1.0, std::abs(x[i]));
  Vec y = x;
  for (int i = 0; i < d; ++i) {
    y[i] = x[i] + step[i];
    const double fp = f(y);
    y[i] = x[i] - step[i];
    const double fm = f(y);
    y[i] = x[i];
    h(i, i) = (fp - 2.0 * f0 + fm) / (step[i] * step[i]);
    for (int j = 0; j < i; ++j) {
      y[i] = x[i] + step[i];
      y[j] = x[j] + step[j];
      const double fpp = f(y);
      y[j] = x[j] - step[j];
      const double fpm = f(y);
      y[i] = x[i] - step[i];
      const double fmm = f(y);
      y[j] = x[j] + step[j];
      const double fmp = f(y);
      y[i] = x[i];
      y[j] = x[j];
      h(i, j) = h(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * step[i] * step[j]);
    }
  }
  return h;
}

Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x, double step_scale) {
  const int d = static_cast<int>(x.size());
  const double base = step_scale > 0.0 ? step_scale : kGradStep;
  Vec y = x;
  Mat j;
  for (int i = 0; i < d; ++i) {
    const double h = base * std::max(1.0, std::abs(x[i]));
    y[i] = x[i] + h;
    Vec fp = f(y);
    y[i] = x[i] - h;
    Vec fm = f(y);
    y[i] = x[i];
    if (j.size() == 0) j.resize(fp.size(), d);
    j.col(i) = (fp - fm) / (2.0 * h);
  }
  return j;
}

Vec ambient_partials(const Landscape& l, const Point& p) {
  if (l.grad_f) return l.grad_f(p);
  return fd_gradient(l.f, p);
}

Mat ambient_hessian(const Landscape& l, const Point& p) {
  if (l.hess_f) return l.hess_f(p);
  if (l.grad_f) {
    Mat j = fd_jacobian(l.grad_f, p, kHessStep);
    return 0.5 * (j + j.transpose());
  }
  return fd_hessian(l.f, p);
}

LinearMap tangent_projector(const Constraint& c, const Point& p, const Tolerances& tol) {
  Mat j = c.jacobian_h(p);
  Eigen::JacobiSVD<Mat> svd(j);
  const double sv_min = svd.singularValues().minCoeff();
  if (sv_min <= tol.rank_tol) {
    std::ostringstream msg;
    msg << "constraint Jacobian is rank deficient (sigma_min = " << sv_min << ")";
    throw RankDeficiencyError(msg.str(), sv_min);
  }
  Mat gram = j * j.transpose();
  Mat p_mat = Mat::Identity(j.cols(), j.cols()) - j.transpose() * gram.llt().solve(j);
  return LinearMap{std::move(p_mat)};
}

TangentVector gradient(const Landscape& l, const Point& p, const Tolerances& tol) {
  validate_point(l, p, tol);
  Vec df = ambient_partials(l, p);
  switch (l.metric.kind) {
    case MetricSpec::Kind::kEuclidean:
      return {p, std::move(df)};
    case MetricSpec::Kind::kChartMatrix: {
      Mat g = l.metric.chart_matrix(p);
      Eigen::LLT<Mat> llt(g);
      if (llt.info() != Eigen::Success)
        throw NotPositiveDefiniteError("chart metric matrix is not positive definite");
      return {p, llt.solve(df)};
    }
    case MetricSpec::Kind::kInduced: {
      if (!l.constraint)
        throw UnsupportedCaseError("induced metric requires a constraint");
      LinearMap proj = tangent_projector(*l.constraint, p, tol);
      return {p, proj.matrix * df};
    }
  }
  return {p, std::move(df)};
}

double metric_norm_sq(const Landscape& l, const Point& p, const Vec& v) {
  if (l.metric.kind == MetricSpec::Kind::kChartMatrix)
    return v.dot(l.metric.chart_matrix(p) * v);
  return v.squaredNorm();
}

Mat tangent_basis(const Landscape& l, const Point& p, const Tolerances& tol) {
  if (!l.constraint) return Mat::Identity(l.dim_ambient, l.dim_ambient);
  LinearMap proj = tangent_projector(*l.constraint, p, tol);
  // eigenvectors of the projector with eigenvalue 1 span the tangent space
  Eigen::SelfAdjointEigenSolver<Mat> es(proj.matrix);
  const int n = l.dim_manifold;
  return es.eigenvectors().rightCols(n);
}

LinearMap hessian(const Landscape& l, const Point& p, const Tolerances& tol) {
  validate_point(l, p, tol);
  if (!l.constraint) {
    if (l.metric.kind == MetricSpec::Kind::kChartMatrix)
      throw UnsupportedCaseError("Hessians under a chart metric are not supported");
    return LinearMap{ambient_hessian(l, p)};
  }
  // Embedded case: only exact at critical points, where the normal
  // correction (second fundamental form times the gradient) vanishes.
  TangentVector g = gradient(l, p, tol);
  const double gn = g.vec.norm();
  if (gn > 1e-6 * (1.0 + std::abs(l.f(p))))
    throw UnsupportedCaseError(
        "constrained Hessian requested away from a critical point (|grad| = " +
        std::to_string(gn) + ")");
  Mat basis = tangent_basis(l, p, tol);
  Mat h = ambient_hessian(l, p);
  Mat restricted = basis.transpose() * h * basis;
  return LinearMap{0.5 * (restricted + restricted.transpose())};
}

TangentVector transport(const Constraint& c, const Point& from, const Point& to,
                        const TangentVector& v, const Tolerances& tol) {
  (void)from;
  LinearMap proj = tangent_projector(c, to, tol);
  return {to, proj.matrix * v.vec};
}

Vec pseudoinverse_apply(const LinearMap& m, const Vec& w) {
  const Mat& a = m.matrix;
  Eigen::JacobiSVD<Mat> svd(a);
  const double sv_min = svd.singularValues().minCoeff();
  const double sv_max = svd.singularValues().maxCoeff();
  const double pinv_tol = 1e-10 * sv_max;
  if (sv_min * sv_min <= pinv_tol || sv_max == 0.0) {
    std::ostringstream msg;
    msg << "matrix is not full row rank (sigma_min = " << sv_min << ")";
    throw RankDeficiencyError(msg.str(), sv_min);
  }
  Mat gram = a * a.transpose();
  return a.transpose() * gram.llt().solve(w);
}

}  // namespace pllab
