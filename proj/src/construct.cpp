#include "pllab/construct.hpp"

#include <cmath>
#include <sstream>

#include "pllab/calculus.hpp"
#include "pllab/verify.hpp"

namespace pllab {

namespace {

// 4-point Gauss-Legendre on [0, 1].
constexpr double kNodes4[] = {0.06943184420297371, 0.33000947820757187,
                              0.6699905217924281, 0.9305681557970263};
constexpr double kWeights4[] = {0.1739274225687269, 0.3260725774312731,
                                0.3260725774312731, 0.1739274225687269};

struct CurveFamily {
  const DiffeoPair& d;

  Point at(const Vec& u, const Vec& z, double t) const { return d.inverse(u, t * z); }

  // velocity of t -> inverse(u, t z): analytic chain rule when the Jacobian
  // is available, else 4th-order central differences
  Vec velocity(const Vec& u, const Vec& z, double t, double fd_step) const {
    if (d.jacobian_inverse) {
      Mat j = d.jacobian_inverse(u, t * z);
      return j.rightCols(z.size()) * z;
    }
    const double h = fd_step;
    Point p2 = at(u, z, t + 2.0 * h);
    Point p1 = at(u, z, t + h);
    Point m1 = at(u, z, t - h);
    Point m2 = at(u, z, t - 2.0 * h);
    return (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
  }
};

double speed_sq(const Landscape& metric_carrier, const CurveFamily& fam, const Vec& u,
                const Vec& z, double t, double fd_step) {
  Vec v = fam.velocity(u, z, t, fd_step);
  if (metric_carrier.metric.kind == MetricSpec::Kind::kChartMatrix)
    return v.dot(metric_carrier.metric.chart_matrix(fam.at(u, z, t)) * v);
  return v.squaredNorm();
}

double quadrature(const Landscape& metric_carrier, const CurveFamily& fam, const Vec& u,
                  const Vec& z, int panels, double fd_step) {
  double acc = 0.0;
  const double w = 1.0 / panels;
  for (int p = 0; p < panels; ++p) {
    for (int q = 0; q < 4; ++q) {
      const double t = (p + kNodes4[q]) * w;
      acc += w * kWeights4[q] * speed_sq(metric_carrier, fam, u, z, t, fd_step);
    }
  }
  return acc;
}

void check_diffeo(const DiffeoPair& d, const ConstructOptions& opt) {
  if (!d.psi1 || !d.psi2 || !d.inverse) throw Error("DiffeoPair is missing a map");
  if (d.dim != d.dim_s + d.dim_k) throw Error("DiffeoPair dimensions are inconsistent");
  HaltonSampler sampler(d.dim, 1);
  for (int i = 0; i < opt.probe_samples; ++i) {
    Vec c = sampler.next();
    Point y = 4.0 * (c.array() - 0.5).matrix();
    Vec u = d.psi1(y);
    Vec z = d.psi2(y);
    Point back = d.inverse(u, z);
    if ((back - y).norm() > 1e-8 * (1.0 + y.norm()))
      throw Error("DiffeoPair inverse does not undo (psi1, psi2) on probe samples");
    // psi2 = 0 exactly on S: the curve foot must be a zero of psi2
    Vec z0 = d.psi2(d.inverse(u, Vec::Zero(d.dim_k)));
    if (z0.norm() > 1e-8) throw Error("psi2 does not vanish on the modeled S");
  }
}

}  // namespace

Landscape pl_from_diffeo(const DiffeoPair& d, const MetricSpec& metric,
                         const ConstructOptions& opt) {
  check_diffeo(d, opt);
  if (metric.kind == MetricSpec::Kind::kInduced)
    throw UnsupportedCaseError("squared-speed construction expects a chart metric");

  Landscape carrier;  // only used to carry the metric into the quadrature
  carrier.metric = metric;

  DiffeoPair dc = d;
  ConstructOptions oc = opt;
  Landscape out;
  out.dim_ambient = d.dim;
  out.dim_manifold = d.dim;
  out.metric = metric;
  out.f_star = 0.0;
  out.mu_claim = 1.0;
  out.mu_upper_slack = 1e-3;
  out.name = "constructed";
  out.f = [dc, carrier, oc](const Point& y) {
    CurveFamily fam{dc};
    Vec u = dc.psi1(y);
    Vec z = dc.psi2(y);
    return quadrature(carrier, fam, u, z, oc.panels, oc.fd_step);
  };
  out.box.lo = Vec::Constant(d.dim, -2.0);
  out.box.hi = Vec::Constant(d.dim, 2.0);

  // Richardson guard: doubling the panel count must not move the values
  HaltonSampler sampler(d.dim, 3);
  CurveFamily fam{dc};
  for (int i = 0; i < 8; ++i) {
    Vec c = sampler.next();
    Point y = 3.0 * (c.array() - 0.5).matrix();
    Vec u = dc.psi1(y), z = dc.psi2(y);
    const double f1 = quadrature(carrier, fam, u, z, oc.panels, oc.fd_step);
    const double f2 = quadrature(carrier, fam, u, z, 2 * oc.panels, oc.fd_step);
    if (std::abs(f1 - f2) > oc.quad_tol * (1.0 + std::abs(f1))) {
      std::ostringstream msg;
      msg << "quadrature did not converge: panels " << oc.panels << " vs " << 2 * oc.panels
          << " differ by " << std::abs(f1 - f2);
      throw NumericalError(msg.str());
    }
  }
  return out;
}

double directional_identity_residual(const Landscape& l, const DiffeoPair& d, const Point& y,
                                     const ConstructOptions& opt) {
  CurveFamily fam{d};
  Vec u = d.psi1(y);
  Vec z = d.psi2(y);
  Vec w = fam.velocity(u, z, 1.0, opt.fd_step);
  if (w.norm() <= 1e-10)
    throw Error("directional identity needs a point off S (c_y'(1) = 0)");
  // directional derivative of f along w by central differences
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) *
                   std::max(1.0, y.norm()) / std::max(1.0, w.norm());
  const double df = (l.f(y + h * w) - l.f(y - h * w)) / (2.0 * h);
  double w_sq = w.squaredNorm();
  if (l.metric.kind == MetricSpec::Kind::kChartMatrix)
    w_sq = w.dot(l.metric.chart_matrix(y) * w);
  return std::abs(df - l.f(y) - w_sq);
}

}  // namespace pllab
