#include "pllab/rectify.hpp"

#include <cmath>
#include <sstream>

#include "pllab/calculus.hpp"
#include "pllab/verify.hpp"

namespace pllab {

namespace {

// Gauss-Legendre nodes/weights on [0, 1] by Newton iteration on P_n.
void gauss_legendre_01(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));  // initial guess on [-1,1]
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (x * p1 - p0) / (x * x - 1.0);
    nodes[i] = 0.5 * (x + 1.0);
    weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
}

Mat fd_forward_jacobian(const std::function<Vec(const Vec&)>& fwd, const Vec& v) {
  const int d = static_cast<int>(v.size());
  Mat j(d, d);
  Vec y = v;
  for (int i = 0; i < d; ++i) {
    const double h = 1e-7 * std::max(1.0, std::abs(v[i]));
    y[i] = v[i] + h;
    Vec fp = fwd(y);
    y[i] = v[i] - h;
    Vec fm = fwd(y);
    y[i] = v[i];
    j.col(i) = (fp - fm) / (2.0 * h);
  }
  return j;
}

}  // namespace

std::vector<Vec> probe_directions(int dim) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec::Constant(1, 1.0));
    dirs.push_back(Vec::Constant(1, -1.0));
    return dirs;
  }
  if (dim == 2) {
    for (int k = 0; k < 16; ++k) {
      double a = 2.0 * M_PI * k / 16.0;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      dirs.push_back(u);
    }
    return dirs;
  }
  for (int i = 0; i < dim; ++i) {
    Vec u = Vec::Zero(dim);
    u[i] = 1.0;
    dirs.push_back(u);
    dirs.push_back(-u);
  }
  // sign diagonals (capped for higher dimensions)
  const int caps = std::min(1 << dim, 64);
  for (int mask = 0; mask < caps; ++mask) {
    Vec u(dim);
    for (int i = 0; i < dim; ++i) u[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    dirs.push_back(u / u.norm());
  }
  return dirs;
}

MorseChart::MorseChart(const Landscape& l, Point center, double radius, int panels)
    : l_(l), center_(std::move(center)), radius_(radius), panels_(panels) {
  if (radius <= 0.0) throw Error("chart radius must be positive");
  if (panels < 2) throw Error("quadrature needs at least 2 nodes per axis");
  if (l.constraint)
    throw UnsupportedCaseError(
        "Morse charts require a Euclidean chart domain; embedded landscapes "
        "are out of scope here");
  f_center_ = l.f(center_);
  gauss_legendre_01(panels_, nodes_, weights_);

  Mat h0 = h_field(Vec::Zero(center_.size()));
  Eigen::LLT<Mat> llt(h0);
  if (llt.info() != Eigen::Success)
    throw NotPositiveDefiniteError("Hessian at the chart center is not positive definite");
  r0_ = Mat(llt.matrixU());
  validate_on_probes();
}

Mat MorseChart::h_field(const Vec& v) const {
  const int d = static_cast<int>(v.size());
  Mat acc = Mat::Zero(d, d);
  // int_0^1 int_0^t hess(c + s v) ds dt  =  int_0^1 t int_0^1 hess(c + t u v) du dt
  for (int i = 0; i < panels_; ++i) {
    const double t = nodes_[i], wt = weights_[i];
    Mat inner = Mat::Zero(d, d);
    for (int j = 0; j < panels_; ++j) {
      inner += weights_[j] * ambient_hessian(l_, center_ + (t * nodes_[j]) * v);
    }
    acc += wt * t * inner;
  }
  return 0.5 * (acc + acc.transpose());
}

Mat MorseChart::r_factor(const Vec& v) const {
  Eigen::LLT<Mat> llt(h_field(v));
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "averaged Hessian loses positive definiteness at |v| = " << v.norm()
        << " inside the chart ball (radius too large)";
    throw NotPositiveDefiniteError(msg.str());
  }
  return Mat(llt.matrixU());
}

Vec MorseChart::forward(const Vec& v) const { return r_factor(v) * v; }

Vec MorseChart::forward_inverse(const Vec& w) const {
  if (w.norm() == 0.0) return Vec::Zero(w.size());
  Vec v = r0_.triangularView<Eigen::Upper>().solve(w);
  auto residual = [&](const Vec& x) { return Vec(forward(x) - w); };
  Vec r = residual(v);
  const double tol = 1e-12 * (1.0 + w.norm());
  for (int it = 0; it < 50 && r.norm() > tol; ++it) {
    Mat j = fd_forward_jacobian([this](const Vec& x) { return forward(x); }, v);
    Vec step = j.partialPivLu().solve(r);
    double lambda = 1.0;
    Vec v_next = v - step;
    Vec r_next = residual(v_next);
    int halvings = 0;
    while (r_next.norm() >= r.norm() && halvings < 30) {
      lambda *= 0.5;
      v_next = v - lambda * step;
      r_next = residual(v_next);
      ++halvings;
    }
    if (r_next.norm() >= r.norm()) break;  // stalled; try bisection below
    v = v_next;
    r = r_next;
  }
  if (r.norm() > tol) {
    // bisection along the initial ray direction, then one more Newton pass
    Vec u = v.norm() > 0 ? Vec(v / v.norm()) : Vec(w / w.norm());
    double lo = 0.0, hi = radius_;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      if (forward(mid * u).norm() < w.norm()) lo = mid;
      else hi = mid;
    }
    v = 0.5 * (lo + hi) * u;
    r = residual(v);
    for (int it = 0; it < 50 && r.norm() > tol; ++it) {
      Mat j = fd_forward_jacobian([this](const Vec& x) { return forward(x); }, v);
      v -= j.partialPivLu().solve(r);
      r = residual(v);
    }
    if (r.norm() > 1e-9 * (1.0 + w.norm()))
      throw NumericalError("Morse chart inversion did not converge");
  }
  return v;
}

void MorseChart::validate_on_probes() {
  const int d = static_cast<int>(center_.size());
  probe_residual_ = 0.0;
  for (const Vec& u : probe_directions(d)) {
    for (double s : {0.25, 0.5, 0.75, 1.0}) {
      Vec v = (s * radius_) * u;
      Vec w = forward(v);  // throws if H(v) loses definiteness
      const double lhs = l_.f(center_ + v) - f_center_;
      probe_residual_ = std::max(probe_residual_, std::abs(lhs - w.squaredNorm()));
      Mat j = fd_forward_jacobian([this](const Vec& x) { return forward(x); }, v);
      Eigen::JacobiSVD<Mat> svd(j);
      if (svd.singularValues().minCoeff() <= 1e-10)
        throw NumericalError("chart forward map has a singular differential inside the ball");
    }
  }
}

MorseChart morse_chart(const Landscape& l, const Point& center, double radius, int panels) {
  Tolerances tol;
  validate_point(l, center, tol);
  Vec g = ambient_partials(l, center);
  if (g.norm() > 1e-6 * (1.0 + std::abs(l.f(center))))
    throw Error("chart center is not a critical point (|grad| = " + std::to_string(g.norm()) + ")");
  return MorseChart(l, center, radius, panels);
}

Rectifier::Rectifier(Landscape l, Point x_star, RectifierParams params)
    : l_(std::move(l)), x_star_(std::move(x_star)), params_(params) {
  f_star_ = l_.f_star ? *l_.f_star : l_.f(x_star_);

  double radius = params_.initial_radius;
  for (int attempt = 0;; ++attempt) {
    try {
      chart_.emplace(morse_chart(l_, x_star_, radius, params_.panels));
      break;
    } catch (const NotPositiveDefiniteError&) {
      if (attempt == 0) {
        // PD failure right at the center is fatal, not a radius problem
        Eigen::SelfAdjointEigenSolver<Mat> es(ambient_hessian(l_, x_star_));
        if (es.eigenvalues().minCoeff() <= 0.0) throw;
      }
    } catch (const NumericalError&) {
    }
    radius *= params_.radius_factor;
    if (attempt + 1 >= params_.max_radius_tries)
      throw NumericalError("no chart radius in the schedule passed the Cholesky probe");
  }
  const double radius_final = chart_->radius();

  // rho: half the weakest stretch of the chart boundary, so the level set
  // f_star + rho^2 stays inside the half-radius ball
  double min_boundary = std::numeric_limits<double>::infinity();
  const auto dirs = probe_directions(l_.dim_ambient);
  for (const Vec& u : dirs)
    min_boundary = std::min(min_boundary, chart_->forward(radius_final * u).norm());
  rho_ = 0.5 * min_boundary;

  // containment evidence: outside the half ball the chart image must stay
  // above rho. Fields that grow slower than quadratically mid-ball can beat
  // the half-stretch heuristic, so shrink rho until the probes clear.
  double min_outer = std::numeric_limits<double>::infinity();
  for (const Vec& u : dirs)
    for (double s : {0.55, 0.7, 0.85, 1.0})
      min_outer = std::min(min_outer, chart_->forward((s * radius_final) * u).norm());
  int shrinks = 0;
  while (min_outer <= rho_ * (1.0 - 1e-9) && shrinks < 20) {
    rho_ *= 0.7;
    ++shrinks;
  }
  if (min_outer <= rho_ * (1.0 - 1e-9) || rho_ <= 0.0)
    throw NumericalError("level-set containment check failed; no admissible rho");

  // opportunistic global-uniqueness probe: flow a few quasi-random starts
  // and ask whether they all come home
  HaltonSampler sampler(l_.dim_ambient, 1);
  for (int i = 0; i < params_.uniqueness_probes; ++i) {
    Vec c = sampler.next();
    Point p = x_star_;
    for (int k = 0; k < l_.dim_ambient; ++k)
      p[k] += params_.probe_box_halfwidth * (2.0 * c[k] - 1.0);
    EndpointResult r = endpoint(l_, p, params_.flow);
    if (r.status != EndpointStatus::kConverged ||
        (r.limit - x_star_).norm() > std::max(1e-3, 1e3 * params_.flow.eps_x)) {
      unique_ok_ = false;
      std::ostringstream note;
      note << "gradient flow from (" << p.transpose() << ") ends at ("
           << r.limit.transpose() << "), not at the declared minimizer";
      uniqueness_note_ = note.str();
      break;
    }
  }
}

Vec Rectifier::far_landing_chart(const Point& p) const {
  const double delta = (f_star_ + rho_ * rho_) - l_.f(p);
  Point landing = rescaled_flow(l_, p, delta, params_.flow);
  if ((landing - x_star_).norm() > chart_->radius())
    throw NumericalError("flow landing fell outside the chart ball");
  return chart_->forward(landing - x_star_);
}

Vec Rectifier::rectify_point(const Point& p) const {
  Tolerances tol;
  validate_point(l_, p, tol);
  double gap = l_.f(p) - f_star_;
  if (gap < -1e-10 * (1.0 + std::abs(f_star_)))
    throw Error("point value lies below f_star");
  gap = std::max(gap, 0.0);

  const double band = rho_ * params_.theta;
  if (gap <= band * band) {
    if ((p - x_star_).norm() > chart_->radius())
      throw UnsupportedCaseError(
          "point has a near-minimum value but sits outside the chart ball "
          "(second basin?)");
    return chart_->forward(p - x_star_);
  }
  Vec w = far_landing_chart(p);
  return std::sqrt(gap) * w / w.norm();
}

double Rectifier::far_landing_residual(const Point& p) const {
  return std::abs(far_landing_chart(p).norm() - rho_);
}

Point Rectifier::unrectify_point(const Vec& v) const {
  const double n = v.norm();
  if (n == 0.0) return x_star_;
  if (n <= rho_ * params_.theta) return x_star_ + chart_->forward_inverse(v);
  Point level_point = x_star_ + chart_->forward_inverse((rho_ / n) * v);
  const double delta = n * n - rho_ * rho_;
  if (delta == 0.0) return level_point;
  return rescaled_flow(l_, level_point, delta, params_.flow);
}

Rectifier build_rectifier(const Landscape& l, const Point& x_star,
                          const RectifierParams& params) {
  return Rectifier(l, x_star, params);
}

}  // namespace pllab
