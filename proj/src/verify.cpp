#include "pllab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pllab/calculus.hpp"

namespace pllab {

namespace {
constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};

double radical_inverse(long long i, int base) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * static_cast<double>(i % base);
    i /= base;
  }
  return r;
}

double ratio_floor(const Landscape& l, const VerifyOptions& opt) {
  const double fs = l.f_star ? *l.f_star : 0.0;
  return opt.ratio_floor_scale * (1.0 + std::abs(fs));
}
}  // namespace

HaltonSampler::HaltonSampler(int dim, long long start_index) : index_(std::max(start_index, 1LL)) {
  if (dim > static_cast<int>(std::size(kPrimes)))
    throw Error("Halton sampler supports at most 10 dimensions");
  for (int i = 0; i < dim; ++i) bases_.push_back(kPrimes[i]);
}

Vec HaltonSampler::next() {
  Vec x(bases_.size());
  for (std::size_t i = 0; i < bases_.size(); ++i)
    x[static_cast<Eigen::Index>(i)] = radical_inverse(index_, bases_[i]);
  ++index_;
  return x;
}

double pl_ratio(const Landscape& l, const Point& p, const VerifyOptions& opt) {
  if (!l.f_star) throw Error("pl_ratio needs a known f_star");
  const double gap = l.f(p) - *l.f_star;
  if (gap <= ratio_floor(l, opt))
    throw Error("point is too close to the minimizer set for a PL quotient");
  TangentVector g = gradient(l, p);
  return metric_norm_sq(l, p, g.vec) / (2.0 * gap);
}

VerificationReport estimate_mu(const Landscape& l, int n, long long seed,
                               const VerifyOptions& opt, std::optional<double> box_halfwidth) {
  if (!l.f_star) throw Error("estimate_mu needs a known f_star");
  Vec lo = l.box.lo, hi = l.box.hi;
  if (box_halfwidth) {
    lo = Vec::Constant(l.box.chart_dim(), -*box_halfwidth);
    hi = Vec::Constant(l.box.chart_dim(), *box_halfwidth);
  }
  const double floor = ratio_floor(l, opt);

  HaltonSampler sampler(l.box.chart_dim(), 1 + seed);
  std::vector<double> ratios;
  ratios.reserve(n);
  VerificationReport rep;
  rep.check_name = "pl";
  rep.seed = seed;
  rep.estimate = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    Vec c = sampler.next();
    Vec chart = lo + (hi - lo).cwiseProduct(c);
    Point p = l.box.to_point(chart);
    const double gap = l.f(p) - *l.f_star;
    if (gap <= floor) continue;
    TangentVector g = gradient(l, p);
    const double ratio = metric_norm_sq(l, p, g.vec) / (2.0 * gap);
    ratios.push_back(ratio);
    if (ratio < rep.estimate) {
      rep.estimate = ratio;
      rep.worst_point = p;
      rep.worst_value = ratio;
    }
  }
  if (ratios.empty()) throw Error("no admissible samples above the ratio floor");
  rep.samples = static_cast<int>(ratios.size());
  std::sort(ratios.begin(), ratios.end());
  rep.percentile_5 = ratios[static_cast<std::size_t>(0.05 * (ratios.size() - 1))];
  if (l.mu_claim) {
    rep.pass = rep.estimate >= *l.mu_claim - 1e-9 &&
               rep.estimate <= *l.mu_claim + std::max(l.mu_upper_slack, 1e-9);
    std::ostringstream notes;
    notes << "claimed mu = " << *l.mu_claim << ", slack = " << l.mu_upper_slack;
    rep.notes = notes.str();
  } else {
    rep.pass = true;
    rep.notes = "no mu claim; estimate reported only";
  }
  return rep;
}

VerificationReport quadratic_growth_check(const Landscape& l, double mu, int n,
                                          const FlowCriteria& crit, long long seed,
                                          const VerifyOptions& opt) {
  if (!l.f_star) throw Error("quadratic_growth_check needs a known f_star");
  VerificationReport rep;
  rep.check_name = "qg";
  rep.seed = seed;
  HaltonSampler sampler(l.box.chart_dim(), 1 + seed);
  double worst_ratio = 0.0;
  int failures = 0;
  int used = 0;
  for (int i = 0; i < n; ++i) {
    Vec c = sampler.next();
    Vec chart = l.box.lo + (l.box.hi - l.box.lo).cwiseProduct(c);
    Point x0 = l.box.to_point(chart);
    const double gap = l.f(x0) - *l.f_star;
    if (gap <= 1e-10) continue;
    ++used;
    EndpointResult r = endpoint(l, x0, crit);
    if (r.status != EndpointStatus::kConverged) {
      ++failures;
      continue;
    }
    const double bound = std::sqrt(2.0 * gap / mu);
    const double ratio = r.path_length / bound;
    const double direct = (x0 - r.limit).norm();
    if (direct > r.path_length * (1.0 + 1e-9) + 1e-12) ++failures;
    if (ratio > worst_ratio) {
      worst_ratio = ratio;
      rep.worst_point = x0;
      rep.worst_value = ratio;
    }
  }
  rep.samples = used;
  rep.estimate = worst_ratio;
  rep.percentile_5 = worst_ratio;
  rep.pass = failures == 0 && worst_ratio <= 1.0 + opt.qg_slack && used > 0;
  std::ostringstream notes;
  notes << "max length/bound = " << worst_ratio << ", endpoint failures = " << failures;
  rep.notes = notes.str();
  return rep;
}

VerificationReport morse_bott_spectrum(const Landscape& l, const Point& s_point, int m,
                                       double mu, const VerifyOptions& opt) {
  VerificationReport rep;
  rep.check_name = "mb";
  rep.worst_point = s_point;
  TangentVector g = gradient(l, s_point);
  if (g.vec.norm() > 1e-6)
    throw Error("Morse-Bott spectrum requested away from the critical set");

  LinearMap h = hessian(l, s_point);
  Eigen::SelfAdjointEigenSolver<Mat> es(h.matrix);
  Vec ev = es.eigenvalues();
  int kernel_dim = 0;
  double min_nonzero = std::numeric_limits<double>::infinity();
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= opt.kernel_tol) ++kernel_dim;
    else min_nonzero = std::min(min_nonzero, ev[i]);
  }
  rep.samples = 1;
  rep.estimate = ev.size() > kernel_dim ? min_nonzero : 0.0;
  rep.percentile_5 = rep.estimate;
  rep.worst_value = static_cast<double>(kernel_dim);
  const bool kernel_ok = kernel_dim == m;
  const bool gap_ok = kernel_dim == ev.size() || min_nonzero >= mu - opt.mb_slack;
  rep.pass = kernel_ok && gap_ok;
  std::ostringstream notes;
  notes << "spectrum = [";
  for (int i = 0; i < ev.size(); ++i) notes << (i ? ", " : "") << ev[i];
  notes << "], kernel dim = " << kernel_dim << " (expected " << m << ")";
  rep.notes = notes.str();
  return rep;
}

double least_squares_pl_bound(const std::function<Vec(const Vec&)>& field, const Vec& b,
                              const Point& p) {
  Mat df = fd_jacobian(field, p);  // k x d
  const int k = static_cast<int>(df.rows());
  if (k > df.cols()) throw Error("residual dimension exceeds the ambient dimension");
  (void)b;  // the bound depends only on DF, not on the offset
  Eigen::JacobiSVD<Mat> svd(df.transpose());
  // k-th singular value of DF^T (kth largest; DF^T has exactly k of them)
  const double sigma_k = svd.singularValues()[k - 1];
  return sigma_k * sigma_k;
}

}  // namespace pllab
