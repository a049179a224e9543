#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pllab/flow.hpp"
#include "pllab/landscape.hpp"

namespace pllab {

/// Deterministic quasi-random sequence in the unit cube (radical-inverse in
/// the first `dim` primes); the seed offsets the start index so reports stay
/// reproducible per seed.
class HaltonSampler {
 public:
  HaltonSampler(int dim, long long start_index);

  /// Next point in [0,1)^dim.
  Vec next();

 private:
  std::vector<int> bases_;
  long long index_;
};

struct VerificationReport {
  std::string check_name;
  int samples = 0;
  double estimate = 0.0;      // e.g. mu-hat
  double percentile_5 = 0.0;
  Point worst_point;
  double worst_value = 0.0;
  bool pass = false;
  std::string notes;
  long long seed = 0;
};

struct VerifyOptions {
  double ratio_floor_scale = 1e-10;  // floor = scale * (1 + |f_star|)
  double kernel_tol = 1e-6;
  double mb_slack = 1e-6;
  double qg_slack = 1e-3;
};

/// Pointwise PL quotient |grad f|^2 / (2 (f - f_star)).
double pl_ratio(const Landscape& l, const Point& p, const VerifyOptions& opt = {});

/// mu-hat: infimum of pl_ratio over n Halton samples of the landscape's
/// sampling box (or the given half-width override).
VerificationReport estimate_mu(const Landscape& l, int n, long long seed,
                               const VerifyOptions& opt = {},
                               std::optional<double> box_halfwidth = std::nullopt);

/// Trajectory-length form of the quadratic-growth bound: every sampled start
/// must satisfy path_length <= sqrt(2 (f - f_star)/mu) (1 + qg_slack).
VerificationReport quadratic_growth_check(const Landscape& l, double mu, int n,
                                          const FlowCriteria& crit = {},
                                          long long seed = 0,
                                          const VerifyOptions& opt = {});

/// Spectrum of the (tangent-restricted) Hessian at a critical point:
/// exactly m eigenvalues in [-kernel_tol, kernel_tol], the rest >= mu - slack.
VerificationReport morse_bott_spectrum(const Landscape& l, const Point& s_point, int m,
                                       double mu, const VerifyOptions& opt = {});

/// sigma_k(DF(p)^T)^2: the nonlinear-least-squares lower bound on the PL
/// quotient of f = 0.5 |F - b|^2.
double least_squares_pl_bound(const std::function<Vec(const Vec&)>& field, const Vec& b,
                              const Point& p);

}  // namespace pllab
