// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances are pinned here, not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "pllab/calculus.hpp"
#include "pllab/cli.hpp"
#include "pllab/construct.hpp"
#include "pllab/flow.hpp"
#include "pllab/rectify.hpp"
#include "pllab/trivialize.hpp"
#include "pllab/verify.hpp"

using namespace pllab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Criterion {
  int number;
  std::string summary;
  bool pass = true;
  std::ostringstream detail;

  Criterion(int n, std::string s) : number(n), summary(std::move(s)) {}

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "    failed: " << what << "\n";
    }
  }

  void finish() {
    std::printf("%s criterion %2d: %s\n", pass ? "PASS" : "FAIL", number, summary.c_str());
    if (!pass) {
      std::fputs(detail.str().c_str(), stdout);
      ++g_failures;
    }
  }
};

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

Vec vec2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<std::string> storage = {"pllab"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_config(const std::string& name, const std::string& body) {
  fs::path dir = fs::temp_directory_path() / "pllab_acceptance";
  fs::create_directories(dir);
  fs::path p = dir / name;
  std::ofstream out(p);
  out << body;
  return p;
}

double json_number_after(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + "\":");
  if (pos == std::string::npos) throw Error("key " + key + " not in report");
  return std::stod(text.substr(pos + key.size() + 3));
}

std::shared_ptr<SModel> x_axis_model() {
  auto s = std::make_shared<SModel>();
  s->dim_s = 1;
  s->param = [](const Vec& u) { return vec2(u[0], 0.0); };
  s->param_inverse = [](const Point& p) { return Vec::Constant(1, p[0]); };
  s->x_bar = vec2(0, 0);
  s->u_bar = Vec::Zero(1);
  s->u_lo = Vec::Constant(1, -4.0);
  s->u_hi = Vec::Constant(1, 4.0);
  return s;
}

// --------------------------------------------------------------------------

void criterion_1_pl_constants() {
  Criterion c(1, "PL constants: mu = 2 on cylinder, mu = 1 on ts2 (1e4 Halton, < 5 s each)");
  struct Case {
    const char* name;
    double mu;
  } cases[] = {{"cylinder", 2.0}, {"ts2", 1.0}};
  for (const auto& cs : cases) {
    fs::path cfg = temp_config(std::string(cs.name) + ".json",
                               std::string("{\"version\":1,\"landscape\":{\"builtin\":\"") +
                                   cs.name + "\"}}");
    fs::path out = cfg.parent_path() / (std::string(cs.name) + "_pl.json");
    auto t0 = std::chrono::steady_clock::now();
    int rc = run_cli({"verify", "pl", "--config", cfg.string(), "--seed", "7",
                      "--out", out.string()});
    const double dt = seconds_since(t0);
    c.require(rc == 0, std::string(cs.name) + ": verify pl exit code " + std::to_string(rc));
    const double est = json_number_after(slurp(out), "estimate");
    c.require(std::abs(est - cs.mu) <= 1e-9,
              std::string(cs.name) + ": mu-hat = " + sci(est));
    c.require(dt < 5.0, std::string(cs.name) + ": runtime " + sci(dt) + " s");
  }
  c.finish();
}

void criterion_2_fig2() {
  Criterion c(2, "fig2: mu-hat in [1, 1+1e-3] and MB spectra {0, 1+cos^2 4x1} (< 30 s)");
  auto t0 = std::chrono::steady_clock::now();
  Landscape fig2 = builtin("fig2");
  VerificationReport mu = estimate_mu(fig2, 10000, 7);
  c.require(mu.estimate >= 1.0 - 1e-12 && mu.estimate <= 1.0 + 1e-3,
            "mu-hat = " + sci(mu.estimate));
  for (int i = 0; i < 50; ++i) {
    const double u = -1.5 + 3.0 * i / 49.0;
    Point p = fig2.s_model->param(Vec::Constant(1, u));
    LinearMap h = hessian(fig2, p);
    Eigen::SelfAdjointEigenSolver<Mat> es(h.matrix);
    const double expected = 1.0 + std::pow(std::cos(4.0 * u), 2);
    if (std::abs(es.eigenvalues()[0]) > 1e-6 ||
        std::abs(es.eigenvalues()[1] - expected) > 1e-6) {
      c.require(false, "spectrum at u = " + std::to_string(u));
      break;
    }
  }
  c.require(seconds_since(t0) < 30.0, "runtime");
  c.finish();
}

void criterion_3_rescaled_law() {
  Criterion c(3, "rescaled flow: |f(nu(x,t)) - f(x) - t| <= 1e-8 over 100 pairs x 2 landscapes");
  for (const char* name : {"fig2", "quadratic_aniso"}) {
    Landscape l = builtin(name);
    HaltonSampler sampler(l.dim_ambient + 1, 1);
    int done = 0;
    double worst = 0.0;
    while (done < 100) {
      Vec s = sampler.next();
      Point x = l.box.lo + (l.box.hi - l.box.lo).cwiseProduct(s.head(l.dim_ambient));
      const double gap = l.f(x) - *l.f_star;
      if (gap < 1e-3) continue;
      // t sweeps down to most of the way toward S and up by the same scale
      const double t = -0.9 * gap + (0.9 * gap + 1.5) * s[l.dim_ambient];
      if (std::abs(t) < 1e-6) continue;
      Point y = rescaled_flow(l, x, t);
      worst = std::max(worst, std::abs(l.f(y) - l.f(x) - t));
      ++done;
    }
    c.require(worst <= 1e-8, std::string(name) + ": worst residual " + sci(worst));
  }
  c.finish();
}

void criterion_4_length_bound() {
  Criterion c(4, "trajectory length <= sqrt(2 (f-f*)/mu) * 1.001; radial case saturates");
  for (const char* name : {"fig2", "cylinder", "mobius", "ts2"}) {
    Landscape l = builtin(name);
    HaltonSampler sampler(l.box.chart_dim(), 1);
    int done = 0;
    double worst = 0.0;
    while (done < 100) {
      Vec s = sampler.next();
      Point x0 = l.box.to_point(l.box.lo + (l.box.hi - l.box.lo).cwiseProduct(s));
      const double gap = l.f(x0) - *l.f_star;
      if (gap < 1e-8) continue;
      EndpointResult r = endpoint(l, x0);
      if (r.status != EndpointStatus::kConverged) {
        c.require(false, std::string(name) + ": endpoint did not converge");
        break;
      }
      worst = std::max(worst, r.path_length / std::sqrt(2.0 * gap / *l.mu_claim));
      ++done;
    }
    c.require(worst <= 1.001, std::string(name) + ": worst ratio " + sci(worst));
  }
  Landscape radial = parse_scalar_field("x1^2 + x2^2", 2);
  radial.f_star = 0.0;
  EndpointResult r = endpoint(radial, vec2(3, 4));
  const double ratio = r.path_length / std::sqrt(2.0 * 25.0 / 2.0);
  c.require(std::abs(ratio - 1.0) <= 1e-4, "radial saturation ratio " + sci(ratio));
  c.finish();
}

void rectification_case(Criterion& c, const Landscape& l, const std::string& name,
                        double half_width, bool ball) {
  Rectifier r = build_rectifier(l, vec2(0, 0));
  const double band_lo = std::pow(r.rho() * r.theta(), 2);
  const double band_hi = std::pow(r.rho(), 2);
  double worst_law = 0.0, worst_round = 0.0, worst_overlap = 0.0;
  int tested = 0;
  for (int i = 0; i < 30; ++i) {
    for (int j = 0; j < 30; ++j) {
      Point p = vec2(-half_width + 2.0 * half_width * i / 29.0,
                     -half_width + 2.0 * half_width * j / 29.0);
      if (ball && p.norm() > half_width) continue;
      Vec phi = r.rectify_point(p);
      if (phi.norm() < 1e-4) continue;
      ++tested;
      const double gap = l.f(p) - r.f_star();
      worst_law = std::max(worst_law,
                           std::abs(gap - phi.squaredNorm()) / (1.0 + std::abs(l.f(p))));
      worst_round = std::max(worst_round, (r.unrectify_point(phi) - p).norm());
      if (gap > band_lo && gap < band_hi)
        worst_overlap = std::max(worst_overlap, r.far_landing_residual(p));
    }
  }
  // also probe the overlap band directly along rays
  for (double angle = 0.05; angle < 2 * M_PI; angle += 0.35) {
    Vec dir = vec2(std::cos(angle), std::sin(angle));
    for (double frac : {0.55, 0.75, 0.95}) {
      const double target = band_lo + frac * (band_hi - band_lo);
      double t = std::sqrt(target / l.f(dir));
      Point p = t * dir;
      if (std::abs(l.f(p) - r.f_star() - target) > 0.5 * target) continue;
      if (l.f(p) - r.f_star() <= band_lo) continue;
      worst_overlap = std::max(worst_overlap, r.far_landing_residual(p));
    }
  }
  c.require(tested > 400, name + ": grid coverage " + std::to_string(tested));
  c.require(worst_law <= 1e-7, name + ": quadratic law " + sci(worst_law));
  c.require(worst_round <= 1e-5, name + ": round trip " + sci(worst_round));
  c.require(worst_overlap <= 1e-5, name + ": overlap consistency " + sci(worst_overlap));
}

void criterion_5_rectification() {
  Criterion c(5, "rectification: quadratic law 1e-7, round trips 1e-5, overlap band 1e-5");
  Landscape aniso = builtin("quadratic_aniso");
  rectification_case(c, aniso, "quadratic_aniso", 2.0, false);
  Landscape cubic = parse_scalar_field("x1^2 + x2^2 + 0.3*x1^3", 2);
  cubic.f_star = 0.0;
  rectification_case(c, cubic, "cubic on ball", 0.8, true);
  c.finish();
}

void criterion_6_lift() {
  Criterion c(6, "horizontal lift: f-drift 1e-5, landing 1e-4, Dpi identity on T_xS 1e-5");
  LiftOptions opts;
  {
    Landscape lin = parse_scalar_field("x2^2", 2);
    lin.f_star = 0.0;
    lin.s_model = x_axis_model();
    for (Vec y : {vec2(3, 5), vec2(-2, 1.5)}) {
      LiftResult r = horizontal_lift(lin, *lin.s_model, y, 64);
      c.require(!r.partial, "x2^2 lift partial");
      c.require(r.f_drift_max <= 1e-5 * (1.0 + std::abs(lin.f(y))), "x2^2 drift");
      c.require(r.landing_param_error.cwiseAbs().maxCoeff() <= 1e-4, "x2^2 landing");
    }
    for (double u : {-1.0, 0.5}) {
      Point p = lin.s_model->param(Vec::Constant(1, u));
      EndpointJacobian j = endpoint_jacobian(lin, *lin.s_model, p, 1e-4, opts.probe);
      Mat frame = fd_jacobian(lin.s_model->param, Vec::Constant(1, u));
      c.require(std::abs((j.reduced * frame.col(0))[0] - 1.0) <= 1e-5, "x2^2 Dpi identity");
    }
  }
  {
    Landscape fig2 = builtin("fig2");
    for (Vec y : {vec2(1, 1), vec2(-0.5, 0.8)}) {
      LiftResult r = horizontal_lift(fig2, *fig2.s_model, y, 64);
      c.require(!r.partial, "fig2 lift partial");
      c.require(r.f_drift_max <= 1e-5 * (1.0 + std::abs(fig2.f(y))),
                "fig2 drift " + sci(r.f_drift_max));
      c.require(r.landing_param_error.cwiseAbs().maxCoeff() <= 1e-4,
                "fig2 landing " + sci(r.landing_param_error.cwiseAbs().maxCoeff()));
    }
    for (double u : {-0.8, 0.0, 0.9}) {
      Point p = fig2.s_model->param(Vec::Constant(1, u));
      EndpointJacobian j = endpoint_jacobian(fig2, *fig2.s_model, p, 1e-4, opts.probe);
      Mat frame = fd_jacobian(fig2.s_model->param, Vec::Constant(1, u));
      const double along = (j.reduced * frame.col(0))[0];
      c.require(std::abs(along - 1.0) <= 1e-5,
                "fig2 Dpi identity at u = " + std::to_string(u) + ": " + sci(along));
    }
  }
  c.finish();
}

void criterion_7_chart() {
  Criterion c(7, "global chart: f(xi^-1(u,z)) = f* + z^2 (1e-4 fig2, 1e-12 x2^2), convexity 1e-4");
  {
    Landscape fig2 = builtin("fig2");
    GlobalChart chart(fig2, fig2.s_model,
                      GlobalChart::signed_sqrt_rule(fig2, *fig2.s_model));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double u = -2.0 + 4.0 * i / 19.0;
      for (int j = 0; j < 20; ++j) {
        const double z = -1.0 + 2.0 * j / 19.0;
        Point p = chart.inverse(Vec::Constant(1, u), Vec::Constant(1, z));
        worst = std::max(worst, std::abs(fig2.f(p) - z * z) / (1.0 + z * z));
      }
    }
    c.require(worst <= 1e-4, "fig2 value residual " + sci(worst));
    VerificationReport conv = convexity_along_rectified_lines(chart, 24, 7);
    c.require(conv.estimate <= 1e-4, "fig2 convexity " + sci(conv.estimate));
  }
  {
    Landscape lin = parse_scalar_field("x2^2", 2);
    lin.f_star = 0.0;
    lin.s_model = x_axis_model();
    GlobalChart chart(lin, lin.s_model, GlobalChart::signed_sqrt_rule(lin, *lin.s_model));
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const double u = -2.0 + 4.0 * i / 19.0;
      for (int j = 0; j < 20; ++j) {
        const double z = -1.0 + 2.0 * j / 19.0;
        Point p = chart.inverse(Vec::Constant(1, u), Vec::Constant(1, z));
        worst = std::max(worst, std::abs(lin.f(p) - z * z));
      }
    }
    c.require(worst <= 1e-12, "x2^2 value residual " + sci(worst));
    VerificationReport conv = convexity_along_rectified_lines(chart, 24, 7);
    c.require(conv.estimate <= 1e-4, "x2^2 convexity " + sci(conv.estimate));
  }
  c.finish();
}

void criterion_8_constructor() {
  Criterion c(8, "constructor: 1-PL at 1e4 samples, identity residual 1e-6, closed form 1e-9");
  DiffeoPair identity;
  identity.dim = 2;
  identity.dim_s = 0;
  identity.dim_k = 2;
  identity.psi1 = [](const Point&) { return Vec(0); };
  identity.psi2 = [](const Point& y) { return y; };
  identity.inverse = [](const Vec&, const Vec& z) { return z; };

  DiffeoPair shear;
  shear.dim = 2;
  shear.dim_s = 1;
  shear.dim_k = 1;
  shear.psi1 = [](const Point& y) { return Vec::Constant(1, y[0]); };
  shear.psi2 = [](const Point& y) {
    return Vec::Constant(1, y[1] - 0.25 * std::sin(4.0 * y[0]));
  };
  shear.inverse = [](const Vec& u, const Vec& z) {
    return vec2(u[0], 0.25 * std::sin(4.0 * u[0]) + z[0]);
  };
  shear.jacobian_inverse = [](const Vec& u, const Vec&) {
    Mat j(2, 2);
    j << 1.0, 0.0, std::cos(4.0 * u[0]), 1.0;
    return j;
  };

  int which = 0;
  for (const DiffeoPair* d : {&identity, &shear}) {
    const std::string name = which++ == 0 ? "identity" : "sine-shear";
    Landscape l = pl_from_diffeo(*d);
    HaltonSampler sampler(2, 1);
    double min_ratio = std::numeric_limits<double>::infinity();
    double worst_resid = 0.0;
    int used = 0;
    for (int i = 0; i < 10000; ++i) {
      Vec s = sampler.next();
      Vec y = vec2(-2.0 + 4.0 * s[0], -2.0 + 4.0 * s[1]);
      const double f = l.f(y);
      if (f < 1e-8) continue;
      Vec g = fd_gradient(l.f, y);
      min_ratio = std::min(min_ratio, g.squaredNorm() / (2.0 * f));
      if (used % 100 == 0)
        worst_resid = std::max(worst_resid, directional_identity_residual(l, *d, y));
      ++used;
    }
    c.require(used > 9000, name + ": admissible samples");
    c.require(min_ratio >= 1.0 - 1e-6, name + ": min ratio " + sci(min_ratio));
    c.require(worst_resid <= 1e-6, name + ": identity residual " + sci(worst_resid));
  }
  {
    Landscape l = pl_from_diffeo(shear);
    HaltonSampler sampler(2, 3);
    double worst = 0.0;
    for (int i = 0; i < 400; ++i) {
      Vec s = sampler.next();
      Vec y = vec2(-2.0 + 4.0 * s[0], -2.0 + 4.0 * s[1]);
      const double closed = std::pow(y[1] - 0.25 * std::sin(4.0 * y[0]), 2);
      worst = std::max(worst, std::abs(l.f(y) - closed));
    }
    c.require(worst <= 1e-9, "sine-shear closed form " + sci(worst));
  }
  c.finish();
}

void criterion_9_negatives() {
  Criterion c(9, "negatives: invex mu-hat decays over boxes, c1_cross MB fails, blowup diverges");
  {
    Landscape l = builtin("invex_not_pl");
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double half : l.degradation_boxes) {
      VerificationReport r = estimate_mu(l, l.degradation_samples, 7, {}, half);
      monotone = monotone && r.estimate < prev;
      prev = r.estimate;
    }
    c.require(monotone, "invex_not_pl mu-hat chain not strictly decreasing");
  }
  {
    VerificationReport r = morse_bott_spectrum(builtin("c1_cross"), vec2(0, 0), 1, 0.5);
    c.require(!r.pass, "c1_cross MB unexpectedly passed");
    c.require(r.worst_value == 2.0, "c1_cross kernel dimension");
  }
  {
    Trajectory t = integrate_gradient_flow(builtin("backward_blowup"), Vec::Constant(1, 0.5),
                                           -10.0);
    c.require(t.status == TrajectoryStatus::kDiverged,
              std::string("backward status = ") + to_string(t.status));
  }
  c.finish();
}

void criterion_10_morse_chart() {
  Criterion c(10, "Morse chart: exact on quadratics (1e-12), cubic ball (1e-6), H(0) check");
  {
    Landscape q = parse_scalar_field("x1^2 + 2*x2^2", 2);
    MorseChart chart = morse_chart(q, vec2(0, 0), 1.2, 16);
    double worst = 0.0;
    for (int i = 0; i < 12; ++i) {
      const double a = 2.0 * M_PI * i / 12.0;
      for (double rad : {0.2, 0.7, 1.1}) {
        Vec v = rad * vec2(std::cos(a), std::sin(a));
        worst = std::max(worst, std::abs(q.f(v) - chart.forward(v).squaredNorm()));
      }
    }
    c.require(worst <= 1e-12, "constant Hessian law " + sci(worst));
  }
  {
    Landscape cubic = parse_scalar_field("x1^2 + x2^2 + 0.3*x1^3", 2);
    cubic.f_star = 0.0;
    Rectifier r = build_rectifier(cubic, vec2(0, 0));
    const MorseChart& chart = r.chart();
    double worst = 0.0;
    for (int i = 0; i < 16; ++i) {
      const double a = 2.0 * M_PI * i / 16.0;
      for (double frac : {0.3, 0.6, 0.95}) {
        Vec v = frac * chart.radius() * vec2(std::cos(a), std::sin(a));
        worst = std::max(worst,
                         std::abs(cubic.f(v) - chart.forward(v).squaredNorm()) /
                             (1.0 + std::abs(cubic.f(v))));
      }
    }
    c.require(worst <= 1e-6, "cubic ball law " + sci(worst));
    Mat h0 = chart.h_field(Vec::Zero(2));
    Mat expected = 0.5 * ambient_hessian(cubic, vec2(0, 0));
    c.require((h0 - expected).cwiseAbs().maxCoeff() <= 1e-10, "H(0) = hessian/2");
  }
  c.finish();
}

void criterion_11_determinism() {
  Criterion c(11, "determinism: verify all --seed 7 twice is byte-identical, < 5 min");
  fs::path dir = fs::temp_directory_path() / "pllab_acceptance";
  fs::create_directories(dir);
  fs::path a = dir / "all_a.json";
  fs::path b = dir / "all_b.json";
  auto t0 = std::chrono::steady_clock::now();
  int rc1 = run_cli({"verify", "all", "--seed", "7", "--out", a.string()});
  int rc2 = run_cli({"verify", "all", "--seed", "7", "--out", b.string()});
  const double dt = seconds_since(t0);
  // exit code 1 is expected: c1_cross carries a registered MB failure
  c.require(rc1 == 1 && rc2 == 1, "verify all exit codes " + std::to_string(rc1) + "/" +
                                      std::to_string(rc2) + " (expected 1: c1_cross)");
  const std::string ja = slurp(a);
  c.require(!ja.empty() && ja == slurp(b), "reports are not byte-identical");
  c.require(ja.find("expected_fail") != std::string::npos, "expected_fail flag missing");
  c.require(dt < 300.0, "wall clock " + sci(dt) + " s");
  c.finish();
}

}  // namespace

int main() {
  // keep CLI invocations quiet on stdout: they all write to --out files
  criterion_1_pl_constants();
  criterion_2_fig2();
  criterion_3_rescaled_law();
  criterion_4_length_bound();
  criterion_5_rectification();
  criterion_6_lift();
  criterion_7_chart();
  criterion_8_constructor();
  criterion_9_negatives();
  criterion_10_morse_chart();
  criterion_11_determinism();
  if (g_failures == 0) {
    std::printf("all acceptance criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", g_failures);
  return 1;
}
