#include "pllab/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pllab/calculus.hpp"
#include "pllab/config.hpp"
#include "pllab/construct.hpp"
#include "pllab/flow.hpp"
#include "pllab/plot.hpp"
#include "pllab/rectify.hpp"
#include "pllab/trivialize.hpp"
#include "pllab/verify.hpp"

namespace pllab::cli {

namespace {

using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsageError = 2;
constexpr int kNumericalError = 3;

struct CommonOpts {
  std::string config_path;
  long long seed = 0;
  std::string out_path;
  bool json = false;
  // tolerance overrides
  double tol_eps_grad = -1, tol_eps_x = -1, tol_rel = -1, tol_abs = -1, tol_t_max = -1;

  FlowCriteria flow() const {
    FlowCriteria crit;
    if (tol_eps_grad > 0) crit.eps_grad = tol_eps_grad;
    if (tol_eps_x > 0) crit.eps_x = tol_eps_x;
    if (tol_rel > 0) crit.rel_tol = tol_rel;
    if (tol_abs > 0) crit.abs_tol = tol_abs;
    if (tol_t_max > 0) crit.t_max = tol_t_max;
    return crit;
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration (JSON)");
  cmd->add_option("--seed", opts.seed, "sampling seed");
  cmd->add_option("--out", opts.out_path, "output file path");
  cmd->add_flag("--json", opts.json, "machine-readable stdout");
  cmd->add_option("--tol-eps-grad", opts.tol_eps_grad, "endpoint gradient threshold");
  cmd->add_option("--tol-eps-x", opts.tol_eps_x, "endpoint displacement threshold");
  cmd->add_option("--tol-rel", opts.tol_rel, "integrator relative tolerance");
  cmd->add_option("--tol-abs", opts.tol_abs, "integrator absolute tolerance");
  cmd->add_option("--tol-t-max", opts.tol_t_max, "endpoint time horizon");
}

Vec parse_point(const std::string& text) {
  std::vector<double> xs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      xs.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse coordinate '" + item + "'");
    }
  }
  if (xs.empty()) throw ConfigError("empty point");
  Vec v(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
  return v;
}

Landscape require_landscape(const CommonOpts& opts) {
  if (opts.config_path.empty()) throw ConfigError("this command needs --config");
  Config cfg = load_config_file(opts.config_path);
  if (!cfg.has_landscape) throw ConfigError("config has no landscape block");
  return cfg.landscape;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ordered_json vec_json(const Vec& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json report_json(const VerificationReport& r) {
  ordered_json j;
  j["check"] = r.check_name;
  j["samples"] = r.samples;
  j["estimate"] = r.estimate;
  j["percentile_5"] = r.percentile_5;
  j["worst_point"] = vec_json(r.worst_point);
  j["worst_value"] = r.worst_value;
  j["pass"] = r.pass;
  j["notes"] = r.notes;
  j["seed"] = r.seed;
  return j;
}

void write_output(const CommonOpts& opts, const ordered_json& payload) {
  const std::string text = payload.dump(2) + "\n";
  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + opts.out_path);
    out << text;
  }
  if (opts.json || opts.out_path.empty()) std::cout << text;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, int dim) {
  os << "t";
  for (int i = 1; i <= dim; ++i) os << ",x" << i;
  os << ",f,gradnorm\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << fmt17(traj.times[k]);
    for (int i = 0; i < dim; ++i) os << ',' << fmt17(traj.points[k][i]);
    os << ',' << fmt17(traj.values[k]) << ',' << fmt17(traj.grad_norms[k]) << '\n';
  }
  os << "# status=" << to_string(traj.status) << '\n';
}

void write_lift_csv(std::ostream& os, const LiftResult& lift, int dim) {
  os << "t";
  for (int i = 1; i <= dim; ++i) os << ",x" << i;
  os << ",f,drift\n";
  for (std::size_t k = 0; k < lift.times.size(); ++k) {
    os << fmt17(lift.times[k]);
    for (int i = 0; i < dim; ++i) os << ',' << fmt17(lift.gamma[k][i]);
    os << ',' << fmt17(lift.values[k]) << ',' << fmt17(lift.drifts[k]) << '\n';
  }
  os << "# status=" << (lift.partial ? "partial" : "completed") << '\n';
}

// ---------------------------------------------------------------------------
// verify machinery

std::vector<Landscape> verify_targets(const CommonOpts& opts) {
  if (!opts.config_path.empty()) {
    Config cfg = load_config_file(opts.config_path);
    if (!cfg.has_landscape) throw ConfigError("config has no landscape block");
    return {cfg.landscape};
  }
  std::vector<Landscape> all;
  for (const auto& name : builtin_names()) all.push_back(builtin(name));
  return all;
}

void run_pl(const Landscape& l, const CommonOpts& opts, int samples,
            std::vector<VerificationReport>& out) {
  if (!l.f_star) {
    VerificationReport rep;
    rep.check_name = "pl:" + l.name;
    rep.pass = true;
    rep.notes = "skipped: f_star unknown";
    rep.seed = opts.seed;
    out.push_back(rep);
    return;
  }
  if (!l.degradation_boxes.empty()) {
    // documented PL failure: the sampled infimum must decay strictly as the
    // box grows
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (double half : l.degradation_boxes) {
      VerificationReport rep = estimate_mu(l, l.degradation_samples, opts.seed, {}, half);
      rep.check_name = "pl:" + l.name + ":box" + std::to_string(static_cast<int>(half));
      monotone = monotone && rep.estimate < prev;
      prev = rep.estimate;
      rep.pass = true;
      rep.notes += "; degradation chain";
      out.push_back(rep);
    }
    out.back().pass = monotone;
    out.back().notes += monotone ? "; strictly decreasing" : "; NOT strictly decreasing";
    return;
  }
  VerificationReport rep = estimate_mu(l, samples, opts.seed);
  rep.check_name = "pl:" + l.name;
  out.push_back(rep);
}

void run_qg(const Landscape& l, const CommonOpts& opts, int starts,
            std::vector<VerificationReport>& out) {
  VerificationReport rep;
  if (!l.mu_claim || !l.f_star) {
    rep.check_name = "qg:" + l.name;
    rep.pass = true;
    rep.notes = "skipped: no mu claim";
    rep.seed = opts.seed;
    out.push_back(rep);
    return;
  }
  rep = quadratic_growth_check(l, *l.mu_claim, starts, opts.flow(), opts.seed);
  rep.check_name = "qg:" + l.name;
  out.push_back(rep);
}

void run_mb(const Landscape& l, const CommonOpts& opts, int s_samples,
            std::vector<VerificationReport>& out) {
  std::vector<Point> points;
  int m = 0;
  if (l.s_model) {
    const SModel& s = *l.s_model;
    m = s.dim_s;
    points.push_back(s.x_bar);
    HaltonSampler sampler(s.dim_s, 1 + opts.seed);
    for (int i = 0; i < s_samples - 1; ++i) {
      Vec c = sampler.next();
      Vec u = s.u_lo + (s.u_hi - s.u_lo).cwiseProduct(c);
      points.push_back(s.param(u));
    }
  } else if (!l.known_critical_points.empty()) {
    points = l.known_critical_points;
    m = 0;
  } else {
    VerificationReport rep;
    rep.check_name = "mb:" + l.name;
    rep.pass = true;
    rep.notes = "skipped: no S model or critical points in the registry";
    rep.seed = opts.seed;
    out.push_back(rep);
    return;
  }
  const double mu = l.mu_claim ? *l.mu_claim : 0.0;
  VerificationReport worst;
  worst.pass = true;
  worst.estimate = std::numeric_limits<double>::infinity();
  int checked = 0;
  for (const auto& p : points) {
    VerificationReport rep = morse_bott_spectrum(l, p, m, mu);
    ++checked;
    if (!rep.pass && worst.pass) {
      worst = rep;
    } else if (rep.pass && worst.pass && rep.estimate < worst.estimate) {
      worst = rep;
    }
  }
  worst.check_name = "mb:" + l.name;
  worst.samples = checked;
  worst.seed = opts.seed;
  if (l.expected_fail.count("mb")) worst.notes += "; expected_fail";
  out.push_back(worst);
}

int cmd_verify(const CommonOpts& opts, const std::string& suite, int samples, int qg_starts,
               int mb_samples) {
  std::vector<Landscape> targets = verify_targets(opts);
  std::vector<VerificationReport> reports;
  for (const auto& l : targets) {
    if (suite == "pl" || suite == "all") run_pl(l, opts, samples, reports);
    if (suite == "qg" || suite == "all") run_qg(l, opts, qg_starts, reports);
    if (suite == "mb" || suite == "all") run_mb(l, opts, mb_samples, reports);
  }
  ordered_json arr = ordered_json::array();
  bool all_pass = true;
  for (const auto& r : reports) {
    arr.push_back(report_json(r));
    all_pass = all_pass && r.pass;
  }
  write_output(opts, arr);
  return all_pass ? kOk : kCheckFailed;
}

// ---------------------------------------------------------------------------

int cmd_list_examples(const CommonOpts& opts) {
  ordered_json arr = ordered_json::array();
  for (const auto& name : builtin_names()) {
    Landscape l = builtin(name);
    ordered_json j;
    j["name"] = name;
    j["dim_ambient"] = l.dim_ambient;
    j["dim_manifold"] = l.dim_manifold;
    j["constrained"] = static_cast<bool>(l.constraint);
    if (l.f_star) j["f_star"] = *l.f_star;
    if (l.mu_claim) j["mu_claim"] = *l.mu_claim;
    j["sampling_box"] = ordered_json::array({vec_json(l.box.lo), vec_json(l.box.hi)});
    if (!l.expected_fail.empty())
      j["expected_fail"] =
          std::vector<std::string>(l.expected_fail.begin(), l.expected_fail.end());
    arr.push_back(j);
  }
  if (opts.json || !opts.out_path.empty()) {
    write_output(opts, arr);
  } else {
    for (const auto& j : arr) {
      std::cout << j["name"].get<std::string>() << ": dim " << j["dim_ambient"];
      if (j.contains("mu_claim")) std::cout << ", mu = " << j["mu_claim"];
      if (j.contains("expected_fail")) std::cout << " [expected_fail]";
      std::cout << '\n';
    }
  }
  return kOk;
}

int cmd_flow(const CommonOpts& opts, const std::string& start_text, double t_end) {
  Landscape l = require_landscape(opts);
  Vec start = parse_point(start_text);
  Trajectory traj = integrate_gradient_flow(l, start, t_end, opts.flow());
  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + opts.out_path);
    write_trajectory_csv(out, traj, l.dim_ambient);
  } else {
    write_trajectory_csv(std::cout, traj, l.dim_ambient);
  }
  const bool expected_blowup = t_end < 0 && traj.status == TrajectoryStatus::kDiverged;
  return traj.status == TrajectoryStatus::kCompleted || expected_blowup ? kOk : kNumericalError;
}

int cmd_endpoint(const CommonOpts& opts, const std::string& start_text) {
  Landscape l = require_landscape(opts);
  EndpointResult r = endpoint(l, parse_point(start_text), opts.flow());
  ordered_json j;
  j["limit"] = vec_json(r.limit);
  j["status"] = to_string(r.status);
  j["path_length"] = r.path_length;
  j["f_at_limit"] = r.f_at_limit;
  j["grad_norm_at_limit"] = r.grad_norm_at_limit;
  write_output(opts, j);
  return r.status == EndpointStatus::kConverged ? kOk : kNumericalError;
}

int cmd_rescaled(const CommonOpts& opts, const std::string& start_text, double delta) {
  Landscape l = require_landscape(opts);
  Vec start = parse_point(start_text);
  Point result = rescaled_flow(l, start, delta, opts.flow());
  ordered_json j;
  j["point"] = vec_json(result);
  j["f_start"] = l.f(start);
  j["f_end"] = l.f(result);
  j["value_error"] = std::abs(l.f(result) - l.f(start) - delta);
  write_output(opts, j);
  return kOk;
}

int cmd_rectify(const CommonOpts& opts, const std::string& x_star_text,
                const std::string& point_text) {
  Landscape l = require_landscape(opts);
  Vec x_star;
  if (!x_star_text.empty()) x_star = parse_point(x_star_text);
  else if (!l.known_critical_points.empty()) x_star = l.known_critical_points.front();
  else if (l.s_model) x_star = l.s_model->x_bar;
  else throw ConfigError("give --x-star (no critical point is on record)");

  RectifierParams params;
  params.flow = opts.flow();
  Rectifier r = build_rectifier(l, x_star, params);
  ordered_json j;
  j["chart_radius"] = r.chart().radius();
  j["rho"] = r.rho();
  j["chart_probe_residual"] = r.chart().probe_residual();
  j["unique_minimizer_ok"] = r.unique_minimizer_ok();
  if (!r.unique_minimizer_ok()) j["uniqueness_note"] = r.uniqueness_note();
  if (!point_text.empty()) {
    Vec p = parse_point(point_text);
    Vec phi = r.rectify_point(p);
    Point back = r.unrectify_point(phi);
    j["point"] = vec_json(p);
    j["phi"] = vec_json(phi);
    j["quadratic_law_residual"] =
        std::abs(l.f(p) - r.f_star() - phi.squaredNorm()) / (1.0 + std::abs(l.f(p)));
    j["roundtrip_error"] = (back - p).norm();
  }
  write_output(opts, j);
  return kOk;
}

int cmd_lift(const CommonOpts& opts, const std::string& y_text, int steps) {
  Landscape l = require_landscape(opts);
  if (!l.s_model) throw ConfigError("lift needs an s_model (builtin or config block)");
  Vec y = parse_point(y_text);
  LiftResult lift = horizontal_lift(l, *l.s_model, y, steps);
  if (!opts.out_path.empty()) {
    std::ofstream out(opts.out_path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + opts.out_path);
    write_lift_csv(out, lift, l.dim_ambient);
  }
  ordered_json j;
  j["endpoint_in_fiber"] = vec_json(lift.endpoint_in_fiber);
  j["f_drift_max"] = lift.f_drift_max;
  j["pi_residual"] = lift.pi_residual;
  j["landing_param_error"] = vec_json(lift.landing_param_error);
  j["partial"] = lift.partial;
  // --out holds the CSV; the summary always goes to stdout
  std::cout << j.dump(2) << '\n';
  return lift.partial ? kCheckFailed : kOk;
}

FiberRule chart_rule_for(const Landscape& l) {
  if (l.name == "ts2") {
    // the fiber of ((0,0,1), 0) is its tangent plane; f = |v|^2/2 = |z|^2
    FiberRule rule;
    rule.k = 2;
    rule.coord = [](const Point& p) { return Vec(p.segment(3, 2) / std::sqrt(2.0)); };
    rule.point = [](const Vec& z) {
      Vec p = Vec::Zero(6);
      p[2] = 1.0;
      p.segment(3, 2) = std::sqrt(2.0) * z;
      return Point(p);
    };
    return rule;
  }
  return GlobalChart::signed_sqrt_rule(l, *l.s_model);
}

int cmd_chart(const CommonOpts& opts, int grid_n, double z_max, double chart_tol,
              int convexity_samples) {
  Landscape l = require_landscape(opts);
  if (!l.s_model) throw ConfigError("chart needs an s_model (builtin or config block)");
  GlobalChart chart(l, l.s_model, chart_rule_for(l));

  const SModel& s = *l.s_model;
  double worst_rel = 0.0;
  const double f_star = chart.f_star();
  const int k = chart.fiber_dim();
  for (int i = 0; i < grid_n; ++i) {
    Vec u = s.u_lo + (s.u_hi - s.u_lo) * (grid_n == 1 ? 0.5 : double(i) / (grid_n - 1));
    for (int jz = 0; jz < grid_n; ++jz) {
      const double z1 = -z_max + 2.0 * z_max * (grid_n == 1 ? 0.5 : double(jz) / (grid_n - 1));
      Vec z = Vec::Constant(k, 0.0);
      z[0] = z1;
      Point p = chart.inverse(u, z);
      const double rel = std::abs(l.f(p) - f_star - z.squaredNorm()) / (1.0 + z.squaredNorm());
      worst_rel = std::max(worst_rel, rel);
    }
  }
  VerificationReport conv =
      convexity_along_rectified_lines(chart, convexity_samples, opts.seed, z_max);
  ordered_json j;
  j["check"] = "chart:" + l.name;
  j["grid"] = grid_n;
  j["max_value_residual"] = worst_rel;
  j["convexity_max_violation"] = conv.estimate;
  const bool pass = worst_rel <= chart_tol && conv.estimate <= 1e-4;
  j["pass"] = pass;
  write_output(opts, j);
  return pass ? kOk : kCheckFailed;
}

int cmd_construct(const CommonOpts& opts, int samples) {
  if (opts.config_path.empty()) throw ConfigError("construct needs --config with a diffeo block");
  Config cfg = load_config_file(opts.config_path);
  if (!cfg.diffeo) throw ConfigError("config has no diffeo block");
  Landscape l = pl_from_diffeo(*cfg.diffeo);

  HaltonSampler sampler(l.dim_ambient, 1 + opts.seed);
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_residual = 0.0;
  int used = 0;
  for (int i = 0; i < samples; ++i) {
    Vec c = sampler.next();
    Vec y = l.box.lo + (l.box.hi - l.box.lo).cwiseProduct(c);
    const double f = l.f(y);
    if (f < 1e-8) continue;
    Vec g = fd_gradient(l.f, y);
    min_ratio = std::min(min_ratio, g.squaredNorm() / (2.0 * f));
    if (used % 50 == 0)
      max_residual = std::max(max_residual, directional_identity_residual(l, *cfg.diffeo, y));
    ++used;
  }
  ordered_json j;
  j["check"] = "construct";
  j["samples"] = used;
  j["min_pl_ratio"] = min_ratio;
  j["max_directional_residual"] = max_residual;
  const bool pass = min_ratio >= 1.0 - 1e-6 && max_residual <= 1e-6;
  j["pass"] = pass;
  j["seed"] = opts.seed;
  write_output(opts, j);
  return pass ? kOk : kCheckFailed;
}

int cmd_plot(const CommonOpts& opts) {
  if (opts.config_path.empty()) throw ConfigError("plot needs --config");
  Config cfg = load_config_file(opts.config_path);
  if (!cfg.has_landscape) throw ConfigError("config has no landscape block");
  Scene scene;
  if (cfg.scene) {
    scene = *cfg.scene;
  } else {
    scene.landscape = cfg.landscape;
    if (cfg.landscape.dim_ambient == 2) {
      scene.xmin = cfg.landscape.box.lo[0];
      scene.xmax = cfg.landscape.box.hi[0];
      scene.ymin = cfg.landscape.box.lo[1];
      scene.ymax = cfg.landscape.box.hi[1];
    }
    scene.draw_s_curve = static_cast<bool>(cfg.landscape.s_model);
    // default white trajectories from a fixed spread of window points
    for (double fx : {0.2, 0.5, 0.8}) {
      for (double fy : {0.15, 0.85}) {
        Vec p(2);
        p << scene.xmin + fx * (scene.xmax - scene.xmin),
            scene.ymin + fy * (scene.ymax - scene.ymin);
        scene.flow_starts.push_back(p);
      }
    }
  }
  const std::string path = opts.out_path.empty() ? "plot.svg" : opts.out_path;
  emit_plot(scene, path);
  if (opts.json) {
    ordered_json j;
    j["written"] = path;
    std::cout << j.dump(2) << '\n';
  }
  return kOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"numerical laboratory for globally Polyak-Lojasiewicz landscapes"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string start_text, point_text, x_star_text, y_text, suite;
  double t_end = 1.0, delta = 0.0;
  int samples = 10000, qg_starts = 100, mb_samples = 20, lift_steps = 64;
  int grid_n = 20, convexity_samples = 16;
  double z_max = 1.0, chart_tol = 1e-4;

  auto* c_list = app.add_subcommand("list-examples", "print the landscape registry");
  add_common(c_list, opts);

  auto* c_flow = app.add_subcommand("flow", "integrate negative gradient flow (CSV)");
  add_common(c_flow, opts);
  c_flow->add_option("--start", start_text, "start point x1,..,xd")->required();
  c_flow->add_option("--t-end", t_end, "integration time (negative runs backward)")->required();

  auto* c_end = app.add_subcommand("endpoint", "end-point map of gradient flow");
  add_common(c_end, opts);
  c_end->add_option("--start", start_text, "start point")->required();

  auto* c_resc = app.add_subcommand("rescaled", "value-parameterized gradient flow");
  add_common(c_resc, opts);
  c_resc->add_option("--start", start_text, "start point")->required();
  c_resc->add_option("--delta", delta, "value change")->required();

  auto* c_rect = app.add_subcommand("rectify", "build the quadratic rectifier");
  add_common(c_rect, opts);
  c_rect->add_option("--x-star", x_star_text, "minimizer (defaults to the registry)");
  c_rect->add_option("--point", point_text, "also map this point and round-trip it");

  auto* c_lift = app.add_subcommand("lift", "horizontal lift to the reference fiber (CSV)");
  add_common(c_lift, opts);
  c_lift->add_option("--y", y_text, "start point")->required();
  c_lift->add_option("--steps", lift_steps, "lift sampling steps");

  auto* c_chart = app.add_subcommand("chart", "global rectified chart + convexity check");
  add_common(c_chart, opts);
  c_chart->add_option("--grid-n", grid_n, "grid resolution per axis");
  c_chart->add_option("--z-max", z_max, "fiber coordinate half-width");
  c_chart->add_option("--chart-tol", chart_tol, "relative value tolerance");
  c_chart->add_option("--convexity-samples", convexity_samples, "segment pairs to test");

  auto* c_cons = app.add_subcommand("construct", "build a PL landscape from a diffeo");
  add_common(c_cons, opts);
  c_cons->add_option("--samples", samples, "PL sweep sample count");

  auto* c_ver = app.add_subcommand("verify", "verification battery: pl | qg | mb | all");
  add_common(c_ver, opts);
  c_ver->add_option("suite", suite, "pl, qg, mb or all")
      ->required()
      ->check(CLI::IsMember({"pl", "qg", "mb", "all"}));
  c_ver->add_option("--samples", samples, "PL sweep sample count");
  c_ver->add_option("--qg-starts", qg_starts, "quadratic growth start count");
  c_ver->add_option("--mb-samples", mb_samples, "S samples for the spectra");

  auto* c_plot = app.add_subcommand("plot", "emit an SVG figure");
  add_common(c_plot, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  auto fail_json = [&](const std::string& kind, const std::string& msg) {
    if (opts.json) {
      ordered_json j;
      j["error"] = kind;
      j["message"] = msg;
      std::cerr << j.dump() << '\n';
    } else {
      std::cerr << "error (" << kind << "): " << msg << '\n';
    }
  };

  try {
    if (c_list->parsed()) return cmd_list_examples(opts);
    if (c_flow->parsed()) return cmd_flow(opts, start_text, t_end);
    if (c_end->parsed()) return cmd_endpoint(opts, start_text);
    if (c_resc->parsed()) return cmd_rescaled(opts, start_text, delta);
    if (c_rect->parsed()) return cmd_rectify(opts, x_star_text, point_text);
    if (c_lift->parsed()) return cmd_lift(opts, y_text, lift_steps);
    if (c_chart->parsed()) return cmd_chart(opts, grid_n, z_max, chart_tol, convexity_samples);
    if (c_cons->parsed()) return cmd_construct(opts, samples);
    if (c_ver->parsed()) return cmd_verify(opts, suite, samples, qg_starts, mb_samples);
    if (c_plot->parsed()) return cmd_plot(opts);
  } catch (const ConfigError& e) {
    fail_json("usage", e.what());
    return kUsageError;
  } catch (const ParseError& e) {
    fail_json("usage", e.what());
    return kUsageError;
  } catch (const Error& e) {
    fail_json("numerical", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    fail_json("internal", e.what());
    return kNumericalError;
  }
  return kUsageError;
}

}  // namespace pllab::cli
