#include "pllab/plot.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pllab/calculus.hpp"
#include "pllab/flow.hpp"
#include "pllab/trivialize.hpp"

namespace pllab {

namespace {

Point pt2(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// interpolate the level crossing on an edge with values fa, fb
Point lerp_edge(const Point& a, const Point& b, double fa, double fb, double level) {
  const double t = (level - fa) / (fb - fa);
  return a + t * (b - a);
}

struct GridEval {
  int n;
  double xmin, xmax, ymin, ymax;
  std::vector<double> values;  // (n+1) x (n+1)

  double x_at(int i) const { return xmin + (xmax - xmin) * i / n; }
  double y_at(int j) const { return ymin + (ymax - ymin) * j / n; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * (n + 1) + i]; }
};

GridEval evaluate_grid(const Landscape& l, double xmin, double xmax, double ymin, double ymax,
                       int n) {
  GridEval g{n, xmin, xmax, ymin, ymax, {}};
  g.values.resize(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      g.values[static_cast<std::size_t>(j) * (n + 1) + i] = l.f(pt2(g.x_at(i), g.y_at(j)));
  return g;
}

// clip a polygon against {f <= level} or {f >= level}; f travels with every
// vertex and is interpolated linearly along edges
struct PolyVertex {
  Point p;
  double f;
};

std::vector<PolyVertex> clip(const std::vector<PolyVertex>& poly, double level, bool keep_below) {
  std::vector<PolyVertex> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const PolyVertex& a = poly[i];
    const PolyVertex& b = poly[(i + 1) % n];
    const bool a_in = keep_below ? a.f <= level : a.f >= level;
    const bool b_in = keep_below ? b.f <= level : b.f >= level;
    if (a_in) out.push_back(a);
    if (a_in != b_in) {
      const double t = (level - a.f) / (b.f - a.f);
      out.push_back({a.p + t * (b.p - a.p), level});
    }
  }
  return out;
}

const char* kBandColors[] = {"#30123b", "#3f3994", "#455ed2", "#3e86f7", "#2aa9f1",
                             "#1cc8d8", "#2ee0b0", "#5ef08b", "#95f356", "#c9e93b",
                             "#eed03a", "#fcae2e", "#f8821f", "#e85b12", "#cd3a08",
                             "#a81d03", "#7a0403"};

class SvgWriter {
 public:
  SvgWriter(double xmin, double xmax, double ymin, double ymax)
      : xmin_(xmin), xmax_(xmax), ymin_(ymin), ymax_(ymax) {}

  double px(double x) const { return margin_ + (x - xmin_) / (xmax_ - xmin_) * size_; }
  double py(double y) const { return margin_ + (ymax_ - y) / (ymax_ - ymin_) * size_; }

  void open(std::ostream& os) const {
    const double w = size_ + 2 * margin_;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w
       << "\" height=\"" << w << "\" viewBox=\"0 0 " << w << ' ' << w << "\">\n";
  }

  void frame(std::ostream& os) const {
    os << "<rect x=\"" << margin_ << "\" y=\"" << margin_ << "\" width=\"" << size_
       << "\" height=\"" << size_
       << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  }

  void polyline(std::ostream& os, const std::vector<Point>& pts, const char* color, double width,
                const char* dash = nullptr) const {
    if (pts.size() < 2) return;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width << '"';
    if (dash) os << " stroke-dasharray=\"" << dash << '"';
    os << " points=\"";
    for (const auto& p : pts) os << fmt(px(p[0])) << ',' << fmt(py(p[1])) << ' ';
    os << "\"/>\n";
  }

 private:
  double xmin_, xmax_, ymin_, ymax_;
  double size_ = 720.0;
  double margin_ = 40.0;
};

}  // namespace

std::vector<std::pair<Point, Point>> contour_segments(const Landscape& l, double xmin,
                                                      double xmax, double ymin, double ymax,
                                                      int grid, double level) {
  GridEval g = evaluate_grid(l, xmin, xmax, ymin, ymax, grid);
  std::vector<std::pair<Point, Point>> segments;
  for (int j = 0; j < grid; ++j) {
    for (int i = 0; i < grid; ++i) {
      const Point c00 = pt2(g.x_at(i), g.y_at(j)), c10 = pt2(g.x_at(i + 1), g.y_at(j));
      const Point c11 = pt2(g.x_at(i + 1), g.y_at(j + 1)), c01 = pt2(g.x_at(i), g.y_at(j + 1));
      const double f00 = g.at(i, j), f10 = g.at(i + 1, j), f11 = g.at(i + 1, j + 1),
                   f01 = g.at(i, j + 1);
      int mask = (f00 > level) | ((f10 > level) << 1) | ((f11 > level) << 2) |
                 ((f01 > level) << 3);
      if (mask == 0 || mask == 15) continue;
      Point e_bottom, e_right, e_top, e_left;
      const bool b = (f00 > level) != (f10 > level);
      const bool r = (f10 > level) != (f11 > level);
      const bool t = (f11 > level) != (f01 > level);
      const bool lft = (f01 > level) != (f00 > level);
      if (b) e_bottom = lerp_edge(c00, c10, f00, f10, level);
      if (r) e_right = lerp_edge(c10, c11, f10, f11, level);
      if (t) e_top = lerp_edge(c11, c01, f11, f01, level);
      if (lft) e_left = lerp_edge(c01, c00, f01, f00, level);
      if (mask == 5 || mask == 10) {
        // saddle cell: pair the crossings using the cell-center sample
        const double fc = l.f(0.5 * (c00 + c11));
        const bool center_above = fc > level;
        if ((mask == 5) == center_above) {
          segments.emplace_back(e_left, e_bottom);
          segments.emplace_back(e_top, e_right);
        } else {
          segments.emplace_back(e_left, e_top);
          segments.emplace_back(e_bottom, e_right);
        }
        continue;
      }
      std::vector<Point> hits;
      if (b) hits.push_back(e_bottom);
      if (r) hits.push_back(e_right);
      if (t) hits.push_back(e_top);
      if (lft) hits.push_back(e_left);
      if (hits.size() == 2) segments.emplace_back(hits[0], hits[1]);
    }
  }
  return segments;
}

std::string render_svg(const Scene& scene) {
  const Landscape& l = scene.landscape;
  if (l.dim_ambient != 2) throw UnsupportedCaseError("plots are 2-D only");
  if (scene.grid < 8) throw Error("plot grid resolution must be at least 8");
  if (!(scene.xmax > scene.xmin) || !(scene.ymax > scene.ymin))
    throw Error("plot window is degenerate");

  SvgWriter w(scene.xmin, scene.xmax, scene.ymin, scene.ymax);
  std::ostringstream os;
  os.precision(10);
  w.open(os);

  std::vector<double> levels = scene.levels;
  if (levels.empty()) levels = {0.01, 0.05, 0.1, 0.25, 0.5};

  // filled bands: clip each grid cell against consecutive level pairs
  {
    GridEval g = evaluate_grid(l, scene.xmin, scene.xmax, scene.ymin, scene.ymax, scene.grid);
    const int nb = static_cast<int>(levels.size()) + 1;
    const int nc = static_cast<int>(std::size(kBandColors));
    for (int band = 0; band < nb; ++band) {
      const double lo = band == 0 ? -std::numeric_limits<double>::infinity() : levels[band - 1];
      const double hi = band == nb - 1 ? std::numeric_limits<double>::infinity() : levels[band];
      os << "<path fill=\"" << kBandColors[(band * (nc - 1)) / std::max(nb - 1, 1)]
         << "\" stroke=\"none\" d=\"";
      for (int j = 0; j < scene.grid; ++j) {
        for (int i = 0; i < scene.grid; ++i) {
          std::vector<PolyVertex> poly = {
              {pt2(g.x_at(i), g.y_at(j)), g.at(i, j)},
              {pt2(g.x_at(i + 1), g.y_at(j)), g.at(i + 1, j)},
              {pt2(g.x_at(i + 1), g.y_at(j + 1)), g.at(i + 1, j + 1)},
              {pt2(g.x_at(i), g.y_at(j + 1)), g.at(i, j + 1)}};
          if (std::isfinite(lo)) poly = clip(poly, lo, false);
          if (poly.empty()) continue;
          if (std::isfinite(hi)) poly = clip(poly, hi, true);
          if (poly.size() < 3) continue;
          os << 'M';
          for (std::size_t v = 0; v < poly.size(); ++v) {
            if (v) os << 'L';
            os << fmt(w.px(poly[v].p[0])) << ' ' << fmt(w.py(poly[v].p[1]));
          }
          os << 'Z';
        }
      }
      os << "\"/>\n";
    }
  }

  if (scene.draw_contours) {
    for (double level : levels) {
      auto segs = contour_segments(l, scene.xmin, scene.xmax, scene.ymin, scene.ymax,
                                   scene.grid, level);
      os << "<path fill=\"none\" stroke=\"#404040\" stroke-width=\"0.6\" d=\"";
      for (const auto& s : segs)
        os << 'M' << fmt(w.px(s.first[0])) << ' ' << fmt(w.py(s.first[1])) << 'L'
           << fmt(w.px(s.second[0])) << ' ' << fmt(w.py(s.second[1]));
      os << "\"/>\n";
    }
  }

  for (const Point& start : scene.flow_starts) {
    Trajectory traj = integrate_gradient_flow(l, start, 40.0);
    w.polyline(os, traj.points, "#ffffff", 1.4);
  }

  if (scene.draw_s_curve && l.s_model) {
    const SModel& s = *l.s_model;
    std::vector<Point> pts;
    const double lo = s.u_lo.size() ? s.u_lo[0] : -2.0;
    const double hi = s.u_hi.size() ? s.u_hi[0] : 2.0;
    for (int i = 0; i <= 256; ++i)
      pts.push_back(s.param(Vec::Constant(1, lo + (hi - lo) * i / 256.0)));
    w.polyline(os, pts, "#d86018", 2.4);
  }

  if (scene.draw_fiber && l.s_model) {
    // the fiber through x_bar, traced by backward flow from seeds just off S
    for (double side : {1.0, -1.0}) {
      Mat frame = fd_jacobian(l.s_model->param, l.s_model->u_bar);
      Point n = pt2(-frame(1, 0), frame(0, 0));
      n /= n.norm();
      Point seed = l.s_model->x_bar + side * 1e-3 * n;
      FlowCriteria crit;
      crit.overflow_guard = 1e6;
      Trajectory traj = integrate_gradient_flow(l, seed, -12.0, crit);
      std::vector<Point> clipped;
      for (const auto& p : traj.points) {
        if (p[0] < scene.xmin || p[0] > scene.xmax || p[1] < scene.ymin || p[1] > scene.ymax)
          break;
        clipped.push_back(p);
      }
      w.polyline(os, clipped, "#f2f2f2", 1.2, "4 3");
    }
  }

  if (scene.lift_y && l.s_model) {
    LiftResult lift = horizontal_lift(l, *l.s_model, *scene.lift_y, 64);
    w.polyline(os, lift.gamma, "#ffd166", 1.8);
  }

  w.frame(os);
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const Scene& scene, const std::string& path) {
  std::string svg = render_svg(scene);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path);
  out << svg;
  if (!out) throw Error("failed writing: " + path);
}

}  // namespace pllab
