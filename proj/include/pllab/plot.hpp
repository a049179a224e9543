#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pllab/landscape.hpp"

namespace pllab {

/// A 2-D picture: filled level bands, contour polylines, gradient flow
/// trajectories, the minimizer curve, and optional fiber/lift overlays.
struct Scene {
  Landscape landscape;
  double xmin = -2, xmax = 2, ymin = -2, ymax = 2;
  int grid = 256;
  std::vector<double> levels;
  std::vector<Point> flow_starts;
  bool draw_contours = true;
  bool draw_s_curve = false;
  bool draw_fiber = false;
  std::optional<Point> lift_y;
};

/// Marching-squares iso-segments of f at one level; saddle cells are
/// disambiguated by the cell-center value. Endpoints are in data coordinates.
std::vector<std::pair<Point, Point>> contour_segments(const Landscape& l, double xmin,
                                                      double xmax, double ymin, double ymax,
                                                      int grid, double level);

/// Renders the scene as a deterministic SVG 1.1 document.
std::string render_svg(const Scene& scene);

/// Renders and writes to `path`.
void emit_plot(const Scene& scene, const std::string& path);

}  // namespace pllab
