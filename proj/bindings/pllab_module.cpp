#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pllab/calculus.hpp"
#include "pllab/construct.hpp"
#include "pllab/flow.hpp"
#include "pllab/landscape.hpp"
#include "pllab/plot.hpp"
#include "pllab/rectify.hpp"
#include "pllab/trivialize.hpp"
#include "pllab/verify.hpp"

namespace py = pybind11;
using namespace pllab;

namespace {

py::dict report_dict(const VerificationReport& r) {
  py::dict d;
  d["check"] = r.check_name;
  d["samples"] = r.samples;
  d["estimate"] = r.estimate;
  d["percentile_5"] = r.percentile_5;
  d["worst_point"] = Vec(r.worst_point);
  d["worst_value"] = r.worst_value;
  d["pass"] = r.pass;
  d["notes"] = r.notes;
  d["seed"] = r.seed;
  return d;
}

py::dict trajectory_dict(const Trajectory& t) {
  py::dict d;
  d["times"] = t.times;
  d["points"] = t.points;
  d["values"] = t.values;
  d["grad_norms"] = t.grad_norms;
  d["status"] = std::string(to_string(t.status));
  d["path_length"] = t.path_length;
  return d;
}

DiffeoPair diffeo_from_expressions(int dim, int dim_s,
                                   const std::vector<std::string>& psi1,
                                   const std::vector<std::string>& psi2,
                                   const std::vector<std::string>& inverse);

FiberRule default_rule(const Landscape& l) {
  if (l.name == "ts2") {
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

}  // namespace

PYBIND11_MODULE(_pllab, m) {
  m.doc() = "numerical laboratory for globally Polyak-Lojasiewicz landscapes";

  py::register_exception<Error>(m, "PllabError");

  py::class_<Landscape>(m, "Landscape")
      .def_readonly("dim_ambient", &Landscape::dim_ambient)
      .def_readonly("dim_manifold", &Landscape::dim_manifold)
      .def_readonly("name", &Landscape::name)
      .def_property_readonly("f_star",
                             [](const Landscape& l) { return l.f_star; })
      .def_property_readonly("mu_claim",
                             [](const Landscape& l) { return l.mu_claim; })
      .def_property_readonly("box_lo", [](const Landscape& l) { return l.box.lo; })
      .def_property_readonly("box_hi", [](const Landscape& l) { return l.box.hi; })
      .def_property_readonly("has_s_model",
                             [](const Landscape& l) { return static_cast<bool>(l.s_model); })
      .def("f", [](const Landscape& l, const Vec& p) { return l.f(p); })
      .def("grad", [](const Landscape& l, const Vec& p) { return gradient(l, p).vec; })
      .def("hess", [](const Landscape& l, const Vec& p) { return hessian(l, p).matrix; })
      .def("__repr__", [](const Landscape& l) { return "<Landscape " + l.name + ">"; });

  m.def("parse_scalar_field", &parse_scalar_field, py::arg("text"), py::arg("dim"));
  m.def("builtin", &builtin, py::arg("name"));
  m.def("builtin_names", &builtin_names);
  m.def("validate_point",
        [](const Landscape& l, const Vec& p) { validate_point(l, p); });

  m.def("pl_ratio",
        [](const Landscape& l, const Vec& p) { return pl_ratio(l, p); });
  m.def(
      "estimate_mu",
      [](const Landscape& l, int n, long long seed) { return report_dict(estimate_mu(l, n, seed)); },
      py::arg("landscape"), py::arg("n") = 10000, py::arg("seed") = 0);
  m.def(
      "quadratic_growth_check",
      [](const Landscape& l, double mu, int n) {
        return report_dict(quadratic_growth_check(l, mu, n));
      },
      py::arg("landscape"), py::arg("mu"), py::arg("n") = 100);
  m.def(
      "morse_bott_spectrum",
      [](const Landscape& l, const Vec& p, int kernel_dim, double mu) {
        return report_dict(morse_bott_spectrum(l, p, kernel_dim, mu));
      },
      py::arg("landscape"), py::arg("s_point"), py::arg("kernel_dim"), py::arg("mu"));
  m.def(
      "least_squares_pl_bound",
      [](const std::function<Vec(const Vec&)>& field, const Vec& b, const Vec& p) {
        return least_squares_pl_bound(field, b, p);
      },
      py::arg("field"), py::arg("b"), py::arg("p"));

  m.def(
      "integrate_gradient_flow",
      [](const Landscape& l, const Vec& start, double t_end) {
        return trajectory_dict(integrate_gradient_flow(l, start, t_end));
      },
      py::arg("landscape"), py::arg("start"), py::arg("t_end"));
  m.def(
      "endpoint",
      [](const Landscape& l, const Vec& start) {
        EndpointResult r = endpoint(l, start);
        py::dict d;
        d["limit"] = Vec(r.limit);
        d["status"] = std::string(to_string(r.status));
        d["path_length"] = r.path_length;
        d["f_at_limit"] = r.f_at_limit;
        d["grad_norm_at_limit"] = r.grad_norm_at_limit;
        return d;
      },
      py::arg("landscape"), py::arg("start"));
  m.def(
      "rescaled_flow",
      [](const Landscape& l, const Vec& start, double delta) {
        return rescaled_flow(l, start, delta);
      },
      py::arg("landscape"), py::arg("start"), py::arg("delta_value"));
  m.def(
      "retraction_homotopy",
      [](const Landscape& l, const Vec& p, double s) { return retraction_homotopy(l, p, s); },
      py::arg("landscape"), py::arg("p"), py::arg("s"));

  py::class_<Rectifier>(m, "Rectifier")
      .def_property_readonly("rho", &Rectifier::rho)
      .def_property_readonly("chart_radius",
                             [](const Rectifier& r) { return r.chart().radius(); })
      .def_property_readonly("f_star", &Rectifier::f_star)
      .def_property_readonly("unique_minimizer_ok", &Rectifier::unique_minimizer_ok)
      .def_property_readonly("uniqueness_note", &Rectifier::uniqueness_note)
      .def("rectify", &Rectifier::rectify_point, py::arg("p"))
      .def("unrectify", &Rectifier::unrectify_point, py::arg("v"));

  m.def(
      "build_rectifier",
      [](const Landscape& l, const Vec& x_star) { return build_rectifier(l, x_star); },
      py::arg("landscape"), py::arg("x_star"));

  m.def(
      "horizontal_lift",
      [](const Landscape& l, const Vec& y, int steps) {
        if (!l.s_model) throw Error("landscape has no S model");
        LiftResult r = horizontal_lift(l, *l.s_model, y, steps);
        py::dict d;
        d["endpoint_in_fiber"] = Vec(r.endpoint_in_fiber);
        d["f_drift_max"] = r.f_drift_max;
        d["pi_residual"] = r.pi_residual;
        d["landing_param_error"] = Vec(r.landing_param_error);
        d["partial"] = r.partial;
        d["gamma"] = r.gamma;
        d["times"] = r.times;
        return d;
      },
      py::arg("landscape"), py::arg("y"), py::arg("steps") = 64);

  m.def(
      "fiber_tangency_residual",
      [](const Landscape& l, const Vec& p) {
        if (!l.s_model) throw Error("landscape has no S model");
        return fiber_tangency_residual(l, *l.s_model, p);
      },
      py::arg("landscape"), py::arg("p"));

  py::class_<GlobalChart>(m, "GlobalChart")
      .def_property_readonly("fiber_dim", &GlobalChart::fiber_dim)
      .def_property_readonly("f_star", &GlobalChart::f_star)
      .def("forward",
           [](const GlobalChart& c, const Vec& y) {
             GlobalChart::Image img = c.forward(y);
             return py::make_tuple(img.u, img.z);
           })
      .def("inverse", &GlobalChart::inverse, py::arg("u"), py::arg("z"));

  m.def(
      "global_rectified_chart",
      [](const Landscape& l) {
        if (!l.s_model) throw Error("landscape has no S model");
        return GlobalChart(l, l.s_model, default_rule(l));
      },
      py::arg("landscape"));

  py::class_<DiffeoPair>(m, "DiffeoPair");
  m.def("diffeo_from_expressions", &diffeo_from_expressions, py::arg("dim"), py::arg("dim_s"),
        py::arg("psi1"), py::arg("psi2"), py::arg("inverse"));
  m.def(
      "pl_from_diffeo", [](const DiffeoPair& d) { return pl_from_diffeo(d); },
      py::arg("diffeo"));
  m.def(
      "directional_identity_residual",
      [](const Landscape& l, const DiffeoPair& d, const Vec& y) {
        return directional_identity_residual(l, d, y);
      },
      py::arg("landscape"), py::arg("diffeo"), py::arg("y"));

  m.def(
      "emit_plot",
      [](const Landscape& l, const std::string& path, double xmin, double xmax, double ymin,
         double ymax, int grid) {
        Scene scene;
        scene.landscape = l;
        scene.xmin = xmin;
        scene.xmax = xmax;
        scene.ymin = ymin;
        scene.ymax = ymax;
        scene.grid = grid;
        scene.draw_s_curve = static_cast<bool>(l.s_model);
        emit_plot(scene, path);
      },
      py::arg("landscape"), py::arg("path"), py::arg("xmin") = -2.0, py::arg("xmax") = 2.0,
      py::arg("ymin") = -2.0, py::arg("ymax") = 2.0, py::arg("grid") = 64);
}

namespace {

DiffeoPair diffeo_from_expressions(int dim, int dim_s,
                                   const std::vector<std::string>& psi1,
                                   const std::vector<std::string>& psi2,
                                   const std::vector<std::string>& inverse) {
  DiffeoPair d;
  d.dim = dim;
  d.dim_s = dim_s;
  d.dim_k = dim - dim_s;
  std::vector<std::string> x_names, uz_names;
  for (int i = 1; i <= dim; ++i) x_names.push_back("x" + std::to_string(i));
  for (int i = 1; i <= dim_s; ++i) uz_names.push_back("u" + std::to_string(i));
  for (int i = 1; i <= d.dim_k; ++i) uz_names.push_back("z" + std::to_string(i));

  auto compile = [](const std::vector<std::string>& texts,
                    const std::vector<std::string>& vars) {
    std::vector<expr::Expression> out;
    for (const auto& t : texts) out.push_back(expr::parse(t, vars));
    return out;
  };
  auto p1 = compile(psi1, x_names);
  auto p2 = compile(psi2, x_names);
  auto inv = compile(inverse, uz_names);
  d.psi1 = [p1](const Point& y) {
    Vec out(p1.size());
    for (std::size_t i = 0; i < p1.size(); ++i) out[static_cast<Eigen::Index>(i)] = p1[i].eval(y);
    return out;
  };
  d.psi2 = [p2](const Point& y) {
    Vec out(p2.size());
    for (std::size_t i = 0; i < p2.size(); ++i) out[static_cast<Eigen::Index>(i)] = p2[i].eval(y);
    return out;
  };
  const int m = dim_s;
  d.inverse = [inv, m](const Vec& u, const Vec& z) {
    Vec uz(m + z.size());
    uz.head(m) = u;
    uz.tail(z.size()) = z;
    Vec out(inv.size());
    for (std::size_t i = 0; i < inv.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = inv[i].eval(uz);
    return Point(out);
  };
  return d;
}

}  // namespace
