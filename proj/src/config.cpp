#include "pllab/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "pllab/expression.hpp"

namespace pllab {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

Vec to_vec(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ConfigError(where + " must be an array of numbers");
  Vec v(arr.size());
  int i = 0;
  for (const auto& x : arr) {
    if (!x.is_number()) throw ConfigError(where + " must contain numbers only");
    v[i++] = x.get<double>();
  }
  return v;
}

std::vector<std::string> names(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 1; i <= n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// vector of expressions -> callable
std::function<Vec(const Vec&)> expr_map(const json& arr, const std::vector<std::string>& vars,
                                        const std::string& where) {
  if (!arr.is_array() || arr.empty()) throw ConfigError(where + " must be a non-empty array");
  std::vector<expr::Expression> parts;
  for (const auto& item : arr) {
    if (!item.is_string()) throw ConfigError(where + " must contain expression strings");
    parts.push_back(expr::parse(item.get<std::string>(), vars));
  }
  return [parts](const Vec& x) {
    Vec out(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i)
      out[static_cast<Eigen::Index>(i)] = parts[i].eval(x);
    return out;
  };
}

std::shared_ptr<SModel> parse_s_model(const json& cfg, int dim) {
  reject_unknown(cfg, {"dim_s", "param", "param_inverse", "x_bar", "u_bar", "u_window"},
                 "s_model");
  auto s = std::make_shared<SModel>();
  if (!cfg.contains("dim_s")) throw ConfigError("s_model needs dim_s");
  s->dim_s = cfg.at("dim_s").get<int>();
  if (s->dim_s < 1 || s->dim_s >= dim) throw ConfigError("s_model dim_s out of range");
  auto u_names = names("u", s->dim_s);
  auto x_names = names("x", dim);
  auto param = expr_map(cfg.at("param"), u_names, "s_model.param");
  auto inverse = expr_map(cfg.at("param_inverse"), x_names, "s_model.param_inverse");
  s->param = param;
  s->param_inverse = inverse;
  s->x_bar = to_vec(cfg.at("x_bar"), "s_model.x_bar");
  s->u_bar = cfg.contains("u_bar") ? to_vec(cfg.at("u_bar"), "s_model.u_bar")
                                   : Vec(Vec::Zero(s->dim_s));
  if (cfg.contains("u_window")) {
    const auto& w = cfg.at("u_window");
    if (!w.is_array() || w.size() != 2) throw ConfigError("s_model.u_window must be [lo, hi]");
    s->u_lo = to_vec(w[0], "s_model.u_window[0]");
    s->u_hi = to_vec(w[1], "s_model.u_window[1]");
  } else {
    s->u_lo = Vec::Constant(s->dim_s, -2.0);
    s->u_hi = Vec::Constant(s->dim_s, 2.0);
  }
  if (s->x_bar.size() != dim || s->u_bar.size() != s->dim_s)
    throw ConfigError("s_model x_bar/u_bar dimensions are inconsistent");
  return s;
}

Landscape parse_landscape(const json& cfg) {
  reject_unknown(cfg, {"builtin", "expression", "dim", "metric", "constraint"}, "landscape");
  if (cfg.contains("builtin")) {
    if (cfg.size() != 1) throw ConfigError("'builtin' stands alone in a landscape block");
    return builtin(cfg.at("builtin").get<std::string>());
  }
  if (!cfg.contains("expression") || !cfg.contains("dim"))
    throw ConfigError("landscape needs either 'builtin' or 'expression' + 'dim'");
  const int dim = cfg.at("dim").get<int>();
  if (dim < 1 || dim > 10) throw ConfigError("landscape dim out of range");
  if (cfg.contains("metric")) {
    const auto& m = cfg.at("metric");
    if (m.is_string()) {
      if (m.get<std::string>() != "euclidean")
        throw ConfigError("metric '" + m.get<std::string>() + "' is not recognized");
    } else {
      throw ConfigError("chart_matrix metrics are unsupported in config v1");
    }
  }
  if (cfg.contains("constraint"))
    throw ConfigError("custom constraints are unsupported in config v1; use a builtin");
  return parse_scalar_field(cfg.at("expression").get<std::string>(), dim);
}

DiffeoPair parse_diffeo(const json& cfg) {
  reject_unknown(cfg, {"dim", "dim_s", "psi1", "psi2", "inverse"}, "diffeo");
  DiffeoPair d;
  d.dim = cfg.at("dim").get<int>();
  d.dim_s = cfg.at("dim_s").get<int>();
  d.dim_k = d.dim - d.dim_s;
  if (d.dim < 1 || d.dim_s < 0 || d.dim_k < 1) throw ConfigError("diffeo dimensions are invalid");
  auto x_names = names("x", d.dim);
  std::vector<std::string> uz_names = names("u", d.dim_s);
  for (const auto& n : names("z", d.dim_k)) uz_names.push_back(n);

  if (d.dim_s > 0) {
    d.psi1 = expr_map(cfg.at("psi1"), x_names, "diffeo.psi1");
  } else {
    if (cfg.contains("psi1") && !cfg.at("psi1").empty())
      throw ConfigError("diffeo.psi1 must be empty when dim_s = 0");
    d.psi1 = [](const Point&) { return Vec(0); };
  }
  d.psi2 = expr_map(cfg.at("psi2"), x_names, "diffeo.psi2");
  auto inv = expr_map(cfg.at("inverse"), uz_names, "diffeo.inverse");
  const int m = d.dim_s;
  d.inverse = [inv, m](const Vec& u, const Vec& z) {
    Vec uz(m + z.size());
    uz.head(m) = u;
    uz.tail(z.size()) = z;
    return Point(inv(uz));
  };

  // symbolic Jacobian of the inverse (expressions are differentiable here)
  std::vector<expr::Expression> inv_parts;
  for (const auto& item : cfg.at("inverse"))
    inv_parts.push_back(expr::parse(item.get<std::string>(), uz_names));
  std::vector<expr::Expression> jac;
  bool have_jac = true;
  try {
    for (const auto& part : inv_parts)
      for (int j = 0; j < d.dim; ++j) jac.push_back(part.derivative(j));
  } catch (const DifferentiationError&) {
    have_jac = false;
  }
  if (have_jac) {
    const int dim = d.dim;
    d.jacobian_inverse = [jac, dim, m](const Vec& u, const Vec& z) {
      Vec uz(dim);
      uz.head(m) = u;
      uz.tail(dim - m) = z;
      Mat out(dim, dim);
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
          out(i, j) = jac[static_cast<std::size_t>(i) * dim + j].eval(uz);
      return out;
    };
  }
  return d;
}

Scene parse_scene(const json& cfg, const Landscape& l) {
  reject_unknown(cfg, {"window", "grid", "levels", "layers", "flow_starts", "lift_y"}, "scene");
  Scene scene;
  scene.landscape = l;
  if (l.dim_ambient == 2) {
    scene.xmin = l.box.lo[0];
    scene.xmax = l.box.hi[0];
    scene.ymin = l.box.lo[1];
    scene.ymax = l.box.hi[1];
  }
  if (cfg.contains("window")) {
    Vec w = to_vec(cfg.at("window"), "scene.window");
    if (w.size() != 4) throw ConfigError("scene.window must be [xmin, xmax, ymin, ymax]");
    scene.xmin = w[0];
    scene.xmax = w[1];
    scene.ymin = w[2];
    scene.ymax = w[3];
  }
  if (cfg.contains("grid")) scene.grid = cfg.at("grid").get<int>();
  if (cfg.contains("levels")) {
    Vec lv = to_vec(cfg.at("levels"), "scene.levels");
    scene.levels.assign(lv.data(), lv.data() + lv.size());
  }
  if (cfg.contains("flow_starts")) {
    for (const auto& item : cfg.at("flow_starts"))
      scene.flow_starts.push_back(to_vec(item, "scene.flow_starts[i]"));
  }
  if (cfg.contains("layers")) {
    scene.draw_contours = false;
    scene.draw_s_curve = false;
    scene.draw_fiber = false;
    for (const auto& item : cfg.at("layers")) {
      const std::string layer = item.get<std::string>();
      if (layer == "contours") scene.draw_contours = true;
      else if (layer == "s_curve") scene.draw_s_curve = true;
      else if (layer == "fiber") scene.draw_fiber = true;
      else if (layer == "flow_lines") continue;  // driven by flow_starts
      else if (layer == "lift") continue;        // driven by lift_y
      else throw ConfigError("unknown scene layer '" + layer + "'");
    }
  } else {
    scene.draw_s_curve = static_cast<bool>(l.s_model);
  }
  if (cfg.contains("lift_y")) scene.lift_y = to_vec(cfg.at("lift_y"), "scene.lift_y");
  return scene;
}

}  // namespace

Config load_config_text(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(root, {"version", "landscape", "s_model", "diffeo", "scene"}, "config root");
  if (!root.contains("version") || !root.at("version").is_number_integer() ||
      root.at("version").get<int>() != 1)
    throw ConfigError("config needs \"version\": 1");

  Config out;
  if (root.contains("landscape")) {
    out.landscape = parse_landscape(root.at("landscape"));
    out.has_landscape = true;
    if (root.contains("s_model"))
      out.landscape.s_model = parse_s_model(root.at("s_model"), out.landscape.dim_ambient);
  } else if (root.contains("s_model")) {
    throw ConfigError("s_model requires a landscape block");
  }
  if (root.contains("diffeo")) out.diffeo = parse_diffeo(root.at("diffeo"));
  if (root.contains("scene")) {
    if (!out.has_landscape) throw ConfigError("scene requires a landscape block");
    out.scene = parse_scene(root.at("scene"), out.landscape);
  }
  return out;
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_config_text(text);
}

}  // namespace pllab
