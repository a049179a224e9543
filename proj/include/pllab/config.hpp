#pragma once

#include <optional>
#include <string>

#include "pllab/construct.hpp"
#include "pllab/landscape.hpp"
#include "pllab/plot.hpp"

namespace pllab {

/// Parsed run configuration: the landscape plus optional S model, diffeo and
/// scene blocks. Unknown keys anywhere are errors.
struct Config {
  Landscape landscape;
  bool has_landscape = false;
  std::optional<DiffeoPair> diffeo;
  // scene overrides (window/grid/levels/layers); applied on top of defaults
  std::optional<Scene> scene;
};

Config load_config_file(const std::string& path);
Config load_config_text(const std::string& json_text);

}  // namespace pllab
