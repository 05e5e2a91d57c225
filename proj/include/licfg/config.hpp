#pragma once

#include <string>
#include <vector>

#include "licfg/cfg.hpp"
#include "licfg/neighborhood.hpp"

namespace licfg {

// Resolved experiment configuration. Every field has a default, so a
// minimal file (or none at all) is valid. The file format is sectioned
// key=value text; sections group related keys but key names are unique,
// so a key may appear outside its section.
struct ConfigFile {
  std::string dataset = "ring";
  TrainConfig train;
  OrderingParams nsize;
  double alpha = 0.3;  // mode scale for Ring/Grid
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string output_dir = "out";

  std::string summary() const;
};

ConfigFile parse_config(const std::string& path);
ConfigFile parse_config_text(const std::string& text, const std::string& origin = "<string>");

}  // namespace licfg
