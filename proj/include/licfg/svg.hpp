#pragma once

#include <string>
#include <vector>

#include "licfg/tensor.hpp"

namespace licfg {

// Standalone scatter plot on the fixed viewport [-5,5]^2; mixture centers
// drawn as crosses. Output bytes are deterministic for identical input.
void emit_scatter_svg(const Tensor& points, const std::vector<std::pair<double, double>>& centers,
                      const std::string& path);

}  // namespace licfg
