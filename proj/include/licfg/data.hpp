#pragma once

#include <string>
#include <vector>

#include "licfg/rng.hpp"
#include "licfg/tensor.hpp"

namespace licfg {

// Isotropic 2-D Gaussian mixture with uniform component weights.
struct GaussianMixture {
  std::vector<std::pair<double, double>> centers;
  double sigma = 0.0;
};

// Eight components on the radius-2 circle, std 0.02.
GaussianMixture ring_mixture();

// Twenty-five components on the lattice {-4,-2,0,2,4}^2, std 0.02.
GaussianMixture grid_mixture();

GaussianMixture mixture_by_name(const std::string& name);

// n rows, each: uniform component choice, then center + sigma * gauss.
Tensor sample_mixture(const GaussianMixture& m, int n, uint64_t seed);
Tensor sample_mixture(const GaussianMixture& m, int n, Rng& rng);

// n x d_z standard normal draws.
Tensor sample_latent(int n, int d_z, uint64_t seed);
Tensor sample_latent(int n, int d_z, Rng& rng);

// CSV with header "x0,x1,...", one row per point, 17 significant digits
// so doubles round-trip exactly.
void write_points_csv(const Tensor& points, const std::string& path);
Tensor read_points_csv(const std::string& path);

}  // namespace licfg
