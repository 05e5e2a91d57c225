#pragma once

#include <utility>

#include "licfg/data.hpp"
#include "licfg/tensor.hpp"

namespace licfg {

struct GaussianFit {
  double mean[2] = {0.0, 0.0};
  double cov[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

GaussianFit fit_gaussian_2d(const Tensor& points);

// Squared Frechet distance between the Gaussian fits of two 2-D batches:
//   |mu1-mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}).
// The matrix square root goes through the symmetrized product
// S2^{1/2} S1 S2^{1/2} with eigenvalues clamped at 0.
double frechet_2d(const Tensor& p, const Tensor& q);

struct ModeCoverage {
  int modes_hit = 0;
  double high_quality_fraction = 0.0;
};

// A mode is hit when >= min_count samples land within
// radius_multiplier*sigma of its center; the fraction counts samples
// within that radius of any center.
ModeCoverage mode_coverage(const Tensor& samples, const GaussianMixture& mix,
                           double radius_multiplier = 3.0, int min_count = 1);

// k-NN manifold precision/recall: precision is the fraction of fake
// points inside the union of balls around real points (radius = each
// real point's k-th nearest real neighbor); recall swaps the roles.
std::pair<double, double> knn_precision_recall(const Tensor& real, const Tensor& fake, int k);

}  // namespace licfg
