#include "licfg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace licfg {

GaussianFit fit_gaussian_2d(const Tensor& points) {
  if (points.cols() != 2) throw std::invalid_argument("fit_gaussian_2d: points must be [n,2]");
  if (points.rows() < 3) throw std::invalid_argument("fit_gaussian_2d: need at least 3 points");
  GaussianFit fit;
  const int n = points.rows();
  for (int r = 0; r < n; ++r) {
    fit.mean[0] += points.at(r, 0);
    fit.mean[1] += points.at(r, 1);
  }
  fit.mean[0] /= n;
  fit.mean[1] /= n;
  for (int r = 0; r < n; ++r) {
    const double dx = points.at(r, 0) - fit.mean[0];
    const double dy = points.at(r, 1) - fit.mean[1];
    fit.cov[0][0] += dx * dx;
    fit.cov[0][1] += dx * dy;
    fit.cov[1][1] += dy * dy;
  }
  fit.cov[0][0] /= n;
  fit.cov[0][1] /= n;
  fit.cov[1][1] /= n;
  fit.cov[1][0] = fit.cov[0][1];
  return fit;
}

namespace {

struct Sym2 {
  double a, b, c;  // [[a,b],[b,c]]
};

// Eigendecomposition of a symmetric 2x2; eigenvalues clamped at 0.
void eigen_sym2(const Sym2& s, double& l1, double& l2, double& c1x, double& c1y) {
  const double tr = s.a + s.c;
  const double det = s.a * s.c - s.b * s.b;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  l1 = tr / 2.0 + disc;
  l2 = tr / 2.0 - disc;
  if (std::fabs(s.b) > 1e-300) {
    c1x = l1 - s.c;
    c1y = s.b;
  } else {
    c1x = s.a >= s.c ? 1.0 : 0.0;
    c1y = s.a >= s.c ? 0.0 : 1.0;
  }
  const double norm = std::sqrt(c1x * c1x + c1y * c1y);
  if (norm > 0.0) {
    c1x /= norm;
    c1y /= norm;
  }
  l1 = std::max(0.0, l1);
  l2 = std::max(0.0, l2);
}

// Principal square root of a symmetric PSD 2x2.
Sym2 sqrt_sym2(const Sym2& s) {
  double l1, l2, vx, vy;
  eigen_sym2(s, l1, l2, vx, vy);
  const double s1 = std::sqrt(l1), s2 = std::sqrt(l2);
  // V diag(s) V^T with v2 = (-vy, vx)
  Sym2 r;
  r.a = s1 * vx * vx + s2 * vy * vy;
  r.b = s1 * vx * vy - s2 * vy * vx;
  r.c = s1 * vy * vy + s2 * vx * vx;
  return r;
}

void mat2_mul(const double a[2][2], const double b[2][2], double out[2][2]) {
  out[0][0] = a[0][0] * b[0][0] + a[0][1] * b[1][0];
  out[0][1] = a[0][0] * b[0][1] + a[0][1] * b[1][1];
  out[1][0] = a[1][0] * b[0][0] + a[1][1] * b[1][0];
  out[1][1] = a[1][0] * b[0][1] + a[1][1] * b[1][1];
}

}  // namespace

double frechet_2d(const Tensor& p, const Tensor& q) {
  const GaussianFit fp = fit_gaussian_2d(p);
  const GaussianFit fq = fit_gaussian_2d(q);

  const double dmx = fp.mean[0] - fq.mean[0];
  const double dmy = fp.mean[1] - fq.mean[1];
  const double mean_term = dmx * dmx + dmy * dmy;

  const Sym2 s1{fp.cov[0][0], fp.cov[0][1], fp.cov[1][1]};
  const Sym2 s2{fq.cov[0][0], fq.cov[0][1], fq.cov[1][1]};

  // Tr((S1 S2)^{1/2}) via the symmetric form S2^{1/2} S1 S2^{1/2}:
  // same trace, well-defined square root.
  const Sym2 rt2s = sqrt_sym2(s2);
  const double rt2[2][2] = {{rt2s.a, rt2s.b}, {rt2s.b, rt2s.c}};
  const double s1m[2][2] = {{s1.a, s1.b}, {s1.b, s1.c}};
  double tmp[2][2], full[2][2];
  mat2_mul(rt2, s1m, tmp);
  mat2_mul(tmp, rt2, full);
  // symmetric up to roundoff; average the off-diagonals
  const Sym2 prod{full[0][0], 0.5 * (full[0][1] + full[1][0]), full[1][1]};

  double l1, l2, vx, vy;
  eigen_sym2(prod, l1, l2, vx, vy);
  const double tr_sqrt = std::sqrt(l1) + std::sqrt(l2);

  const double cov_term = s1.a + s1.c + s2.a + s2.c - 2.0 * tr_sqrt;
  return mean_term + cov_term;
}

ModeCoverage mode_coverage(const Tensor& samples, const GaussianMixture& mix,
                           double radius_multiplier, int min_count) {
  if (min_count < 1) throw std::invalid_argument("mode_coverage: min_count must be >= 1");
  const double radius = radius_multiplier * mix.sigma;
  std::vector<int> counts(mix.centers.size(), 0);
  int within_any = 0;
  for (int r = 0; r < samples.rows(); ++r) {
    bool any = false;
    for (size_t i = 0; i < mix.centers.size(); ++i) {
      const double dx = samples.at(r, 0) - mix.centers[i].first;
      const double dy = samples.at(r, 1) - mix.centers[i].second;
      if (std::sqrt(dx * dx + dy * dy) <= radius) {
        ++counts[i];
        any = true;
      }
    }
    if (any) ++within_any;
  }
  ModeCoverage cov;
  for (int c : counts)
    if (c >= min_count) ++cov.modes_hit;
  cov.high_quality_fraction = samples.rows() ? static_cast<double>(within_any) / samples.rows() : 0.0;
  return cov;
}

std::pair<double, double> knn_precision_recall(const Tensor& real, const Tensor& fake, int k) {
  if (k < 1) throw std::invalid_argument("knn_precision_recall: k must be >= 1");
  if (k >= real.rows() || k >= fake.rows())
    throw std::invalid_argument("knn_precision_recall: batches must have more than k points");

  // Radius per manifold point: distance to its k-th nearest neighbor
  // inside the same set (self excluded).
  auto knn_radii = [k](const Tensor& pts) {
    const Tensor d2 = pairwise_sq_dists(pts, pts);
    std::vector<double> radii(pts.rows());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < pts.rows(); ++i) {
      std::vector<double> row;
      row.reserve(pts.rows() - 1);
      for (int j = 0; j < pts.rows(); ++j)
        if (j != i) row.push_back(d2.at(i, j));
      std::nth_element(row.begin(), row.begin() + (k - 1), row.end());
      radii[i] = std::sqrt(row[k - 1]);
    }
    return radii;
  };

  auto covered_fraction = [](const Tensor& queries, const Tensor& manifold,
                             const std::vector<double>& radii) {
    const Tensor d2 = pairwise_sq_dists(queries, manifold);
    int inside = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(+ : inside)
#endif
    for (int i = 0; i < queries.rows(); ++i) {
      for (int j = 0; j < manifold.rows(); ++j) {
        if (std::sqrt(d2.at(i, j)) <= radii[j]) {
          ++inside;
          break;
        }
      }
    }
    return static_cast<double>(inside) / queries.rows();
  };

  const std::vector<double> real_radii = knn_radii(real);
  const std::vector<double> fake_radii = knn_radii(fake);
  const double precision = covered_fraction(fake, real, real_radii);
  const double recall = covered_fraction(real, fake, fake_radii);
  return {precision, recall};
}

}  // namespace licfg
