#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "licfg/metrics.hpp"
#include "licfg/rng.hpp"

using namespace licfg;

namespace {

Tensor gaussian_cloud(int n, double mx, double my, double sx, double sy, uint64_t seed) {
  Rng rng(seed);
  Tensor t(n, 2);
  for (int r = 0; r < n; ++r) {
    t.at(r, 0) = mx + sx * rng.gauss();
    t.at(r, 1) = my + sy * rng.gauss();
  }
  return t;
}

}  // namespace

TEST_CASE("frechet_2d: identical samples give 0") {
  const Tensor p = gaussian_cloud(5000, 1.0, -2.0, 1.5, 0.7, 1);
  CHECK(frechet_2d(p, p) == doctest::Approx(0.0).scale(1).epsilon(1e-9));
}

TEST_CASE("frechet_2d: equal covariance, shifted mean -> |mu|^2 = 25") {
  const int n = 100000;
  const Tensor p = gaussian_cloud(n, 3.0, 4.0, 1.0, 1.0, 2);
  const Tensor q = gaussian_cloud(n, 0.0, 0.0, 1.0, 1.0, 3);
  CHECK(frechet_2d(p, q) == doctest::Approx(25.0).epsilon(0.5 / 25.0));
}

TEST_CASE("frechet_2d: equal means, covariances 4I vs I -> 2") {
  const int n = 100000;
  const Tensor p = gaussian_cloud(n, 0.0, 0.0, 2.0, 2.0, 4);
  const Tensor q = gaussian_cloud(n, 0.0, 0.0, 1.0, 1.0, 5);
  // Tr(4I + I - 2*2I) = 2
  CHECK(frechet_2d(p, q) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("frechet_2d: symmetric and translation invariant") {
  const Tensor p = gaussian_cloud(3000, 0.5, 1.0, 1.0, 0.5, 6);
  const Tensor q = gaussian_cloud(3000, -1.0, 0.0, 0.8, 1.2, 7);
  const double ab = frechet_2d(p, q);
  const double ba = frechet_2d(q, p);
  CHECK(std::fabs(ab - ba) < 1e-9);

  Tensor p2 = p, q2 = q;
  for (int r = 0; r < p2.rows(); ++r) {
    p2.at(r, 0) += 10.0;
    p2.at(r, 1) -= 3.0;
  }
  for (int r = 0; r < q2.rows(); ++r) {
    q2.at(r, 0) += 10.0;
    q2.at(r, 1) -= 3.0;
  }
  CHECK(std::fabs(frechet_2d(p2, q2) - ab) < 1e-9);
}

TEST_CASE("frechet_2d: degenerate covariance is clamped, not NaN") {
  Tensor line(100, 2);
  for (int r = 0; r < 100; ++r) {
    line.at(r, 0) = r * 0.01;
    line.at(r, 1) = 0.0;  // zero variance in y
  }
  const Tensor q = gaussian_cloud(100, 0.0, 0.0, 1.0, 1.0, 8);
  const double fd = frechet_2d(line, q);
  CHECK(std::isfinite(fd));
  CHECK(fd >= 0.0);
}

TEST_CASE("frechet_2d rejects tiny batches") {
  CHECK_THROWS(frechet_2d(Tensor(2, 2), Tensor(10, 2)));
}

TEST_CASE("mode_coverage: centers, collapse, and true samples") {
  const GaussianMixture ring = ring_mixture();
  Tensor at_centers(8, 2);
  for (int i = 0; i < 8; ++i) {
    at_centers.at(i, 0) = ring.centers[i].first;
    at_centers.at(i, 1) = ring.centers[i].second;
  }
  const ModeCoverage all = mode_coverage(at_centers, ring, 3.0, 1);
  CHECK(all.modes_hit == 8);
  CHECK(all.high_quality_fraction == 1.0);

  Tensor collapsed(50, 2);
  for (int r = 0; r < 50; ++r) {
    collapsed.at(r, 0) = ring.centers[0].first;
    collapsed.at(r, 1) = ring.centers[0].second;
  }
  const ModeCoverage one = mode_coverage(collapsed, ring, 3.0, 1);
  CHECK(one.modes_hit == 1);
  CHECK(one.high_quality_fraction == 1.0);

  const Tensor samples = sample_mixture(ring, 10000, 9);
  const ModeCoverage real = mode_coverage(samples, ring, 3.0, 10);
  CHECK(real.modes_hit == 8);
  CHECK(real.high_quality_fraction >= 0.95);  // 2D 3-sigma mass ~ 0.989
}

TEST_CASE("mode_coverage monotone in radius multiplier") {
  const GaussianMixture grid = grid_mixture();
  const Tensor samples = sample_mixture(grid, 2000, 10);
  int prev = 0;
  for (double rm = 0.5; rm <= 4.0; rm += 0.5) {
    const int hit = mode_coverage(samples, grid, rm, 5).modes_hit;
    CHECK(hit >= prev);
    prev = hit;
  }
}

TEST_CASE("knn_precision_recall: identical and disjoint supports") {
  const Tensor pts = gaussian_cloud(200, 0.0, 0.0, 1.0, 1.0, 11);
  const auto [p_same, r_same] = knn_precision_recall(pts, pts, 3);
  CHECK(p_same == 1.0);
  CHECK(r_same == 1.0);

  const Tensor far = gaussian_cloud(200, 100.0, 100.0, 1.0, 1.0, 12);
  const auto [p_far, r_far] = knn_precision_recall(pts, far, 3);
  CHECK(p_far == 0.0);
  CHECK(r_far == 0.0);
}

TEST_CASE("knn_precision_recall: swapping roles swaps the pair") {
  const Tensor a = gaussian_cloud(300, 0.0, 0.0, 1.0, 1.0, 13);
  const Tensor b = gaussian_cloud(400, 0.5, 0.0, 1.2, 0.9, 14);
  const auto [p1, r1] = knn_precision_recall(a, b, 4);
  const auto [p2, r2] = knn_precision_recall(b, a, 4);
  CHECK(p1 == r2);
  CHECK(r1 == p2);
  CHECK(p1 >= 0.0);
  CHECK(p1 <= 1.0);
  CHECK(r1 >= 0.0);
  CHECK(r1 <= 1.0);
}

TEST_CASE("knn_precision_recall: 12-point hand set matches the brute-force oracle") {
  // fixed small configuration, k = 2
  const Tensor real(6, 2, {0.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 1.0, 1.0, 1.0, 5.0, 5.0});
  const Tensor fake(6, 2, {0.1, 0.1, 0.9, 0.2, 3.0, 3.0, 0.2, 0.8, 10.0, 10.0, 1.5, 0.5});
  const int k = 2;

  // oracle: exhaustive double loop
  auto oracle = [&](const Tensor& manifold, const Tensor& queries) {
    int inside = 0;
    for (int q = 0; q < queries.rows(); ++q) {
      bool in = false;
      for (int m = 0; m < manifold.rows(); ++m) {
        // k-th nearest neighbor of m within manifold (excluding m)
        std::vector<double> ds;
        for (int o = 0; o < manifold.rows(); ++o) {
          if (o == m) continue;
          const double dx = manifold.at(m, 0) - manifold.at(o, 0);
          const double dy = manifold.at(m, 1) - manifold.at(o, 1);
          ds.push_back(std::sqrt(dx * dx + dy * dy));
        }
        std::sort(ds.begin(), ds.end());
        const double radius = ds[k - 1];
        const double dx = queries.at(q, 0) - manifold.at(m, 0);
        const double dy = queries.at(q, 1) - manifold.at(m, 1);
        if (std::sqrt(dx * dx + dy * dy) <= radius) {
          in = true;
          break;
        }
      }
      if (in) ++inside;
    }
    return static_cast<double>(inside) / queries.rows();
  };

  const auto [precision, recall] = knn_precision_recall(real, fake, k);
  CHECK(precision == oracle(real, fake));
  CHECK(recall == oracle(fake, real));
}

TEST_CASE("knn_precision_recall rejects small batches") {
  CHECK_THROWS(knn_precision_recall(Tensor(3, 2), Tensor(10, 2), 3));
  CHECK_THROWS(knn_precision_recall(Tensor(10, 2), Tensor(10, 2), 0));
}
