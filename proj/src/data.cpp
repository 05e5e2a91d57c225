#include "licfg/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace licfg {

GaussianMixture ring_mixture() {
  GaussianMixture m;
  m.sigma = 0.02;
  const double pi = 3.14159265358979323846;
  for (int i = 1; i <= 8; ++i)
    m.centers.emplace_back(2.0 * std::cos(i * pi / 4.0), 2.0 * std::sin(i * pi / 4.0));
  return m;
}

GaussianMixture grid_mixture() {
  GaussianMixture m;
  m.sigma = 0.02;
  for (int i = -2; i <= 2; ++i)
    for (int j = -2; j <= 2; ++j) m.centers.emplace_back(2.0 * i, 2.0 * j);
  return m;
}

GaussianMixture mixture_by_name(const std::string& name) {
  if (name == "ring") return ring_mixture();
  if (name == "grid") return grid_mixture();
  throw std::invalid_argument("unknown dataset '" + name + "' (expected ring or grid)");
}

Tensor sample_mixture(const GaussianMixture& m, int n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_mixture: n must be >= 1");
  Tensor out(n, 2);
  const int k = static_cast<int>(m.centers.size());
  for (int i = 0; i < n; ++i) {
    const int c = rng.uniform_int(k);
    out.at(i, 0) = m.centers[c].first + m.sigma * rng.gauss();
    out.at(i, 1) = m.centers[c].second + m.sigma * rng.gauss();
  }
  return out;
}

Tensor sample_mixture(const GaussianMixture& m, int n, uint64_t seed) {
  Rng rng(seed);
  return sample_mixture(m, n, rng);
}

Tensor sample_latent(int n, int d_z, Rng& rng) {
  if (n < 1 || d_z < 1) throw std::invalid_argument("sample_latent: n and d_z must be >= 1");
  Tensor out(n, d_z);
  for (double& v : out.data) v = rng.gauss();
  return out;
}

Tensor sample_latent(int n, int d_z, uint64_t seed) {
  Rng rng(seed);
  return sample_latent(n, d_z, rng);
}

void write_points_csv(const Tensor& points, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  for (int c = 0; c < points.cols(); ++c) f << (c ? ",x" : "x") << c;
  f << "\n";
  char buf[32];
  for (int r = 0; r < points.rows(); ++r) {
    for (int c = 0; c < points.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", points.at(r, c));
      if (c) f << ',';
      f << buf;
    }
    f << "\n";
  }
  if (!f) throw std::runtime_error("write failed for " + path);
}

Tensor read_points_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line.empty())
    throw std::runtime_error(path + ": missing header");
  int cols = 1;
  for (char ch : line)
    if (ch == ',') ++cols;

  std::vector<double> values;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int got = 0;
    while (std::getline(ss, cell, ',')) {
      size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": malformed value at line " + std::to_string(lineno));
      }
      if (pos == 0)
        throw std::runtime_error(path + ": malformed value at line " + std::to_string(lineno));
      values.push_back(v);
      ++got;
    }
    if (got != cols)
      throw std::runtime_error(path + ": expected " + std::to_string(cols) + " columns at line " +
                               std::to_string(lineno) + ", got " + std::to_string(got));
  }
  Tensor out(static_cast<int>(values.size()) / cols, cols);
  out.data = std::move(values);
  return out;
}

}  // namespace licfg
