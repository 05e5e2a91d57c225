#include "licfg/svg.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace licfg {

namespace {

constexpr double kView = 5.0;   // world coordinates span [-5,5]
constexpr int kSide = 600;      // pixels

double px(double x) { return (x + kView) / (2.0 * kView) * kSide; }
double py(double y) { return (kView - y) / (2.0 * kView) * kSide; }

}  // namespace

void emit_scatter_svg(const Tensor& points, const std::vector<std::pair<double, double>>& centers,
                      const std::string& path) {
  if (points.size() > 0 && points.cols() != 2)
    throw std::invalid_argument("emit_scatter_svg: points must be [n,2]");
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");

  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                kSide, kSide, kSide, kSide);
  f << buf;
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int r = 0; r < points.rows(); ++r) {
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"1.5\" fill=\"#1f77b4\" "
                  "fill-opacity=\"0.5\"/>\n",
                  px(points.at(r, 0)), py(points.at(r, 1)));
    f << buf;
  }

  for (const auto& [cx, cy] : centers) {
    const double x = px(cx), y = py(cy);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#d62728\" "
                  "stroke-width=\"1.5\"/>\n",
                  x - 5.0, y, x + 5.0, y);
    f << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#d62728\" "
                  "stroke-width=\"1.5\"/>\n",
                  x, y - 5.0, x, y + 5.0);
    f << buf;
  }

  f << "</svg>\n";
  if (!f) throw std::runtime_error("write failed for " + path);
}

}  // namespace licfg
