#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "licfg/config.hpp"
#include "licfg/data.hpp"
#include "licfg/svg.hpp"

using namespace licfg;
namespace fs = std::filesystem;

TEST_CASE("parse_config: minimal file gets full defaults") {
  const ConfigFile cfg = parse_config_text("dataset = ring\n");
  CHECK(cfg.dataset == "ring");
  CHECK(cfg.train.batch_size == 64);
  CHECK(cfg.train.disc_updates == 1);
  CHECK(cfg.train.gen_examples == 640);
  CHECK(cfg.train.gen_steps == 15);
  CHECK(cfg.train.penalty.gamma == 0.1);
  CHECK(cfg.train.penalty.eps_prime == 0.3);
  CHECK(cfg.train.penalty.kind == PenaltyKind::CenteredEps);
}

TEST_CASE("parse_config: sections, comments, and overrides") {
  const std::string text =
      "# experiment\n"
      "[data]\n"
      "dataset = grid\n"
      "[train]\n"
      "epochs = 50\n"
      "seed = 9\n"
      "[penalty]\n"
      "penalty = centered0\n"
      "gamma = 1\n"
      "[nsize]\n"
      "probes = 256\n"
      "[output]\n"
      "dir = /tmp/run1\n";
  const ConfigFile cfg = parse_config_text(text);
  CHECK(cfg.dataset == "grid");
  CHECK(cfg.train.epochs == 50);
  CHECK(cfg.train.seed == 9);
  CHECK(cfg.train.penalty.kind == PenaltyKind::Centered0);
  CHECK(cfg.train.penalty.gamma == 1.0);
  CHECK(cfg.nsize.probes == 256);
  CHECK(cfg.output_dir == "/tmp/run1");
}

TEST_CASE("parse_config: type mismatch names the line") {
  CHECK_THROWS_WITH_AS(parse_config_text("gamma = high\n"), doctest::Contains(":1:"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config_text("dataset = ring\ngamma = high\n"),
                       doctest::Contains(":2:"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config_text("epochs = 1.5\n"), doctest::Contains("integer"),
                       std::runtime_error);
}

TEST_CASE("parse_config: unknown key and unknown section are rejected") {
  CHECK_THROWS_WITH_AS(parse_config_text("unknown_key = 1\n"),
                       doctest::Contains("unknown key 'unknown_key'"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config_text("[mystery]\n"), doctest::Contains("unknown section"),
                       std::runtime_error);
}

TEST_CASE("parse_config: seed list") {
  const ConfigFile cfg = parse_config_text("seeds = 3,5,7\n");
  REQUIRE(cfg.seeds.size() == 3);
  CHECK(cfg.seeds[0] == 3);
  CHECK(cfg.seeds[2] == 7);
}

TEST_CASE("config summary echoes resolved values") {
  const ConfigFile cfg = parse_config_text("dataset = grid\nepochs = 7\n");
  const std::string s = cfg.summary();
  CHECK(s.find("dataset = grid") != std::string::npos);
  CHECK(s.find("epochs = 7") != std::string::npos);
  CHECK(s.find("batch_size = 64") != std::string::npos);
}

TEST_CASE("emit_scatter_svg: centers only, determinism, coordinates") {
  const fs::path dir = fs::temp_directory_path();
  const GaussianMixture ring = ring_mixture();

  // empty point set still yields a valid file with centers
  const std::string empty_path = (dir / "licfg_empty.svg").string();
  emit_scatter_svg(Tensor(0, 0), ring.centers, empty_path);
  std::ifstream f(empty_path);
  std::stringstream ss;
  ss << f.rdbuf();
  const std::string svg = ss.str();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("circle") == std::string::npos);
  // 8 centers, two lines each
  size_t lines = 0, pos = 0;
  while ((pos = svg.find("<line", pos)) != std::string::npos) {
    ++lines;
    pos += 5;
  }
  CHECK(lines == 16);

  // center (2, 0) maps to ((2+5)/10*600, (5-0)/10*600) = (420, 300):
  // the horizontal cross-arm runs from 415 to 425 at y = 300
  CHECK(svg.find("x1=\"415.00\" y1=\"300.00\" x2=\"425.00\" y2=\"300.00\"") != std::string::npos);

  // byte-identical on repeat
  const std::string again_path = (dir / "licfg_empty2.svg").string();
  emit_scatter_svg(Tensor(0, 0), ring.centers, again_path);
  std::ifstream f2(again_path);
  std::stringstream ss2;
  ss2 << f2.rdbuf();
  CHECK(ss2.str() == svg);

  fs::remove(empty_path);
  fs::remove(again_path);
}

TEST_CASE("emit_scatter_svg renders points inside the viewport") {
  const fs::path path = fs::temp_directory_path() / "licfg_pts.svg";
  const Tensor pts = sample_mixture(ring_mixture(), 50, 3);
  emit_scatter_svg(pts, ring_mixture().centers, path.string());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  size_t circles = 0, pos = 0;
  while ((pos = ss.str().find("<circle", pos)) != std::string::npos) {
    ++circles;
    pos += 7;
  }
  CHECK(circles == 50);
  fs::remove(path);
}
