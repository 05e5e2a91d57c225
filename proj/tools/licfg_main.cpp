#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "licfg/cfg.hpp"
#include "licfg/config.hpp"
#include "licfg/data.hpp"
#include "licfg/dynamics.hpp"
#include "licfg/metrics.hpp"
#include "licfg/neighborhood.hpp"
#include "licfg/svg.hpp"

namespace fs = std::filesystem;
using namespace licfg;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUntrained = 2;

ConfigFile load_config(const std::string& path, std::optional<uint64_t> seed,
                       std::optional<std::string> out_dir) {
  ConfigFile cfg = path.empty() ? ConfigFile{} : parse_config(path);
  if (seed) cfg.train.seed = *seed;
  if (out_dir) cfg.output_dir = *out_dir;
  return cfg;
}

int cmd_data(const std::string& dataset, int n, uint64_t seed, const std::string& out) {
  const GaussianMixture mix = mixture_by_name(dataset);
  const Tensor pts = sample_mixture(mix, n, seed);
  write_points_csv(pts, out);
  std::cout << "wrote " << n << " " << dataset << " samples to " << out << "\n";
  return kExitOk;
}

int cmd_train(const ConfigFile& cfg) {
  std::cout << "resolved config:\n" << cfg.summary();
  const GaussianMixture mix = mixture_by_name(cfg.dataset);
  fs::create_directories(cfg.output_dir);
  const fs::path dir(cfg.output_dir);

  const TrainResult res = train(cfg.train, mix);
  res.log.write_csv((dir / "train_log.csv").string());
  save_checkpoint(res.G, (dir / "g_final.ckpt").string());
  save_checkpoint(res.D, (dir / "d_final.ckpt").string());
  for (const SnapshotPair& snap : res.snapshots) {
    char name[64];
    std::snprintf(name, sizeof name, "snap_e%05d", snap.epoch);
    save_checkpoint(snap.before, (dir / (std::string(name) + "_pre.ckpt")).string());
    save_checkpoint(snap.after, (dir / (std::string(name) + "_post.ckpt")).string());
  }

  if (res.outcome == TrainOutcome::Diverged) {
    std::cout << "untrained: loss diverged at epoch " << res.diverged_epoch << "\n";
    return kExitUntrained;
  }

  const Tensor z = sample_latent(10000, res.G.input_dim(), cfg.train.seed ^ 0x5a5a5a5aULL);
  const Tensor samples = mlp_forward_value(res.G, z);
  write_points_csv(samples, (dir / "samples.csv").string());
  emit_scatter_svg(samples, mix.centers, (dir / "scatter.svg").string());

  const ModeCoverage cov = mode_coverage(samples, mix, 3.0, 10);
  std::cout << "trained " << cfg.train.epochs << " epochs; modes_hit=" << cov.modes_hit << "/"
            << mix.centers.size() << " hq_fraction=" << cov.high_quality_fraction << "\n";
  return kExitOk;
}

int cmd_nsize(const ConfigFile& cfg) {
  std::cout << "resolved config:\n" << cfg.summary();
  const GaussianMixture mix = mixture_by_name(cfg.dataset);
  fs::create_directories(cfg.output_dir);
  const std::vector<PenaltyKind> kinds = {PenaltyKind::Centered1, PenaltyKind::Centered0,
                                          PenaltyKind::CenteredEps};
  const std::vector<NSizeRow> rows =
      ordering_experiment(cfg.train, mix, kinds, cfg.seeds, cfg.nsize);
  const std::string path = (fs::path(cfg.output_dir) / "nsize.csv").string();
  write_nsize_csv(rows, path);
  std::cout << "wrote " << rows.size() << " rows to " << path << "\n";
  for (PenaltyKind k : kinds) {
    const auto med = median_r_hat(rows, k);
    std::cout << "median r_hat " << penalty_name(k) << " = "
              << (med ? std::to_string(*med) : std::string("untrained")) << "\n";
  }
  return kExitOk;
}

int cmd_metrics(const std::string& real_path, const std::string& fake_path,
                const std::string& dataset, int k, const std::string& out) {
  const Tensor real = read_points_csv(real_path);
  const Tensor fake = read_points_csv(fake_path);
  const GaussianMixture mix = mixture_by_name(dataset);
  const double fd2 = frechet_2d(real, fake);
  const auto [precision, recall] = knn_precision_recall(real, fake, k);
  const ModeCoverage cov = mode_coverage(fake, mix, 3.0, 10);
  char row[256];
  std::snprintf(row, sizeof row, "%.17g,%.17g,%.17g,%d,%.17g\n", fd2, precision, recall,
                cov.modes_hit, cov.high_quality_fraction);
  std::cout << "fd2,precision,recall,modes_hit,hq_fraction\n" << row;
  if (!out.empty()) {
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + out + " for writing");
    f << "fd2,precision,recall,modes_hit,hq_fraction\n" << row;
  }
  return kExitOk;
}

int cmd_dynamics(const std::string& penalty, int steps, double lr, double gamma, double eps_prime,
                 double theta0, double psi0, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<PenaltyKind> kinds;
  if (penalty == "all")
    kinds = {PenaltyKind::None, PenaltyKind::Centered1, PenaltyKind::Centered0,
             PenaltyKind::CenteredEps};
  else
    kinds = {penalty_by_name(penalty)};
  for (PenaltyKind kind : kinds) {
    Penalty pen{kind, gamma, eps_prime};
    const Trajectory traj = dirac_simulate(pen, steps, lr, theta0, psi0);
    const std::string path =
        (fs::path(out_dir) / ("trajectory_" + penalty_name(kind) + ".csv")).string();
    traj.write_csv(path);
    std::cout << "penalty=" << penalty_name(kind) << " steps=" << traj.theta.size() - 1
              << " final_distance=" << traj.final_distance()
              << (traj.diverged ? " (diverged)" : "") << "\n";
  }
  return kExitOk;
}

int cmd_sweep(const ConfigFile& cfg, const std::vector<double>& eps_values) {
  std::cout << "resolved config:\n" << cfg.summary();
  const GaussianMixture mix = mixture_by_name(cfg.dataset);
  fs::create_directories(cfg.output_dir);
  const std::string path = (fs::path(cfg.output_dir) / "sweep.csv").string();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "epsilon_prime,seed,outcome,modes_hit,hq_fraction,epoch\n";
  for (double eps : eps_values) {
    for (uint64_t seed : cfg.seeds) {
      TrainConfig tc = cfg.train;
      tc.penalty.kind = PenaltyKind::CenteredEps;
      tc.penalty.eps_prime = eps;
      tc.seed = seed;
      const TrainResult res = train(tc, mix);
      if (res.outcome == TrainOutcome::Diverged) {
        f << eps << ',' << seed << ",untrained,,," << res.diverged_epoch << "\n";
        std::cout << "eps_prime=" << eps << " seed=" << seed << " untrained at epoch "
                  << res.diverged_epoch << "\n";
        continue;
      }
      const Tensor z = sample_latent(10000, res.G.input_dim(), seed ^ 0x5a5a5a5aULL);
      const Tensor samples = mlp_forward_value(res.G, z);
      const ModeCoverage cov = mode_coverage(samples, mix, 3.0, 10);
      f << eps << ',' << seed << ",trained," << cov.modes_hit << ',' << cov.high_quality_fraction
        << ',' << (cfg.train.epochs - 1) << "\n";
      std::cout << "eps_prime=" << eps << " seed=" << seed << " modes_hit=" << cov.modes_hit
                << "\n";
    }
  }
  std::cout << "wrote " << path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Li-CFG: Lipschitz-constrained composite functional gradient GAN experiments"};
  app.require_subcommand(1);

  std::string config_path, out_override, dataset = "ring", out_file;
  std::optional<uint64_t> seed_override;

  // data
  auto* data = app.add_subcommand("data", "sample a mixture dataset to CSV");
  int data_n = 1000;
  uint64_t data_seed = 1;
  std::string data_out = "points.csv";
  data->add_option("--dataset", dataset, "ring or grid");
  data->add_option("--n", data_n, "number of samples");
  data->add_option("--seed", data_seed, "rng seed");
  data->add_option("--out", data_out, "output CSV path");

  // train
  auto* tr = app.add_subcommand("train", "run the Li-CFG training loop");
  tr->add_option("--config", config_path, "config file");
  tr->add_option("--seed", seed_override, "override config seed");
  tr->add_option("--out", out_override, "override output directory");

  // nsize
  auto* ns = app.add_subcommand("nsize", "latent neighborhood-size ordering experiment");
  ns->add_option("--config", config_path, "config file");
  ns->add_option("--out", out_override, "override output directory");

  // metrics
  auto* me = app.add_subcommand("metrics", "compare two point CSVs");
  std::string real_path, fake_path;
  int metrics_k = 3;
  me->add_option("real", real_path, "reference points CSV")->required();
  me->add_option("fake", fake_path, "generated points CSV")->required();
  me->add_option("--dataset", dataset, "mixture for mode coverage (ring or grid)");
  me->add_option("--k", metrics_k, "k for k-NN precision/recall");
  me->add_option("--out", out_file, "also write the row to this file");

  // dynamics
  auto* dy = app.add_subcommand("dynamics", "Dirac toy convergence simulation");
  std::string dyn_penalty = "all";
  int dyn_steps = 5000;
  double dyn_lr = 0.05, dyn_gamma = 1.0, dyn_eps = 0.3, dyn_theta0 = 1.0, dyn_psi0 = 1.0;
  std::string dyn_out = "out";
  dy->add_option("--penalty", dyn_penalty, "none|centered1|centered0|centered_eps|all");
  dy->add_option("--steps", dyn_steps, "integration steps");
  dy->add_option("--lr", dyn_lr, "step size");
  dy->add_option("--gamma", dyn_gamma, "penalty coefficient");
  dy->add_option("--eps-prime", dyn_eps, "epsilon-centered norm");
  dy->add_option("--theta0", dyn_theta0, "initial generator parameter");
  dy->add_option("--psi0", dyn_psi0, "initial discriminator parameter");
  dy->add_option("--out", dyn_out, "output directory");

  // sweep
  auto* sw = app.add_subcommand("sweep", "epsilon-prime stability sweep (untrained tabulation)");
  std::vector<double> sweep_eps = {0.1, 0.3, 1.0, 5.0};
  sw->add_option("--config", config_path, "config file");
  sw->add_option("--eps-prime", sweep_eps, "epsilon-prime values to sweep");
  sw->add_option("--out", out_override, "override output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    const std::optional<std::string> out_opt =
        out_override.empty() ? std::nullopt : std::optional<std::string>(out_override);
    if (data->parsed()) return cmd_data(dataset, data_n, data_seed, data_out);
    if (tr->parsed()) return cmd_train(load_config(config_path, seed_override, out_opt));
    if (ns->parsed()) return cmd_nsize(load_config(config_path, std::nullopt, out_opt));
    if (me->parsed()) return cmd_metrics(real_path, fake_path, dataset, metrics_k, out_file);
    if (dy->parsed())
      return cmd_dynamics(dyn_penalty, dyn_steps, dyn_lr, dyn_gamma, dyn_eps, dyn_theta0,
                          dyn_psi0, dyn_out);
    if (sw->parsed()) return cmd_sweep(load_config(config_path, std::nullopt, out_opt), sweep_eps);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
