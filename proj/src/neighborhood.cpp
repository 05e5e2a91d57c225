#include "licfg/neighborhood.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace licfg {

namespace {

double row_dist(const Tensor& a, int ra, const Tensor& b, int rb) {
  double s = 0.0;
  for (int c = 0; c < a.cols(); ++c) {
    const double d = a.at(ra, c) - b.at(rb, c);
    s += d * d;
  }
  return std::sqrt(s);
}

void check_probes(const Tensor& z1, const Tensor& probes, double epsilon_hat) {
  if (epsilon_hat <= 0.0) throw std::invalid_argument("nsize: epsilon_hat must be positive");
  if (probes.rows() < 2) throw std::invalid_argument("nsize: need at least 2 probes");
  if (z1.cols() != probes.cols()) throw std::invalid_argument("nsize: latent dimension mismatch");
  for (int r = 0; r < probes.rows(); ++r)
    if (row_dist(probes, r, z1, 0) <= 1e-9)
      throw std::invalid_argument("nsize: probe " + std::to_string(r) + " coincides with z1");
}

}  // namespace

NSizeEstimate nsize_estimate(const Mlp& g_t, const Mlp& g_t1, const Tensor& z1,
                             const Tensor& probes, double epsilon_hat) {
  check_probes(z1, probes, epsilon_hat);
  const Tensor gt_z1 = mlp_forward_value(g_t, z1);
  const Tensor gt1_z1 = mlp_forward_value(g_t1, z1);
  const Tensor gt_p = mlp_forward_value(g_t, probes);
  const Tensor gt1_p = mlp_forward_value(g_t1, probes);

  double ratio_min = std::numeric_limits<double>::infinity();
  for (int r = 0; r < probes.rows(); ++r) {
    const double dz = row_dist(probes, r, z1, 0);
    const double ratio = (row_dist(gt_p, r, gt_z1, 0) + row_dist(gt1_p, r, gt1_z1, 0)) / dz;
    ratio_min = std::min(ratio_min, ratio);
  }

  NSizeEstimate est;
  est.epsilon_hat = epsilon_hat;
  est.probe_count = probes.rows();
  est.ratio_min = ratio_min;
  est.r_hat = epsilon_hat / (2.0 * ratio_min);
  return est;
}

std::vector<NSizeEstimate> nsize_batch(const Mlp& g_t, const Mlp& g_t1, const Tensor& z1_batch,
                                       const Tensor& probes, double epsilon_hat) {
  if (epsilon_hat <= 0.0) throw std::invalid_argument("nsize: epsilon_hat must be positive");
  if (probes.rows() < 2) throw std::invalid_argument("nsize: need at least 2 probes");
  const Tensor gt_p = mlp_forward_value(g_t, probes);
  const Tensor gt1_p = mlp_forward_value(g_t1, probes);
  const Tensor gt_z = mlp_forward_value(g_t, z1_batch);
  const Tensor gt1_z = mlp_forward_value(g_t1, z1_batch);

  std::vector<NSizeEstimate> out(z1_batch.rows());
  bool coincident = false;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int i = 0; i < z1_batch.rows(); ++i) {
    double ratio_min = std::numeric_limits<double>::infinity();
    for (int r = 0; r < probes.rows(); ++r) {
      double dz2 = 0.0;
      for (int c = 0; c < probes.cols(); ++c) {
        const double d = probes.at(r, c) - z1_batch.at(i, c);
        dz2 += d * d;
      }
      const double dz = std::sqrt(dz2);
      if (dz <= 1e-9) {
        coincident = true;
        continue;
      }
      const double ratio = (row_dist(gt_p, r, gt_z, i) + row_dist(gt1_p, r, gt1_z, i)) / dz;
      ratio_min = std::min(ratio_min, ratio);
    }
    NSizeEstimate est;
    est.epsilon_hat = epsilon_hat;
    est.probe_count = probes.rows();
    est.ratio_min = ratio_min;
    est.r_hat = epsilon_hat / (2.0 * ratio_min);
    out[i] = est;
  }
  if (coincident) throw std::invalid_argument("nsize: probe coincides with a z1 row");
  return out;
}

double penalty_adjusted_magnitude(double grad_norm, const Penalty& pen) {
  switch (pen.kind) {
    case PenaltyKind::None:
    case PenaltyKind::Centered0:
      return grad_norm;
    case PenaltyKind::Centered1:
      return std::fabs(grad_norm - 1.0);
    case PenaltyKind::CenteredEps:
      return grad_norm + pen.eps_prime;
  }
  throw std::logic_error("penalty_adjusted_magnitude: unknown kind");
}

NSizeEstimate nsize_gp_bound(const Mlp& g_t, const Mlp& D, const Penalty& pen, double delta,
                             double eta_m, int M, const Tensor& z1, const Tensor& probes,
                             double epsilon_hat) {
  check_probes(z1, probes, epsilon_hat);
  const Tensor gt_z1 = mlp_forward_value(g_t, z1);
  const Tensor gt_p = mlp_forward_value(g_t, probes);
  const Tensor grad_z1 = mlp_input_grad_value(D, gt_z1);
  const Tensor grad_p = mlp_input_grad_value(D, gt_p);

  const double q_z1 = penalty_adjusted_magnitude(row_norm(grad_z1, 0), pen);

  double ratio_min = std::numeric_limits<double>::infinity();
  for (int r = 0; r < probes.rows(); ++r) {
    const double dz = row_dist(probes, r, z1, 0);
    const double q_z = penalty_adjusted_magnitude(row_norm(grad_p, r), pen);
    const double numer =
        2.0 * row_dist(gt_p, r, gt_z1, 0) + eta_m * delta * M * (q_z + q_z1);
    ratio_min = std::min(ratio_min, numer / dz);
  }

  NSizeEstimate est;
  est.epsilon_hat = epsilon_hat;
  est.probe_count = probes.rows();
  est.ratio_min = ratio_min;
  est.r_hat = epsilon_hat / (2.0 * ratio_min);
  return est;
}

ModeReport assign_modes(const Tensor& samples, const std::vector<std::pair<double, double>>& centers,
                        double alpha) {
  if (alpha <= 0.0) throw std::invalid_argument("assign_modes: alpha must be positive");
  if (centers.empty()) throw std::invalid_argument("assign_modes: no centers");
  ModeReport rep;
  rep.alpha = alpha;
  rep.assignments.resize(samples.rows(), -1);
  for (int r = 0; r < samples.rows(); ++r) {
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    for (size_t i = 0; i < centers.size(); ++i) {
      const double dx = samples.at(r, 0) - centers[i].first;
      const double dy = samples.at(r, 1) - centers[i].second;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d < best) {
        best = d;
        best_i = static_cast<int>(i);
      }
    }
    rep.assignments[r] = best <= alpha ? best_i : -1;
  }
  return rep;
}

namespace {

double point_dist(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (int c = 0; c < a.cols(); ++c) {
    const double d = a.at(0, c) - b.at(0, c);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

bool attracted(const Tensor& z, const Tensor& y_k, const Mlp& g_t, const Mlp& g_t1,
               double epsilon_hat) {
  if (epsilon_hat <= 0.0) throw std::invalid_argument("attracted: epsilon_hat must be positive");
  const Tensor before = mlp_forward_value(g_t, z);
  const Tensor after = mlp_forward_value(g_t1, z);
  return point_dist(y_k, after) + epsilon_hat < point_dist(y_k, before);
}

bool distracted(const Tensor& z, const Tensor& y_k, const Tensor& y_m, const Mlp& g_t,
                const Mlp& g_t1, double epsilon_hat, double alpha) {
  if (epsilon_hat <= 0.0 || alpha <= 0.0)
    throw std::invalid_argument("distracted: epsilon_hat and alpha must be positive");
  const Tensor before = mlp_forward_value(g_t, z);
  const Tensor after = mlp_forward_value(g_t1, z);
  return point_dist(y_m, after) + (epsilon_hat / 2.0 - 2.0 * alpha) < point_dist(y_k, before);
}

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty set");
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

NSizeRow nsize_snapshot_row(const SnapshotPair& snap, const OrderingParams& params,
                            PenaltyKind kind, uint64_t seed) {
  Rng rng(params.probe_seed);
  const int d_z = snap.before.input_dim();
  const Tensor probes = sample_latent(params.probes, d_z, rng);
  const Tensor z1s = sample_latent(params.z1_draws, d_z, rng);
  const std::vector<NSizeEstimate> ests =
      nsize_batch(snap.before, snap.after, z1s, probes, params.epsilon_hat);
  std::vector<double> rhats, ratios;
  rhats.reserve(ests.size());
  for (const NSizeEstimate& est : ests) {
    rhats.push_back(est.r_hat);
    ratios.push_back(est.ratio_min);
  }
  NSizeRow row;
  row.penalty = kind;
  row.seed = seed;
  row.epoch = snap.epoch;
  row.r_hat = median(rhats);
  row.ratio_min = median(ratios);
  row.grad_norm_mean = snap.grad_norm_mean;
  return row;
}

std::vector<NSizeRow> ordering_experiment(const TrainConfig& base, const GaussianMixture& mix,
                                          const std::vector<PenaltyKind>& kinds,
                                          const std::vector<uint64_t>& seeds,
                                          const OrderingParams& params) {
  if (seeds.size() < 3) throw std::invalid_argument("ordering_experiment: need at least 3 seeds");
  std::vector<NSizeRow> rows;
  for (PenaltyKind kind : kinds) {
    for (uint64_t seed : seeds) {
      TrainConfig cfg = base;
      cfg.penalty.kind = kind;
      cfg.seed = seed;
      const TrainResult res = train(cfg, mix);
      if (res.outcome == TrainOutcome::Diverged) {
        NSizeRow row;
        row.penalty = kind;
        row.seed = seed;
        row.epoch = res.diverged_epoch;
        row.untrained = true;
        rows.push_back(row);
        continue;
      }
      for (const SnapshotPair& snap : res.snapshots)
        rows.push_back(nsize_snapshot_row(snap, params, kind, seed));
    }
  }
  return rows;
}

void write_nsize_csv(const std::vector<NSizeRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "penalty,seed,epoch,r_hat,ratio_min,grad_norm_mean\n";
  char buf[200];
  for (const NSizeRow& r : rows) {
    if (r.untrained) {
      f << penalty_name(r.penalty) << ',' << r.seed << ',' << r.epoch << ",untrained,,\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%s,%llu,%d,%.17g,%.17g,%.17g\n",
                  penalty_name(r.penalty).c_str(), static_cast<unsigned long long>(r.seed),
                  r.epoch, r.r_hat, r.ratio_min, r.grad_norm_mean);
    f << buf;
  }
}

std::optional<double> median_r_hat(const std::vector<NSizeRow>& rows, PenaltyKind kind) {
  std::vector<double> vals;
  for (const NSizeRow& r : rows)
    if (r.penalty == kind && !r.untrained) vals.push_back(r.r_hat);
  if (vals.empty()) return std::nullopt;
  return median(std::move(vals));
}

}  // namespace licfg
