#pragma once

#include <optional>
#include <vector>

#include "licfg/cfg.hpp"
#include "licfg/data.hpp"
#include "licfg/nn.hpp"
#include "licfg/tensor.hpp"

namespace licfg {

// Estimated latent neighborhood radius around one latent point:
// r_hat = epsilon_hat / (2 * ratio_min), where ratio_min is the minimum
// over probes of the two-generator difference-quotient sum.
struct NSizeEstimate {
  double r_hat = 0.0;
  double epsilon_hat = 0.0;
  int probe_count = 0;
  double ratio_min = 0.0;
};

NSizeEstimate nsize_estimate(const Mlp& g_t, const Mlp& g_t1, const Tensor& z1,
                             const Tensor& probes, double epsilon_hat);

// Batched variant: one estimate per row of z1_batch against a shared
// probe set. Evaluates each generator once per batch instead of once per
// z1, and parallelizes the probe scans. Agrees with nsize_estimate
// exactly; the tests hold the two paths together.
std::vector<NSizeEstimate> nsize_batch(const Mlp& g_t, const Mlp& g_t1, const Tensor& z1_batch,
                                       const Tensor& probes, double epsilon_hat);

// Same radius with the gradient-penalty expansion in the denominator:
//   2|G_t(z1)-G_t(z)| + eta_m*delta*sum_{m=1..M}(q(z)+q(z1))   over |z1-z|
// with q the penalty-adjusted gradient magnitude:
//   q_1 = | |grad D| - 1 |,  q_0 = |grad D|,  q_eps = |grad D| + eps_prime.
// The same discriminator serves every step, so the sum is M identical terms.
NSizeEstimate nsize_gp_bound(const Mlp& g_t, const Mlp& D, const Penalty& pen, double delta,
                             double eta_m, int M, const Tensor& z1, const Tensor& probes,
                             double epsilon_hat);

// Penalty-adjusted gradient magnitude for a single gradient norm.
double penalty_adjusted_magnitude(double grad_norm, const Penalty& pen);

struct ModeReport {
  double alpha = 0.0;
  std::vector<int> assignments;  // mode index per sample, -1 = unassigned
  std::vector<bool> attracted_flags;
  std::vector<bool> distracted_flags;
};

// Nearest center within alpha, else unassigned.
ModeReport assign_modes(const Tensor& samples, const std::vector<std::pair<double, double>>& centers,
                        double alpha);

// |y_k - G_{t+1}(z)| + eps_hat < |y_k - G_t(z)|
bool attracted(const Tensor& z, const Tensor& y_k, const Mlp& g_t, const Mlp& g_t1,
               double epsilon_hat);

// |y_m - G_{t+1}(z)| + (eps_hat/2 - 2 alpha) < |y_k - G_t(z)|
bool distracted(const Tensor& z, const Tensor& y_k, const Tensor& y_m, const Mlp& g_t,
                const Mlp& g_t1, double epsilon_hat, double alpha);

struct NSizeRow {
  PenaltyKind penalty;
  uint64_t seed = 0;
  int epoch = 0;
  double r_hat = 0.0;
  double ratio_min = 0.0;
  double grad_norm_mean = 0.0;
  bool untrained = false;
};

struct OrderingParams {
  int z1_draws = 64;
  int probes = 4096;
  double epsilon_hat = 0.1;
  uint64_t probe_seed = 977;
};

// Median r_hat over z1 draws for one snapshot pair.
NSizeRow nsize_snapshot_row(const SnapshotPair& snap, const OrderingParams& params,
                            PenaltyKind kind, uint64_t seed);

// Trains one model per penalty kind in `kinds` for every seed, estimates
// r_hat on each snapshot pair, and returns one row per (penalty, seed,
// snapshot epoch). Aborted trainings produce a single row flagged
// untrained. Median helpers below summarize the table.
std::vector<NSizeRow> ordering_experiment(const TrainConfig& base, const GaussianMixture& mix,
                                          const std::vector<PenaltyKind>& kinds,
                                          const std::vector<uint64_t>& seeds,
                                          const OrderingParams& params);

void write_nsize_csv(const std::vector<NSizeRow>& rows, const std::string& path);

double median(std::vector<double> v);

// Median r_hat across all non-untrained rows for one penalty.
std::optional<double> median_r_hat(const std::vector<NSizeRow>& rows, PenaltyKind kind);

}  // namespace licfg
