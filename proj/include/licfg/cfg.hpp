#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "licfg/data.hpp"
#include "licfg/nn.hpp"
#include "licfg/rng.hpp"
#include "licfg/tape.hpp"
#include "licfg/tensor.hpp"

namespace licfg {

enum class PenaltyKind { None, Centered1, Centered0, CenteredEps };

std::string penalty_name(PenaltyKind k);
PenaltyKind penalty_by_name(const std::string& name);

struct Penalty {
  PenaltyKind kind = PenaltyKind::CenteredEps;
  double gamma = 0.1;
  double eps_prime = 0.3;  // meaningful for CenteredEps only
};

struct TrainConfig {
  int batch_size = 64;          // B
  int disc_updates = 1;         // U
  int gen_examples = 640;       // N
  int gen_steps = 15;           // M
  double eta_m = 0.25;          // functional step size
  double delta = 1.0;           // fixed delta(x) scaling factor
  Penalty penalty;
  double lr = 2.5e-4;           // Adam learning rate for both nets
  std::vector<int> g_arch = {2, 64, 64, 2};
  std::vector<int> d_arch = {2, 64, 64, 1};
  int epochs = 2000;
  uint64_t seed = 1;
  int regression_steps = 10;
  int snapshot_interval = 100;
  bool timing = false;          // when off the log's seconds column stays 0
};

// Stabilized CFG discriminator loss:
//   mean over real of ln(1+exp(-logit)) + mean over fake of ln(1+exp(logit)).
NodeId disc_logistic_loss(Tape& tape, NodeId real_logits, NodeId fake_logits);
double disc_logistic_loss_value(std::span<const double> real_logits,
                                std::span<const double> fake_logits);

// Per-row x_hat = t*real + (1-t)*fake with t ~ Uniform(0,1).
Tensor interpolate_pairs(const Tensor& real, const Tensor& fake, Rng& rng);

// Penalty expression over a recorded per-sample gradient batch g = [n,d],
// differentiable through g. Mean over the batch; gamma/2 prefactor applied.
// For CenteredEps the subtracted vector has equal entries eps_prime/sqrt(d).
NodeId penalty_term(Tape& tape, NodeId grad_batch, const Penalty& pen);

// Mean Euclidean norm of the rows of a recorded batch (for logging).
NodeId mean_row_norm(Tape& tape, NodeId batch);

// One functional-gradient transport step: x' = x + eta_m * delta * grad D(x).
Tensor functional_step(const Tensor& points, const Mlp& D, double delta, double eta_m);

// M sequential steps.
Tensor functional_update(const Tensor& points, const Mlp& D, double delta, double eta_m, int M);

// Least-squares fit of G onto (z, targets) by `steps` Adam iterations.
// Returns the final loss value mean(0.5 * |G(z) - target|^2).
double generator_regress(Mlp& G, const Tensor& z, const Tensor& targets, int steps,
                         AdamState& opt);

struct EpochRecord {
  int epoch = 0;
  double d_loss = 0.0;
  double penalty = 0.0;
  double grad_norm_mean = 0.0;
  double g_loss = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> records;
  void write_csv(const std::string& path) const;
};

// Generator parameters before and after one epoch's regression update,
// retained for the neighborhood estimators.
struct SnapshotPair {
  int epoch = 0;
  Mlp before;
  Mlp after;
  double grad_norm_mean = 0.0;
};

enum class TrainOutcome { Ok, Diverged };

struct TrainResult {
  Mlp G;
  Mlp D;
  TrainLog log;
  std::vector<SnapshotPair> snapshots;
  TrainOutcome outcome = TrainOutcome::Ok;
  int diverged_epoch = -1;
};

struct DiscStepStats {
  double d_loss = 0.0;
  double penalty = 0.0;
  double grad_norm_mean = 0.0;
};

// One discriminator Adam step on a size-B batch. Touches only D.
DiscStepStats disc_update_step(Mlp& D, const Mlp& G, const GaussianMixture& mix,
                               const TrainConfig& cfg, Rng& rng, AdamState& opt);

// Transport N generator outputs with functional_update, then regress G
// onto the transported targets. Touches only G. Returns the final
// regression loss.
double generator_phase(Mlp& G, const Mlp& D, const TrainConfig& cfg, Rng& rng, AdamState& opt);

// Full Li-CFG training loop; deterministic per config/seed.
TrainResult train(const TrainConfig& cfg, const GaussianMixture& mix);

}  // namespace licfg
