#include "licfg/cfg.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace licfg {

std::string penalty_name(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::None: return "none";
    case PenaltyKind::Centered1: return "centered1";
    case PenaltyKind::Centered0: return "centered0";
    case PenaltyKind::CenteredEps: return "centered_eps";
  }
  return "?";
}

PenaltyKind penalty_by_name(const std::string& name) {
  if (name == "none") return PenaltyKind::None;
  if (name == "centered1") return PenaltyKind::Centered1;
  if (name == "centered0") return PenaltyKind::Centered0;
  if (name == "centered_eps") return PenaltyKind::CenteredEps;
  throw std::invalid_argument("unknown penalty '" + name +
                              "' (expected none, centered1, centered0 or centered_eps)");
}

NodeId disc_logistic_loss(Tape& tape, NodeId real_logits, NodeId fake_logits) {
  if (tape.val(real_logits).size() == 0 || tape.val(fake_logits).size() == 0)
    throw std::invalid_argument("disc_logistic_loss: empty batch");
  const NodeId real_term = tape.mean(tape.softplus(tape.scale(real_logits, -1.0)));
  const NodeId fake_term = tape.mean(tape.softplus(fake_logits));
  return tape.add(real_term, fake_term);
}

double disc_logistic_loss_value(std::span<const double> real_logits,
                                std::span<const double> fake_logits) {
  if (real_logits.empty() || fake_logits.empty())
    throw std::invalid_argument("disc_logistic_loss: empty batch");
  auto softplus = [](double x) {
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
  };
  double r = 0.0, f = 0.0;
  for (double v : real_logits) r += softplus(-v);
  for (double v : fake_logits) f += softplus(v);
  return r / static_cast<double>(real_logits.size()) + f / static_cast<double>(fake_logits.size());
}

Tensor interpolate_pairs(const Tensor& real, const Tensor& fake, Rng& rng) {
  if (!real.same_shape(fake))
    throw std::invalid_argument("interpolate_pairs: batch shapes differ, " + real.shape_str() +
                                " vs " + fake.shape_str());
  Tensor out(real.rows(), real.cols());
  for (int r = 0; r < real.rows(); ++r) {
    const double t = rng.uniform();
    for (int c = 0; c < real.cols(); ++c)
      out.at(r, c) = t * real.at(r, c) + (1.0 - t) * fake.at(r, c);
  }
  return out;
}

NodeId penalty_term(Tape& tape, NodeId grad_batch, const Penalty& pen) {
  const Tensor& g = tape.val(grad_batch);
  if (g.size() == 0) throw std::invalid_argument("penalty_term: empty batch");
  const int n = g.rows();
  const int d = g.cols();
  const double prefactor = pen.gamma / (2.0 * n);
  switch (pen.kind) {
    case PenaltyKind::None:
      return tape.constant(Tensor::scalar(0.0));
    case PenaltyKind::Centered0:
      return tape.scale(tape.sum(tape.mul(grad_batch, grad_batch)), prefactor);
    case PenaltyKind::Centered1: {
      const NodeId norms = tape.sqrt_(tape.row_sum(tape.mul(grad_batch, grad_batch)));
      const NodeId dev = tape.add_scalar(norms, -1.0);
      return tape.scale(tape.sum(tape.mul(dev, dev)), prefactor);
    }
    case PenaltyKind::CenteredEps: {
      if (pen.eps_prime <= 0.0)
        throw std::invalid_argument("penalty_term: eps_prime must be positive");
      const double entry = pen.eps_prime / std::sqrt(static_cast<double>(d));
      const NodeId eps_vec = tape.constant(Tensor::full(n, d, entry));
      const NodeId diff = tape.sub(grad_batch, eps_vec);
      return tape.scale(tape.sum(tape.mul(diff, diff)), prefactor);
    }
  }
  throw std::logic_error("penalty_term: unknown kind");
}

NodeId mean_row_norm(Tape& tape, NodeId batch) {
  const int n = tape.val(batch).rows();
  const NodeId norms = tape.sqrt_(tape.row_sum(tape.mul(batch, batch)));
  return tape.scale(tape.sum(norms), 1.0 / n);
}

Tensor functional_step(const Tensor& points, const Mlp& D, double delta, double eta_m) {
  if (delta <= 0.0 || eta_m <= 0.0)
    throw std::invalid_argument("functional_step: delta and eta_m must be positive");
  Tensor grad = mlp_input_grad_value(D, points);
  if (!grad.all_finite()) throw std::runtime_error("functional_step: non-finite gradient");
  Tensor out = points;
  const double step = eta_m * delta;
  for (size_t i = 0; i < out.size(); ++i) out[i] += step * grad[i];
  return out;
}

Tensor functional_update(const Tensor& points, const Mlp& D, double delta, double eta_m, int M) {
  if (M < 1) throw std::invalid_argument("functional_update: M must be >= 1");
  Tensor cur = points;
  for (int m = 0; m < M; ++m) cur = functional_step(cur, D, delta, eta_m);
  return cur;
}

namespace {

// mean over rows of 0.5 * |out - target|^2
NodeId regression_loss(Tape& tape, NodeId out, NodeId target) {
  const int n = tape.val(out).rows();
  const NodeId diff = tape.sub(out, target);
  return tape.scale(tape.sum(tape.mul(diff, diff)), 0.5 / n);
}

}  // namespace

namespace {

// Persistent regression graph: built once, then re-bound and refreshed
// per Adam step. The adjoint nodes recompute along with the forward pass.
struct RegressProgram {
  Tape tape;
  NodeId z_in = -1, target_in = -1, loss = -1;
  MlpNodes net;
  std::vector<NodeId> grads;

  RegressProgram(const Mlp& G, int n) {
    z_in = tape.input(Tensor(n, G.input_dim()));
    target_in = tape.input(Tensor(n, G.output_dim()));
    net = mlp_forward(tape, G, z_in, /*as_params=*/true);
    loss = regression_loss(tape, net.out, target_in);
    grads = tape.gradient(loss, tape.param_leaves());
  }

  void bind_batch(const Tensor& z, const Tensor& targets) {
    tape.set_leaf(z_in, z);
    tape.set_leaf(target_in, targets);
  }

  void bind_params(const Mlp& G) {
    for (size_t l = 0; l < net.W.size(); ++l) {
      tape.set_leaf(net.W[l], G.W[l]);
      tape.set_leaf(net.b[l], G.b[l]);
    }
  }

  double run_steps(Mlp& G, int steps, AdamState& opt) {
    std::vector<Tensor> gvals(grads.size());
    for (int s = 0; s < steps; ++s) {
      bind_params(G);
      tape.refresh();
      for (size_t i = 0; i < grads.size(); ++i) gvals[i] = tape.val(grads[i]);
      adam_step(G, gvals, opt);
    }
    bind_params(G);
    tape.refresh(loss);
    return tape.val(loss)[0];
  }
};

}  // namespace

double generator_regress(Mlp& G, const Tensor& z, const Tensor& targets, int steps,
                         AdamState& opt) {
  if (z.rows() != targets.rows())
    throw std::invalid_argument("generator_regress: latent and target counts differ");
  RegressProgram prog(G, z.rows());
  prog.bind_batch(z, targets);
  return prog.run_steps(G, steps, opt);
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "epoch,d_loss,penalty,grad_norm_mean,g_loss,seconds\n";
  char buf[160];
  for (const EpochRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.3f\n", r.epoch, r.d_loss,
                  r.penalty, r.grad_norm_mean, r.g_loss, r.seconds);
    f << buf;
  }
}

namespace {

// Persistent discriminator-update graph, rebound per step.
struct DiscProgram {
  Tape tape;
  NodeId real_in = -1, fake_in = -1, xhat_in = -1;
  NodeId base_loss = -1, pen = -1, loss = -1, gnorm = -1;
  MlpNodes net;
  std::vector<NodeId> grads;

  DiscProgram(const Mlp& D, int batch, const Penalty& penalty) {
    const int d = D.input_dim();
    real_in = tape.input(Tensor(batch, d));
    fake_in = tape.input(Tensor(batch, d));
    xhat_in = tape.input(Tensor(batch, d));
    net = mlp_forward(tape, D, xhat_in, /*as_params=*/true);
    const NodeId real_logits = mlp_apply(tape, net, D, real_in);
    const NodeId fake_logits = mlp_apply(tape, net, D, fake_in);
    base_loss = disc_logistic_loss(tape, real_logits, fake_logits);
    const NodeId g = input_grad(tape, tape.sum(net.out), xhat_in);
    pen = penalty_term(tape, g, penalty);
    loss = tape.add(base_loss, pen);
    gnorm = mean_row_norm(tape, g);
    grads = tape.gradient(loss, tape.param_leaves());
  }

  DiscStepStats step(Mlp& D, const Tensor& real, const Tensor& fake, const Tensor& xhat,
                     AdamState& opt) {
    tape.set_leaf(real_in, real);
    tape.set_leaf(fake_in, fake);
    tape.set_leaf(xhat_in, xhat);
    for (size_t l = 0; l < net.W.size(); ++l) {
      tape.set_leaf(net.W[l], D.W[l]);
      tape.set_leaf(net.b[l], D.b[l]);
    }
    tape.refresh();

    DiscStepStats stats;
    stats.d_loss = tape.val(base_loss)[0];
    stats.penalty = tape.val(pen)[0];
    stats.grad_norm_mean = tape.val(gnorm)[0];

    std::vector<Tensor> gvals(grads.size());
    for (size_t i = 0; i < grads.size(); ++i) gvals[i] = tape.val(grads[i]);
    adam_step(D, gvals, opt);
    return stats;
  }
};

DiscStepStats disc_step_with(DiscProgram& prog, Mlp& D, const Mlp& G, const GaussianMixture& mix,
                             const TrainConfig& cfg, Rng& rng, AdamState& opt) {
  const Tensor real = sample_mixture(mix, cfg.batch_size, rng);
  const Tensor z = sample_latent(cfg.batch_size, G.input_dim(), rng);
  const Tensor fake = mlp_forward_value(G, z);
  const Tensor xhat = interpolate_pairs(real, fake, rng);
  return prog.step(D, real, fake, xhat, opt);
}

}  // namespace

DiscStepStats disc_update_step(Mlp& D, const Mlp& G, const GaussianMixture& mix,
                               const TrainConfig& cfg, Rng& rng, AdamState& opt) {
  DiscProgram prog(D, cfg.batch_size, cfg.penalty);
  return disc_step_with(prog, D, G, mix, cfg, rng, opt);
}

double generator_phase(Mlp& G, const Mlp& D, const TrainConfig& cfg, Rng& rng, AdamState& opt) {
  const Tensor z = sample_latent(cfg.gen_examples, G.input_dim(), rng);
  const Tensor start = mlp_forward_value(G, z);
  const Tensor targets = functional_update(start, D, cfg.delta, cfg.eta_m, cfg.gen_steps);
  return generator_regress(G, z, targets, cfg.regression_steps, opt);
}

namespace {

uint64_t split_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 over (seed ^ stream-constant)
  uint64_t x = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

bool bad(double v) { return !std::isfinite(v) || std::fabs(v) > 1e6; }

}  // namespace

TrainResult train(const TrainConfig& cfg, const GaussianMixture& mix) {
  if (cfg.batch_size < 1 || cfg.disc_updates < 1 || cfg.gen_examples < 1 || cfg.gen_steps < 1)
    throw std::invalid_argument("train: B, U, N, M must all be >= 1");
  if (cfg.delta <= 0.0 || cfg.eta_m <= 0.0)
    throw std::invalid_argument("train: delta and eta_m must be positive");

  TrainResult res;
  res.G = mlp_init(cfg.g_arch, Act::Tanh, split_seed(cfg.seed, 1));
  res.D = mlp_init(cfg.d_arch, Act::Relu, split_seed(cfg.seed, 2));
  Rng rng(split_seed(cfg.seed, 3));
  AdamState opt_d = adam_init(res.D, cfg.lr);
  AdamState opt_g = adam_init(res.G, cfg.lr);

  DiscProgram disc_prog(res.D, cfg.batch_size, cfg.penalty);
  RegressProgram regress_prog(res.G, cfg.gen_examples);

  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;

    DiscStepStats ds;
    const bool snapshot_due =
        cfg.snapshot_interval > 0 && (epoch % cfg.snapshot_interval == 0 || epoch == cfg.epochs - 1);
    Mlp g_before;
    if (snapshot_due) g_before = res.G;

    try {
      for (int u = 0; u < cfg.disc_updates; ++u)
        ds = disc_step_with(disc_prog, res.D, res.G, mix, cfg, rng, opt_d);
      rec.d_loss = ds.d_loss;
      rec.penalty = ds.penalty;
      rec.grad_norm_mean = ds.grad_norm_mean;

      const Tensor z = sample_latent(cfg.gen_examples, res.G.input_dim(), rng);
      const Tensor start = mlp_forward_value(res.G, z);
      const Tensor targets = functional_update(start, res.D, cfg.delta, cfg.eta_m, cfg.gen_steps);
      regress_prog.bind_batch(z, targets);
      rec.g_loss = regress_prog.run_steps(res.G, cfg.regression_steps, opt_g);
    } catch (const std::runtime_error&) {
      // non-finite gradients or losses; the "untrained" outcome
      res.outcome = TrainOutcome::Diverged;
      res.diverged_epoch = epoch;
      return res;
    }

    if (cfg.timing)
      rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    res.log.records.push_back(rec);

    if (bad(rec.d_loss) || bad(rec.g_loss) || bad(rec.penalty)) {
      res.outcome = TrainOutcome::Diverged;
      res.diverged_epoch = epoch;
      return res;
    }

    if (snapshot_due) {
      SnapshotPair snap;
      snap.epoch = epoch;
      snap.before = std::move(g_before);
      snap.after = res.G;
      snap.grad_norm_mean = rec.grad_norm_mean;
      res.snapshots.push_back(std::move(snap));
    }
  }
  return res;
}

}  // namespace licfg
