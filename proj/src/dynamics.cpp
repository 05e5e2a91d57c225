#include "licfg/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace licfg {

namespace {

double softplus(double x) { return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double loss_equivalence_check(std::span<const double> logits) {
  double max_abs = 0.0;
  for (double v : logits) {
    if (!std::isfinite(v)) throw std::invalid_argument("loss_equivalence_check: non-finite logit");
    // CFG form, overflow-stable
    const double cfg = softplus(-v) + softplus(v);
    // negated common-GAN log loss under d = sigmoid(D). Direct evaluation
    // where exp/log are exact enough; the stabilized identities
    // ln(sigma) = -softplus(-x), ln(1-sigma) = -softplus(x) elsewhere,
    // since the direct route underflows past |x| ~ 36.
    double gan;
    if (std::fabs(v) <= 30.0) {
      const double d = 1.0 / (1.0 + std::exp(-v));
      const double one_minus_d = 1.0 / (1.0 + std::exp(v));
      gan = -(std::log(d) + std::log(one_minus_d));
    } else {
      gan = softplus(-v) + softplus(v);
    }
    max_abs = std::max(max_abs, std::fabs(cfg - gan));
  }
  return max_abs;
}

std::vector<double> generator_field(const Mlp& G, const Mlp& D, const Tensor& z_row, double eta_1,
                                    double delta, bool functional) {
  Tape tape;
  const NodeId zn = tape.constant(z_row);
  const MlpNodes gn = mlp_forward(tape, G, zn, /*as_params=*/true);

  NodeId loss;
  double sign;
  if (functional) {
    // Regression loss against a one-step functional target; its descent
    // direction is eta_1*delta * grad_x D(G(z)) * dG/dtheta.
    const Tensor start = mlp_forward_value(G, z_row);
    const Tensor target = functional_step(start, D, delta, eta_1);
    const NodeId tn = tape.constant(target);
    const NodeId diff = tape.sub(gn.out, tn);
    loss = tape.scale(tape.sum(tape.mul(diff, diff)), 0.5);
    sign = -1.0;  // update direction is the negative loss gradient
  } else {
    // Minimax generator objective ln(1 - sigmoid(D(G(z)))); its descent
    // direction equals the gradient of softplus(D(G(z))).
    const MlpNodes dn = mlp_forward(tape, D, gn.out, /*as_params=*/false);
    loss = tape.sum(tape.softplus(dn.out));
    sign = +1.0;
  }

  const std::vector<Tensor> grads = param_grad(tape, loss);
  std::vector<double> flat;
  for (const Tensor& g : grads)
    for (double v : g.data) flat.push_back(sign * v);
  return flat;
}

FieldEquivalence field_equivalence_check(const Mlp& G, const Mlp& D, const Tensor& z,
                                         double eta_1, double delta) {
  FieldEquivalence out;
  for (int r = 0; r < z.rows(); ++r) {
    Tensor row(1, z.cols());
    for (int c = 0; c < z.cols(); ++c) row.at(0, c) = z.at(r, c);
    const std::vector<double> a = generator_field(G, D, row, eta_1, delta, true);
    const std::vector<double> b = generator_field(G, D, row, eta_1, delta, false);
    double aa = 0.0, bb = 0.0, ab = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      aa += a[i] * a[i];
      bb += b[i] * b[i];
      ab += a[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) {
      ++out.skipped;
      continue;
    }
    const double cosine = ab / (std::sqrt(aa) * std::sqrt(bb));
    out.max_one_minus_cosine = std::max(out.max_one_minus_cosine, 1.0 - cosine);
  }
  return out;
}

double Trajectory::final_distance(double theta_star) const {
  const double dt = theta.back() - theta_star;
  const double dp = psi.back();
  return std::sqrt(dt * dt + dp * dp);
}

void Trajectory::write_csv(const std::string& path) const {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << "step,theta,psi\n";
  char buf[96];
  for (size_t i = 0; i < theta.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, theta[i], psi[i]);
    f << buf;
  }
}

namespace {

// d/dpsi of the penalty on the segment [0, theta], where grad_x D = psi.
double penalty_slope(const Penalty& pen, double psi) {
  switch (pen.kind) {
    case PenaltyKind::None:
      return 0.0;
    case PenaltyKind::Centered0:
      return pen.gamma * psi;
    case PenaltyKind::Centered1: {
      const double s = psi > 0.0 ? 1.0 : (psi < 0.0 ? -1.0 : 0.0);
      return pen.gamma * (std::fabs(psi) - 1.0) * s;
    }
    case PenaltyKind::CenteredEps:
      return pen.gamma * (psi - pen.eps_prime);
  }
  return 0.0;
}

}  // namespace

Trajectory dirac_simulate(const Penalty& pen, int steps, double lr, double theta0, double psi0,
                          Integrator integrator, double delta) {
  if (steps < 1 || lr <= 0.0)
    throw std::invalid_argument("dirac_simulate: steps must be >= 1 and lr positive");
  Trajectory traj;
  traj.step_size = lr;
  traj.integrator = integrator;
  traj.penalty = pen.kind;
  traj.theta.reserve(steps + 1);
  traj.psi.reserve(steps + 1);

  double theta = theta0, psi = psi0;
  traj.theta.push_back(theta);
  traj.psi.push_back(psi);
  for (int s = 0; s < steps; ++s) {
    // CFG discriminator loss: ln2 + softplus(psi*theta) + R(psi)
    const double dpsi = sigmoid(psi * theta) * theta + penalty_slope(pen, psi);
    if (integrator == Integrator::Alternating) {
      psi -= lr * dpsi;
      theta += lr * delta * psi;
    } else {
      const double dtheta = delta * psi;
      psi -= lr * dpsi;
      theta += lr * dtheta;
    }
    if (std::fabs(theta) > 1e6 || std::fabs(psi) > 1e6 || !std::isfinite(theta) ||
        !std::isfinite(psi)) {
      traj.diverged = true;
      break;
    }
    traj.theta.push_back(theta);
    traj.psi.push_back(psi);
  }
  return traj;
}

}  // namespace licfg
