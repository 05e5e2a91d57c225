#pragma once

#include <string>
#include <vector>

#include "licfg/cfg.hpp"
#include "licfg/nn.hpp"
#include "licfg/tensor.hpp"

namespace licfg {

// Max |L_CFG - (-(E ln sigma(real) + E ln(1-sigma(fake))))| over the
// given logits evaluated one at a time (each logit serving as a
// one-element real and fake batch).
double loss_equivalence_check(std::span<const double> logits);

struct FieldEquivalence {
  double max_one_minus_cosine = 0.0;
  int skipped = 0;  // zero-length field vectors
};

// Compares the functional-gradient generator field against the common-GAN
// field on a z batch. The two differ by a positive per-sample scaling, so
// the check is directional: 1 - cosine similarity per sample.
FieldEquivalence field_equivalence_check(const Mlp& G, const Mlp& D, const Tensor& z,
                                         double eta_1, double delta);

// Parameter-space generator fields for one latent row, as flat vectors
// over theta. `functional` selects -eta1*delta*... vs -sigmoid(D(G(z)))*...
std::vector<double> generator_field(const Mlp& G, const Mlp& D, const Tensor& z_row, double eta_1,
                                    double delta, bool functional);

enum class Integrator { Alternating, Simultaneous };

struct Trajectory {
  std::vector<double> theta;
  std::vector<double> psi;
  double step_size = 0.0;
  Integrator integrator = Integrator::Alternating;
  PenaltyKind penalty = PenaltyKind::None;
  bool diverged = false;

  double final_distance(double theta_star = 0.0) const;
  void write_csv(const std::string& path) const;
};

// 1-D Dirac problem: real data fixed at x*=0, generator G(z)=theta,
// discriminator D(x)=psi*x. Explicit Euler on the CFG discriminator
// descent and the functional-gradient generator adoption. Truncates with
// the diverged flag when |theta| or |psi| passes 1e6.
Trajectory dirac_simulate(const Penalty& pen, int steps, double lr, double theta0, double psi0,
                          Integrator integrator = Integrator::Alternating, double delta = 1.0);

}  // namespace licfg
