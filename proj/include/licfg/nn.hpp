#pragma once

#include <string>
#include <vector>

#include "licfg/rng.hpp"
#include "licfg/tape.hpp"
#include "licfg/tensor.hpp"

namespace licfg {

enum class Act { Tanh, Relu };

// Dense network parameters. W[i] is [in,out] so batches multiply from the
// left; b[i] is [1,out]. Hidden layers use `hidden`, the output is linear.
struct Mlp {
  std::vector<Tensor> W;
  std::vector<Tensor> b;
  Act hidden = Act::Relu;

  int input_dim() const { return W.front().rows(); }
  int output_dim() const { return W.back().cols(); }
  size_t layer_count() const { return W.size(); }
  std::vector<int> layer_sizes() const;
};

// Weights uniform on [-sqrt(3)/sqrt(fan_in), +sqrt(3)/sqrt(fan_in)]
// (std exactly 1/sqrt(fan_in)), biases zero. Deterministic per seed.
Mlp mlp_init(const std::vector<int>& sizes, Act hidden, uint64_t seed);

// Plain batched forward pass, no graph. x is [n, input_dim].
Tensor mlp_forward_value(const Mlp& p, const Tensor& x);

// Per-sample input gradient of the summed output logits: the row-wise
// gradients d output_i / d x_i for a scalar-output network. Closed-form
// backprop; the tape path computes the same thing differentiably and the
// tests hold the two to bit-level agreement.
Tensor mlp_input_grad_value(const Mlp& p, const Tensor& x);

// Graph handles for a network recorded on a tape.
struct MlpNodes {
  std::vector<NodeId> W;
  std::vector<NodeId> b;
  NodeId out = -1;
};

// Record the forward pass on `tape`. When `as_params` is set the weights
// become parameter leaves (trainable); otherwise constants.
MlpNodes mlp_forward(Tape& tape, const Mlp& p, NodeId x, bool as_params);

// Re-apply a recorded network to a new input node, sharing the leaves.
NodeId mlp_apply(Tape& tape, const MlpNodes& nodes, const Mlp& p, NodeId x);

struct AdamState {
  std::vector<Tensor> mW, vW, mb, vb;
  long step = 0;
  double lr = 2.5e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double eps = 1e-8;
};

AdamState adam_init(const Mlp& p, double lr, double beta1 = 0.5, double beta2 = 0.999);

// Standard bias-corrected Adam update. Gradients are ordered W0,b0,W1,b1,...
// Throws (naming the parameter) on non-finite gradients.
void adam_step(Mlp& p, const std::vector<Tensor>& grads, AdamState& s);

// Versioned binary checkpoint: header + flat little-endian doubles.
// Round-trips bit-exactly.
void save_checkpoint(const Mlp& p, const std::string& path);
Mlp load_checkpoint(const std::string& path);

}  // namespace licfg
