#include "licfg/nn.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace licfg {

std::vector<int> Mlp::layer_sizes() const {
  std::vector<int> sizes;
  sizes.push_back(W.front().rows());
  for (const Tensor& w : W) sizes.push_back(w.cols());
  return sizes;
}

Mlp mlp_init(const std::vector<int>& sizes, Act hidden, uint64_t seed) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp_init: need at least one layer");
  for (int s : sizes)
    if (s <= 0) throw std::invalid_argument("mlp_init: layer sizes must be positive");
  Mlp p;
  p.hidden = hidden;
  Rng rng(seed);
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    const int fan_in = sizes[l];
    const double bound = std::sqrt(3.0) / std::sqrt(static_cast<double>(fan_in));
    Tensor w(fan_in, sizes[l + 1]);
    for (double& v : w.data) v = rng.uniform(-bound, bound);
    p.W.push_back(std::move(w));
    p.b.push_back(Tensor(1, sizes[l + 1]));
  }
  return p;
}

namespace {

inline void apply_act(Tensor& t, Act a) {
  if (a == Act::Tanh)
    vtanh(t.data.data(), t.data.data(), t.size());
  else
    for (double& v : t.data) v = v > 0.0 ? v : 0.0;
}

inline Tensor affine(const Tensor& x, const Tensor& w, const Tensor& bias) {
  Tensor y = matmul(x, w);
  for (int r = 0; r < y.rows(); ++r)
    for (int c = 0; c < y.cols(); ++c) y.at(r, c) += bias.at(0, c);
  return y;
}

}  // namespace

Tensor mlp_forward_value(const Mlp& p, const Tensor& x) {
  if (x.cols() != p.input_dim())
    throw std::invalid_argument("mlp_forward: input has " + std::to_string(x.cols()) +
                                " columns, network expects " + std::to_string(p.input_dim()));
  Tensor h = x;
  for (size_t l = 0; l < p.W.size(); ++l) {
    h = affine(h, p.W[l], p.b[l]);
    if (l + 1 < p.W.size()) apply_act(h, p.hidden);
  }
  return h;
}

Tensor mlp_input_grad_value(const Mlp& p, const Tensor& x) {
  if (p.output_dim() != 1)
    throw std::invalid_argument("mlp_input_grad_value: network output must be scalar");
  // forward, keeping pre-activations
  std::vector<Tensor> pre(p.W.size());
  Tensor h = x;
  for (size_t l = 0; l < p.W.size(); ++l) {
    pre[l] = affine(h, p.W[l], p.b[l]);
    if (l + 1 < p.W.size()) {
      h = pre[l];
      apply_act(h, p.hidden);
    }
  }
  // reverse: g starts as d(sum logits)/d(logit row) = 1
  Tensor g = Tensor::full(x.rows(), 1, 1.0);
  for (size_t l = p.W.size(); l-- > 0;) {
    g = matmul(g, transpose(p.W[l]));
    if (l > 0) {
      const Tensor& z = pre[l - 1];
      if (p.hidden == Act::Tanh) {
        std::vector<double> t(g.size());
        vtanh(z.data.data(), t.data(), g.size());
        for (size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - t[i] * t[i];
      } else {
        for (size_t i = 0; i < g.size(); ++i) g[i] *= z[i] > 0.0 ? 1.0 : 0.0;
      }
    }
  }
  return g;
}

MlpNodes mlp_forward(Tape& tape, const Mlp& p, NodeId x, bool as_params) {
  MlpNodes nodes;
  for (size_t l = 0; l < p.W.size(); ++l) {
    nodes.W.push_back(as_params ? tape.param(p.W[l]) : tape.constant(p.W[l]));
    nodes.b.push_back(as_params ? tape.param(p.b[l]) : tape.constant(p.b[l]));
  }
  nodes.out = mlp_apply(tape, nodes, p, x);
  return nodes;
}

NodeId mlp_apply(Tape& tape, const MlpNodes& nodes, const Mlp& p, NodeId x) {
  NodeId h = x;
  const int n = tape.val(x).rows();
  for (size_t l = 0; l < nodes.W.size(); ++l) {
    h = tape.add(tape.matmul(h, nodes.W[l]), tape.col_bcast(nodes.b[l], n));
    if (l + 1 < nodes.W.size()) h = (p.hidden == Act::Tanh) ? tape.tanh_(h) : tape.relu(h);
  }
  return h;
}

AdamState adam_init(const Mlp& p, double lr, double beta1, double beta2) {
  AdamState s;
  s.lr = lr;
  s.beta1 = beta1;
  s.beta2 = beta2;
  for (size_t l = 0; l < p.W.size(); ++l) {
    s.mW.push_back(Tensor(p.W[l].rows(), p.W[l].cols()));
    s.vW.push_back(Tensor(p.W[l].rows(), p.W[l].cols()));
    s.mb.push_back(Tensor(1, p.b[l].cols()));
    s.vb.push_back(Tensor(1, p.b[l].cols()));
  }
  return s;
}

namespace {

void adam_update(Tensor& param, const Tensor& grad, Tensor& m, Tensor& v, const AdamState& s,
                 double bc1, double bc2, const std::string& name) {
  if (!grad.all_finite()) throw std::runtime_error("adam_step: non-finite gradient for " + name);
  for (size_t i = 0; i < param.size(); ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    param[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
}

}  // namespace

void adam_step(Mlp& p, const std::vector<Tensor>& grads, AdamState& s) {
  if (grads.size() != 2 * p.W.size())
    throw std::invalid_argument("adam_step: expected " + std::to_string(2 * p.W.size()) +
                                " gradient tensors, got " + std::to_string(grads.size()));
  s.step += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
  for (size_t l = 0; l < p.W.size(); ++l) {
    adam_update(p.W[l], grads[2 * l], s.mW[l], s.vW[l], s, bc1, bc2,
                "W" + std::to_string(l));
    adam_update(p.b[l], grads[2 * l + 1], s.mb[l], s.vb[l], s, bc1, bc2,
                "b" + std::to_string(l));
  }
}

namespace {
constexpr uint32_t kCheckpointMagic = 0x4746434CU;  // "LCFG"
constexpr uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& f) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw std::runtime_error("checkpoint: truncated file");
  return v;
}
}  // namespace

void save_checkpoint(const Mlp& p, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  write_pod(f, kCheckpointMagic);
  write_pod(f, kCheckpointVersion);
  write_pod(f, static_cast<uint8_t>(p.hidden));
  const std::vector<int> sizes = p.layer_sizes();
  write_pod(f, static_cast<uint32_t>(sizes.size()));
  for (int sdim : sizes) write_pod(f, static_cast<uint32_t>(sdim));
  for (size_t l = 0; l < p.W.size(); ++l) {
    f.write(reinterpret_cast<const char*>(p.W[l].data.data()),
            static_cast<std::streamsize>(p.W[l].size() * sizeof(double)));
    f.write(reinterpret_cast<const char*>(p.b[l].data.data()),
            static_cast<std::streamsize>(p.b[l].size() * sizeof(double)));
  }
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path);
}

Mlp load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path);
  if (read_pod<uint32_t>(f) != kCheckpointMagic)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const uint32_t version = read_pod<uint32_t>(f);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  Mlp p;
  p.hidden = static_cast<Act>(read_pod<uint8_t>(f));
  const uint32_t nsizes = read_pod<uint32_t>(f);
  std::vector<int> sizes(nsizes);
  for (uint32_t i = 0; i < nsizes; ++i) sizes[i] = static_cast<int>(read_pod<uint32_t>(f));
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    Tensor w(sizes[l], sizes[l + 1]);
    f.read(reinterpret_cast<char*>(w.data.data()),
           static_cast<std::streamsize>(w.size() * sizeof(double)));
    Tensor bias(1, sizes[l + 1]);
    f.read(reinterpret_cast<char*>(bias.data.data()),
           static_cast<std::streamsize>(bias.size() * sizeof(double)));
    if (!f) throw std::runtime_error("checkpoint: truncated file " + path);
    p.W.push_back(std::move(w));
    p.b.push_back(std::move(bias));
  }
  return p;
}

}  // namespace licfg
