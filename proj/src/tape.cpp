#include "licfg/tape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace licfg {

namespace {

double softplus_stable(double x) {
  // max(x,0) + log1p(exp(-|x|)) is finite for |x| up to the double range
  return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double sigmoid_stable(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

NodeId Tape::push(Node n) {
  compute(n);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::check_same_shape(NodeId a, NodeId b, const char* what) const {
  if (!nodes_[a].value.same_shape(nodes_[b].value))
    throw std::invalid_argument(std::string(what) + ": shape mismatch " +
                                nodes_[a].value.shape_str() + " vs " + nodes_[b].value.shape_str());
}

NodeId Tape::param(Tensor v) {
  Node n;
  n.op = Op::Leaf;
  n.is_param = true;
  n.value = std::move(v);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(Tensor v) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(v);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::constant(Tensor v) {
  Node n;
  n.op = Op::Const;
  n.value = std::move(v);
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_same_shape(a, b, "add");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  return push(std::move(n));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_same_shape(a, b, "sub");
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  return push(std::move(n));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  check_same_shape(a, b, "mul");
  Node n;
  n.op = Op::Mul;
  n.a = a;
  n.b = b;
  return push(std::move(n));
}

NodeId Tape::safe_div(NodeId a, NodeId b) {
  check_same_shape(a, b, "safe_div");
  Node n;
  n.op = Op::SafeDiv;
  n.a = a;
  n.b = b;
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  if (nodes_[a].value.cols() != nodes_[b].value.rows())
    throw std::invalid_argument("matmul: shape mismatch " + nodes_[a].value.shape_str() + " x " +
                                nodes_[b].value.shape_str());
  Node n;
  n.op = Op::MatMul;
  n.a = a;
  n.b = b;
  return push(std::move(n));
}

NodeId Tape::transpose(NodeId a) {
  Node n;
  n.op = Op::Transpose;
  n.a = a;
  return push(std::move(n));
}

NodeId Tape::scale(NodeId a, double alpha) {
  Node n;
  n.op = Op::Scale;
  n.a = a;
  n.alpha = alpha;
  return push(std::move(n));
}

NodeId Tape::add_scalar(NodeId a, double alpha) {
  Node n;
  n.op = Op::AddScalar;
  n.a = a;
  n.alpha = alpha;
  return push(std::move(n));
}

#define LICFG_UNARY(NAME, OPK)      \
  NodeId Tape::NAME(NodeId a) {     \
    Node n;                         \
    n.op = OPK;                     \
    n.a = a;                        \
    return push(std::move(n));      \
  }

LICFG_UNARY(tanh_, Op::Tanh)
LICFG_UNARY(sigmoid_, Op::Sigmoid)
LICFG_UNARY(softplus, Op::Softplus)
LICFG_UNARY(relu, Op::Relu)
LICFG_UNARY(step, Op::Step)
LICFG_UNARY(sqrt_, Op::Sqrt)
LICFG_UNARY(sum, Op::Sum)
LICFG_UNARY(row_sum, Op::RowSum)
LICFG_UNARY(col_sum, Op::ColSum)
#undef LICFG_UNARY

NodeId Tape::row_bcast(NodeId a, int cols) {
  if (nodes_[a].value.cols() != 1) throw std::invalid_argument("row_bcast: source must be [n,1]");
  Node n;
  n.op = Op::RowBcast;
  n.a = a;
  n.extent = cols;
  return push(std::move(n));
}

NodeId Tape::col_bcast(NodeId a, int rows) {
  if (nodes_[a].value.rows() != 1) throw std::invalid_argument("col_bcast: source must be [1,d]");
  Node n;
  n.op = Op::ColBcast;
  n.a = a;
  n.extent = rows;
  return push(std::move(n));
}

NodeId Tape::mean(NodeId a) {
  const size_t n = nodes_[a].value.size();
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

void Tape::compute(Node& n) const {
  // Writes in place, reusing the node's buffer; refresh() then runs
  // allocation-free once shapes have stabilized.
  switch (n.op) {
    case Op::Leaf:
    case Op::Const:
      return;
    case Op::Add: {
      const Tensor& a = nodes_[n.a].value;
      const Tensor& b = nodes_[n.b].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
      return;
    }
    case Op::Sub: {
      const Tensor& a = nodes_[n.a].value;
      const Tensor& b = nodes_[n.b].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
      return;
    }
    case Op::Mul: {
      const Tensor& a = nodes_[n.a].value;
      const Tensor& b = nodes_[n.b].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
      return;
    }
    case Op::SafeDiv: {
      const Tensor& a = nodes_[n.a].value;
      const Tensor& b = nodes_[n.b].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = (b[i] != 0.0) ? a[i] / b[i] : 0.0;
      return;
    }
    case Op::MatMul:
      matmul_into(nodes_[n.a].value, nodes_[n.b].value, n.value);
      return;
    case Op::Transpose:
      transpose_into(nodes_[n.a].value, n.value);
      return;
    case Op::Scale: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * n.alpha;
      return;
    }
    case Op::AddScalar: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + n.alpha;
      return;
    }
    case Op::Tanh: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      vtanh(a.data.data(), out.data.data(), a.size());
      return;
    }
    case Op::Sigmoid: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = sigmoid_stable(a[i]);
      return;
    }
    case Op::Softplus: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = softplus_stable(a[i]);
      return;
    }
    case Op::Relu: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
      return;
    }
    case Op::Step: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? 1.0 : 0.0;
      return;
    }
    case Op::Sqrt: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), a.cols());
      for (size_t i = 0; i < a.size(); ++i) out[i] = std::sqrt(a[i]);
      return;
    }
    case Op::Sum: {
      const Tensor& a = nodes_[n.a].value;
      double s = 0.0;
      for (size_t i = 0; i < a.size(); ++i) s += a[i];
      fit_shape(n.value, 1, 1)[0] = s;
      return;
    }
    case Op::RowSum: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), 1);
      for (int r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (int c = 0; c < a.cols(); ++c) s += a.at(r, c);
        out.at(r, 0) = s;
      }
      return;
    }
    case Op::RowBcast: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, a.rows(), n.extent);
      for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < n.extent; ++c) out.at(r, c) = a.at(r, 0);
      return;
    }
    case Op::ColSum: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, 1, a.cols());
      for (int c = 0; c < a.cols(); ++c) {
        double s = 0.0;
        for (int r = 0; r < a.rows(); ++r) s += a.at(r, c);
        out.at(0, c) = s;
      }
      return;
    }
    case Op::ColBcast: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, n.extent, a.cols());
      for (int r = 0; r < n.extent; ++r)
        for (int c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(0, c);
      return;
    }
    case Op::FullBcast: {
      const Tensor& a = nodes_[n.a].value;
      Tensor& out = fit_shape(n.value, n.r_extent, n.extent);
      std::fill(out.data.begin(), out.data.end(), a[0]);
      return;
    }
  }
  throw std::logic_error("tape: unknown op");
}

void Tape::set_leaf(NodeId leaf, Tensor v) {
  if (nodes_[leaf].op != Op::Leaf) throw std::invalid_argument("set_leaf: node is not a leaf");
  if (!nodes_[leaf].value.same_shape(v))
    throw std::invalid_argument("set_leaf: shape mismatch " + nodes_[leaf].value.shape_str() +
                                " vs " + v.shape_str());
  nodes_[leaf].value = std::move(v);
}

void Tape::refresh(NodeId upto) {
  const NodeId last = upto < 0 ? static_cast<NodeId>(nodes_.size()) - 1 : upto;
  for (NodeId i = 0; i <= last; ++i)
    if (nodes_[i].op != Op::Leaf && nodes_[i].op != Op::Const) compute(nodes_[i]);
}

std::vector<NodeId> Tape::param_leaves() const {
  std::vector<NodeId> out;
  for (size_t i = 0; i < nodes_.size(); ++i)
    if (nodes_[i].op == Op::Leaf && nodes_[i].is_param) out.push_back(static_cast<NodeId>(i));
  return out;
}

std::vector<NodeId> Tape::gradient(NodeId root, std::span<const NodeId> wrt) {
  if (!nodes_[root].value.is_scalar())
    throw std::invalid_argument("gradient: root must be scalar, got " +
                                nodes_[root].value.shape_str());

  // Adjoints for the pre-existing prefix only; nodes emitted during the
  // sweep are not themselves swept. Accumulation order is fixed by node
  // index, which keeps results bit-deterministic.
  std::vector<NodeId> adj(static_cast<size_t>(root) + 1, -1);
  adj[root] = constant(Tensor::scalar(1.0));

  auto accumulate = [&](NodeId target, NodeId contribution) {
    if (target > root) throw std::logic_error("gradient: adjoint of future node");
    adj[target] = (adj[target] < 0) ? contribution : add(adj[target], contribution);
  };

  for (NodeId i = root; i >= 0; --i) {
    const NodeId ga = adj[i];
    if (ga < 0) continue;
    // Copy the descriptor fields: emitting nodes may reallocate nodes_.
    struct {
      Op op;
      NodeId a, b;
      double alpha;
    } nd{nodes_[i].op, nodes_[i].a, nodes_[i].b, nodes_[i].alpha};
    switch (nd.op) {
      case Op::Leaf:
      case Op::Const:
      case Op::Step:
        break;
      case Op::Add:
        accumulate(nd.a, ga);
        accumulate(nd.b, ga);
        break;
      case Op::Sub:
        accumulate(nd.a, ga);
        accumulate(nd.b, scale(ga, -1.0));
        break;
      case Op::Mul:
        accumulate(nd.a, mul(ga, nd.b));
        accumulate(nd.b, mul(ga, nd.a));
        break;
      case Op::SafeDiv:
        // d/da = 1/b, d/db = -a/b^2 = -y/b; both zero where b == 0.
        accumulate(nd.a, safe_div(ga, nd.b));
        accumulate(nd.b, scale(mul(ga, safe_div(i, nd.b)), -1.0));
        break;
      case Op::MatMul:
        accumulate(nd.a, matmul(ga, transpose(nd.b)));
        accumulate(nd.b, matmul(transpose(nd.a), ga));
        break;
      case Op::Transpose:
        accumulate(nd.a, transpose(ga));
        break;
      case Op::Scale:
        accumulate(nd.a, scale(ga, nd.alpha));
        break;
      case Op::AddScalar:
        accumulate(nd.a, ga);
        break;
      case Op::Tanh: {
        // 1 - tanh^2, rebuilt from the Tanh node so it stays differentiable
        const NodeId one_minus_sq = add_scalar(scale(mul(i, i), -1.0), 1.0);
        accumulate(nd.a, mul(ga, one_minus_sq));
        break;
      }
      case Op::Sigmoid: {
        const NodeId one_minus = add_scalar(scale(i, -1.0), 1.0);
        accumulate(nd.a, mul(ga, mul(i, one_minus)));
        break;
      }
      case Op::Softplus:
        accumulate(nd.a, mul(ga, sigmoid_(nd.a)));
        break;
      case Op::Relu:
        accumulate(nd.a, mul(ga, step(nd.a)));
        break;
      case Op::Sqrt: {
        // d/da sqrt(a) = 1/(2 sqrt(a)); defined as 0 at a == 0
        // (subgradient choice for norms at the origin).
        const int yr = nodes_[i].value.rows(), yc = nodes_[i].value.cols();
        const NodeId ones = constant(Tensor::full(yr, yc, 1.0));
        accumulate(nd.a, mul(ga, scale(safe_div(ones, i), 0.5)));
        break;
      }
      case Op::Sum: {
        const Tensor& src = nodes_[nd.a].value;
        Node bc;
        bc.op = Op::FullBcast;
        bc.a = ga;
        bc.extent = src.cols();
        bc.r_extent = src.rows();
        accumulate(nd.a, push(std::move(bc)));
        break;
      }
      case Op::RowSum:
        accumulate(nd.a, row_bcast(ga, nodes_[nd.a].value.cols()));
        break;
      case Op::RowBcast:
        accumulate(nd.a, row_sum(ga));
        break;
      case Op::ColSum:
        accumulate(nd.a, col_bcast(ga, nodes_[nd.a].value.rows()));
        break;
      case Op::ColBcast:
        accumulate(nd.a, col_sum(ga));
        break;
      case Op::FullBcast:
        accumulate(nd.a, sum(ga));
        break;
    }
  }

  std::vector<NodeId> out;
  out.reserve(wrt.size());
  for (NodeId w : wrt) {
    if (w > root || adj[w] < 0) {
      // Root does not depend on this node: adjoint is identically zero.
      const Tensor& shape = nodes_[w].value;
      out.push_back(constant(Tensor::zeros(shape.rows(), shape.cols())));
    } else {
      out.push_back(adj[w]);
    }
  }
  return out;
}

Tensor forward_eval(Tape& tape, std::span<const std::pair<NodeId, Tensor>> bindings, NodeId root) {
  for (const auto& [leaf, v] : bindings) tape.set_leaf(leaf, v);
  tape.refresh(root);
  return tape.val(root);
}

std::vector<Tensor> param_grad(Tape& tape, NodeId root) {
  const std::vector<NodeId> leaves = tape.param_leaves();
  const std::vector<NodeId> adj = tape.gradient(root, leaves);
  std::vector<Tensor> out;
  out.reserve(adj.size());
  for (NodeId id : adj) out.push_back(tape.val(id));
  return out;
}

NodeId input_grad(Tape& tape, NodeId root, NodeId input_leaf) {
  if (!tape.is_leaf(input_leaf)) throw std::invalid_argument("input_grad: wrt is not a leaf");
  const NodeId wrt[1] = {input_leaf};
  return tape.gradient(root, wrt)[0];
}

double fd_check(Tape& tape, NodeId root, std::span<const NodeId> wrt, double h) {
  if (h <= 0.0) throw std::invalid_argument("fd_check: h must be positive");
  std::vector<NodeId> adj = tape.gradient(root, wrt);
  std::vector<Tensor> analytic;
  analytic.reserve(adj.size());
  for (NodeId id : adj) analytic.push_back(tape.val(id));

  double max_rel = 0.0;
  for (size_t w = 0; w < wrt.size(); ++w) {
    const Tensor base = tape.val(wrt[w]);
    Tensor probe = base;
    for (size_t i = 0; i < base.size(); ++i) {
      probe[i] = base[i] + h;
      tape.set_leaf(wrt[w], probe);
      tape.refresh(root);
      const double fplus = tape.val(root)[0];
      probe[i] = base[i] - h;
      tape.set_leaf(wrt[w], probe);
      tape.refresh(root);
      const double fminus = tape.val(root)[0];
      probe[i] = base[i];
      const double numeric = (fplus - fminus) / (2.0 * h);
      const double a = analytic[w][i];
      const double scale = std::max({1.0, std::fabs(a), std::fabs(numeric)});
      max_rel = std::max(max_rel, std::fabs(a - numeric) / scale);
    }
    tape.set_leaf(wrt[w], base);
  }
  tape.refresh();  // restore all values, including adjoint nodes
  return max_rel;
}

}  // namespace licfg
