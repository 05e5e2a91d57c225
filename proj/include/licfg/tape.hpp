#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "licfg/tensor.hpp"

namespace licfg {

using NodeId = int32_t;

enum class Op : uint8_t {
  Leaf,       // bound value; param or input
  Const,      // fixed value
  Add,        // a + b elementwise
  Sub,        // a - b elementwise
  Mul,        // a * b elementwise
  SafeDiv,    // a / b elementwise, 0 where b == 0
  MatMul,     // [n,k] x [k,m]
  Transpose,  //
  Scale,      // a * alpha
  AddScalar,  // a + alpha
  Tanh,
  Sigmoid,
  Softplus,   // ln(1+exp(a)), overflow-stable
  Relu,
  Step,       // 1 where a > 0 else 0 (relu derivative; its own derivative is 0)
  Sqrt,
  Sum,        // all entries -> scalar
  RowSum,     // [n,d] -> [n,1]
  RowBcast,   // [n,1] -> [n,extent]
  ColSum,     // [n,d] -> [1,d]
  ColBcast,   // [1,d] -> [extent,d]
  FullBcast,  // [1,1] -> [r_extent, extent]
};

struct Node {
  Op op = Op::Const;
  bool is_param = false;  // meaningful for Leaf only
  NodeId a = -1;
  NodeId b = -1;
  double alpha = 0.0;
  int extent = 0;    // broadcast column/row count
  int r_extent = 0;  // FullBcast row count
  Tensor value;
};

// Recording computation graph. Values are computed eagerly as nodes are
// appended, in topological (append) order. A reverse sweep emits adjoint
// nodes onto the same tape, so gradients are themselves differentiable:
// input gradients of a network can feed penalty expressions whose
// parameter gradients are then taken with a second sweep.
//
// A tape is single-owner while recording; independent tapes can be
// evaluated concurrently.
class Tape {
 public:
  NodeId param(Tensor v);
  NodeId input(Tensor v);
  NodeId constant(Tensor v);

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId safe_div(NodeId a, NodeId b);
  NodeId matmul(NodeId a, NodeId b);
  NodeId transpose(NodeId a);
  NodeId scale(NodeId a, double alpha);
  NodeId add_scalar(NodeId a, double alpha);
  NodeId tanh_(NodeId a);
  NodeId sigmoid_(NodeId a);
  NodeId softplus(NodeId a);
  NodeId relu(NodeId a);
  NodeId step(NodeId a);
  NodeId sqrt_(NodeId a);
  NodeId sum(NodeId a);
  NodeId row_sum(NodeId a);
  NodeId row_bcast(NodeId a, int cols);
  NodeId col_sum(NodeId a);
  NodeId col_bcast(NodeId a, int rows);

  // mean over all entries; sum scaled by 1/size
  NodeId mean(NodeId a);

  const Tensor& val(NodeId id) const { return nodes_[id].value; }
  const Node& node(NodeId id) const { return nodes_[id]; }
  size_t size() const { return nodes_.size(); }
  bool is_leaf(NodeId id) const { return nodes_[id].op == Op::Leaf; }

  // Rebind a leaf and recompute every node up to and including `upto`
  // (-1 = whole tape). Used by finite-difference checks.
  void set_leaf(NodeId leaf, Tensor v);
  void refresh(NodeId upto = -1);

  // Reverse sweep from a scalar root. Returns adjoint node ids aligned
  // with `wrt`; entries are -1 for nodes the root does not depend on.
  // Emitted adjoint nodes are ordinary nodes and may be consumed by
  // further recorded operations (closure under differentiation).
  std::vector<NodeId> gradient(NodeId root, std::span<const NodeId> wrt);

  // All parameter leaves, in creation order.
  std::vector<NodeId> param_leaves() const;

 private:
  std::vector<Node> nodes_;
  NodeId push(Node n);
  void compute(Node& n) const;
  void check_same_shape(NodeId a, NodeId b, const char* what) const;
};

// Evaluate the root of a tape after binding the given leaves.
Tensor forward_eval(Tape& tape, std::span<const std::pair<NodeId, Tensor>> bindings, NodeId root);

// Adjoints of the scalar `root` with respect to every parameter leaf.
// Returned tensors align with tape.param_leaves().
std::vector<Tensor> param_grad(Tape& tape, NodeId root);

// Gradient of scalar `root` w.r.t. an input leaf, as a recordable node.
NodeId input_grad(Tape& tape, NodeId root, NodeId input_leaf);

// Max relative error between the analytic gradient of `root` w.r.t. the
// given leaves and central finite differences with step h. The root may
// itself contain adjoint nodes, in which case this checks second-order
// results. Relative error uses max(1, |analytic|, |numeric|) as scale.
double fd_check(Tape& tape, NodeId root, std::span<const NodeId> wrt, double h);

}  // namespace licfg
