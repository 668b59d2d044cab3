#pragma once

#include <vector>

#include "dopamine/conv.hpp"
#include "dopamine/tensor.hpp"

namespace dopamine {

/// Handle to a graph node. Only valid for the graph that created it.
struct Node {
  int id = -1;
};

/// Taped computation graph for one forward pass. Nodes are appended in
/// evaluation order (values are computed eagerly), which also fixes the
/// topological order used by backward(). Graphs are rebuilt per pass; a
/// graph instance is single-threaded, independent instances may run
/// concurrently.
class Graph {
 public:
  /// Leaf that never receives a gradient (inputs, frozen data).
  Node constant(Tensor value);
  /// Leaf that participates in backward() (weights, probed inputs).
  Node param(Tensor value);

  Node add(Node a, Node b);
  Node sub(Node a, Node b);
  Node mul(Node a, Node b);
  Node square(Node a);
  Node relu(Node a);
  /// scale * x + shift, elementwise with scalar coefficients.
  Node affine(Node a, double scale, double shift);
  /// Mean over all elements; returns a rank-0 scalar node.
  Node mean(Node a);
  Node scale_add(const std::vector<Node>& inputs);
  Node conv2d(Node input, Node kernel, const Tensor& mask, int shift_y, int shift_x);
  /// x [C,H,W] + bias [C], broadcast over the plane.
  Node bias_add(Node x, Node bias);
  /// Extracts channel c of a [C,H,W] tensor as [H,W].
  Node channel(Node x, int c);
  Node rotate180(Node a);
  Node rot90k(Node a, int k);
  Node flip_h(Node a);
  Node flip_v(Node a);

  const Tensor& value(Node n) const;
  /// Reverse-mode pass from a single-element loss node. Gradients are
  /// accumulated for every param leaf (and interior nodes) that the loss
  /// depends on; calling it twice restarts from scratch.
  void backward(Node loss);
  /// Gradient of the last backward() loss w.r.t. node n. Zero tensor if the
  /// loss does not depend on n.
  const Tensor& grad(Node n);

  std::size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kConstant,
    kParam,
    kAdd,
    kSub,
    kMul,
    kSquare,
    kRelu,
    kAffine,
    kMean,
    kScaleAdd,
    kConv2d,
    kBiasAdd,
    kChannel,
    kRot180,
    kRot90,
    kFlipH,
    kFlipV,
  };

  struct NodeRec {
    Op op;
    std::vector<int> inputs;
    Tensor value;
    Tensor grad;
    bool needs_grad = false;
    bool grad_live = false;   // grad allocated during the current backward
    double scale = 0.0;       // affine
    double shift = 0.0;       // affine
    int arg = 0;              // channel index / quarter turns
    ConvGeometry geom;        // conv2d
  };

  Node push(NodeRec rec);
  NodeRec& rec(Node n);
  const NodeRec& rec(Node n) const;
  Tensor& live_grad(int id);
  void backprop_into(NodeRec& node);

  std::vector<NodeRec> nodes_;
  bool ran_backward_ = false;
};

}  // namespace dopamine
