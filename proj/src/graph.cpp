#include "dopamine/graph.hpp"

#include <cmath>

namespace dopamine {

Node Graph::push(NodeRec r) {
  nodes_.push_back(std::move(r));
  return Node{static_cast<int>(nodes_.size()) - 1};
}

Graph::NodeRec& Graph::rec(Node n) {
  require(n.id >= 0 && n.id < static_cast<int>(nodes_.size()), "graph: invalid node handle");
  return nodes_[static_cast<std::size_t>(n.id)];
}

const Graph::NodeRec& Graph::rec(Node n) const {
  require(n.id >= 0 && n.id < static_cast<int>(nodes_.size()), "graph: invalid node handle");
  return nodes_[static_cast<std::size_t>(n.id)];
}

Node Graph::constant(Tensor value) {
  NodeRec r;
  r.op = Op::kConstant;
  r.value = std::move(value);
  return push(std::move(r));
}

Node Graph::param(Tensor value) {
  NodeRec r;
  r.op = Op::kParam;
  r.value = std::move(value);
  r.needs_grad = true;
  return push(std::move(r));
}

Node Graph::add(Node a, Node b) {
  NodeRec r;
  r.op = Op::kAdd;
  r.value = dopamine::add(rec(a).value, rec(b).value);
  r.inputs = {a.id, b.id};
  r.needs_grad = rec(a).needs_grad || rec(b).needs_grad;
  return push(std::move(r));
}

Node Graph::sub(Node a, Node b) {
  NodeRec r;
  r.op = Op::kSub;
  r.value = dopamine::sub(rec(a).value, rec(b).value);
  r.inputs = {a.id, b.id};
  r.needs_grad = rec(a).needs_grad || rec(b).needs_grad;
  return push(std::move(r));
}

Node Graph::mul(Node a, Node b) {
  NodeRec r;
  r.op = Op::kMul;
  r.value = dopamine::mul(rec(a).value, rec(b).value);
  r.inputs = {a.id, b.id};
  r.needs_grad = rec(a).needs_grad || rec(b).needs_grad;
  return push(std::move(r));
}

Node Graph::square(Node a) {
  NodeRec r;
  r.op = Op::kSquare;
  r.value = dopamine::square(rec(a).value);
  r.inputs = {a.id};
  r.needs_grad = rec(a).needs_grad;
  return push(std::move(r));
}

Node Graph::relu(Node a) {
  NodeRec r;
  r.op = Op::kRelu;
  r.value = dopamine::relu(rec(a).value);
  r.inputs = {a.id};
  r.needs_grad = rec(a).needs_grad;
  return push(std::move(r));
}

Node Graph::affine(Node a, double scale, double shift) {
  NodeRec r;
  r.op = Op::kAffine;
  r.value = dopamine::affine(rec(a).value, scale, shift);
  r.inputs = {a.id};
  r.scale = scale;
  r.shift = shift;
  r.needs_grad = rec(a).needs_grad;
  return push(std::move(r));
}

Node Graph::mean(Node a) {
  NodeRec r;
  r.op = Op::kMean;
  r.value = Tensor::scalar(dopamine::mean(rec(a).value));
  r.inputs = {a.id};
  r.needs_grad = rec(a).needs_grad;
  return push(std::move(r));
}

Node Graph::scale_add(const std::vector<Node>& inputs) {
  require(!inputs.empty(), "scale_add: needs at least one input");
  std::vector<Tensor> vals;
  vals.reserve(inputs.size());
  NodeRec r;
  r.op = Op::kScaleAdd;
  for (Node n : inputs) {
    vals.push_back(rec(n).value);
    r.inputs.push_back(n.id);
    r.needs_grad = r.needs_grad || rec(n).needs_grad;
  }
  r.value = dopamine::scale_add(std::span<const Tensor>(vals.data(), vals.size()));
  return push(std::move(r));
}

Node Graph::conv2d(Node input, Node kernel, const Tensor& mask, int shift_y, int shift_x) {
  NodeRec r;
  r.op = Op::kConv2d;
  r.geom = ConvGeometry::make(mask, shift_y, shift_x);
  r.value = dopamine::conv2d(rec(input).value, rec(kernel).value, r.geom);
  r.inputs = {input.id, kernel.id};
  r.needs_grad = rec(input).needs_grad || rec(kernel).needs_grad;
  return push(std::move(r));
}

Node Graph::bias_add(Node x, Node bias) {
  const Tensor& xv = rec(x).value;
  const Tensor& bv = rec(bias).value;
  require(xv.rank() == 3, "bias_add: input must be [C,H,W]");
  require(bv.rank() == 1 && bv.dim(0) == xv.dim(0), "bias_add: bias must be [C]");
  NodeRec r;
  r.op = Op::kBiasAdd;
  Tensor out = xv;
  const std::int64_t plane = static_cast<std::int64_t>(xv.dim(1)) * xv.dim(2);
  for (int c = 0; c < xv.dim(0); ++c) {
    double* p = out.data() + c * plane;
    const double b = bv[c];
    for (std::int64_t i = 0; i < plane; ++i) p[i] += b;
  }
  r.value = std::move(out);
  r.inputs = {x.id, bias.id};
  r.needs_grad = rec(x).needs_grad || rec(bias).needs_grad;
  return push(std::move(r));
}

Node Graph::channel(Node x, int c) {
  const Tensor& xv = rec(x).value;
  require(xv.rank() == 3, "channel: input must be [C,H,W]");
  require(c >= 0 && c < xv.dim(0), "channel: index out of range");
  NodeRec r;
  r.op = Op::kChannel;
  r.arg = c;
  const int h = xv.dim(1), w = xv.dim(2);
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  Tensor out({h, w});
  const double* src = xv.data() + c * plane;
  std::copy(src, src + plane, out.data());
  r.value = std::move(out);
  r.inputs = {x.id};
  r.needs_grad = rec(x).needs_grad;
  return push(std::move(r));
}

Node Graph::rotate180(Node a) {
  NodeRec r;
  r.op = Op::kRot180;
  r.value = dopamine::rotate180(rec(a).value);
  r.inputs = {a.id};
  r.needs_grad = rec(a).needs_grad;
  return push(std::move(r));
}

Node Graph::rot90k(Node a, int k) {
  NodeRec r;
  r.op = Op::kRot90;
  r.arg = ((k % 4) + 4) % 4;
  r.value = dopamine::rot90k(rec(a).value, k);
  r.inputs = {a.id};
  r.needs_grad = rec(a).needs_grad;
  return push(std::move(r));
}

Node Graph::flip_h(Node a) {
  NodeRec r;
  r.op = Op::kFlipH;
  r.value = dopamine::flip_h(rec(a).value);
  r.inputs = {a.id};
  r.needs_grad = rec(a).needs_grad;
  return push(std::move(r));
}

Node Graph::flip_v(Node a) {
  NodeRec r;
  r.op = Op::kFlipV;
  r.value = dopamine::flip_v(rec(a).value);
  r.inputs = {a.id};
  r.needs_grad = rec(a).needs_grad;
  return push(std::move(r));
}

const Tensor& Graph::value(Node n) const { return rec(n).value; }

Tensor& Graph::live_grad(int id) {
  NodeRec& r = nodes_[static_cast<std::size_t>(id)];
  if (!r.grad_live) {
    r.grad = Tensor(r.value.shape());
    r.grad_live = true;
  }
  return r.grad;
}

void Graph::backward(Node loss) {
  NodeRec& top = rec(loss);
  require(top.value.numel() == 1, "backward: loss must be a scalar node");
  for (NodeRec& r : nodes_) r.grad_live = false;
  ran_backward_ = true;
  live_grad(loss.id)[0] = 1.0;
  for (int id = loss.id; id >= 0; --id) {
    NodeRec& node = nodes_[static_cast<std::size_t>(id)];
    if (!node.grad_live || !node.needs_grad) continue;
    backprop_into(node);
  }
}

void Graph::backprop_into(NodeRec& node) {
  const Tensor& g = node.grad;
  switch (node.op) {
    case Op::kConstant:
    case Op::kParam:
      return;
    case Op::kAdd: {
      for (int side = 0; side < 2; ++side) {
        NodeRec& in = nodes_[static_cast<std::size_t>(node.inputs[side])];
        if (!in.needs_grad) continue;
        Tensor& gi = live_grad(node.inputs[side]);
        for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] += g[i];
      }
      return;
    }
    case Op::kSub: {
      if (nodes_[static_cast<std::size_t>(node.inputs[0])].needs_grad) {
        Tensor& gi = live_grad(node.inputs[0]);
        for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] += g[i];
      }
      if (nodes_[static_cast<std::size_t>(node.inputs[1])].needs_grad) {
        Tensor& gi = live_grad(node.inputs[1]);
        for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] -= g[i];
      }
      return;
    }
    case Op::kMul: {
      const Tensor& a = nodes_[static_cast<std::size_t>(node.inputs[0])].value;
      const Tensor& b = nodes_[static_cast<std::size_t>(node.inputs[1])].value;
      if (nodes_[static_cast<std::size_t>(node.inputs[0])].needs_grad) {
        Tensor& gi = live_grad(node.inputs[0]);
        for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] += g[i] * b[i];
      }
      if (nodes_[static_cast<std::size_t>(node.inputs[1])].needs_grad) {
        Tensor& gi = live_grad(node.inputs[1]);
        for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] += g[i] * a[i];
      }
      return;
    }
    case Op::kSquare: {
      const Tensor& a = nodes_[static_cast<std::size_t>(node.inputs[0])].value;
      Tensor& gi = live_grad(node.inputs[0]);
      for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] += 2.0 * a[i] * g[i];
      return;
    }
    case Op::kRelu: {
      const Tensor& a = nodes_[static_cast<std::size_t>(node.inputs[0])].value;
      Tensor& gi = live_grad(node.inputs[0]);
      for (std::int64_t i = 0, n = g.numel(); i < n; ++i) {
        if (a[i] > 0.0) gi[i] += g[i];
      }
      return;
    }
    case Op::kAffine: {
      Tensor& gi = live_grad(node.inputs[0]);
      for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] += node.scale * g[i];
      return;
    }
    case Op::kMean: {
      Tensor& gi = live_grad(node.inputs[0]);
      const double s = g[0] / static_cast<double>(gi.numel());
      for (std::int64_t i = 0, n = gi.numel(); i < n; ++i) gi[i] += s;
      return;
    }
    case Op::kScaleAdd: {
      const double inv = 1.0 / std::sqrt(static_cast<double>(node.inputs.size()));
      for (int in_id : node.inputs) {
        if (!nodes_[static_cast<std::size_t>(in_id)].needs_grad) continue;
        Tensor& gi = live_grad(in_id);
        for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] += inv * g[i];
      }
      return;
    }
    case Op::kConv2d: {
      NodeRec& in = nodes_[static_cast<std::size_t>(node.inputs[0])];
      NodeRec& kn = nodes_[static_cast<std::size_t>(node.inputs[1])];
      if (in.needs_grad) {
        conv2d_backward_input(live_grad(node.inputs[0]), kn.value, node.geom, g);
      }
      if (kn.needs_grad) {
        conv2d_backward_kernel(live_grad(node.inputs[1]), in.value, node.geom, g);
      }
      return;
    }
    case Op::kBiasAdd: {
      const Tensor& xv = nodes_[static_cast<std::size_t>(node.inputs[0])].value;
      const std::int64_t plane = static_cast<std::int64_t>(xv.dim(1)) * xv.dim(2);
      if (nodes_[static_cast<std::size_t>(node.inputs[0])].needs_grad) {
        Tensor& gi = live_grad(node.inputs[0]);
        for (std::int64_t i = 0, n = g.numel(); i < n; ++i) gi[i] += g[i];
      }
      if (nodes_[static_cast<std::size_t>(node.inputs[1])].needs_grad) {
        Tensor& gb = live_grad(node.inputs[1]);
        for (int c = 0; c < xv.dim(0); ++c) {
          const double* gp = g.data() + c * plane;
          double acc = 0.0;
          for (std::int64_t i = 0; i < plane; ++i) acc += gp[i];
          gb[c] += acc;
        }
      }
      return;
    }
    case Op::kChannel: {
      const Tensor& xv = nodes_[static_cast<std::size_t>(node.inputs[0])].value;
      const std::int64_t plane = static_cast<std::int64_t>(xv.dim(1)) * xv.dim(2);
      Tensor& gi = live_grad(node.inputs[0]);
      double* dst = gi.data() + node.arg * plane;
      for (std::int64_t i = 0; i < plane; ++i) dst[i] += g[i];
      return;
    }
    case Op::kRot180: {
      Tensor back = dopamine::rotate180(g);
      Tensor& gi = live_grad(node.inputs[0]);
      for (std::int64_t i = 0, n = back.numel(); i < n; ++i) gi[i] += back[i];
      return;
    }
    case Op::kRot90: {
      Tensor back = dopamine::rot90k(g, -node.arg);
      Tensor& gi = live_grad(node.inputs[0]);
      for (std::int64_t i = 0, n = back.numel(); i < n; ++i) gi[i] += back[i];
      return;
    }
    case Op::kFlipH: {
      Tensor back = dopamine::flip_h(g);
      Tensor& gi = live_grad(node.inputs[0]);
      for (std::int64_t i = 0, n = back.numel(); i < n; ++i) gi[i] += back[i];
      return;
    }
    case Op::kFlipV: {
      Tensor back = dopamine::flip_v(g);
      Tensor& gi = live_grad(node.inputs[0]);
      for (std::int64_t i = 0, n = back.numel(); i < n; ++i) gi[i] += back[i];
      return;
    }
  }
}

const Tensor& Graph::grad(Node n) {
  NodeRec& r = rec(n);
  require(ran_backward_, "grad: backward() has not run");
  require(r.needs_grad, "grad: node does not track gradients");
  if (!r.grad_live) {
    // Loss does not depend on this node; report a zero tensor of its shape.
    r.grad = Tensor(r.value.shape());
    r.grad_live = true;
  }
  return r.grad;
}

}  // namespace dopamine
