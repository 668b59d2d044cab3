#include "dopamine/model.hpp"

#include <cstdio>

#include "dopamine/conv.hpp"

namespace dopamine {

namespace {

Tensor ones_mask(int kh, int kw) { return Tensor::full({kh, kw}, 1.0); }

ConvLayer make_conv(int cout, int cin, Tensor mask, int shift_y = 0, int shift_x = 0) {
  ConvLayer cl;
  cl.mask = std::move(mask);
  cl.w = Tensor({cout, cin, cl.mask.dim(0), cl.mask.dim(1)});
  cl.b = Tensor({cout});
  cl.shift_y = shift_y;
  cl.shift_x = shift_x;
  return cl;
}

LuLayer make_lu_layer(int layer_index, int channels) {
  LuLayer l;
  if (layer_index == 0) {
    // Layer 1 reads the raw image. Both kernels are 3x3 with explicit masks
    // so that the certifier can probe arbitrary (un)maskings: the vertical
    // stack reads the row above, the horizontal stack reads the left
    // neighbor only.
    Tensor v_mask({3, 3});
    v_mask(0, 0) = v_mask(0, 1) = v_mask(0, 2) = 1.0;
    l.v = make_conv(channels, 1, std::move(v_mask));
    Tensor h_mask({3, 3});
    h_mask(1, 0) = 1.0;
    l.h_in = make_conv(channels, 1, std::move(h_mask));
  } else {
    // Vertical stack: rows {-1, 0} x columns {-1, 0, 1} of the previous
    // vertical map. Row 0 taps are causal because V_{l-1} already depends
    // only on rows strictly above; this is what lets every covered row keep
    // widening until the receptive field fills the half window.
    l.v = make_conv(channels, channels, ones_mask(2, 3));
    // Horizontal stack: columns {-1, 0} of the previous horizontal map.
    l.h_in = make_conv(channels, channels, ones_mask(1, 2));
  }
  l.h_v = make_conv(channels, channels, ones_mask(1, 1));
  return l;
}

}  // namespace

DopamineModel DopamineModel::create(const ModelConfig& config) {
  require(config.num_layers >= 1, "model: num_layers must be >= 1");
  require(config.channels >= 1, "model: channels must be >= 1");
  DopamineModel m;
  m.num_layers = config.num_layers;
  m.channels = config.channels;
  for (int i = 0; i < config.num_layers; ++i) {
    m.lu.push_back(make_lu_layer(i, config.channels));
    m.rd.push_back(make_lu_layer(i, config.channels));
  }
  m.head_r1 = make_conv(config.channels, config.channels, ones_mask(1, 1));
  m.head_r2 = make_conv(config.channels, config.channels, ones_mask(1, 1));
  m.head_out = make_conv(2, config.channels, ones_mask(1, 1));
  return m;
}

namespace {

template <class Fn>
void walk_params(DopamineModel& m, Fn&& fn) {
  const char* stacks[2] = {"lu", "rd"};
  for (int s = 0; s < 2; ++s) {
    std::vector<LuLayer>& layers = s == 0 ? m.lu : m.rd;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      char prefix[32];
      std::snprintf(prefix, sizeof(prefix), "%s.l%02zu", stacks[s], i + 1);
      const std::string base(prefix);
      fn(base + ".v.w", layers[i].v.w);
      fn(base + ".v.b", layers[i].v.b);
      fn(base + ".hin.w", layers[i].h_in.w);
      fn(base + ".hin.b", layers[i].h_in.b);
      fn(base + ".hv.w", layers[i].h_v.w);
      fn(base + ".hv.b", layers[i].h_v.b);
    }
  }
  fn("head.r1.w", m.head_r1.w);
  fn("head.r1.b", m.head_r1.b);
  fn("head.r2.w", m.head_r2.w);
  fn("head.r2.b", m.head_r2.b);
  fn("head.out.w", m.head_out.w);
  fn("head.out.b", m.head_out.b);
}

}  // namespace

std::vector<Tensor*> DopamineModel::parameters() {
  std::vector<Tensor*> out;
  walk_params(*this, [&](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> DopamineModel::parameters() const {
  std::vector<const Tensor*> out;
  walk_params(const_cast<DopamineModel&>(*this),
              [&](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<std::pair<std::string, Tensor*>> DopamineModel::named_parameters() {
  std::vector<std::pair<std::string, Tensor*>> out;
  walk_params(*this, [&](const std::string& name, Tensor& t) { out.emplace_back(name, &t); });
  return out;
}

// ---------------------------------------------------------------------------
// Plain (inference) forward.

namespace {

Tensor conv_bias(const Tensor& in, const ConvLayer& cl) {
  Tensor out = conv2d(in, cl.w, ConvGeometry::make(cl.mask, cl.shift_y, cl.shift_x));
  const std::int64_t plane = static_cast<std::int64_t>(out.dim(1)) * out.dim(2);
  for (int c = 0; c < out.dim(0); ++c) {
    const double b = cl.b[c];
    double* p = out.data() + c * plane;
    for (std::int64_t i = 0; i < plane; ++i) p[i] += b;
  }
  return out;
}

Tensor fuse2(const Tensor& a, const Tensor& b, bool plain_add) {
  return plain_add ? add(a, b) : scale_add(a, b);
}

Tensor fuse_all(const std::vector<Tensor>& maps, bool plain_add) {
  if (!plain_add) return scale_add(std::span<const Tensor>(maps.data(), maps.size()));
  Tensor acc = maps[0];
  for (std::size_t i = 1; i < maps.size(); ++i) acc = add(acc, maps[i]);
  return acc;
}

struct StackResult {
  std::vector<Tensor> h;  // H_1..H_L of this tower, in its own frame
};

StackResult run_stack(const std::vector<LuLayer>& layers, const Tensor& z3, bool plain_add,
                      std::vector<TraceEntry>* trace, const char* stack_name, bool rotated) {
  StackResult out;
  Tensor v_prev;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LuLayer& l = layers[i];
    const Tensor& v_src = i == 0 ? z3 : v_prev;
    const Tensor& h_src = i == 0 ? z3 : out.h[i - 1];
    Tensor v = relu(conv_bias(v_src, l.v));
    Tensor h = relu(fuse2(conv_bias(h_src, l.h_in), conv_bias(v, l.h_v), plain_add));
    if (trace != nullptr) {
      char name[32];
      std::snprintf(name, sizeof(name), "%s.l%02zu.v", stack_name, i + 1);
      trace->push_back({name, v, rotated});
      std::snprintf(name, sizeof(name), "%s.l%02zu.h", stack_name, i + 1);
      trace->push_back({name, h, rotated});
    }
    v_prev = std::move(v);
    out.h.push_back(std::move(h));
  }
  return out;
}

ForwardTrace run_model(const DopamineModel& model, const Image& z, const ForwardOptions& options,
                       bool want_trace) {
  require(model.num_layers >= 1 && !model.lu.empty(), "forward: model is empty");
  require(z.height() >= 3 && z.width() >= 3, "forward: image must be at least 3x3");
  ForwardTrace result;
  std::vector<TraceEntry>* trace = want_trace ? &result.maps : nullptr;

  Tensor z3({1, z.height(), z.width()}, z.pixels.values());
  StackResult lu = run_stack(model.lu, z3, options.plain_add, trace, "lu", false);
  StackResult rd = run_stack(model.rd, rotate180(z3), options.plain_add, trace, "rd", true);

  std::vector<Tensor> s;
  s.reserve(lu.h.size());
  for (std::size_t i = 0; i < lu.h.size(); ++i) {
    s.push_back(fuse2(lu.h[i], rotate180(rd.h[i]), options.plain_add));
    if (trace != nullptr) {
      char name[32];
      std::snprintf(name, sizeof(name), "s.l%02zu", i + 1);
      trace->push_back({name, s.back(), false});
    }
  }
  lu.h.clear();
  rd.h.clear();

  Tensor agg = fuse_all(s, options.plain_add);
  s.clear();
  Tensor r1 = relu(conv_bias(agg, model.head_r1));
  Tensor r2 = relu(conv_bias(r1, model.head_r2));
  Tensor out = conv_bias(fuse2(agg, r2, options.plain_add), model.head_out);
  if (trace != nullptr) {
    trace->push_back({"aggregate", agg, false});
    trace->push_back({"head.r1", r1, false});
    trace->push_back({"head.r2", r2, false});
    trace->push_back({"head.out", out, false});
  }

  const int h = z.height(), w = z.width();
  const std::int64_t plane = static_cast<std::int64_t>(h) * w;
  Tensor a({h, w}), b({h, w});
  std::copy(out.data(), out.data() + plane, a.data());
  std::copy(out.data() + plane, out.data() + 2 * plane, b.data());
  result.field = AffineField{std::move(a), std::move(b)};
  return result;
}

}  // namespace

AffineField forward(const DopamineModel& model, const Image& z, const ForwardOptions& options) {
  return run_model(model, z, options, false).field;
}

ForwardTrace forward_trace(const DopamineModel& model, const Image& z, const ForwardOptions& options) {
  return run_model(model, z, options, true);
}

// ---------------------------------------------------------------------------
// Graph (training) forward.

namespace {

ConvNodes bind_conv(Graph& g, const ConvLayer& cl, std::vector<Node>& flat) {
  ConvNodes n;
  n.w = g.param(cl.w);
  n.b = g.param(cl.b);
  n.layer = &cl;
  flat.push_back(n.w);
  flat.push_back(n.b);
  return n;
}

Node conv_bias_node(Graph& g, Node in, const ConvNodes& cn) {
  Node c = g.conv2d(in, cn.w, cn.layer->mask, cn.layer->shift_y, cn.layer->shift_x);
  return g.bias_add(c, cn.b);
}

Node fuse2_node(Graph& g, Node a, Node b, bool plain_add) {
  return plain_add ? g.add(a, b) : g.scale_add({a, b});
}

std::vector<Node> run_stack_nodes(Graph& g, const std::vector<LuNodes>& layers, Node z3,
                                  bool plain_add) {
  std::vector<Node> hs;
  Node v_prev;
  Node h_prev;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LuNodes& l = layers[i];
    const Node v_src = i == 0 ? z3 : v_prev;
    const Node h_src = i == 0 ? z3 : h_prev;
    Node v = g.relu(conv_bias_node(g, v_src, l.v));
    Node h = g.relu(fuse2_node(g, conv_bias_node(g, h_src, l.h_in), conv_bias_node(g, v, l.h_v),
                               plain_add));
    v_prev = v;
    h_prev = h;
    hs.push_back(h);
  }
  return hs;
}

}  // namespace

ModelNodes bind_model(Graph& g, const DopamineModel& model) {
  ModelNodes n;
  for (const LuLayer& l : model.lu) {
    LuNodes ln;
    ln.v = bind_conv(g, l.v, n.flat);
    ln.h_in = bind_conv(g, l.h_in, n.flat);
    ln.h_v = bind_conv(g, l.h_v, n.flat);
    n.lu.push_back(ln);
  }
  for (const LuLayer& l : model.rd) {
    LuNodes ln;
    ln.v = bind_conv(g, l.v, n.flat);
    ln.h_in = bind_conv(g, l.h_in, n.flat);
    ln.h_v = bind_conv(g, l.h_v, n.flat);
    n.rd.push_back(ln);
  }
  n.head_r1 = bind_conv(g, model.head_r1, n.flat);
  n.head_r2 = bind_conv(g, model.head_r2, n.flat);
  n.head_out = bind_conv(g, model.head_out, n.flat);
  return n;
}

ForwardNodes forward_model(Graph& g, const ModelNodes& nodes, Node z, const ForwardOptions& options) {
  const Tensor& zv = g.value(z);
  require(zv.rank() == 3 && zv.dim(0) == 1, "forward_model: z must be [1,H,W]");
  require(zv.dim(1) >= 3 && zv.dim(2) >= 3, "forward: image must be at least 3x3");

  std::vector<Node> lu_h = run_stack_nodes(g, nodes.lu, z, options.plain_add);
  std::vector<Node> rd_h = run_stack_nodes(g, nodes.rd, g.rotate180(z), options.plain_add);

  std::vector<Node> s;
  s.reserve(lu_h.size());
  for (std::size_t i = 0; i < lu_h.size(); ++i) {
    s.push_back(fuse2_node(g, lu_h[i], g.rotate180(rd_h[i]), options.plain_add));
  }
  Node agg;
  if (options.plain_add) {
    agg = s[0];
    for (std::size_t i = 1; i < s.size(); ++i) agg = g.add(agg, s[i]);
  } else {
    agg = g.scale_add(s);
  }
  Node r1 = g.relu(conv_bias_node(g, agg, nodes.head_r1));
  Node r2 = g.relu(conv_bias_node(g, r1, nodes.head_r2));
  Node out = conv_bias_node(g, fuse2_node(g, agg, r2, options.plain_add), nodes.head_out);
  ForwardNodes fn;
  fn.a = g.channel(out, 0);
  fn.b = g.channel(out, 1);
  return fn;
}

}  // namespace dopamine
