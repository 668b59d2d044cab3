#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dopamine/graph.hpp"
#include "dopamine/image.hpp"
#include "dopamine/tensor.hpp"

namespace dopamine {

/// Per-pixel affine despeckling coefficients: x_hat = a * Z + b.
/// Architecturally, (a_i, b_i) never depend on Z_i, only on its context.
struct AffineField {
  Tensor a;
  Tensor b;
};

/// One masked convolution with per-output-channel bias. The mask and shift
/// are architecture data, not trained state; they define which neighbor
/// offsets the kernel may read.
struct ConvLayer {
  Tensor w;     // [Cout,Cin,kh,kw]
  Tensor b;     // [Cout]
  Tensor mask;  // [kh,kw], entries 0/1
  int shift_y = 0;
  int shift_x = 0;
};

/// One causal ("left-up") block: vertical-stack conv, horizontal-stack input
/// conv (reads Z at layer 1, H_{l-1} afterwards) and the 1x1 bridge from the
/// vertical stack into the horizontal stack.
struct LuLayer {
  ConvLayer v;
  ConvLayer h_in;
  ConvLayer h_v;
};

struct ModelConfig {
  int num_layers = 21;
  int channels = 64;
};

/// Double-sided masked CNN. Two independent causal towers (LU, and RD
/// realized by 180-degree input/output rotation around an LU-shaped tower)
/// produce horizontal-stack maps H_1..H_L each; per layer the two sides are
/// fused with scale-add into S_l, all S_l are scale-added into one aggregate,
/// and a 1x1-only residual head emits the two output channels (a, b).
///
/// Receptive-field geometry per side and layer l: rows above grow one per
/// layer and the lateral extent grows one column per side, so S_l at an
/// interior pixel sees exactly the (2l+1)x(2l+1) window minus its center.
struct DopamineModel {
  int num_layers = 0;
  int channels = 0;
  std::vector<LuLayer> lu;
  std::vector<LuLayer> rd;
  ConvLayer head_r1;
  ConvLayer head_r2;
  ConvLayer head_out;

  /// Canonical architecture with all weights and biases zero.
  static DopamineModel create(const ModelConfig& config);

  /// All trainable tensors in fixed, documented order.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::pair<std::string, Tensor*>> named_parameters();
};

struct ForwardOptions {
  /// Replace every scale-add fusion with a plain addition (variance studies).
  bool plain_add = false;
};

/// Inference path: no gradient bookkeeping, intermediate maps are released
/// as soon as they are consumed. Requires H, W >= 3.
AffineField forward(const DopamineModel& model, const Image& z, const ForwardOptions& options = {});

struct TraceEntry {
  std::string name;
  Tensor map;
  /// RD-stack internals are computed on the rotated image; a map flagged
  /// rotated_frame holds pixel (y, x) of the original frame at
  /// (H-1-y, W-1-x).
  bool rotated_frame = false;
};

struct ForwardTrace {
  AffineField field;
  std::vector<TraceEntry> maps;
};

/// Same computation as forward() but keeps every named intermediate map
/// (per-layer stacks, fused maps, aggregate, head) for probing.
ForwardTrace forward_trace(const DopamineModel& model, const Image& z,
                           const ForwardOptions& options = {});

/// Graph-bound view of the model for training: one param leaf per tensor.
struct ConvNodes {
  Node w;
  Node b;
  const ConvLayer* layer = nullptr;
};

struct LuNodes {
  ConvNodes v;
  ConvNodes h_in;
  ConvNodes h_v;
};

struct ModelNodes {
  std::vector<LuNodes> lu;
  std::vector<LuNodes> rd;
  ConvNodes head_r1;
  ConvNodes head_r2;
  ConvNodes head_out;
  /// Same order as DopamineModel::parameters().
  std::vector<Node> flat;
};

ModelNodes bind_model(Graph& g, const DopamineModel& model);

struct ForwardNodes {
  Node a;
  Node b;
};

/// Builds the full forward computation on a graph. z must be a [1,H,W] node.
/// Several forwards may share one ModelNodes binding (their gradients then
/// accumulate on the shared leaves).
ForwardNodes forward_model(Graph& g, const ModelNodes& nodes, Node z,
                           const ForwardOptions& options = {});

}  // namespace dopamine
