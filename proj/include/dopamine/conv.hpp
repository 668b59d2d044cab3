#pragma once

#include <vector>

#include "dopamine/tensor.hpp"

namespace dopamine {

/// One active kernel tap: position (u, v) inside the kernel and the input
/// offset (dy, dx) it reads, already combined with the kernel shift.
struct ConvTap {
  int u, v, dy, dx;
};

/// Geometry of a masked, shifted convolution. Tap (u, v) with mask(u,v) = 1
/// reads the input at (y + u - kh/2 + shift_y, x + v - kw/2 + shift_x);
/// reads outside the image contribute zero (zero padding).
struct ConvGeometry {
  int kh = 1;
  int kw = 1;
  int shift_y = 0;
  int shift_x = 0;
  std::vector<ConvTap> taps;

  /// Validates the mask (entries must be exactly 0 or 1) and collects taps.
  static ConvGeometry make(const Tensor& mask, int shift_y, int shift_x);
};

/// input [Cin,H,W] * kernel [Cout,Cin,kh,kw] -> [Cout,H,W], same spatial size.
Tensor conv2d(const Tensor& input, const Tensor& kernel, const ConvGeometry& geom);
Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& mask, int shift_y, int shift_x);

/// Accumulates d(loss)/d(input) into grad_input (same shape as input).
void conv2d_backward_input(Tensor& grad_input, const Tensor& kernel, const ConvGeometry& geom,
                           const Tensor& grad_output);

/// Accumulates d(loss)/d(kernel) into grad_kernel (same shape as kernel).
void conv2d_backward_kernel(Tensor& grad_kernel, const Tensor& input, const ConvGeometry& geom,
                            const Tensor& grad_output);

}  // namespace dopamine
