#include "dopamine/conv.hpp"

#include <algorithm>

#include "dopamine/runtime.hpp"

namespace dopamine {

ConvGeometry ConvGeometry::make(const Tensor& mask, int shift_y, int shift_x) {
  require(mask.rank() == 2, "conv2d: mask must be rank 2");
  ConvGeometry g;
  g.kh = mask.dim(0);
  g.kw = mask.dim(1);
  g.shift_y = shift_y;
  g.shift_x = shift_x;
  for (int u = 0; u < g.kh; ++u) {
    for (int v = 0; v < g.kw; ++v) {
      const double m = mask(u, v);
      require(m == 0.0 || m == 1.0, "conv2d: mask entries must be 0 or 1");
      if (m == 1.0) {
        g.taps.push_back({u, v, u - g.kh / 2 + shift_y, v - g.kw / 2 + shift_x});
      }
    }
  }
  return g;
}

namespace {

struct ConvDims {
  int cin, h, w, cout;
  std::int64_t plane;
};

ConvDims check_conv(const Tensor& input, const Tensor& kernel, const ConvGeometry& g) {
  require(input.rank() == 3, "conv2d: input must be [Cin,H,W]");
  require(kernel.rank() == 4, "conv2d: kernel must be [Cout,Cin,kh,kw]");
  require(kernel.dim(1) == input.dim(0), "conv2d: kernel Cin mismatch");
  require(kernel.dim(2) == g.kh && kernel.dim(3) == g.kw, "conv2d: mask shape mismatch");
  ConvDims d;
  d.cin = input.dim(0);
  d.h = input.dim(1);
  d.w = input.dim(2);
  d.cout = kernel.dim(0);
  d.plane = static_cast<std::int64_t>(d.h) * d.w;
  return d;
}

struct TapRange {
  int y0, y1, x0, x1;
};

inline TapRange valid_range(const ConvTap& t, int h, int w) {
  TapRange r;
  r.y0 = std::max(0, -t.dy);
  r.y1 = std::min(h, h - t.dy);
  r.x0 = std::max(0, -t.dx);
  r.x1 = std::min(w, w - t.dx);
  return r;
}

// Threading only pays off for sizable convolutions; small ones run serial,
// which also keeps outer parallel loops (e.g. field probing) from nesting.
constexpr std::int64_t kParallelWorkThreshold = std::int64_t{1} << 21;

void maybe_parallel(int n, std::int64_t work, const std::function<void(int, int)>& fn) {
  if (work >= kParallelWorkThreshold) {
    parallel_for(n, fn);
  } else {
    fn(0, n);
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& kernel, const ConvGeometry& g) {
  const ConvDims d = check_conv(input, kernel, g);
  Tensor out({d.cout, d.h, d.w});
  const double* in = input.data();
  const double* kn = kernel.data();
  double* op = out.data();
  const int ktaps = g.kh * g.kw;

  maybe_parallel(d.cout, static_cast<std::int64_t>(d.cout) * d.cin * static_cast<std::int64_t>(g.taps.size()) * d.plane, [&](int o_begin, int o_end) {
    for (int o = o_begin; o < o_end; ++o) {
      double* outp = op + static_cast<std::int64_t>(o) * d.plane;
      for (int c = 0; c < d.cin; ++c) {
        const double* inp = in + static_cast<std::int64_t>(c) * d.plane;
        const double* kp = kn + (static_cast<std::int64_t>(o) * d.cin + c) * ktaps;
        for (const ConvTap& t : g.taps) {
          const double wgt = kp[t.u * g.kw + t.v];
          const TapRange r = valid_range(t, d.h, d.w);
          for (int y = r.y0; y < r.y1; ++y) {
            const double* src = inp + static_cast<std::int64_t>(y + t.dy) * d.w + t.dx;
            double* dst = outp + static_cast<std::int64_t>(y) * d.w;
            for (int x = r.x0; x < r.x1; ++x) dst[x] += wgt * src[x];
          }
        }
      }
    }
  });
  return out;
}

Tensor conv2d(const Tensor& input, const Tensor& kernel, const Tensor& mask, int shift_y, int shift_x) {
  return conv2d(input, kernel, ConvGeometry::make(mask, shift_y, shift_x));
}

void conv2d_backward_input(Tensor& grad_input, const Tensor& kernel, const ConvGeometry& g,
                           const Tensor& grad_output) {
  require(grad_output.rank() == 3 && grad_input.rank() == 3, "conv2d backward: rank");
  const ConvDims d = check_conv(grad_input, kernel, g);
  require(grad_output.dim(0) == d.cout && grad_output.dim(1) == d.h && grad_output.dim(2) == d.w,
          "conv2d backward: grad_output shape mismatch");
  const double* go = grad_output.data();
  const double* kn = kernel.data();
  double* gi = grad_input.data();
  const int ktaps = g.kh * g.kw;

  // Each input channel owns a disjoint slice of grad_input, and the inner
  // accumulation order over (o, tap, y, x) is fixed.
  maybe_parallel(d.cin, static_cast<std::int64_t>(d.cout) * d.cin * static_cast<std::int64_t>(g.taps.size()) * d.plane, [&](int c_begin, int c_end) {
    for (int c = c_begin; c < c_end; ++c) {
      double* gip = gi + static_cast<std::int64_t>(c) * d.plane;
      for (int o = 0; o < d.cout; ++o) {
        const double* gop = go + static_cast<std::int64_t>(o) * d.plane;
        const double* kp = kn + (static_cast<std::int64_t>(o) * d.cin + c) * ktaps;
        for (const ConvTap& t : g.taps) {
          const double wgt = kp[t.u * g.kw + t.v];
          const TapRange r = valid_range(t, d.h, d.w);
          for (int y = r.y0; y < r.y1; ++y) {
            double* dst = gip + static_cast<std::int64_t>(y + t.dy) * d.w + t.dx;
            const double* src = gop + static_cast<std::int64_t>(y) * d.w;
            for (int x = r.x0; x < r.x1; ++x) dst[x] += wgt * src[x];
          }
        }
      }
    }
  });
}

void conv2d_backward_kernel(Tensor& grad_kernel, const Tensor& input, const ConvGeometry& g,
                            const Tensor& grad_output) {
  const ConvDims d = check_conv(input, grad_kernel, g);
  require(grad_output.dim(0) == d.cout && grad_output.dim(1) == d.h && grad_output.dim(2) == d.w,
          "conv2d backward: grad_output shape mismatch");
  const double* go = grad_output.data();
  const double* in = input.data();
  double* gk = grad_kernel.data();
  const int ktaps = g.kh * g.kw;

  maybe_parallel(d.cout, static_cast<std::int64_t>(d.cout) * d.cin * static_cast<std::int64_t>(g.taps.size()) * d.plane, [&](int o_begin, int o_end) {
    for (int o = o_begin; o < o_end; ++o) {
      const double* gop = go + static_cast<std::int64_t>(o) * d.plane;
      for (int c = 0; c < d.cin; ++c) {
        const double* inp = in + static_cast<std::int64_t>(c) * d.plane;
        double* gkp = gk + (static_cast<std::int64_t>(o) * d.cin + c) * ktaps;
        for (const ConvTap& t : g.taps) {
          const TapRange r = valid_range(t, d.h, d.w);
          double acc = 0.0;
          for (int y = r.y0; y < r.y1; ++y) {
            const double* src = inp + static_cast<std::int64_t>(y + t.dy) * d.w + t.dx;
            const double* grow = gop + static_cast<std::int64_t>(y) * d.w;
            for (int x = r.x0; x < r.x1; ++x) acc += src[x] * grow[x];
          }
          gkp[t.u * g.kw + t.v] += acc;
        }
      }
    }
  });
}

}  // namespace dopamine
