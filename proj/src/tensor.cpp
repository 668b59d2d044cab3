#include "dopamine/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace dopamine {

std::int64_t Tensor::checked_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    require(d > 0, "tensor: extents must be positive");
    n *= d;
  }
  return n;
}

std::size_t Tensor::flat_index(std::initializer_list<int> idx) const {
  require(static_cast<int>(idx.size()) == rank(), "tensor: index rank mismatch");
  std::size_t flat = 0;
  int axis = 0;
  for (int i : idx) {
    const int extent = shape_[static_cast<std::size_t>(axis)];
    require(i >= 0 && i < extent, "tensor: index out of range");
    flat = flat * static_cast<std::size_t>(extent) + static_cast<std::size_t>(i);
    ++axis;
  }
  return flat;
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  require(a.same_shape(b), std::string(op) + ": shape mismatch");
}

template <class F>
Tensor zip(const Tensor& a, const Tensor& b, F&& f, const char* op) {
  check_same_shape(a, b, op);
  Tensor out(a.shape());
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  const std::int64_t n = a.numel();
  for (std::int64_t i = 0; i < n; ++i) po[i] = f(pa[i], pb[i]);
  return out;
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return zip(a, b, [](double x, double y) { return x + y; }, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return zip(a, b, [](double x, double y) { return x - y; }, "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return zip(a, b, [](double x, double y) { return x * y; }, "mul");
}

Tensor square(const Tensor& a) {
  Tensor out(a.shape());
  const double* pa = a.data();
  double* po = out.data();
  for (std::int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = pa[i] * pa[i];
  return out;
}

Tensor relu(const Tensor& a) {
  Tensor out(a.shape());
  const double* pa = a.data();
  double* po = out.data();
  for (std::int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = pa[i] > 0.0 ? pa[i] : 0.0;
  return out;
}

Tensor affine(const Tensor& a, double scale, double shift) {
  Tensor out(a.shape());
  const double* pa = a.data();
  double* po = out.data();
  for (std::int64_t i = 0, n = a.numel(); i < n; ++i) po[i] = scale * pa[i] + shift;
  return out;
}

double mean(const Tensor& a) {
  double s = 0.0;
  const double* pa = a.data();
  for (std::int64_t i = 0, n = a.numel(); i < n; ++i) s += pa[i];
  return s / static_cast<double>(a.numel());
}

Tensor scale_add(std::span<const Tensor> inputs) {
  require(!inputs.empty(), "scale_add: needs at least one input");
  for (const Tensor& t : inputs) check_same_shape(inputs[0], t, "scale_add");
  Tensor out(inputs[0].shape());
  double* po = out.data();
  const std::int64_t n = out.numel();
  for (const Tensor& t : inputs) {
    const double* pt = t.data();
    for (std::int64_t i = 0; i < n; ++i) po[i] += pt[i];
  }
  const double inv = 1.0 / std::sqrt(static_cast<double>(inputs.size()));
  for (std::int64_t i = 0; i < n; ++i) po[i] *= inv;
  return out;
}

Tensor scale_add(const Tensor& a, const Tensor& b) {
  const Tensor pair[2] = {a, b};
  return scale_add(std::span<const Tensor>(pair, 2));
}

namespace {

struct SpatialView {
  std::int64_t planes;  // product of leading dims
  int h, w;
};

SpatialView spatial_view(const Tensor& a, const char* op) {
  require(a.rank() >= 2, std::string(op) + ": rank must be >= 2");
  SpatialView v;
  v.h = a.dim(a.rank() - 2);
  v.w = a.dim(a.rank() - 1);
  v.planes = a.numel() / (static_cast<std::int64_t>(v.h) * v.w);
  return v;
}

}  // namespace

Tensor rotate180(const Tensor& a) {
  const SpatialView v = spatial_view(a, "rotate180");
  Tensor out(a.shape());
  const std::int64_t plane = static_cast<std::int64_t>(v.h) * v.w;
  for (std::int64_t p = 0; p < v.planes; ++p) {
    const double* src = a.data() + p * plane;
    double* dst = out.data() + p * plane;
    for (std::int64_t i = 0; i < plane; ++i) dst[i] = src[plane - 1 - i];
  }
  return out;
}

Tensor rot90k(const Tensor& a, int k) {
  int q = k % 4;
  if (q < 0) q += 4;
  if (q == 0) return a;
  if (q == 2) return rotate180(a);
  const SpatialView v = spatial_view(a, "rot90k");
  std::vector<int> shape = a.shape();
  std::swap(shape[shape.size() - 1], shape[shape.size() - 2]);
  Tensor out(std::move(shape));
  const std::int64_t plane = static_cast<std::int64_t>(v.h) * v.w;
  for (std::int64_t p = 0; p < v.planes; ++p) {
    const double* src = a.data() + p * plane;
    double* dst = out.data() + p * plane;
    // q == 1: counterclockwise, out[x'][y'] with out height = w.
    for (int y = 0; y < v.h; ++y) {
      for (int x = 0; x < v.w; ++x) {
        if (q == 1) {
          dst[static_cast<std::int64_t>(v.w - 1 - x) * v.h + y] = src[static_cast<std::int64_t>(y) * v.w + x];
        } else {  // q == 3, clockwise
          dst[static_cast<std::int64_t>(x) * v.h + (v.h - 1 - y)] = src[static_cast<std::int64_t>(y) * v.w + x];
        }
      }
    }
  }
  return out;
}

Tensor flip_h(const Tensor& a) {
  const SpatialView v = spatial_view(a, "flip_h");
  Tensor out(a.shape());
  const std::int64_t plane = static_cast<std::int64_t>(v.h) * v.w;
  for (std::int64_t p = 0; p < v.planes; ++p) {
    const double* src = a.data() + p * plane;
    double* dst = out.data() + p * plane;
    for (int y = 0; y < v.h; ++y) {
      for (int x = 0; x < v.w; ++x) {
        dst[static_cast<std::int64_t>(y) * v.w + (v.w - 1 - x)] = src[static_cast<std::int64_t>(y) * v.w + x];
      }
    }
  }
  return out;
}

Tensor flip_v(const Tensor& a) {
  const SpatialView v = spatial_view(a, "flip_v");
  Tensor out(a.shape());
  const std::int64_t plane = static_cast<std::int64_t>(v.h) * v.w;
  for (std::int64_t p = 0; p < v.planes; ++p) {
    const double* src = a.data() + p * plane;
    double* dst = out.data() + p * plane;
    for (int y = 0; y < v.h; ++y) {
      const double* srow = src + static_cast<std::int64_t>(y) * v.w;
      double* drow = dst + static_cast<std::int64_t>(v.h - 1 - y) * v.w;
      for (int x = 0; x < v.w; ++x) drow[x] = srow[x];
    }
  }
  return out;
}

}  // namespace dopamine
