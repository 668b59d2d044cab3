#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dopamine {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

/// Dense row-major tensor of 64-bit reals. The universal numeric carrier:
/// images, feature maps, kernels, masks and gradients are all Tensors.
///
/// Invariants: every extent is positive and product(shape) == data length.
/// A rank-0 tensor holds exactly one value and is used for scalars.
class Tensor {
 public:
  Tensor() : data_(1, 0.0) {}

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<std::size_t>(checked_numel(shape_)), 0.0);
  }

  Tensor(std::vector<int> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    require(static_cast<std::int64_t>(data_.size()) == checked_numel(shape_),
            "tensor: data length does not match shape");
  }

  static Tensor scalar(double v) {
    Tensor t;
    t.data_[0] = v;
    return t;
  }

  static Tensor full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    std::fill(t.data_.begin(), t.data_.end(), v);
    return t;
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int dim(int i) const { return shape_.at(static_cast<std::size_t>(i)); }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  double& operator()(int i0) { return data_[flat_index({i0})]; }
  double operator()(int i0) const { return data_[flat_index({i0})]; }
  double& operator()(int i0, int i1) { return data_[flat_index({i0, i1})]; }
  double operator()(int i0, int i1) const { return data_[flat_index({i0, i1})]; }
  double& operator()(int i0, int i1, int i2) { return data_[flat_index({i0, i1, i2})]; }
  double operator()(int i0, int i1, int i2) const { return data_[flat_index({i0, i1, i2})]; }
  double& operator()(int i0, int i1, int i2, int i3) { return data_[flat_index({i0, i1, i2, i3})]; }
  double operator()(int i0, int i1, int i2, int i3) const { return data_[flat_index({i0, i1, i2, i3})]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool all_finite() const;

 private:
  static std::int64_t checked_numel(const std::vector<int>& shape);
  std::size_t flat_index(std::initializer_list<int> idx) const;

  std::vector<int> shape_;
  std::vector<double> data_;
};

// Elementwise and reduction primitives. Binary ops require equal shapes.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor square(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor affine(const Tensor& a, double scale, double shift);
double mean(const Tensor& a);

/// (1/sqrt(N)) * sum of N same-shape tensors. N >= 1.
Tensor scale_add(std::span<const Tensor> inputs);
Tensor scale_add(const Tensor& a, const Tensor& b);

// Geometric primitives act on the last two dims (rank >= 2 required).
Tensor rotate180(const Tensor& a);
/// k quarter turns counterclockwise; swaps the last two extents for odd k.
Tensor rot90k(const Tensor& a, int k);
Tensor flip_h(const Tensor& a);
Tensor flip_v(const Tensor& a);

}  // namespace dopamine
