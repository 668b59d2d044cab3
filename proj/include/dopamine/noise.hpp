#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dopamine/image.hpp"
#include "dopamine/rng.hpp"
#include "dopamine/tensor.hpp"

namespace dopamine {

/// Unit-mean multiplicative Gamma noise: samples are Gamma(shape=L, rate=L),
/// so E[N] = 1 and Var[N] = 1/L. The variance is always derived from L.
struct GammaNoiseModel {
  double looks;
  std::uint64_t rng_seed;

  explicit GammaNoiseModel(double looks_, std::uint64_t seed = 0) : looks(looks_), rng_seed(seed) {
    require(looks > 0.0, "gamma noise: looks must be positive");
  }

  double variance() const { return 1.0 / looks; }
};

/// i.i.d. draws from the model, bitwise reproducible from model.rng_seed.
Tensor sample_noise(const GammaNoiseModel& model, const std::vector<int>& shape);

/// Fills out with Gamma(L, L) draws from an existing stream.
void fill_gamma(Rng& rng, double looks, Tensor& out);

/// Z = x * N elementwise. Never clips: noisy pixels may exceed 1.
Image apply_noise(const Image& clean, const Tensor& noise);

struct PatchRef {
  int image_id;
  int row;
  int col;
};

struct PatchSet {
  int patch_size = 0;
  std::vector<Image> patches;
  std::vector<PatchRef> refs;

  std::size_t size() const { return patches.size(); }
};

/// All size x size patches at offsets (r*stride, c*stride) fully inside the
/// image; count = (floor((H-size)/stride)+1) * (floor((W-size)/stride)+1).
PatchSet extract_patches(const Image& image, int size, int stride, int image_id = 0);
void append_patches(PatchSet& set, const Image& image, int size, int stride, int image_id);

/// The eight flip/rotation variants in fixed order: rot0, rot90, rot180,
/// rot270, then the same four applied to the horizontally flipped image.
/// Rotations are counterclockwise quarter turns.
std::array<Image, 8> augment8(const Image& image);

/// Inverse of augment8: undo_augment8(augment8(x)[j], j) == x bitwise.
Image undo_augment8(const Image& image, int index);

}  // namespace dopamine
