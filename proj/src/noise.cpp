#include "dopamine/noise.hpp"

namespace dopamine {

Tensor sample_noise(const GammaNoiseModel& model, const std::vector<int>& shape) {
  Rng rng(model.rng_seed);
  Tensor out(shape);
  fill_gamma(rng, model.looks, out);
  return out;
}

void fill_gamma(Rng& rng, double looks, Tensor& out) {
  require(looks > 0.0, "gamma noise: looks must be positive");
  double* p = out.data();
  // Gamma(L, 1) scaled by 1/L gives Gamma(shape L, rate L).
  const double inv_rate = 1.0 / looks;
  for (std::int64_t i = 0, n = out.numel(); i < n; ++i) p[i] = rng.gamma(looks) * inv_rate;
}

Image apply_noise(const Image& clean, const Tensor& noise) {
  return Image(mul(clean.pixels, noise));
}

PatchSet extract_patches(const Image& image, int size, int stride, int image_id) {
  PatchSet set;
  set.patch_size = size;
  append_patches(set, image, size, stride, image_id);
  return set;
}

void append_patches(PatchSet& set, const Image& image, int size, int stride, int image_id) {
  require(size >= 1 && stride >= 1, "extract_patches: size and stride must be >= 1");
  require(size <= image.height() && size <= image.width(), "extract_patches: patch larger than image");
  require(set.patch_size == 0 || set.patch_size == size, "extract_patches: mixed patch sizes");
  set.patch_size = size;
  for (int r = 0; r + size <= image.height(); r += stride) {
    for (int c = 0; c + size <= image.width(); c += stride) {
      Image patch(size, size);
      for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) patch.at(y, x) = image.at(r + y, c + x);
      }
      set.patches.push_back(std::move(patch));
      set.refs.push_back({image_id, r, c});
    }
  }
}

std::array<Image, 8> augment8(const Image& image) {
  std::array<Image, 8> out;
  const Tensor flipped = flip_h(image.pixels);
  for (int k = 0; k < 4; ++k) {
    out[static_cast<std::size_t>(k)] = Image(rot90k(image.pixels, k));
    out[static_cast<std::size_t>(4 + k)] = Image(rot90k(flipped, k));
  }
  return out;
}

Image undo_augment8(const Image& image, int index) {
  require(index >= 0 && index < 8, "undo_augment8: index must be in [0,8)");
  const int k = index % 4;
  Tensor t = rot90k(image.pixels, -k);
  if (index >= 4) t = flip_h(t);
  return Image(std::move(t));
}

}  // namespace dopamine
