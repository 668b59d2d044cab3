#pragma once

#include <filesystem>

#include "dopamine/tensor.hpp"

namespace dopamine {

/// Single-channel image, pixels as a rank-2 tensor [H,W]. Clean images are
/// expected in [0,1]; noisy observations and intermediate reconstructions
/// may leave that range and are never clipped implicitly.
struct Image {
  Tensor pixels;

  Image() : pixels(Tensor({1, 1})) {}
  explicit Image(Tensor t) : pixels(std::move(t)) {
    require(pixels.rank() == 2, "image: pixels must be rank 2");
  }
  Image(int height, int width) : pixels(Tensor({height, width})) {}

  int height() const { return pixels.dim(0); }
  int width() const { return pixels.dim(1); }
  double& at(int y, int x) { return pixels(y, x); }
  double at(int y, int x) const { return pixels(y, x); }
};

/// Reads a PGM (binary P5, 8-bit, values scaled by 1/255) or F32 raw image.
/// The format is detected from the file's magic bytes.
Image load_image(const std::filesystem::path& path);

/// Writes PGM or F32 depending on the file extension (.pgm / .f32).
/// With clip=true values are clamped to [0,1] first; PGM output quantizes
/// by round(255*v) (out-of-range bytes are clamped to [0,255]).
void save_image(const std::filesystem::path& path, const Image& image, bool clip);

}  // namespace dopamine
