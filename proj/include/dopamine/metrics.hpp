#pragma once

#include <filesystem>
#include <vector>

#include "dopamine/image.hpp"

namespace dopamine {

/// 10 * log10(1 / MSE) for a clean reference x in [0,1]^d.
/// Zero MSE returns +infinity.
double psnr(const Image& x, const Image& xhat);

struct SsimOptions {
  int window = 8;            // uniform sliding window, stride 1, full windows only
  double c1 = 0.01 * 0.01;   // (k1 * dynamic range)^2 with range 1
  double c2 = 0.03 * 0.03;
};

/// Mean of local SSIM over sliding windows; moment-form (biased) window
/// statistics. ssim(x, x) == 1 exactly.
double ssim(const Image& x, const Image& y, const SsimOptions& options = {});

struct Rect {
  int top;
  int left;
  int height;
  int width;
};

/// Plain-text region list: one "top left height width" rectangle per line;
/// blank lines and '#' comments are ignored.
std::vector<Rect> load_regions(const std::filesystem::path& path);

struct EnlResult {
  std::vector<double> per_region;
  double average = 0.0;
};

/// Equivalent number of looks mean^2 / variance (unbiased n-1 variance) per
/// homogeneous region; zero variance yields +infinity.
EnlResult enl(const Image& image, const std::vector<Rect>& regions);

}  // namespace dopamine
