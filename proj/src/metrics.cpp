#include "dopamine/metrics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace dopamine {

double psnr(const Image& x, const Image& xhat) {
  require(x.pixels.same_shape(xhat.pixels), "psnr: shape mismatch");
  for (std::int64_t i = 0, n = x.pixels.numel(); i < n; ++i) {
    require(x.pixels[i] >= 0.0 && x.pixels[i] <= 1.0, "psnr: reference must lie in [0,1]");
  }
  double mse = 0.0;
  for (std::int64_t i = 0, n = x.pixels.numel(); i < n; ++i) {
    const double d = x.pixels[i] - xhat.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(x.pixels.numel());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& x, const Image& y, const SsimOptions& options) {
  require(x.pixels.same_shape(y.pixels), "ssim: shape mismatch");
  const int w = options.window;
  require(w >= 1, "ssim: window must be >= 1");
  const int h_img = x.height(), w_img = x.width();
  require(h_img >= w && w_img >= w, "ssim: image smaller than window");

  // Summed-area tables over x, y, x^2, y^2 and xy; the direct two-loop
  // evaluation lives in the test suite as the independent reference.
  const int sh = h_img + 1, sw = w_img + 1;
  std::vector<double> sx(static_cast<std::size_t>(sh) * sw, 0.0);
  std::vector<double> sy(sx.size(), 0.0), sxx(sx.size(), 0.0), syy(sx.size(), 0.0), sxy(sx.size(), 0.0);
  for (int r = 0; r < h_img; ++r) {
    for (int c = 0; c < w_img; ++c) {
      const double xv = x.at(r, c);
      const double yv = y.at(r, c);
      const std::size_t i = static_cast<std::size_t>(r + 1) * sw + (c + 1);
      const std::size_t up = i - static_cast<std::size_t>(sw);
      sx[i] = xv + sx[i - 1] + sx[up] - sx[up - 1];
      sy[i] = yv + sy[i - 1] + sy[up] - sy[up - 1];
      sxx[i] = xv * xv + sxx[i - 1] + sxx[up] - sxx[up - 1];
      syy[i] = yv * yv + syy[i - 1] + syy[up] - syy[up - 1];
      sxy[i] = xv * yv + sxy[i - 1] + sxy[up] - sxy[up - 1];
    }
  }
  const auto window_sum = [&](const std::vector<double>& s, int r, int c) {
    const std::size_t br = static_cast<std::size_t>(r + w), bc = static_cast<std::size_t>(c + w);
    return s[br * sw + bc] - s[br * sw + c] - s[static_cast<std::size_t>(r) * sw + bc] +
           s[static_cast<std::size_t>(r) * sw + c];
  };

  const double n = static_cast<double>(w) * w;
  double total = 0.0;
  std::int64_t count = 0;
  for (int r = 0; r + w <= h_img; ++r) {
    for (int c = 0; c + w <= w_img; ++c) {
      const double mx = window_sum(sx, r, c) / n;
      const double my = window_sum(sy, r, c) / n;
      const double vx = window_sum(sxx, r, c) / n - mx * mx;
      const double vy = window_sum(syy, r, c) / n - my * my;
      const double cov = window_sum(sxy, r, c) / n - mx * my;
      const double num = (2.0 * mx * my + options.c1) * (2.0 * cov + options.c2);
      const double den = (mx * mx + my * my + options.c1) * (vx + vy + options.c2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

std::vector<Rect> load_regions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::vector<Rect> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    Rect r;
    if (!(ls >> r.top)) continue;  // blank or comment-only line
    std::string trailing;
    if (!(ls >> r.left >> r.height >> r.width) || (ls >> trailing)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 'top left height width'");
    }
    out.push_back(r);
  }
  return out;
}

EnlResult enl(const Image& image, const std::vector<Rect>& regions) {
  require(!regions.empty(), "enl: no regions");
  EnlResult result;
  for (const Rect& r : regions) {
    require(r.height >= 1 && r.width >= 1, "enl: empty region");
    require(r.top >= 0 && r.left >= 0 && r.top + r.height <= image.height() &&
                r.left + r.width <= image.width(),
            "enl: region outside image");
    const std::int64_t n = static_cast<std::int64_t>(r.height) * r.width;
    require(n >= 2, "enl: region needs at least 2 pixels");
    double sum = 0.0;
    for (int y = r.top; y < r.top + r.height; ++y) {
      for (int x = r.left; x < r.left + r.width; ++x) sum += image.at(y, x);
    }
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (int y = r.top; y < r.top + r.height; ++y) {
      for (int x = r.left; x < r.left + r.width; ++x) {
        const double d = image.at(y, x) - mu;
        ss += d * d;
      }
    }
    const double var = ss / static_cast<double>(n - 1);
    result.per_region.push_back(var == 0.0 ? std::numeric_limits<double>::infinity()
                                           : mu * mu / var);
  }
  double acc = 0.0;
  for (double v : result.per_region) acc += v;
  result.average = acc / static_cast<double>(result.per_region.size());
  return result;
}

}  // namespace dopamine
