#include "dopamine/certify.hpp"

#include <cmath>

#include "dopamine/runtime.hpp"
#include "dopamine/trainer.hpp"

namespace dopamine {

namespace {

Image random_positive_image(Rng& rng, int h, int w) {
  Image img(h, w);
  double* p = img.pixels.data();
  for (std::int64_t i = 0, n = img.pixels.numel(); i < n; ++i) p[i] = rng.uniform(0.05, 2.0);
  return img;
}

std::vector<CertifyViolation> locate_violations(const DopamineModel& model, const Image& z,
                                                const Image& z_perturbed, int py, int px) {
  const ForwardTrace base = forward_trace(model, z);
  const ForwardTrace bumped = forward_trace(model, z_perturbed);
  std::vector<CertifyViolation> out;
  const int h = z.height(), w = z.width();
  for (std::size_t m = 0; m < base.maps.size(); ++m) {
    const TraceEntry& e0 = base.maps[m];
    const TraceEntry& e1 = bumped.maps[m];
    const int y = e0.rotated_frame ? h - 1 - py : py;
    const int x = e0.rotated_frame ? w - 1 - px : px;
    bool differs = false;
    if (e0.map.rank() == 3) {
      for (int c = 0; c < e0.map.dim(0) && !differs; ++c) {
        differs = e0.map(c, y, x) != e1.map(c, y, x);
      }
    } else {
      differs = e0.map(y, x) != e1.map(y, x);
    }
    if (differs) out.push_back({e0.name, y, x});
  }
  return out;
}

}  // namespace

CertifyReport certify_independence(const DopamineModel& model, const CertifyOptions& options) {
  require(options.trials >= 1, "certify: trials must be >= 1");
  require(options.height >= 3 && options.width >= 3, "certify: image must be at least 3x3");
  static constexpr double kDeltas[4] = {0.5, -0.5, 2.0, -2.0};

  Rng rng(options.seed);
  CertifyReport report;
  for (int trial = 0; trial < options.trials; ++trial) {
    DopamineModel m = model;
    if (options.reinit_weights && trial > 0) he_init(m, rng.next_u64());

    Image z = random_positive_image(rng, options.height, options.width);
    const int py = rng.uniform_int(0, options.height - 1);
    const int px = rng.uniform_int(0, options.width - 1);
    const double delta = kDeltas[rng.uniform_int(0, 3)];

    Image z2 = z;
    z2.at(py, px) += delta;

    const AffineField f0 = forward(m, z);
    const AffineField f1 = forward(m, z2);
    report.trials_run = trial + 1;
    if (f0.a(py, px) != f1.a(py, px) || f0.b(py, px) != f1.b(py, px)) {
      CertifyTrialFailure failure{trial, py, px, delta, {}};
      if (options.locate_layers) failure.violations = locate_violations(m, z, z2, py, px);
      report.failures.push_back(std::move(failure));
      if (options.stop_on_first_failure) break;
    }
  }
  return report;
}

Tensor receptive_field_map(const DopamineModel& model, const Image& z, int py, int px,
                           double delta, double threshold) {
  require(py >= 0 && py < z.height() && px >= 0 && px < z.width(), "rf map: pixel out of range");
  const AffineField base = forward(model, z);
  const double a0 = base.a(py, px);
  const double b0 = base.b(py, px);

  Tensor mask({z.height(), z.width()});
  const int total = static_cast<int>(mask.numel());
  parallel_for(total, [&](int begin, int end) {
    for (int j = begin; j < end; ++j) {
      Image probe = z;
      probe.pixels[j] += delta;
      const AffineField f = forward(model, probe);
      const bool hit = std::abs(f.a(py, px) - a0) > threshold ||
                       std::abs(f.b(py, px) - b0) > threshold;
      mask[j] = hit ? 1.0 : 0.0;
    }
  });
  return mask;
}

Tensor influence_footprint(const DopamineModel& model, const Image& z, int py, int px,
                           double delta, double threshold) {
  require(py >= 0 && py < z.height() && px >= 0 && px < z.width(), "footprint: pixel out of range");
  const AffineField base = forward(model, z);
  Image probe = z;
  probe.at(py, px) += delta;
  const AffineField bumped = forward(model, probe);

  Tensor mask({z.height(), z.width()});
  for (std::int64_t j = 0, n = mask.numel(); j < n; ++j) {
    const bool hit = std::abs(bumped.a[j] - base.a[j]) > threshold ||
                     std::abs(bumped.b[j] - base.b[j]) > threshold;
    mask[j] = hit ? 1.0 : 0.0;
  }
  return mask;
}

std::vector<double> layer_variances(int num_layers, int channels, bool plain_add, int height,
                                    int width, std::uint64_t seed) {
  DopamineModel model = DopamineModel::create({num_layers, channels});
  he_init(model, derive_seed(seed, 1));

  Rng rng(derive_seed(seed, 2));
  Image z(height, width);
  for (std::int64_t i = 0, n = z.pixels.numel(); i < n; ++i) z.pixels[i] = rng.normal();

  ForwardOptions options;
  options.plain_add = plain_add;
  const ForwardTrace trace = forward_trace(model, z, options);

  std::vector<double> out;
  for (const TraceEntry& e : trace.maps) {
    if (e.name.rfind("s.l", 0) != 0) continue;
    const double mu = mean(e.map);
    double acc = 0.0;
    for (std::int64_t i = 0, n = e.map.numel(); i < n; ++i) {
      const double d = e.map[i] - mu;
      acc += d * d;
    }
    out.push_back(acc / static_cast<double>(e.map.numel() - 1));
  }
  return out;
}

void corrupt_unmask_center_tap(DopamineModel& model, Rng& rng) {
  require(!model.lu.empty(), "corrupt: empty model");
  ConvLayer& cl = model.lu[0].v;
  cl.mask(1, 1) = 1.0;
  for (int o = 0; o < cl.w.dim(0); ++o) {
    for (int c = 0; c < cl.w.dim(1); ++c) cl.w(o, c, 1, 1) = rng.normal();
  }
}

void corrupt_head_conv_3x3(DopamineModel& model, Rng& rng) {
  ConvLayer& cl = model.head_r1;
  cl.mask = Tensor::full({3, 3}, 1.0);
  cl.w = Tensor({cl.w.dim(0), cl.w.dim(1), 3, 3});
  he_fill(rng, cl.w, cl.mask);
}

}  // namespace dopamine
