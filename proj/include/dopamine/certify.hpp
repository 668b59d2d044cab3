#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dopamine/model.hpp"
#include "dopamine/rng.hpp"

namespace dopamine {

struct CertifyOptions {
  int height = 64;
  int width = 64;
  int trials = 100;
  std::uint64_t seed = 7;
  /// Trial 0 keeps the model's own weights; later trials re-randomize them.
  bool reinit_weights = true;
  /// On a failing trial, re-run with per-layer probing and record every
  /// intermediate map whose value at the probed pixel changed.
  bool locate_layers = true;
  bool stop_on_first_failure = false;
};

struct CertifyViolation {
  std::string layer;
  int y;
  int x;
};

struct CertifyTrialFailure {
  int trial;
  int y;
  int x;
  double delta;
  std::vector<CertifyViolation> violations;  // topological order; first = origin
};

struct CertifyReport {
  int trials_run = 0;
  std::vector<CertifyTrialFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// Perturbs Z at one random pixel per trial and requires (a, b) at that pixel
/// to be bitwise unchanged. This is an exact structural property, not a
/// tolerance check.
CertifyReport certify_independence(const DopamineModel& model, const CertifyOptions& options);

/// mask(j) = 1 iff perturbing Z_j by delta changes (a, b) at (py, px) by more
/// than threshold. One forward per probed pixel; probes run in parallel.
Tensor receptive_field_map(const DopamineModel& model, const Image& z, int py, int px,
                           double delta = 1.0, double threshold = 1e-12);

/// mask(j) = 1 iff perturbing Z at (py, px) changes (a, b) at j. One single
/// perturbed forward; for interior pixels this is the point reflection of
/// the receptive field and a fast architecture check.
Tensor influence_footprint(const DopamineModel& model, const Image& z, int py, int px,
                           double delta = 1.0, double threshold = 1e-12);

/// Per-layer sample variance of the fused maps S_1..S_L under He-initialized
/// weights and unit-variance white-noise input, with scale-add fusion
/// (plain_add = false) or plain addition (plain_add = true).
std::vector<double> layer_variances(int num_layers, int channels, bool plain_add, int height,
                                    int width, std::uint64_t seed);

// Deliberate architecture corruptions for negative certification tests.

/// Opens the center tap of the first LU vertical kernel (which reads Z at the
/// output pixel itself) and gives it nonzero weights.
void corrupt_unmask_center_tap(DopamineModel& model, Rng& rng);

/// Replaces the first head convolution with an unmasked 3x3, breaking the
/// 1x1-only constraint that keeps the head independence-preserving.
void corrupt_head_conv_3x3(DopamineModel& model, Rng& rng);

}  // namespace dopamine
