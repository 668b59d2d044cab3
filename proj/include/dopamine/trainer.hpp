#pragma once

#include <cstdint>
#include <vector>

#include "dopamine/estimator.hpp"
#include "dopamine/model.hpp"
#include "dopamine/noise.hpp"
#include "dopamine/rng.hpp"

namespace dopamine {

struct TrainConfig {
  int batch_size = 64;
  double initial_lr = 1e-3;
  int lr_halving_period_epochs = 10;
  int epochs = 30;
  int patch_size = 40;
  int stride = 10;
  double looks = 4.0;
  double blind_low = 0.5;
  double blind_high = 12.0;
  int group_size = 121;
  std::uint64_t seed = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct FinetuneConfig {
  enum class Mode { kFt, kAft };
  double lr = 1.2e-5;
  int epochs = 10;
  Mode mode = Mode::kAft;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
};

struct EpochStat {
  int epoch;
  double loss;
  double lr;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  long step = 0;

  void init(const std::vector<Tensor*>& params);
};

/// Standard Adam update with bias correction:
/// p -= lr * m_hat / (sqrt(v_hat) + eps). Deterministic.
void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr, double beta1, double beta2, double eps);

/// Kernel entries ~ Normal(0, 2 / fan_in) where fan_in counts only unmasked
/// taps times input channels; masked-out entries are set to zero.
void he_fill(Rng& rng, Tensor& kernel, const Tensor& mask);

/// He initialization of every convolution, biases zero. Deterministic.
void he_init(DopamineModel& model, std::uint64_t seed);

struct TrainResult {
  std::vector<EpochStat> trace;
  /// Blind training only: the looks drawn per group, one row per epoch.
  std::vector<std::vector<double>> drawn_looks;
};

/// Supervised MSE training with a fresh noise realization per patch per
/// epoch, shuffled mini-batches and learning-rate halving.
TrainResult train_supervised(DopamineModel& model, const PatchSet& clean_patches,
                             const TrainConfig& config);

/// Same loop, but patches are partitioned into groups of group_size (the
/// last group may be short) and each group gets its own looks value drawn
/// from U[blind_low, blind_high] every epoch. With blind_low == blind_high
/// the run is bitwise identical to train_supervised at that level.
TrainResult train_blind(DopamineModel& model, const PatchSet& clean_patches,
                        const TrainConfig& config);

struct FinetuneResult {
  std::vector<EpochStat> trace;
  Image despeckled;
  AffineField field;
};

/// Adapts the model to one noisy image by minimizing the unbiased risk
/// (FT: on z; AFT: averaged over the eight flip/rotations), one optimizer
/// step per epoch with fresh Adam state, then despeckles with the adapted
/// coefficients.
FinetuneResult finetune(DopamineModel& model, const Image& z, double sigma2,
                        const FinetuneConfig& config);

}  // namespace dopamine
