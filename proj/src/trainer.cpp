#include "dopamine/trainer.hpp"

#include <cmath>

namespace dopamine {

namespace {

// Substream tags for one training seed.
constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kLooksStream = 3;

void check_train_config(const TrainConfig& c) {
  require(c.batch_size >= 1, "train: batch_size must be >= 1");
  require(c.initial_lr > 0.0, "train: initial_lr must be positive");
  require(c.lr_halving_period_epochs >= 1, "train: lr halving period must be >= 1");
  require(c.epochs >= 1, "train: epochs must be >= 1");
  require(c.looks > 0.0, "train: looks must be positive");
  require(c.blind_low > 0.0 && c.blind_low <= c.blind_high, "train: bad blind range");
  require(c.group_size >= 1, "train: group_size must be >= 1");
}

}  // namespace

void AdamState::init(const std::vector<Tensor*>& params) {
  m.clear();
  v.clear();
  step = 0;
  for (const Tensor* p : params) {
    m.emplace_back(p->shape());
    v.emplace_back(p->shape());
  }
}

void adam_step(const std::vector<Tensor*>& params, const std::vector<Tensor>& grads,
               AdamState& state, double lr, double beta1, double beta2, double eps) {
  require(params.size() == grads.size() && params.size() == state.m.size(),
          "adam: parameter/gradient/state count mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& w = *params[p];
    const Tensor& g = grads[p];
    require(w.same_shape(g), "adam: gradient shape mismatch");
    Tensor& m = state.m[p];
    Tensor& v = state.v[p];
    for (std::int64_t i = 0, n = w.numel(); i < n; ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      w[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

void he_fill(Rng& rng, Tensor& kernel, const Tensor& mask) {
  require(kernel.rank() == 4, "he_fill: kernel must be [Cout,Cin,kh,kw]");
  require(mask.rank() == 2 && mask.dim(0) == kernel.dim(2) && mask.dim(1) == kernel.dim(3),
          "he_fill: mask shape mismatch");
  int active = 0;
  for (std::int64_t i = 0, n = mask.numel(); i < n; ++i) {
    require(mask[i] == 0.0 || mask[i] == 1.0, "he_fill: mask entries must be 0 or 1");
    if (mask[i] == 1.0) ++active;
  }
  require(active > 0, "he_fill: mask has no active taps");
  const double fan_in = static_cast<double>(kernel.dim(1)) * active;
  const double sd = std::sqrt(2.0 / fan_in);
  const int kh = kernel.dim(2), kw = kernel.dim(3);
  for (int o = 0; o < kernel.dim(0); ++o) {
    for (int c = 0; c < kernel.dim(1); ++c) {
      for (int u = 0; u < kh; ++u) {
        for (int v = 0; v < kw; ++v) {
          kernel(o, c, u, v) = mask(u, v) == 1.0 ? sd * rng.normal() : 0.0;
        }
      }
    }
  }
}

namespace {

void he_init_conv(Rng& rng, ConvLayer& cl) {
  he_fill(rng, cl.w, cl.mask);
  std::fill(cl.b.values().begin(), cl.b.values().end(), 0.0);
}

}  // namespace

void he_init(DopamineModel& model, std::uint64_t seed) {
  Rng rng(seed);
  for (std::vector<LuLayer>* stack : {&model.lu, &model.rd}) {
    for (LuLayer& l : *stack) {
      he_init_conv(rng, l.v);
      he_init_conv(rng, l.h_in);
      he_init_conv(rng, l.h_v);
    }
  }
  he_init_conv(rng, model.head_r1);
  he_init_conv(rng, model.head_r2);
  he_init_conv(rng, model.head_out);
}

namespace {

TrainResult train_noisy(DopamineModel& model, const PatchSet& clean, const TrainConfig& cfg,
                        bool blind) {
  check_train_config(cfg);
  require(!clean.patches.empty(), "train: empty patch set");
  const int n = static_cast<int>(clean.patches.size());

  Rng noise_rng(derive_seed(cfg.seed, kNoiseStream));
  Rng shuffle_rng(derive_seed(cfg.seed, kShuffleStream));
  Rng looks_rng(derive_seed(cfg.seed, kLooksStream));

  std::vector<Tensor*> params = model.parameters();
  AdamState adam;
  adam.init(params);
  std::vector<Tensor> grad_acc(params.size());

  TrainResult result;
  const int num_groups = (n + cfg.group_size - 1) / cfg.group_size;

  std::vector<Image> noisy(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double lr =
        cfg.initial_lr * std::pow(0.5, (epoch - 1) / cfg.lr_halving_period_epochs);

    std::vector<double> group_looks;
    if (blind) {
      group_looks.reserve(static_cast<std::size_t>(num_groups));
      for (int gidx = 0; gidx < num_groups; ++gidx) {
        group_looks.push_back(looks_rng.uniform(cfg.blind_low, cfg.blind_high));
      }
      result.drawn_looks.push_back(group_looks);
    }

    // Fresh noise realization for every patch, in patch order.
    Tensor noise;
    for (int i = 0; i < n; ++i) {
      const double looks = blind ? group_looks[static_cast<std::size_t>(i / cfg.group_size)]
                                 : cfg.looks;
      const Image& x = clean.patches[static_cast<std::size_t>(i)];
      noise = Tensor(x.pixels.shape());
      fill_gamma(noise_rng, looks, noise);
      noisy[static_cast<std::size_t>(i)] = apply_noise(x, noise);
    }

    // Fisher-Yates shuffle driven by its own stream.
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
      const int j = shuffle_rng.uniform_int(0, i);
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    double loss_sum = 0.0;
    for (int begin = 0; begin < n; begin += cfg.batch_size) {
      const int end = std::min(n, begin + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      for (std::size_t p = 0; p < params.size(); ++p) grad_acc[p] = Tensor(params[p]->shape());

      for (int k = begin; k < end; ++k) {
        const int idx = order[static_cast<std::size_t>(k)];
        const Image& z = noisy[static_cast<std::size_t>(idx)];
        const Image& x = clean.patches[static_cast<std::size_t>(idx)];

        Graph g;
        ModelNodes mn = bind_model(g, model);
        Node z3 = g.constant(Tensor({1, z.height(), z.width()}, z.pixels.values()));
        Node z2 = g.constant(z.pixels);
        ForwardNodes fw = forward_model(g, mn, z3);
        Node xhat = g.add(g.mul(fw.a, z2), fw.b);
        Node loss = supervised_mse(g, xhat, g.constant(x.pixels));
        loss_sum += g.value(loss)[0];
        g.backward(loss);
        for (std::size_t p = 0; p < params.size(); ++p) {
          const Tensor& gp = g.grad(mn.flat[p]);
          Tensor& acc = grad_acc[p];
          for (std::int64_t i = 0, cnt = acc.numel(); i < cnt; ++i) acc[i] += gp[i];
        }
      }
      for (std::size_t p = 0; p < params.size(); ++p) {
        grad_acc[p] = affine(grad_acc[p], inv_batch, 0.0);
      }
      adam_step(params, grad_acc, adam, lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
    }
    result.trace.push_back({epoch, loss_sum / static_cast<double>(n), lr});
  }
  return result;
}

}  // namespace

TrainResult train_supervised(DopamineModel& model, const PatchSet& clean_patches,
                             const TrainConfig& config) {
  return train_noisy(model, clean_patches, config, false);
}

TrainResult train_blind(DopamineModel& model, const PatchSet& clean_patches,
                        const TrainConfig& config) {
  return train_noisy(model, clean_patches, config, true);
}

FinetuneResult finetune(DopamineModel& model, const Image& z, double sigma2,
                        const FinetuneConfig& config) {
  require(sigma2 > 0.0, "finetune: sigma^2 must be positive");
  require(config.lr > 0.0, "finetune: lr must be positive");
  require(config.epochs >= 1, "finetune: epochs must be >= 1");

  std::vector<Tensor*> params = model.parameters();
  AdamState adam;  // fresh state; fine-tuning is its own phase
  adam.init(params);

  FinetuneResult result;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    LossEval ev = config.mode == FinetuneConfig::Mode::kFt ? eval_ft(model, z, sigma2, true)
                                                           : eval_aft(model, z, sigma2, true);
    adam_step(params, ev.grads, adam, config.lr, config.adam_beta1, config.adam_beta2,
              config.adam_eps);
    result.trace.push_back({epoch, ev.loss, config.lr});
  }
  result.field = forward(model, z);
  result.despeckled = apply_affine(z, result.field);
  return result;
}

}  // namespace dopamine
