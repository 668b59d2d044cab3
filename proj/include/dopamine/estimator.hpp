#pragma once

#include <vector>

#include "dopamine/graph.hpp"
#include "dopamine/image.hpp"
#include "dopamine/model.hpp"

namespace dopamine {

/// x_hat = a * Z + b elementwise. Output is never clipped.
Image apply_affine(const Image& z, const AffineField& f);

struct PixelLoss {
  Tensor per_pixel;
  double mean_value = 0.0;
};

/// Unbiased multiplicative-noise risk per pixel:
///   (Z - x_hat)^2 + (Z^2 sigma^2 / (1 + sigma^2)) * (2a - 1).
/// For (a, b) independent of Z_i given the context, its conditional
/// expectation equals the true squared error. Values may be negative.
PixelLoss loss_mult(const Image& z, const AffineField& f, double sigma2);

/// Additive-noise analogue: (Z - x_hat)^2 + sigma^2 (2a - 1).
/// Kept as a cross-check for the additive unbiasedness route.
PixelLoss loss_add(const Image& z, const AffineField& f, double sigma2);

/// Plain mean squared error (1/d) sum (x - x_hat)^2.
double loss_supervised(const Image& xhat, const Image& x);

// Graph builders used by the trainers. z must be a constant leaf.
Node loss_mult_pixels(Graph& g, Node z, Node a, Node b, double sigma2);
Node loss_mult_mean(Graph& g, Node z, Node a, Node b, double sigma2);
Node loss_add_pixels(Graph& g, Node z, Node a, Node b, double sigma2);
Node supervised_mse(Graph& g, Node xhat, Node x);

/// One fine-tune objective evaluation: the scalar loss, the per-term values
/// (1 for FT, 8 for AFT) and optionally d(loss)/d(parameter) in
/// DopamineModel::parameters() order.
struct LossEval {
  double loss = 0.0;
  std::vector<double> per_term;
  std::vector<Tensor> grads;
};

LossEval eval_ft(const DopamineModel& model, const Image& z, double sigma2, bool with_grads);

/// Mean of the FT objective over the eight flip/rotation variants of z,
/// accumulated into a single gradient. The eight per-variant gradients are
/// combined pairwise ((g0+g1)+(g2+g3)) + ((g4+g5)+(g6+g7)) and scaled by
/// 1/8, so on a fully symmetric image the result is bitwise equal to FT.
LossEval eval_aft(const DopamineModel& model, const Image& z, double sigma2, bool with_grads);

double loss_aft(const DopamineModel& model, const Image& z, double sigma2);

}  // namespace dopamine
