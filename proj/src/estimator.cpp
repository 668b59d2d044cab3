#include "dopamine/estimator.hpp"

#include "dopamine/noise.hpp"

namespace dopamine {

Image apply_affine(const Image& z, const AffineField& f) {
  require(f.a.same_shape(z.pixels) && f.b.same_shape(z.pixels), "apply_affine: shape mismatch");
  return Image(add(mul(f.a, z.pixels), f.b));
}

namespace {

PixelLoss eval_pixel_loss(const Image& z, const AffineField& f, double sigma2, bool multiplicative) {
  require(sigma2 > 0.0, "loss: sigma^2 must be positive");
  require(f.a.same_shape(z.pixels) && f.b.same_shape(z.pixels), "loss: shape mismatch");
  Graph g;
  Node zn = g.constant(z.pixels);
  Node an = g.constant(f.a);
  Node bn = g.constant(f.b);
  Node pixels = multiplicative ? loss_mult_pixels(g, zn, an, bn, sigma2)
                               : loss_add_pixels(g, zn, an, bn, sigma2);
  PixelLoss out;
  out.per_pixel = g.value(pixels);
  out.mean_value = mean(out.per_pixel);
  return out;
}

}  // namespace

PixelLoss loss_mult(const Image& z, const AffineField& f, double sigma2) {
  return eval_pixel_loss(z, f, sigma2, true);
}

PixelLoss loss_add(const Image& z, const AffineField& f, double sigma2) {
  return eval_pixel_loss(z, f, sigma2, false);
}

double loss_supervised(const Image& xhat, const Image& x) {
  require(xhat.pixels.same_shape(x.pixels), "loss_supervised: shape mismatch");
  return mean(square(sub(x.pixels, xhat.pixels)));
}

Node loss_mult_pixels(Graph& g, Node z, Node a, Node b, double sigma2) {
  require(sigma2 > 0.0, "loss: sigma^2 must be positive");
  Node xhat = g.add(g.mul(a, z), b);
  Node residual = g.square(g.sub(z, xhat));
  const double c = sigma2 / (1.0 + sigma2);
  Node weight = g.affine(g.square(z), c, 0.0);       // c * Z^2
  Node penalty = g.mul(weight, g.affine(a, 2.0, -1.0));
  return g.add(residual, penalty);
}

Node loss_mult_mean(Graph& g, Node z, Node a, Node b, double sigma2) {
  return g.mean(loss_mult_pixels(g, z, a, b, sigma2));
}

Node loss_add_pixels(Graph& g, Node z, Node a, Node b, double sigma2) {
  require(sigma2 > 0.0, "loss: sigma^2 must be positive");
  Node xhat = g.add(g.mul(a, z), b);
  Node residual = g.square(g.sub(z, xhat));
  Node penalty = g.affine(a, 2.0 * sigma2, -sigma2);  // sigma^2 (2a - 1)
  return g.add(residual, penalty);
}

Node supervised_mse(Graph& g, Node xhat, Node x) {
  return g.mean(g.square(g.sub(x, xhat)));
}

namespace {

struct TermEval {
  double loss;
  std::vector<Tensor> grads;
};

TermEval eval_one(const DopamineModel& model, const Image& z, double sigma2, bool with_grads) {
  Graph g;
  ModelNodes mn = bind_model(g, model);
  Node z3 = g.constant(Tensor({1, z.height(), z.width()}, z.pixels.values()));
  Node z2 = g.constant(z.pixels);
  ForwardNodes fw = forward_model(g, mn, z3);
  Node loss = loss_mult_mean(g, z2, fw.a, fw.b, sigma2);
  TermEval out;
  out.loss = g.value(loss)[0];
  if (with_grads) {
    g.backward(loss);
    out.grads.reserve(mn.flat.size());
    for (Node p : mn.flat) out.grads.push_back(g.grad(p));
  }
  return out;
}

}  // namespace

LossEval eval_ft(const DopamineModel& model, const Image& z, double sigma2, bool with_grads) {
  TermEval term = eval_one(model, z, sigma2, with_grads);
  LossEval out;
  out.loss = term.loss;
  out.per_term = {term.loss};
  out.grads = std::move(term.grads);
  return out;
}

LossEval eval_aft(const DopamineModel& model, const Image& z, double sigma2, bool with_grads) {
  const std::array<Image, 8> variants = augment8(z);
  std::vector<TermEval> terms;
  terms.reserve(8);
  for (const Image& variant : variants) {
    terms.push_back(eval_one(model, variant, sigma2, with_grads));
  }

  // Pairwise tree so that eight equal terms average to exactly one term.
  const auto tree8 = [](auto&& at, auto&& combine) {
    auto l = combine(combine(at(0), at(1)), combine(at(2), at(3)));
    auto r = combine(combine(at(4), at(5)), combine(at(6), at(7)));
    return combine(l, r);
  };

  LossEval out;
  out.loss = tree8([&](int i) { return terms[static_cast<std::size_t>(i)].loss; },
                   [](double x, double y) { return x + y; }) /
             8.0;
  for (const TermEval& t : terms) out.per_term.push_back(t.loss);

  if (with_grads) {
    const std::size_t nparams = terms[0].grads.size();
    out.grads.reserve(nparams);
    for (std::size_t p = 0; p < nparams; ++p) {
      Tensor acc = tree8(
          [&](int i) { return terms[static_cast<std::size_t>(i)].grads[p]; },
          [](const Tensor& x, const Tensor& y) { return add(x, y); });
      out.grads.push_back(affine(acc, 1.0 / 8.0, 0.0));
    }
  }
  return out;
}

double loss_aft(const DopamineModel& model, const Image& z, double sigma2) {
  return eval_aft(model, z, sigma2, false).loss;
}

}  // namespace dopamine
