#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "rng.hpp"

namespace rp::nn {

// Dense NCHW tensor of doubles. Row-major within a sample: channel, then
// row, then column.
struct Tensor {
  int n = 0, c = 0, h = 0, w = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_), data(static_cast<size_t>(n_) * c_ * h_ * w_, 0.0) {}

  size_t size() const { return data.size(); }
  size_t features() const { return static_cast<size_t>(c) * h * w; }
  double* sample(int i) { return data.data() + i * features(); }
  const double* sample(int i) const { return data.data() + i * features(); }
  double& at(int in_, int ic, int iy, int ix) {
    return data[((static_cast<size_t>(in_) * c + ic) * h + iy) * w + ix];
  }
  double at(int in_, int ic, int iy, int ix) const {
    return data[((static_cast<size_t>(in_) * c + ic) * h + iy) * w + ix];
  }
  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

// Learnable tensor with its gradient and Adam moments.
struct Param {
  Tensor value, grad, m, v;
  explicit Param(Tensor t) : value(std::move(t)) {
    grad = Tensor(value.n, value.c, value.h, value.w);
    m = grad;
    v = grad;
  }
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

class Layer {
public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, bool training) = 0;
  virtual Tensor backward(const Tensor& grad_out) = 0;
  virtual std::vector<Param*> params() { return {}; }
  // everything a checkpoint must capture, params first
  virtual std::vector<Tensor*> state_tensors() {
    std::vector<Tensor*> out;
    for (Param* p : params())
      out.push_back(&p->value);
    return out;
  }
};

// 3x3 convolution, padding 1.
class Conv2d : public Layer {
public:
  Conv2d(int in_ch, int out_ch, int stride, Rng& init_rng);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&weight_, &bias_}; }

private:
  int in_ch_, out_ch_, stride_;
  Param weight_; // (out_ch, in_ch, 3, 3)
  Param bias_;   // (out_ch)
  Tensor input_;
};

// 3x3 transposed convolution, padding 1, output padding stride-1; maps
// H x W to sH x sW, the exact mirror of Conv2d on stride-divisible dims.
class ConvT2d : public Layer {
public:
  ConvT2d(int in_ch, int out_ch, int stride, Rng& init_rng);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&weight_, &bias_}; }

private:
  int in_ch_, out_ch_, stride_;
  Param weight_; // (in_ch, out_ch, 3, 3)
  Param bias_;
  Tensor input_;
};

class BatchNorm : public Layer {
public:
  BatchNorm(int channels, double eps, double momentum);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&gamma_, &beta_}; }
  std::vector<Tensor*> state_tensors() override {
    return {&gamma_.value, &beta_.value, &running_mean_, &running_var_};
  }

private:
  int channels_;
  double eps_, momentum_;
  Param gamma_, beta_;
  Tensor running_mean_, running_var_;
  Tensor xhat_;
  std::vector<double> inv_std_;
};

class LeakyReLU : public Layer {
public:
  explicit LeakyReLU(double slope) : slope_(slope) {}
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;

private:
  double slope_;
  Tensor input_;
};

// Residual refinement: x + BN(Conv(LReLU(BN(Conv(x))))), stride 1,
// channel preserving, so the additive skip always type-checks.
class SkipCapsule : public Layer {
public:
  SkipCapsule(int channels, double leaky_slope, double bn_eps, double bn_momentum, Rng& init_rng);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override;
  std::vector<Tensor*> state_tensors() override;

private:
  Conv2d conv1_;
  BatchNorm bn1_;
  LeakyReLU act_;
  Conv2d conv2_;
  BatchNorm bn2_;
};

// Fully connected layer over flattened features; output is (n, out, 1, 1).
class Dense : public Layer {
public:
  Dense(int in_features, int out_features, Rng& init_rng);
  Tensor forward(const Tensor& x, bool training) override;
  Tensor backward(const Tensor& grad_out) override;
  std::vector<Param*> params() override { return {&weight_, &bias_}; }

private:
  int in_, out_;
  Param weight_; // (out, in, 1, 1)
  Param bias_;
  Tensor input_;
};

struct AdamConfig {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class Adam {
public:
  Adam(std::vector<Param*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {}
  void step();

private:
  std::vector<Param*> params_;
  AdamConfig cfg_;
  long t_ = 0;
};

} // namespace rp::nn
