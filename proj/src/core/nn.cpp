#include "nn.hpp"

#include <cmath>

#include "error.hpp"

namespace rp::nn {

namespace {

using Mat = Eigen::MatrixXd;

constexpr int kK = 3;   // kernel
constexpr int kPad = 1; // padding

int conv_out(int in, int stride) { return (in + 2 * kPad - kK) / stride + 1; }

// GEMM operands are copied into owned Eigen matrices: their allocator
// alignment is fixed, so kernel execution (and thus rounding) is identical
// from run to run. Maps over std::vector storage would vectorize
// differently depending on where the heap happened to place the buffer.

// Gathers 3x3 patches at stride-s positions of one (c, h, w) sample into a
// (c*9) x (out_h*out_w) column matrix. Zero padding.
void im2col(const double* x, int c, int h, int w, int stride, Mat& cols) {
  const int oh = conv_out(h, stride);
  const int ow = conv_out(w, stride);
  cols.resize(c * kK * kK, oh * ow);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const int col = oy * ow + ox;
      double* dst = cols.data() + static_cast<size_t>(col) * cols.rows();
      for (int ic = 0; ic < c; ++ic) {
        const double* plane = x + static_cast<size_t>(ic) * h * w;
        for (int ky = 0; ky < kK; ++ky) {
          const int y = oy * stride + ky - kPad;
          for (int kx = 0; kx < kK; ++kx) {
            const int xx = ox * stride + kx - kPad;
            *dst++ = (y >= 0 && y < h && xx >= 0 && xx < w)
                         ? plane[static_cast<size_t>(y) * w + xx]
                         : 0.0;
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-adds columns back into the (c, h, w) sample.
void col2im(const Mat& cols, int c, int h, int w, int stride, double* x) {
  const int oh = conv_out(h, stride);
  const int ow = conv_out(w, stride);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const int col = oy * ow + ox;
      const double* src = cols.data() + static_cast<size_t>(col) * cols.rows();
      for (int ic = 0; ic < c; ++ic) {
        double* plane = x + static_cast<size_t>(ic) * h * w;
        for (int ky = 0; ky < kK; ++ky) {
          const int y = oy * stride + ky - kPad;
          for (int kx = 0; kx < kK; ++kx) {
            const int xx = ox * stride + kx - kPad;
            if (y >= 0 && y < h && xx >= 0 && xx < w)
              plane[static_cast<size_t>(y) * w + xx] += *src;
            ++src;
          }
        }
      }
    }
  }
}

// weight tensor rows (first dim) to an owned (rows x cols) matrix
Mat weight_matrix(const Tensor& t, int rows, int cols) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = t.data[static_cast<size_t>(r) * cols + c];
  return m;
}

// sample (c x m) in row-major tensor storage to an owned matrix
Mat sample_matrix(const double* p, int rows, int cols) {
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = p[static_cast<size_t>(r) * cols + c];
  return m;
}

void add_sample(const Mat& m, double* p) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      p[static_cast<size_t>(r) * m.cols() + c] += m(r, c);
}

void store_sample(const Mat& m, double* p) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c)
      p[static_cast<size_t>(r) * m.cols() + c] = m(r, c);
}

Tensor he_init(int n, int c, int h, int w, int fan_in, Rng& rng) {
  Tensor t(n, c, h, w);
  double scale = std::sqrt(2.0 / fan_in);
  for (double& v : t.data)
    v = rng.normal() * scale;
  return t;
}

} // namespace

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_ch, int out_ch, int stride, Rng& init_rng)
    : in_ch_(in_ch), out_ch_(out_ch), stride_(stride),
      weight_(he_init(out_ch, in_ch, kK, kK, in_ch * kK * kK, init_rng)),
      bias_(Tensor(out_ch, 1, 1, 1)) {}

Tensor Conv2d::forward(const Tensor& x, bool) {
  input_ = x;
  const int oh = conv_out(x.h, stride_);
  const int ow = conv_out(x.w, stride_);
  Tensor y(x.n, out_ch_, oh, ow);
  const Mat wm = weight_matrix(weight_.value, out_ch_, in_ch_ * kK * kK);
  Mat cols, ym;
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), x.c, x.h, x.w, stride_, cols);
    ym.noalias() = wm * cols;
    double* out = y.sample(i);
    const size_t plane = static_cast<size_t>(oh) * ow;
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double b = bias_.value.data[oc];
      for (size_t m = 0; m < plane; ++m)
        out[oc * plane + m] = ym(oc, static_cast<Eigen::Index>(m)) + b;
    }
  }
  return y;
}

Tensor Conv2d::backward(const Tensor& gy) {
  const Tensor& x = input_;
  Tensor gx(x.n, x.c, x.h, x.w);
  const int kdim = in_ch_ * kK * kK;
  const Mat wm = weight_matrix(weight_.value, out_ch_, kdim);
  Mat gwm = Mat::Zero(out_ch_, kdim);
  Mat cols, gym, gcols;
  const size_t plane = static_cast<size_t>(gy.h) * gy.w;
  for (int i = 0; i < x.n; ++i) {
    im2col(x.sample(i), x.c, x.h, x.w, stride_, cols);
    gym = sample_matrix(gy.sample(i), out_ch_, static_cast<int>(plane));
    gwm.noalias() += gym * cols.transpose();
    const double* g = gy.sample(i);
    for (int oc = 0; oc < out_ch_; ++oc) {
      double acc = 0.0;
      for (size_t m = 0; m < plane; ++m)
        acc += g[oc * plane + m];
      bias_.grad.data[oc] += acc;
    }
    gcols.noalias() = wm.transpose() * gym;
    col2im(gcols, x.c, x.h, x.w, stride_, gx.sample(i));
  }
  for (int r = 0; r < out_ch_; ++r)
    for (int c = 0; c < kdim; ++c)
      weight_.grad.data[static_cast<size_t>(r) * kdim + c] += gwm(r, c);
  return gx;
}

// ---------------------------------------------------------------------------
// ConvT2d

ConvT2d::ConvT2d(int in_ch, int out_ch, int stride, Rng& init_rng)
    : in_ch_(in_ch), out_ch_(out_ch), stride_(stride),
      weight_(he_init(in_ch, out_ch, kK, kK, in_ch * kK * kK, init_rng)),
      bias_(Tensor(out_ch, 1, 1, 1)) {}

Tensor ConvT2d::forward(const Tensor& x, bool) {
  input_ = x;
  const int oh = x.h * stride_;
  const int ow = x.w * stride_;
  Tensor y(x.n, out_ch_, oh, ow);
  // the output is the image whose stride-s im2col positions form the input
  const Mat wm = weight_matrix(weight_.value, in_ch_, out_ch_ * kK * kK);
  Mat xm, patches;
  const size_t out_plane = static_cast<size_t>(oh) * ow;
  for (int i = 0; i < x.n; ++i) {
    xm = sample_matrix(x.sample(i), in_ch_, x.h * x.w);
    patches.noalias() = wm.transpose() * xm; // (out_ch*9) x (h*w)
    col2im(patches, out_ch_, oh, ow, stride_, y.sample(i));
    double* out = y.sample(i);
    for (int oc = 0; oc < out_ch_; ++oc) {
      const double b = bias_.value.data[oc];
      for (size_t m = 0; m < out_plane; ++m)
        out[oc * out_plane + m] += b;
    }
  }
  return y;
}

Tensor ConvT2d::backward(const Tensor& gy) {
  const Tensor& x = input_;
  Tensor gx(x.n, x.c, x.h, x.w);
  const int kdim = out_ch_ * kK * kK;
  const Mat wm = weight_matrix(weight_.value, in_ch_, kdim);
  Mat gwm = Mat::Zero(in_ch_, kdim);
  Mat gpatches, xm, gxm;
  const size_t gy_plane = static_cast<size_t>(gy.h) * gy.w;
  for (int i = 0; i < x.n; ++i) {
    im2col(gy.sample(i), gy.c, gy.h, gy.w, stride_, gpatches); // (out_ch*9) x (h*w)
    xm = sample_matrix(x.sample(i), in_ch_, x.h * x.w);
    gxm.noalias() = wm * gpatches;
    store_sample(gxm, gx.sample(i));
    gwm.noalias() += xm * gpatches.transpose();
    const double* g = gy.sample(i);
    for (int oc = 0; oc < out_ch_; ++oc) {
      double acc = 0.0;
      for (size_t m = 0; m < gy_plane; ++m)
        acc += g[oc * gy_plane + m];
      bias_.grad.data[oc] += acc;
    }
  }
  for (int r = 0; r < in_ch_; ++r)
    for (int c = 0; c < kdim; ++c)
      weight_.grad.data[static_cast<size_t>(r) * kdim + c] += gwm(r, c);
  return gx;
}

// ---------------------------------------------------------------------------
// BatchNorm

BatchNorm::BatchNorm(int channels, double eps, double momentum)
    : channels_(channels), eps_(eps), momentum_(momentum), gamma_(Tensor(channels, 1, 1, 1)),
      beta_(Tensor(channels, 1, 1, 1)), running_mean_(channels, 1, 1, 1),
      running_var_(channels, 1, 1, 1) {
  std::fill(gamma_.value.data.begin(), gamma_.value.data.end(), 1.0);
  std::fill(running_var_.data.begin(), running_var_.data.end(), 1.0);
}

Tensor BatchNorm::forward(const Tensor& x, bool training) {
  Tensor y(x.n, x.c, x.h, x.w);
  xhat_ = Tensor(x.n, x.c, x.h, x.w);
  inv_std_.assign(channels_, 0.0);
  const size_t plane = static_cast<size_t>(x.h) * x.w;
  const double m = static_cast<double>(x.n) * plane;
  for (int ic = 0; ic < channels_; ++ic) {
    double mean, var;
    if (training) {
      double sum = 0.0, sq = 0.0;
      for (int i = 0; i < x.n; ++i) {
        const double* p = x.sample(i) + ic * plane;
        for (size_t k = 0; k < plane; ++k) {
          sum += p[k];
          sq += p[k] * p[k];
        }
      }
      mean = sum / m;
      var = sq / m - mean * mean;
      if (var < 0.0)
        var = 0.0;
      running_mean_.data[ic] = (1.0 - momentum_) * running_mean_.data[ic] + momentum_ * mean;
      running_var_.data[ic] = (1.0 - momentum_) * running_var_.data[ic] + momentum_ * var;
    } else {
      mean = running_mean_.data[ic];
      var = running_var_.data[ic];
    }
    const double inv = 1.0 / std::sqrt(var + eps_);
    inv_std_[ic] = inv;
    const double g = gamma_.value.data[ic];
    const double b = beta_.value.data[ic];
    for (int i = 0; i < x.n; ++i) {
      const double* p = x.sample(i) + ic * plane;
      double* xh = xhat_.sample(i) + ic * plane;
      double* out = y.sample(i) + ic * plane;
      for (size_t k = 0; k < plane; ++k) {
        xh[k] = (p[k] - mean) * inv;
        out[k] = g * xh[k] + b;
      }
    }
  }
  return y;
}

Tensor BatchNorm::backward(const Tensor& gy) {
  Tensor gx(gy.n, gy.c, gy.h, gy.w);
  const size_t plane = static_cast<size_t>(gy.h) * gy.w;
  const double m = static_cast<double>(gy.n) * plane;
  for (int ic = 0; ic < channels_; ++ic) {
    double sum_gy = 0.0, sum_gy_xhat = 0.0;
    for (int i = 0; i < gy.n; ++i) {
      const double* g = gy.sample(i) + ic * plane;
      const double* xh = xhat_.sample(i) + ic * plane;
      for (size_t k = 0; k < plane; ++k) {
        sum_gy += g[k];
        sum_gy_xhat += g[k] * xh[k];
      }
    }
    gamma_.grad.data[ic] += sum_gy_xhat;
    beta_.grad.data[ic] += sum_gy;
    const double scale = gamma_.value.data[ic] * inv_std_[ic];
    const double mean_gy = sum_gy / m;
    const double mean_gy_xhat = sum_gy_xhat / m;
    for (int i = 0; i < gy.n; ++i) {
      const double* g = gy.sample(i) + ic * plane;
      const double* xh = xhat_.sample(i) + ic * plane;
      double* out = gx.sample(i) + ic * plane;
      for (size_t k = 0; k < plane; ++k)
        out[k] = scale * (g[k] - mean_gy - xh[k] * mean_gy_xhat);
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// LeakyReLU

Tensor LeakyReLU::forward(const Tensor& x, bool) {
  input_ = x;
  Tensor y = x;
  for (double& v : y.data)
    if (v < 0.0)
      v *= slope_;
  return y;
}

Tensor LeakyReLU::backward(const Tensor& gy) {
  Tensor gx = gy;
  for (size_t i = 0; i < gx.data.size(); ++i)
    if (input_.data[i] < 0.0)
      gx.data[i] *= slope_;
  return gx;
}

// ---------------------------------------------------------------------------
// SkipCapsule

SkipCapsule::SkipCapsule(int channels, double leaky_slope, double bn_eps, double bn_momentum,
                         Rng& init_rng)
    : conv1_(channels, channels, 1, init_rng), bn1_(channels, bn_eps, bn_momentum),
      act_(leaky_slope), conv2_(channels, channels, 1, init_rng),
      bn2_(channels, bn_eps, bn_momentum) {}

Tensor SkipCapsule::forward(const Tensor& x, bool training) {
  Tensor f = bn2_.forward(conv2_.forward(act_.forward(bn1_.forward(conv1_.forward(x, training),
                                                                   training),
                                                      training),
                                         training),
                          training);
  for (size_t i = 0; i < f.data.size(); ++i)
    f.data[i] += x.data[i];
  return f;
}

Tensor SkipCapsule::backward(const Tensor& gy) {
  Tensor gx = conv1_.backward(bn1_.backward(act_.backward(conv2_.backward(bn2_.backward(gy)))));
  for (size_t i = 0; i < gx.data.size(); ++i)
    gx.data[i] += gy.data[i];
  return gx;
}

std::vector<Param*> SkipCapsule::params() {
  std::vector<Param*> out;
  for (Layer* l : std::initializer_list<Layer*>{&conv1_, &bn1_, &conv2_, &bn2_})
    for (Param* p : l->params())
      out.push_back(p);
  return out;
}

std::vector<Tensor*> SkipCapsule::state_tensors() {
  std::vector<Tensor*> out;
  for (Layer* l : std::initializer_list<Layer*>{&conv1_, &bn1_, &conv2_, &bn2_})
    for (Tensor* t : l->state_tensors())
      out.push_back(t);
  return out;
}

// ---------------------------------------------------------------------------
// Dense

Dense::Dense(int in_features, int out_features, Rng& init_rng)
    : in_(in_features), out_(out_features),
      weight_(he_init(out_features, in_features, 1, 1, in_features, init_rng)),
      bias_(Tensor(out_features, 1, 1, 1)) {}

Tensor Dense::forward(const Tensor& x, bool) {
  if (static_cast<int>(x.features()) != in_)
    fail(Errc::shape_mismatch, "dense layer fed " + std::to_string(x.features()) +
                                   " features, expects " + std::to_string(in_));
  input_ = x;
  Tensor y(x.n, out_, 1, 1);
  const double* w = weight_.value.data.data();
  for (int i = 0; i < x.n; ++i) {
    const double* xv = x.sample(i);
    double* yv = y.sample(i);
    for (int o = 0; o < out_; ++o) {
      double acc = bias_.value.data[o];
      const double* wrow = w + static_cast<size_t>(o) * in_;
      for (int k = 0; k < in_; ++k)
        acc += wrow[k] * xv[k];
      yv[o] = acc;
    }
  }
  return y;
}

Tensor Dense::backward(const Tensor& gy) {
  const Tensor& x = input_;
  Tensor gx(x.n, x.c, x.h, x.w);
  const double* w = weight_.value.data.data();
  double* gw = weight_.grad.data.data();
  for (int i = 0; i < x.n; ++i) {
    const double* gyv = gy.sample(i);
    const double* xv = x.sample(i);
    double* gxv = gx.sample(i);
    for (int o = 0; o < out_; ++o) {
      const double g = gyv[o];
      const double* wrow = w + static_cast<size_t>(o) * in_;
      double* gwrow = gw + static_cast<size_t>(o) * in_;
      for (int k = 0; k < in_; ++k) {
        gwrow[k] += g * xv[k];
        gxv[k] += g * wrow[k];
      }
      bias_.grad.data[o] += g;
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (Param* p : params_) {
    for (size_t i = 0; i < p->value.data.size(); ++i) {
      const double g = p->grad.data[i];
      p->m.data[i] = cfg_.beta1 * p->m.data[i] + (1.0 - cfg_.beta1) * g;
      p->v.data[i] = cfg_.beta2 * p->v.data[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = p->m.data[i] / bc1;
      const double vhat = p->v.data[i] / bc2;
      p->value.data[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

} // namespace rp::nn
