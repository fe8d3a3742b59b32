#include "vae.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "error.hpp"
#include "textio.hpp"

namespace rp {

using nn::Tensor;

namespace {

constexpr char kMagic[4] = {'B', 'V', 'A', 'E'};
constexpr uint32_t kVersion = 1;

int stride_for_block(int block, int num_blocks) {
  return block < std::min(num_blocks, 5) ? 2 : 1;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// numerically guarded BCE; gradients flow through the logits instead
double bce_sum(const Tensor& x, const Tensor& probs) {
  constexpr double kEps = 1e-12;
  double acc = 0.0;
  for (size_t i = 0; i < x.data.size(); ++i) {
    double p = std::clamp(probs.data[i], kEps, 1.0 - kEps);
    acc -= x.data[i] * std::log(p) + (1.0 - x.data[i]) * std::log(1.0 - p);
  }
  return acc;
}

} // namespace

VaeModel::VaeModel(const VaeConfig& cfg) : cfg_(cfg) {
  if (cfg.latent_dim < 1 || cfg.num_blocks < 1 || cfg.base_channels < 1)
    fail(Errc::invalid_argument, "latent_dim, num_blocks and base_channels must be >= 1");
  if (cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
    fail(Errc::invalid_argument, "batch_size must be >= 1 and learning_rate positive");

  std::vector<int> channels(cfg.num_blocks);
  std::vector<int> strides(cfg.num_blocks);
  int halvings = 0;
  for (int i = 0; i < cfg.num_blocks; ++i) {
    channels[i] = std::min(cfg.base_channels << i, cfg.max_channels);
    strides[i] = stride_for_block(i, cfg.num_blocks);
    if (strides[i] == 2)
      ++halvings;
  }
  const int div = 1 << halvings;
  if (cfg.input_h % div != 0 || cfg.input_w % div != 0)
    fail(Errc::invalid_argument, "input dimensions must be divisible by 2^" +
                                     std::to_string(halvings) + " for this block count");
  feat_c_ = channels.back();
  feat_h_ = cfg.input_h / div;
  feat_w_ = cfg.input_w / div;
  const int flat = feat_c_ * feat_h_ * feat_w_;

  Rng init(cfg.seed);
  int prev = 1;
  for (int i = 0; i < cfg.num_blocks; ++i) {
    encoder_.push_back(std::make_unique<nn::Conv2d>(prev, channels[i], strides[i], init));
    encoder_.push_back(std::make_unique<nn::BatchNorm>(channels[i], cfg.bn_eps, cfg.bn_momentum));
    encoder_.push_back(std::make_unique<nn::LeakyReLU>(cfg.leaky_slope));
    encoder_.push_back(std::make_unique<nn::SkipCapsule>(channels[i], cfg.leaky_slope, cfg.bn_eps,
                                                         cfg.bn_momentum, init));
    prev = channels[i];
  }
  mu_head_ = std::make_unique<nn::Dense>(flat, cfg.latent_dim, init);
  logvar_head_ = std::make_unique<nn::Dense>(flat, cfg.latent_dim, init);
  dec_fc_ = std::make_unique<nn::Dense>(cfg.latent_dim, flat, init);
  for (int i = cfg.num_blocks - 1; i >= 0; --i) {
    decoder_.push_back(std::make_unique<nn::SkipCapsule>(channels[i], cfg.leaky_slope, cfg.bn_eps,
                                                         cfg.bn_momentum, init));
    if (i > 0) {
      decoder_.push_back(std::make_unique<nn::ConvT2d>(channels[i], channels[i - 1], strides[i],
                                                       init));
      decoder_.push_back(
          std::make_unique<nn::BatchNorm>(channels[i - 1], cfg.bn_eps, cfg.bn_momentum));
      decoder_.push_back(std::make_unique<nn::LeakyReLU>(cfg.leaky_slope));
    } else {
      decoder_.push_back(std::make_unique<nn::ConvT2d>(channels[0], 1, strides[0], init));
      // logits out; sigmoid lives in decode()/the loss
    }
  }
}

std::pair<Tensor, Tensor> VaeModel::encode(const Tensor& x, bool training) {
  if (x.c != 1 || x.h != cfg_.input_h || x.w != cfg_.input_w || x.n < 1)
    fail(Errc::shape_mismatch, "encoder expects (n, 1, " + std::to_string(cfg_.input_h) + ", " +
                                   std::to_string(cfg_.input_w) + ") input");
  Tensor cur = x;
  for (auto& layer : encoder_)
    cur = layer->forward(cur, training);
  Tensor mu = mu_head_->forward(cur, training);
  Tensor logvar = logvar_head_->forward(cur, training);
  return {std::move(mu), std::move(logvar)};
}

Tensor VaeModel::decode_logits(const Tensor& z, bool training) {
  if (z.features() != static_cast<size_t>(cfg_.latent_dim) || z.n < 1)
    fail(Errc::shape_mismatch, "decoder expects (n, " + std::to_string(cfg_.latent_dim) +
                                   ") latent input");
  Tensor cur = dec_fc_->forward(z, training);
  cur.c = feat_c_;
  cur.h = feat_h_;
  cur.w = feat_w_;
  for (auto& layer : decoder_)
    cur = layer->forward(cur, training);
  return cur;
}

Tensor VaeModel::decode(const Tensor& z, bool training) {
  Tensor logits = decode_logits(z, training);
  for (double& v : logits.data)
    v = sigmoid(v);
  return logits;
}

Tensor reparameterize(const Tensor& mu, const Tensor& logvar, const Tensor& eps) {
  if (!mu.same_shape(logvar) || !mu.same_shape(eps))
    fail(Errc::shape_mismatch, "reparameterize requires matching shapes");
  Tensor z = mu;
  for (size_t i = 0; i < z.data.size(); ++i)
    z.data[i] += std::exp(0.5 * logvar.data[i]) * eps.data[i];
  return z;
}

VaeLosses vae_loss(const Tensor& x, const Tensor& x_recon, const Tensor& mu, const Tensor& logvar,
                   double kl_weight) {
  if (!x.same_shape(x_recon))
    fail(Errc::shape_mismatch, "loss inputs must match in shape");
  for (size_t i = 0; i < x.data.size(); ++i)
    if (!(x.data[i] >= 0.0 && x.data[i] <= 1.0) ||
        !(x_recon.data[i] >= 0.0 && x_recon.data[i] <= 1.0))
      fail(Errc::invalid_argument, "loss inputs must lie in [0,1]");
  const double n = x.n;
  VaeLosses out;
  out.recon = bce_sum(x, x_recon) / n;
  double kl = 0.0;
  for (size_t i = 0; i < mu.data.size(); ++i) {
    double m = mu.data[i], lv = logvar.data[i];
    kl += -0.5 * (1.0 + lv - m * m - std::exp(lv));
  }
  out.kl = kl / n;
  out.total = out.recon + kl_weight * out.kl;
  return out;
}

void VaeModel::backward_from_logit_grad(const Tensor& glogits, const Tensor& gmu_extra,
                                        const Tensor& glogvar_extra, const Tensor& eps,
                                        const Tensor& logvar) {
  Tensor cur = glogits;
  for (auto it = decoder_.rbegin(); it != decoder_.rend(); ++it)
    cur = (*it)->backward(cur);
  cur.c = static_cast<int>(cur.features());
  cur.h = 1;
  cur.w = 1;
  Tensor gz = dec_fc_->backward(cur);

  // z = mu + exp(0.5 lv) * eps
  Tensor gmu = gz;
  Tensor glogvar = gz;
  for (size_t i = 0; i < gz.data.size(); ++i)
    glogvar.data[i] *= 0.5 * std::exp(0.5 * logvar.data[i]) * eps.data[i];
  for (size_t i = 0; i < gmu.data.size(); ++i) {
    gmu.data[i] += gmu_extra.data[i];
    glogvar.data[i] += glogvar_extra.data[i];
  }

  Tensor gfeat = mu_head_->backward(gmu);
  Tensor gfeat2 = logvar_head_->backward(glogvar);
  for (size_t i = 0; i < gfeat.data.size(); ++i)
    gfeat.data[i] += gfeat2.data[i];
  gfeat.c = feat_c_;
  gfeat.h = feat_h_;
  gfeat.w = feat_w_;
  for (auto it = encoder_.rbegin(); it != encoder_.rend(); ++it)
    gfeat = (*it)->backward(gfeat);
}

VaeLosses VaeModel::loss_and_gradients(const Tensor& x, const Tensor& eps, double kl_weight) {
  auto [mu, logvar] = encode(x, true);
  Tensor z = reparameterize(mu, logvar, eps);
  Tensor logits = decode_logits(z, true);
  Tensor probs = logits;
  for (double& v : probs.data)
    v = sigmoid(v);
  VaeLosses losses = vae_loss(x, probs, mu, logvar, kl_weight);

  const double inv_n = 1.0 / x.n;
  Tensor glogits = probs;
  for (size_t i = 0; i < glogits.data.size(); ++i)
    glogits.data[i] = (probs.data[i] - x.data[i]) * inv_n;

  Tensor gmu_extra(mu.n, mu.c, mu.h, mu.w);
  Tensor glogvar_extra(mu.n, mu.c, mu.h, mu.w);
  for (size_t i = 0; i < mu.data.size(); ++i) {
    gmu_extra.data[i] = kl_weight * mu.data[i] * inv_n;
    glogvar_extra.data[i] = kl_weight * 0.5 * (std::exp(logvar.data[i]) - 1.0) * inv_n;
  }
  backward_from_logit_grad(glogits, gmu_extra, glogvar_extra, eps, logvar);
  return losses;
}

VaeLosses VaeModel::loss_only(const Tensor& x, const Tensor& eps, double kl_weight) {
  auto [mu, logvar] = encode(x, true);
  Tensor z = reparameterize(mu, logvar, eps);
  Tensor probs = decode(z, true);
  return vae_loss(x, probs, mu, logvar, kl_weight);
}

std::vector<nn::Param*> VaeModel::parameters() {
  std::vector<nn::Param*> out;
  auto add = [&](nn::Layer& l) {
    for (nn::Param* p : l.params())
      out.push_back(p);
  };
  for (auto& l : encoder_)
    add(*l);
  add(*mu_head_);
  add(*logvar_head_);
  add(*dec_fc_);
  for (auto& l : decoder_)
    add(*l);
  return out;
}

std::vector<Tensor*> VaeModel::state_tensors() {
  std::vector<Tensor*> out;
  auto add = [&](nn::Layer& l) {
    for (Tensor* t : l.state_tensors())
      out.push_back(t);
  };
  for (auto& l : encoder_)
    add(*l);
  add(*mu_head_);
  add(*logvar_head_);
  add(*dec_fc_);
  for (auto& l : decoder_)
    add(*l);
  return out;
}

void VaeModel::zero_grads() {
  for (nn::Param* p : parameters())
    p->zero_grad();
}

void VaeModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    fail(Errc::io, "cannot open " + path + " for writing");
  auto put_u32 = [&](uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put_f64 = [&](double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i)
      b[i] = static_cast<unsigned char>(bits >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
  };
  out.write(kMagic, 4);
  put_u32(kVersion);
  put_u32(static_cast<uint32_t>(cfg_.latent_dim));
  put_u32(static_cast<uint32_t>(cfg_.num_blocks));
  put_u32(static_cast<uint32_t>(cfg_.base_channels));
  put_u32(static_cast<uint32_t>(cfg_.max_channels));
  put_u32(static_cast<uint32_t>(cfg_.input_h));
  put_u32(static_cast<uint32_t>(cfg_.input_w));
  put_f64(cfg_.leaky_slope);
  put_f64(cfg_.bn_eps);
  put_f64(cfg_.bn_momentum);

  auto tensors = const_cast<VaeModel*>(this)->state_tensors();
  put_u32(static_cast<uint32_t>(tensors.size()));
  for (const Tensor* t : tensors) {
    put_u32(static_cast<uint32_t>(t->n));
    put_u32(static_cast<uint32_t>(t->c));
    put_u32(static_cast<uint32_t>(t->h));
    put_u32(static_cast<uint32_t>(t->w));
    for (double v : t->data)
      put_f64(v);
  }
  if (!out)
    fail(Errc::io, "write failure on " + path);
}

VaeModel VaeModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    fail(Errc::io, "cannot open " + path);
  auto get_u32 = [&]() -> uint32_t {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in)
      fail(Errc::parse, path + ": truncated checkpoint");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
  };
  auto get_f64 = [&]() -> double {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in)
      fail(Errc::parse, path + ": truncated checkpoint");
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
      bits |= static_cast<uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  };
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    fail(Errc::parse, path + ": not a model checkpoint");
  if (get_u32() != kVersion)
    fail(Errc::parse, path + ": unsupported checkpoint version");
  VaeConfig cfg;
  cfg.latent_dim = static_cast<int>(get_u32());
  cfg.num_blocks = static_cast<int>(get_u32());
  cfg.base_channels = static_cast<int>(get_u32());
  cfg.max_channels = static_cast<int>(get_u32());
  cfg.input_h = static_cast<int>(get_u32());
  cfg.input_w = static_cast<int>(get_u32());
  cfg.leaky_slope = get_f64();
  cfg.bn_eps = get_f64();
  cfg.bn_momentum = get_f64();

  VaeModel model(cfg);
  auto tensors = model.state_tensors();
  uint32_t count = get_u32();
  if (count != tensors.size())
    fail(Errc::parse, path + ": checkpoint lists " + std::to_string(count) + " tensors, model has " +
                          std::to_string(tensors.size()));
  for (Tensor* t : tensors) {
    int n = static_cast<int>(get_u32()), c = static_cast<int>(get_u32()),
        h = static_cast<int>(get_u32()), w = static_cast<int>(get_u32());
    if (n != t->n || c != t->c || h != t->h || w != t->w)
      fail(Errc::parse, path + ": tensor shape mismatch");
    for (double& v : t->data)
      v = get_f64();
  }
  return model;
}

nn::Tensor canvases_to_tensor(std::span<const Canvas> images, int expect_h, int expect_w) {
  if (images.empty())
    fail(Errc::invalid_argument, "empty image batch");
  Tensor t(static_cast<int>(images.size()), 1, expect_h, expect_w);
  for (size_t i = 0; i < images.size(); ++i) {
    if (images[i].width() != expect_w || images[i].height() != expect_h)
      fail(Errc::shape_mismatch, "image " + std::to_string(i) + " is not " +
                                     std::to_string(expect_w) + "x" + std::to_string(expect_h));
    for (int y = 0; y < expect_h; ++y)
      for (int x = 0; x < expect_w; ++x)
        t.at(static_cast<int>(i), 0, y, x) = images[i].at(x, y);
  }
  return t;
}

Canvas tensor_to_canvas(const Tensor& t, int index) {
  Canvas c(t.w, t.h);
  for (int y = 0; y < t.h; ++y)
    for (int x = 0; x < t.w; ++x)
      c.set(x, y, std::clamp(t.at(index, 0, y, x), 0.0, 1.0));
  return c;
}

std::pair<VaeModel, std::vector<EpochLoss>> vae_train(const std::vector<Canvas>& dataset,
                                                      const VaeConfig& cfg) {
  if (dataset.empty())
    fail(Errc::invalid_argument, "training dataset is empty");
  VaeModel model(cfg);
  nn::AdamConfig adam_cfg{cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps};
  nn::Adam adam(model.parameters(), adam_cfg);

  Tensor all = canvases_to_tensor(dataset, cfg.input_h, cfg.input_w);
  const int n = all.n;
  Rng root(cfg.seed);
  Rng shuffle_root = root.derive(1);
  Rng eps_root = root.derive(2);

  std::vector<EpochLoss> history;
  std::vector<int> order(n);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = shuffle_root.derive(static_cast<uint64_t>(epoch));
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[shuffle_rng.below(static_cast<uint64_t>(i) + 1)]);

    double sum_total = 0, sum_recon = 0, sum_kl = 0;
    Rng epoch_eps = eps_root.derive(static_cast<uint64_t>(epoch));
    int batch_index = 0;
    for (int start = 0; start < n; start += cfg.batch_size, ++batch_index) {
      const int bs = std::min(cfg.batch_size, n - start);
      Tensor batch(bs, 1, cfg.input_h, cfg.input_w);
      for (int i = 0; i < bs; ++i)
        std::copy_n(all.sample(order[start + i]), all.features(), batch.sample(i));
      Tensor eps(bs, cfg.latent_dim, 1, 1);
      Rng eps_rng = epoch_eps.derive(static_cast<uint64_t>(batch_index));
      for (double& v : eps.data)
        v = eps_rng.normal();

      model.zero_grads();
      VaeLosses l = model.loss_and_gradients(batch, eps, cfg.kl_weight);
      adam.step();
      sum_total += l.total * bs;
      sum_recon += l.recon * bs;
      sum_kl += l.kl * bs;
    }
    history.push_back({epoch + 1, sum_total / n, sum_recon / n, sum_kl / n});
  }
  return {std::move(model), std::move(history)};
}

std::vector<Canvas> vae_sample(VaeModel& model, int count, uint64_t seed) {
  if (count < 1)
    fail(Errc::invalid_argument, "sample count must be >= 1");
  const VaeConfig& cfg = model.config();
  Tensor z(count, cfg.latent_dim, 1, 1);
  Rng rng(seed);
  for (double& v : z.data)
    v = rng.normal();
  Tensor imgs = model.decode(z, false);
  std::vector<Canvas> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i)
    out.push_back(tensor_to_canvas(imgs, i));
  return out;
}

Canvas vae_reconstruct(VaeModel& model, const Canvas& image) {
  const VaeConfig& cfg = model.config();
  Tensor x = canvases_to_tensor(std::span<const Canvas>(&image, 1), cfg.input_h, cfg.input_w);
  auto [mu, logvar] = model.encode(x, false);
  Tensor imgs = model.decode(mu, false);
  return tensor_to_canvas(imgs, 0);
}

void save_loss_history_csv(const std::vector<EpochLoss>& history, const std::string& path) {
  std::string out = "epoch,loss,recon,kl\n";
  for (const EpochLoss& e : history) {
    out += std::to_string(e.epoch) + ',' + fmt_double(e.total) + ',' + fmt_double(e.recon) + ',' +
           fmt_double(e.kl) + '\n';
  }
  write_file(path, out);
}

} // namespace rp
