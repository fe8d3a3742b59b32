#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "canvas.hpp"
#include "nn.hpp"

namespace rp {

struct VaeConfig {
  int latent_dim = 8;
  int num_blocks = 6;
  int base_channels = 16; // doubles per block, capped at 128
  int max_channels = 128;
  double leaky_slope = 0.2;
  int epochs = 200;
  int batch_size = 32;
  double learning_rate = 0.0005;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double kl_weight = 1.0;
  double bn_eps = 1e-5;
  double bn_momentum = 0.1;
  int input_h = 32;
  int input_w = 64;
  uint64_t seed = 0;
};

struct VaeLosses {
  double total = 0, recon = 0, kl = 0;
};

struct EpochLoss {
  int epoch = 0; // 1-based
  double total = 0, recon = 0, kl = 0;
};

// Convolutional VAE over stroke images. Encoder: num_blocks of
// conv/batch-norm/leaky-relu plus a skip capsule, strided 2 until the
// feature map bottoms out; affine heads for mu and logvar. Decoder mirrors
// the encoder with transposed convolutions and a sigmoid output.
class VaeModel {
public:
  explicit VaeModel(const VaeConfig& cfg);

  const VaeConfig& config() const { return cfg_; }

  // mu, logvar as (n, latent_dim, 1, 1); inference mode uses running
  // batch-norm statistics
  std::pair<nn::Tensor, nn::Tensor> encode(const nn::Tensor& x, bool training = false);

  // decoded images in [0,1], shape (n, 1, input_h, input_w)
  nn::Tensor decode(const nn::Tensor& z, bool training = false);

  // one optimization-ready pass: returns losses with gradients accumulated
  VaeLosses loss_and_gradients(const nn::Tensor& x, const nn::Tensor& eps, double kl_weight);
  // forward only (training-mode statistics), no gradients kept
  VaeLosses loss_only(const nn::Tensor& x, const nn::Tensor& eps, double kl_weight);

  std::vector<nn::Param*> parameters();
  std::vector<nn::Tensor*> state_tensors();
  void zero_grads();

  void save(const std::string& path) const;
  static VaeModel load(const std::string& path);

private:
  nn::Tensor decode_logits(const nn::Tensor& z, bool training);
  void backward_from_logit_grad(const nn::Tensor& glogits, const nn::Tensor& gmu_extra,
                                const nn::Tensor& glogvar_extra, const nn::Tensor& eps,
                                const nn::Tensor& logvar);

  VaeConfig cfg_;
  int feat_c_ = 0, feat_h_ = 0, feat_w_ = 0;
  std::vector<std::unique_ptr<nn::Layer>> encoder_;
  std::unique_ptr<nn::Dense> mu_head_, logvar_head_;
  std::unique_ptr<nn::Dense> dec_fc_;
  std::vector<std::unique_ptr<nn::Layer>> decoder_;
};

// z = mu + exp(0.5 * logvar) * eps, elementwise.
nn::Tensor reparameterize(const nn::Tensor& mu, const nn::Tensor& logvar, const nn::Tensor& eps);

// Reconstruction: per-pixel binary cross entropy summed over pixels, mean
// over the batch. KL: -0.5 * sum(1 + logvar - mu^2 - exp(logvar)), mean
// over the batch. total = recon + kl_weight * kl. Inputs must lie in [0,1].
VaeLosses vae_loss(const nn::Tensor& x, const nn::Tensor& x_recon, const nn::Tensor& mu,
                   const nn::Tensor& logvar, double kl_weight);

// Adam training loop over the full dataset; per-epoch mean losses.
std::pair<VaeModel, std::vector<EpochLoss>> vae_train(const std::vector<Canvas>& dataset,
                                                      const VaeConfig& cfg);

std::vector<Canvas> vae_sample(VaeModel& model, int count, uint64_t seed);
Canvas vae_reconstruct(VaeModel& model, const Canvas& image);

// epoch,loss,recon,kl
void save_loss_history_csv(const std::vector<EpochLoss>& history, const std::string& path);

nn::Tensor canvases_to_tensor(std::span<const Canvas> images, int expect_h, int expect_w);
Canvas tensor_to_canvas(const nn::Tensor& t, int index);

} // namespace rp
