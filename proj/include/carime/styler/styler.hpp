// Copyright 2026 The CariMe Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <torch/torch.h>

#include <filesystem>
#include <vector>

#include "carime/geometry/image.hpp"

namespace carime {

/// Adaptive layer-instance normalization of [N, C, H, W] features.
///
/// gamma, beta: [N, C]; rho: [C] with entries in [0, 1]. Instance statistics are per sample
/// and channel over space, layer statistics per sample over channels and space; both use the
/// biased variance and eps 1e-5.
torch::Tensor adalin(const torch::Tensor& feat, const torch::Tensor& gamma, const torch::Tensor& beta,
                     const torch::Tensor& rho);

struct StylerOptions {
  int channels = 64;  // width after the stem; the content map has 4x this
  int style_dim = 8;
  int mlp_dim = 256;
  int residual_blocks = 4;
  int disc_channels = 64;
};

/// AdaLIN layer whose mixing weight rho is learned; gamma and beta are supplied per call.
class AdaLINImpl : public torch::nn::Module {
 public:
  explicit AdaLINImpl(int channels);
  torch::Tensor forward(const torch::Tensor& feat, const torch::Tensor& gamma, const torch::Tensor& beta);
  torch::Tensor rho;
};
TORCH_MODULE(AdaLIN);

/// Content encoder E_c, style encoder E_s and generator G_s.
class StylerNetImpl : public torch::nn::Module {
 public:
  explicit StylerNetImpl(const StylerOptions& options);

  const StylerOptions& options() const { return options_; }

  /// [N, 3, H, W] -> [N, 4C, H/4, W/4]
  torch::Tensor encode_content(const torch::Tensor& images);
  /// [N, 3, H, W] -> [N, style_dim]
  torch::Tensor encode_style(const torch::Tensor& images);
  /// Content map and style code -> [N, 3, H, W] in [-1, 1].
  torch::Tensor decode(const torch::Tensor& content, const torch::Tensor& style);

  /// All AdaLIN layers, in decoder order.
  std::vector<AdaLIN> adalin_layers() const { return adalins_; }
  /// Clamps every rho into [0, 1].
  void clamp_rho();

 private:
  StylerOptions options_;
  torch::nn::Sequential content_{nullptr};
  torch::nn::Sequential style_{nullptr};
  torch::nn::Linear style_fc_{nullptr};
  torch::nn::Sequential mlp_{nullptr};
  std::vector<torch::nn::Conv2d> res_convs_;
  std::vector<AdaLIN> adalins_;
  torch::nn::Sequential upsample_{nullptr};
};
TORCH_MODULE(StylerNet);

/// Patch discriminator D: four convolutions, [N, 3, H, W] -> [N, 1, h, w].
class DiscriminatorImpl : public torch::nn::Module {
 public:
  explicit DiscriminatorImpl(const StylerOptions& options);
  torch::Tensor forward(const torch::Tensor& images);

 private:
  torch::nn::Sequential layers_{nullptr};
};
TORCH_MODULE(Discriminator);

struct AdversarialLosses {
  torch::Tensor d_loss;  // E[(D(real) - 1)^2] + E[D(fake)^2]
  torch::Tensor g_loss;  // E[(D(fake) - 1)^2]
};

/// Least-squares objectives from discriminator patch outputs.
AdversarialLosses adversarial_losses(const torch::Tensor& d_real, const torch::Tensor& d_fake);

/// l1 between G_s(E_c(x), E_s(x)) and x.
torch::Tensor image_recon_loss(StylerNet& net, const torch::Tensor& images);

struct CycleLoss {
  torch::Tensor content;
  torch::Tensor style;
  torch::Tensor total;
};

/// Content and style recovered from G_s(E_c(x_p), z_s).
CycleLoss cycle_loss(StylerNet& net, const torch::Tensor& photos, const torch::Tensor& style);

struct StylerWeights {
  double img = 10.0;
  double cyc = 1.0;
};

struct StylerStepResult {
  double d_loss = 0;
  double g_adv = 0;
  double rec_photo = 0;
  double rec_cari = 0;
  double rec_img = 0;  // mean of the photo and caricature terms
  double cyc_content = 0;
  double cyc_style = 0;
  double cyc = 0;
  double total = 0;  // g_adv + img * rec_img + cyc * cyc
};

/// Discriminator step followed by a generator step; rho is clamped afterwards. Each step
/// throws ErrorKind::kNumerical before its update if one of its losses is not finite.
StylerStepResult styler_train_step(StylerNet& net, Discriminator& disc, torch::optim::Optimizer& gen_opt,
                                   torch::optim::Optimizer& disc_opt, const torch::Tensor& photos,
                                   const torch::Tensor& caricatures, const StylerWeights& weights,
                                   torch::Generator& generator);

/// Renders `image` with `style` in eval mode, without gradients.
ImageBuffer stylize(StylerNet& net, const ImageBuffer& image, const torch::Tensor& style);

/// Style code of a reference image.
torch::Tensor encode_style(StylerNet& net, const ImageBuffer& image);

/// Plain-text style code: one whitespace-separated line of numbers.
void write_code(const std::filesystem::path& path, const torch::Tensor& code);
torch::Tensor read_code(const std::filesystem::path& path);

}  // namespace carime
