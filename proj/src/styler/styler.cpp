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

#include "carime/styler/styler.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "carime/core/error.hpp"
#include "carime/core/eval_guard.hpp"

namespace carime {

namespace nn = torch::nn;

namespace {

constexpr double kEps = 1e-5;
constexpr double kInitialRho = 0.9;

nn::Conv2d conv(int in, int out, int k, int stride = 1) {
  return nn::Conv2d(nn::Conv2dOptions(in, out, k).stride(stride).padding(stride == 2 ? 1 : k / 2));
}

nn::InstanceNorm2d inorm(int c) { return nn::InstanceNorm2d(nn::InstanceNorm2dOptions(c)); }

class ResBlockImpl : public nn::Module {
 public:
  explicit ResBlockImpl(int c) {
    body_ = register_module("body", nn::Sequential(conv(c, c, 3), inorm(c), nn::ReLU(), conv(c, c, 3), inorm(c)));
  }
  torch::Tensor forward(const torch::Tensor& x) { return x + body_->forward(x); }

 private:
  nn::Sequential body_{nullptr};
};
TORCH_MODULE(ResBlock);

torch::Tensor per_channel(const torch::Tensor& v) { return v.view({v.size(0), v.size(1), 1, 1}); }

}  // namespace

torch::Tensor adalin(const torch::Tensor& feat, const torch::Tensor& gamma, const torch::Tensor& beta,
                     const torch::Tensor& rho) {
  CARIME_CHECK(feat.dim() == 4, ErrorKind::kShapeMismatch, "adalin expects [N, C, H, W] features");
  const auto n = feat.size(0);
  const auto c = feat.size(1);
  CARIME_CHECK(gamma.dim() == 2 && gamma.size(0) == n && gamma.size(1) == c && beta.sizes() == gamma.sizes(),
               ErrorKind::kShapeMismatch, "adalin: gamma and beta must be [N, C]");
  CARIME_CHECK(rho.dim() == 1 && rho.size(0) == c, ErrorKind::kShapeMismatch, "adalin: rho must be [C]");
  CARIME_CHECK(((rho >= 0) & (rho <= 1)).all().item<bool>(), ErrorKind::kInvalidArgument,
               "adalin: rho outside [0, 1]");
  const auto in_mean = feat.mean({2, 3}, true);
  const auto in_var = feat.var({2, 3}, /*unbiased=*/false, true);
  const auto a_in = (feat - in_mean) / torch::sqrt(in_var + kEps);
  const auto ln_mean = feat.mean({1, 2, 3}, true);
  const auto ln_var = feat.var({1, 2, 3}, /*unbiased=*/false, true);
  const auto a_ln = (feat - ln_mean) / torch::sqrt(ln_var + kEps);
  const auto r = rho.view({1, c, 1, 1});
  return per_channel(gamma) * (r * a_in + (1 - r) * a_ln) + per_channel(beta);
}

AdaLINImpl::AdaLINImpl(int channels) { rho = register_parameter("rho", torch::full({channels}, kInitialRho)); }

torch::Tensor AdaLINImpl::forward(const torch::Tensor& feat, const torch::Tensor& gamma, const torch::Tensor& beta) {
  return adalin(feat, gamma, beta, rho);
}

StylerNetImpl::StylerNetImpl(const StylerOptions& options) : options_(options) {
  CARIME_CHECK(options.channels > 0 && options.style_dim > 0 && options.mlp_dim > 0 && options.residual_blocks > 0,
               ErrorKind::kConfig, "styler dimensions must be positive");
  const int c = options.channels;
  const int cc = 4 * c;

  nn::Sequential content(conv(3, c, 7), inorm(c), nn::ReLU(), conv(c, 2 * c, 4, 2), inorm(2 * c), nn::ReLU(),
                         conv(2 * c, cc, 4, 2), inorm(cc), nn::ReLU());
  for (int b = 0; b < options.residual_blocks; ++b) content->push_back(ResBlock(cc));
  content_ = register_module("content", content);

  nn::Sequential style(conv(3, c, 7), nn::ReLU());
  int in = c;
  for (int s = 0; s < 4; ++s) {
    const int out = std::min(cc, 2 * in);
    style->push_back(conv(in, out, 4, 2));
    style->push_back(nn::ReLU());
    in = out;
  }
  style_ = register_module("style", style);
  style_fc_ = register_module("style_fc", nn::Linear(in, options.style_dim));

  const int layers = 2 * options.residual_blocks;
  mlp_ = register_module("mlp", nn::Sequential(nn::Linear(options.style_dim, options.mlp_dim), nn::ReLU(),
                                                nn::Linear(options.mlp_dim, options.mlp_dim), nn::ReLU(),
                                                nn::Linear(options.mlp_dim, 2 * layers * cc)));
  for (int l = 0; l < layers; ++l) {
    res_convs_.push_back(register_module(fmt::format("res_conv{}", l), conv(cc, cc, 3)));
    adalins_.push_back(register_module(fmt::format("adalin{}", l), AdaLIN(cc)));
  }

  const auto up = [] {
    return nn::Upsample(nn::UpsampleOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest));
  };
  upsample_ = register_module("upsample", nn::Sequential(up(), conv(cc, 2 * c, 5), nn::ReLU(), up(),
                                                          conv(2 * c, c, 5), nn::ReLU(), conv(c, 3, 7), nn::Tanh()));
}

torch::Tensor StylerNetImpl::encode_content(const torch::Tensor& images) {
  CARIME_CHECK(images.dim() == 4 && images.size(1) == 3 && images.size(2) % 4 == 0 && images.size(3) % 4 == 0,
               ErrorKind::kShapeMismatch, "styler expects [N, 3, H, W] with H and W divisible by 4");
  return content_->forward(images);
}

torch::Tensor StylerNetImpl::encode_style(const torch::Tensor& images) {
  CARIME_CHECK(images.dim() == 4 && images.size(1) == 3, ErrorKind::kShapeMismatch,
               "style encoder expects [N, 3, H, W]");
  return style_fc_->forward(style_->forward(images).mean({2, 3}));
}

torch::Tensor StylerNetImpl::decode(const torch::Tensor& content, const torch::Tensor& style) {
  CARIME_CHECK(style.dim() == 2 && style.size(0) == content.size(0) && style.size(1) == options_.style_dim,
               ErrorKind::kShapeMismatch,
               fmt::format("style code must be [N, {}] matching the content batch", options_.style_dim));
  const int cc = 4 * options_.channels;
  // gamma is predicted as an offset from 1 so fresh decoders start near plain normalization
  const auto params = mlp_->forward(style).view({style.size(0), -1, 2, cc});
  auto x = content;
  for (int b = 0; b < options_.residual_blocks; ++b) {
    auto h = x;
    for (int k = 0; k < 2; ++k) {
      const int l = 2 * b + k;
      const auto gamma = 1 + params.select(1, l).select(1, 0);
      const auto beta = params.select(1, l).select(1, 1);
      h = adalins_[l]->forward(res_convs_[l]->forward(h), gamma, beta);
      if (k == 0) h = torch::relu(h);
    }
    x = x + h;
  }
  return upsample_->forward(x);
}

void StylerNetImpl::clamp_rho() {
  torch::NoGradGuard guard;
  for (auto& a : adalins_) a->rho.clamp_(0.0, 1.0);
}

DiscriminatorImpl::DiscriminatorImpl(const StylerOptions& options) {
  const int c = options.disc_channels;
  const auto lrelu = [] { return nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)); };
  layers_ = register_module("layers", nn::Sequential(conv(3, c, 4, 2), lrelu(), conv(c, 2 * c, 4, 2), lrelu(),
                                                      conv(2 * c, 4 * c, 4, 2), lrelu(), conv(4 * c, 1, 3)));
}

torch::Tensor DiscriminatorImpl::forward(const torch::Tensor& images) { return layers_->forward(images); }

AdversarialLosses adversarial_losses(const torch::Tensor& d_real, const torch::Tensor& d_fake) {
  return {(d_real - 1).square().mean() + d_fake.square().mean(), (d_fake - 1).square().mean()};
}

torch::Tensor image_recon_loss(StylerNet& net, const torch::Tensor& images) {
  return (net->decode(net->encode_content(images), net->encode_style(images)) - images).abs().mean();
}

namespace {

CycleLoss cycle_terms(StylerNet& net, const torch::Tensor& content, const torch::Tensor& fake,
                      const torch::Tensor& style) {
  CycleLoss c;
  c.content = (net->encode_content(fake) - content).abs().mean();
  c.style = (net->encode_style(fake) - style).abs().mean();
  c.total = c.content + c.style;
  return c;
}

void require_finite(std::initializer_list<std::pair<const char*, double>> terms) {
  for (const auto& [name, v] : terms) {
    if (std::isfinite(v)) continue;
    std::string all;
    for (const auto& [n, x] : terms) all += fmt::format(" {}={}", n, x);
    fail(ErrorKind::kNumerical, fmt::format("styler loss '{}' is not finite:{}", name, all));
  }
}

}  // namespace

CycleLoss cycle_loss(StylerNet& net, const torch::Tensor& photos, const torch::Tensor& style) {
  const auto content = net->encode_content(photos);
  return cycle_terms(net, content, net->decode(content, style), style);
}

StylerStepResult styler_train_step(StylerNet& net, Discriminator& disc, torch::optim::Optimizer& gen_opt,
                                   torch::optim::Optimizer& disc_opt, const torch::Tensor& photos,
                                   const torch::Tensor& caricatures, const StylerWeights& weights,
                                   torch::Generator& generator) {
  net->train();
  disc->train();
  StylerStepResult r;
  const auto z = torch::randn({photos.size(0), net->options().style_dim}, generator, photos.scalar_type());

  torch::Tensor fake;
  {
    torch::NoGradGuard guard;
    fake = net->decode(net->encode_content(photos), z);
  }
  disc_opt.zero_grad();
  const auto d_loss = adversarial_losses(disc->forward(caricatures), disc->forward(fake)).d_loss;
  r.d_loss = d_loss.item<double>();
  require_finite({{"d_loss", r.d_loss}});
  d_loss.backward();
  disc_opt.step();

  gen_opt.zero_grad();
  const auto content = net->encode_content(photos);
  fake = net->decode(content, z);
  const auto g_adv = (disc->forward(fake) - 1).square().mean();
  const auto rec_photo = image_recon_loss(net, photos);
  const auto rec_cari = image_recon_loss(net, caricatures);
  const auto rec_img = (rec_photo + rec_cari) / 2;
  const auto cyc = cycle_terms(net, content, fake, z);
  const auto total = g_adv + weights.img * rec_img + weights.cyc * cyc.total;
  r.g_adv = g_adv.item<double>();
  r.rec_photo = rec_photo.item<double>();
  r.rec_cari = rec_cari.item<double>();
  r.rec_img = rec_img.item<double>();
  r.cyc_content = cyc.content.item<double>();
  r.cyc_style = cyc.style.item<double>();
  r.cyc = cyc.total.item<double>();
  r.total = total.item<double>();
  require_finite({{"g_adv", r.g_adv}, {"rec_img", r.rec_img}, {"cyc", r.cyc}, {"total", r.total}});
  total.backward();
  gen_opt.step();
  net->clamp_rho();
  return r;
}

ImageBuffer stylize(StylerNet& net, const ImageBuffer& image, const torch::Tensor& style) {
  EvalGuard eval(*net);
  torch::NoGradGuard guard;
  const auto x = image.to_nchw().to(torch::kFloat32);
  const auto z = style.reshape({1, -1}).to(torch::kFloat32);
  return ImageBuffer::from_chw(net->decode(net->encode_content(x), z));
}

torch::Tensor encode_style(StylerNet& net, const ImageBuffer& image) {
  EvalGuard eval(*net);
  torch::NoGradGuard guard;
  return net->encode_style(image.to_nchw().to(torch::kFloat32)).reshape({-1});
}

void write_code(const std::filesystem::path& path, const torch::Tensor& code) {
  const auto flat = code.detach().to(torch::kFloat32).contiguous().view({-1});
  std::ofstream out(path);
  CARIME_CHECK(out.good(), ErrorKind::kIo, fmt::format("cannot write code file {}", path.string()));
  const float* p = flat.data_ptr<float>();
  for (int64_t i = 0; i < flat.numel(); ++i) out << (i ? " " : "") << fmt::format("{}", p[i]);
  out << '\n';
}

torch::Tensor read_code(const std::filesystem::path& path) {
  std::ifstream in(path);
  CARIME_CHECK(in.good(), ErrorKind::kIo, fmt::format("cannot open code file {}", path.string()));
  std::vector<float> values;
  std::string token;
  while (in >> token) {
    try {
      std::size_t used = 0;
      const float v = std::stof(token, &used);
      CARIME_CHECK(used == token.size() && std::isfinite(v), ErrorKind::kFormat, "bad number");
      values.push_back(v);
    } catch (const std::exception&) {
      fail(ErrorKind::kFormat, fmt::format("{}: '{}' is not a finite number", path.string(), token));
    }
  }
  CARIME_CHECK(!values.empty(), ErrorKind::kFormat, fmt::format("{}: empty code file", path.string()));
  return torch::tensor(values, torch::kFloat32);
}

}  // namespace carime
