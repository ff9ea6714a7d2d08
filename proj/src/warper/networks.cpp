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

#include "carime/warper/networks.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>

#include "carime/core/error.hpp"
#include "carime/geometry/field.hpp"

namespace carime {

namespace nn = torch::nn;

namespace {

constexpr int kEncoderStages = 5;
constexpr int kFieldUpsamples = 4;

void add_down_block(nn::Sequential& seq, int in, int out) {
  seq->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, 4).stride(2).padding(1)));
  seq->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
}

void add_up_block(nn::Sequential& seq, int in, int out) {
  seq->push_back(
      nn::Upsample(nn::UpsampleOptions().scale_factor(std::vector<double>{2.0, 2.0}).mode(torch::kNearest)));
  seq->push_back(nn::Conv2d(nn::Conv2dOptions(in, out, 3).padding(1)));
  seq->push_back(nn::LeakyReLU(nn::LeakyReLUOptions().negative_slope(0.2)));
}

int stage_channels(const WarperOptions& o, int stage) {
  return std::min(o.max_channels, o.channels << stage);
}

nn::Sequential encoder(int in, const WarperOptions& o) {
  nn::Sequential seq;
  for (int s = 0; s < kEncoderStages; ++s) {
    add_down_block(seq, s == 0 ? in : stage_channels(o, s - 1), stage_channels(o, s));
  }
  return seq;
}

}  // namespace

CodeNorm parse_code_norm(const std::string& name) {
  if (name == "batch") return CodeNorm::kBatch;
  if (name == "layer") return CodeNorm::kLayer;
  if (name == "none") return CodeNorm::kNone;
  fail(ErrorKind::kConfig, fmt::format("unknown code normalization '{}' (batch, layer, none)", name));
}

std::string to_string(CodeNorm norm) {
  switch (norm) {
    case CodeNorm::kBatch: return "batch";
    case CodeNorm::kLayer: return "layer";
    case CodeNorm::kNone: return "none";
  }
  return "batch";
}

WarperNetImpl::WarperNetImpl(const WarperOptions& options) : options_(options) {
  CARIME_CHECK(options.image_size >= 64 && options.image_size % 64 == 0, ErrorKind::kConfig,
               fmt::format("warper image size must be a positive multiple of 64, got {}", options.image_size));
  CARIME_CHECK(options.code_dim_w > 0 && options.code_dim_p > 0 && options.channels > 0, ErrorKind::kConfig,
               "warper code dimensions and channel width must be positive");
  bottleneck_channels_ = stage_channels(options, kEncoderStages - 1);
  const int c = bottleneck_channels_;

  warp_convs_ = register_module("warp_convs", encoder(2, options));
  warp_fc_ = register_module("warp_fc", nn::Linear(c, options.code_dim_w));
  photo_convs_ = register_module("photo_convs", encoder(3, options));
  photo_fc_ = register_module("photo_fc", nn::Linear(c, options.code_dim_p));
  if (options.code_norm == CodeNorm::kBatch) {
    warp_bn_ = register_module("warp_bn", nn::BatchNorm1d(nn::BatchNormOptions(options.code_dim_w).affine(false)));
    photo_bn_ = register_module("photo_bn", nn::BatchNorm1d(nn::BatchNormOptions(options.code_dim_p).affine(false)));
  }

  // G_p climbs back through all five encoder strides to full resolution.
  nn::Sequential gp;
  for (int s = kEncoderStages - 1; s >= 0; --s) {
    add_up_block(gp, stage_channels(options, s), s == 0 ? options.channels : stage_channels(options, s - 1));
  }
  gp->push_back(nn::Conv2d(nn::Conv2dOptions(options.channels, 3, 3).padding(1)));
  gp->push_back(nn::Tanh());
  photo_decoder_ = register_module("photo_decoder", gp);

  const int base = options.field_size() >> kFieldUpsamples;
  field_fc_ = register_module("field_fc", nn::Linear(options.code_dim_w + options.code_dim_p, c * base * base));
  nn::Sequential gw;
  int in = c;
  for (int s = 0; s < kFieldUpsamples; ++s) {
    const int out = std::max(options.channels, in / 2);
    add_up_block(gw, in, out);
    in = out;
  }
  field_decoder_ = register_module("field_decoder", gw);
  field_head_ = register_module("field_head", nn::Conv2d(nn::Conv2dOptions(in, 2, 3).padding(1)));
  torch::NoGradGuard guard;
  // He initialization keeps activations from shrinking through the stride stack, so code
  // statistics stay well above the normalization epsilon.
  for (auto& m : modules(/*include_self=*/false)) {
    if (auto* conv = m->as<nn::Conv2d>()) {
      nn::init::kaiming_normal_(conv->weight, 0.2, torch::kFanIn, torch::kLeakyReLU);
      conv->bias.zero_();
    } else if (auto* fc = m->as<nn::Linear>()) {
      nn::init::kaiming_normal_(fc->weight, 0.2, torch::kFanIn, torch::kLeakyReLU);
      fc->bias.zero_();
    }
  }
  field_head_->weight.zero_();
  field_head_->bias.zero_();
}

torch::Tensor WarperNetImpl::normalize_code(const torch::Tensor& code, nn::BatchNorm1d& bn) {
  switch (options_.code_norm) {
    case CodeNorm::kBatch: return bn->forward(code);
    case CodeNorm::kLayer: {
      const auto mean = code.mean(1, true);
      const auto var = code.var(1, /*unbiased=*/false, true);
      return (code - mean) / torch::sqrt(var + 1e-5);
    }
    case CodeNorm::kNone: return code;
  }
  return code;
}

torch::Tensor WarperNetImpl::encode_warp(const torch::Tensor& field_half) {
  const int fs = options_.field_size();
  CARIME_CHECK(field_half.dim() == 4 && field_half.size(1) == 2 && field_half.size(2) == fs &&
                   field_half.size(3) == fs,
               ErrorKind::kShapeMismatch,
               fmt::format("encode_warp expects [N, 2, {0}, {0}], got {1}", fs, fmt::join(field_half.sizes(), "x")));
  auto h = warp_convs_->forward(field_half).mean({2, 3});
  return normalize_code(warp_fc_->forward(h), warp_bn_);
}

std::pair<torch::Tensor, torch::Tensor> WarperNetImpl::encode_photo(const torch::Tensor& photo) {
  const int s = options_.image_size;
  CARIME_CHECK(photo.dim() == 4 && photo.size(1) == 3 && photo.size(2) == s && photo.size(3) == s,
               ErrorKind::kShapeMismatch,
               fmt::format("encode_photo expects [N, 3, {0}, {0}], got {1}", s, fmt::join(photo.sizes(), "x")));
  auto feature = photo_convs_->forward(photo);
  auto code = normalize_code(photo_fc_->forward(feature.mean({2, 3})), photo_bn_);
  return {code, feature};
}

torch::Tensor WarperNetImpl::decode_photo(const torch::Tensor& feature) { return photo_decoder_->forward(feature); }

torch::Tensor WarperNetImpl::decode_field(const torch::Tensor& z_w, const torch::Tensor& z_p) {
  CARIME_CHECK(z_w.dim() == 2 && z_p.dim() == 2 && z_w.size(0) == z_p.size(0) &&
                   z_w.size(1) == options_.code_dim_w && z_p.size(1) == options_.code_dim_p,
               ErrorKind::kShapeMismatch,
               fmt::format("decode_field expects z_w [N, {}] and z_p [N, {}], got {} and {}", options_.code_dim_w,
                           options_.code_dim_p, fmt::join(z_w.sizes(), "x"), fmt::join(z_p.sizes(), "x")));
  const int base = options_.field_size() >> kFieldUpsamples;
  auto h = field_fc_->forward(torch::cat({z_w, z_p}, 1));
  h = torch::leaky_relu(h, 0.2).view({z_w.size(0), bottleneck_channels_, base, base});
  return field_head_->forward(field_decoder_->forward(h));
}

torch::Tensor WarperNetImpl::decode_full_field(const torch::Tensor& z_w, const torch::Tensor& z_p) {
  return resize_residual(decode_field(z_w, z_p), {options_.image_size, options_.image_size});
}

}  // namespace carime
