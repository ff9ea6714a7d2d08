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

#include <string>
#include <utility>

namespace carime {

/// How encoder heads push codes towards N(0, 1).
enum class CodeNorm {
  kBatch,  // per-dimension standardization with running statistics (default)
  kLayer,  // per-sample standardization across dimensions
  kNone,
};

CodeNorm parse_code_norm(const std::string& name);
std::string to_string(CodeNorm norm);

struct WarperOptions {
  int image_size = 256;  // must be a multiple of 64
  int code_dim_w = 64;
  int code_dim_p = 64;
  int channels = 32;       // width of the first encoder stage
  int max_channels = 256;  // cap for the doubling
  CodeNorm code_norm = CodeNorm::kBatch;

  int field_size() const { return image_size / 2; }
};

/// Field encoder E_w, photo encoder E_p with its feature tap, photo decoder G_p and
/// field decoder G_w.
class WarperNetImpl : public torch::nn::Module {
 public:
  explicit WarperNetImpl(const WarperOptions& options);

  const WarperOptions& options() const { return options_; }

  /// [N, 2, S/2, S/2] residual -> [N, code_dim_w].
  torch::Tensor encode_warp(const torch::Tensor& field_half);

  /// [N, 3, S, S] photo -> (z_p [N, code_dim_p], last conv activation [N, C, S/32, S/32]).
  std::pair<torch::Tensor, torch::Tensor> encode_photo(const torch::Tensor& photo);

  /// Feature tap -> [N, 3, S, S] in [-1, 1].
  torch::Tensor decode_photo(const torch::Tensor& feature);

  /// Codes -> [N, 2, S/2, S/2] residual (normalized units).
  torch::Tensor decode_field(const torch::Tensor& z_w, const torch::Tensor& z_p);

  /// decode_field followed by bilinear upscaling to [N, 2, S, S].
  torch::Tensor decode_full_field(const torch::Tensor& z_w, const torch::Tensor& z_p);

  /// Output convolution of G_w; zero at construction.
  torch::nn::Conv2d& field_head() { return field_head_; }

 private:
  torch::Tensor normalize_code(const torch::Tensor& code, torch::nn::BatchNorm1d& bn);

  WarperOptions options_;
  int bottleneck_channels_ = 0;
  torch::nn::Sequential warp_convs_{nullptr};
  torch::nn::Linear warp_fc_{nullptr};
  torch::nn::BatchNorm1d warp_bn_{nullptr};
  torch::nn::Sequential photo_convs_{nullptr};
  torch::nn::Linear photo_fc_{nullptr};
  torch::nn::BatchNorm1d photo_bn_{nullptr};
  torch::nn::Sequential photo_decoder_{nullptr};
  torch::nn::Linear field_fc_{nullptr};
  torch::nn::Sequential field_decoder_{nullptr};
  torch::nn::Conv2d field_head_{nullptr};
};
TORCH_MODULE(WarperNet);

}  // namespace carime
