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

#include <torch/types.h>

#include <vector>

#include "carime/geometry/landmarks.hpp"

namespace carime {

/// H x W x 3 image with values in [-1, 1], stored channels-last.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  /// Takes an [H, W, 3] floating tensor; rejects other shapes and non-finite entries.
  explicit ImageBuffer(torch::Tensor hwc);

  static ImageBuffer filled(ImageSize size, double value);
  /// From a single-sample [3, H, W] or [1, 3, H, W] network tensor.
  static ImageBuffer from_chw(const torch::Tensor& chw);

  const torch::Tensor& data() const { return data_; }
  int width() const { return static_cast<int>(data_.size(1)); }
  int height() const { return static_cast<int>(data_.size(0)); }
  ImageSize size() const { return {width(), height()}; }
  bool empty() const { return !data_.defined(); }

  /// [1, 3, H, W] view for network input.
  torch::Tensor to_nchw() const;

 private:
  torch::Tensor data_;
};

/// Stacks same-sized images into [N, 3, H, W].
torch::Tensor stack_nchw(const std::vector<ImageBuffer>& images);

}  // namespace carime
