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

#include "carime/geometry/image.hpp"

#include <fmt/format.h>
#include <torch/torch.h>

#include "carime/core/error.hpp"

namespace carime {

ImageBuffer::ImageBuffer(torch::Tensor hwc) : data_(std::move(hwc)) {
  CARIME_CHECK(data_.defined() && data_.dim() == 3 && data_.size(2) == 3, ErrorKind::kShapeMismatch,
               "ImageBuffer expects an [H, W, 3] tensor");
  CARIME_CHECK(data_.is_floating_point(), ErrorKind::kInvalidArgument, "ImageBuffer expects floating data");
  CARIME_CHECK(torch::isfinite(data_).all().item<bool>(), ErrorKind::kNumerical, "ImageBuffer has non-finite entries");
}

ImageBuffer ImageBuffer::filled(ImageSize size, double value) {
  return ImageBuffer(torch::full({size.height, size.width, 3}, value, torch::kFloat32));
}

ImageBuffer ImageBuffer::from_chw(const torch::Tensor& chw) {
  torch::Tensor t = chw.detach();
  if (t.dim() == 4) {
    CARIME_CHECK(t.size(0) == 1, ErrorKind::kShapeMismatch, "from_chw expects a single sample");
    t = t[0];
  }
  CARIME_CHECK(t.dim() == 3 && t.size(0) == 3, ErrorKind::kShapeMismatch, "from_chw expects [3, H, W]");
  return ImageBuffer(t.permute({1, 2, 0}).contiguous());
}

torch::Tensor ImageBuffer::to_nchw() const { return data_.permute({2, 0, 1}).unsqueeze(0).contiguous(); }

torch::Tensor stack_nchw(const std::vector<ImageBuffer>& images) {
  CARIME_CHECK(!images.empty(), ErrorKind::kInvalidArgument, "stack_nchw: no images");
  std::vector<torch::Tensor> parts;
  parts.reserve(images.size());
  for (const auto& im : images) {
    CARIME_CHECK(im.size() == images.front().size(), ErrorKind::kShapeMismatch, "stack_nchw: mixed image sizes");
    parts.push_back(im.data().permute({2, 0, 1}));
  }
  return torch::stack(parts).contiguous();
}

}  // namespace carime
