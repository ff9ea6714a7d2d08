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

#include "carime/geometry/landmarks.hpp"

namespace carime {

/// Backward sampling map: identity grid plus a residual displacement.
///
/// The residual is an [H, W, 2] tensor (x, y) in normalized units where the full image
/// width (height) spans 2.0, so one pixel horizontally is 2/W. Output pixel (i, j)
/// samples the source at pixel (j + rx * W/2, i + ry * H/2).
class DeformationField {
 public:
  DeformationField() = default;
  explicit DeformationField(torch::Tensor residual_hw2);

  static DeformationField identity(ImageSize size, torch::Dtype dtype = torch::kFloat32);
  /// Residual given in pixel units.
  static DeformationField from_pixels(const torch::Tensor& pixel_residual_hw2);

  const torch::Tensor& residual() const { return residual_; }
  int width() const { return static_cast<int>(residual_.size(1)); }
  int height() const { return static_cast<int>(residual_.size(0)); }
  ImageSize size() const { return {width(), height()}; }

  /// Residual in pixel units: normalized * (W/2, H/2).
  torch::Tensor pixel_residual() const;
  /// Sampling location, in source pixel coordinates, of output pixel (row, col).
  Point2 sample_location(int row, int col) const;
  /// Bilinear lookup of the sampling map at a fractional output position.
  Point2 map_point(const Point2& p) const;

  /// [1, 2, H, W] channels-first copy for network consumption.
  torch::Tensor to_nchw() const;
  static DeformationField from_nchw(const torch::Tensor& n2hw);

 private:
  torch::Tensor residual_;
};

/// Residual multiplied by `s`; the identity grid is untouched.
DeformationField scale_field(const DeformationField& field, double s);

/// Bilinear resampling of the residual to `target`. Magnitudes are left as-is since
/// normalized units do not depend on resolution.
DeformationField resize_field(const DeformationField& field, ImageSize target);

/// Batched form on [N, 2, H, W] residuals; differentiable.
torch::Tensor resize_residual(const torch::Tensor& residual_n2hw, ImageSize target);

/// Mean per-pixel displacement length in pixels: sum_ij ||F_ij||_2 / (H W).
double exaggeration_degree(const DeformationField& field);

/// Per-sample degrees of [N, 2, H, W] normalized residuals, as an [N] double tensor.
torch::Tensor exaggeration_degree_batch(const torch::Tensor& residual_n2hw);

}  // namespace carime
