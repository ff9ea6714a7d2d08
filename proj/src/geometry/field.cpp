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

#include "carime/geometry/field.hpp"

#include <fmt/format.h>
#include <torch/torch.h>

#include <algorithm>
#include <cmath>

#include "carime/core/error.hpp"

namespace carime {

namespace F = torch::nn::functional;

DeformationField::DeformationField(torch::Tensor residual_hw2) : residual_(std::move(residual_hw2)) {
  CARIME_CHECK(residual_.defined() && residual_.dim() == 3 && residual_.size(2) == 2, ErrorKind::kShapeMismatch,
               "DeformationField expects an [H, W, 2] residual");
  CARIME_CHECK(residual_.is_floating_point(), ErrorKind::kInvalidArgument, "DeformationField expects floating data");
  CARIME_CHECK(torch::isfinite(residual_).all().item<bool>(), ErrorKind::kNumerical,
               "DeformationField has non-finite entries");
}

DeformationField DeformationField::identity(ImageSize size, torch::Dtype dtype) {
  CARIME_CHECK(size.width > 0 && size.height > 0, ErrorKind::kInvalidArgument, "identity field needs positive size");
  return DeformationField(torch::zeros({size.height, size.width, 2}, dtype));
}

namespace {

torch::Tensor half_extent(int width, int height, const torch::Tensor& like) {
  return torch::tensor({width / 2.0, height / 2.0}, like.options());
}

}  // namespace

DeformationField DeformationField::from_pixels(const torch::Tensor& pixel_residual_hw2) {
  CARIME_CHECK(pixel_residual_hw2.dim() == 3 && pixel_residual_hw2.size(2) == 2, ErrorKind::kShapeMismatch,
               "from_pixels expects [H, W, 2]");
  const int h = static_cast<int>(pixel_residual_hw2.size(0));
  const int w = static_cast<int>(pixel_residual_hw2.size(1));
  return DeformationField(pixel_residual_hw2 / half_extent(w, h, pixel_residual_hw2));
}

torch::Tensor DeformationField::pixel_residual() const {
  return residual_ * half_extent(width(), height(), residual_);
}

Point2 DeformationField::sample_location(int row, int col) const {
  auto r = residual_.to(torch::kFloat64);
  auto acc = r.accessor<double, 3>();
  return {col + acc[row][col][0] * width() / 2.0, row + acc[row][col][1] * height() / 2.0};
}

Point2 DeformationField::map_point(const Point2& p) const {
  const auto r = residual_.to(torch::kFloat64).contiguous();
  const auto acc = r.accessor<double, 3>();
  const int w = width();
  const int h = height();
  const double x = std::clamp(p.x, 0.0, w - 1.0);
  const double y = std::clamp(p.y, 0.0, h - 1.0);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  double d[2];
  for (int c = 0; c < 2; ++c) {
    d[c] = (1 - fy) * ((1 - fx) * acc[y0][x0][c] + fx * acc[y0][x1][c]) +
           fy * ((1 - fx) * acc[y1][x0][c] + fx * acc[y1][x1][c]);
  }
  return {p.x + d[0] * w / 2.0, p.y + d[1] * h / 2.0};
}

torch::Tensor DeformationField::to_nchw() const { return residual_.permute({2, 0, 1}).unsqueeze(0).contiguous(); }

DeformationField DeformationField::from_nchw(const torch::Tensor& n2hw) {
  torch::Tensor t = n2hw.detach();
  if (t.dim() == 4) {
    CARIME_CHECK(t.size(0) == 1, ErrorKind::kShapeMismatch, "from_nchw expects a single sample");
    t = t[0];
  }
  CARIME_CHECK(t.dim() == 3 && t.size(0) == 2, ErrorKind::kShapeMismatch, "from_nchw expects [2, H, W]");
  return DeformationField(t.permute({1, 2, 0}).contiguous());
}

DeformationField scale_field(const DeformationField& field, double s) {
  CARIME_CHECK(std::isfinite(s), ErrorKind::kInvalidArgument, "scale_field: scale must be finite");
  if (s == 1.0) return field;
  return DeformationField(field.residual() * s);
}

torch::Tensor resize_residual(const torch::Tensor& residual_n2hw, ImageSize target) {
  CARIME_CHECK(target.width > 0 && target.height > 0, ErrorKind::kInvalidArgument,
               fmt::format("resize_field: non-positive target {}x{}", target.width, target.height));
  CARIME_CHECK(residual_n2hw.dim() == 4 && residual_n2hw.size(1) == 2, ErrorKind::kShapeMismatch,
               "resize_residual expects [N, 2, H, W]");
  if (residual_n2hw.size(2) == target.height && residual_n2hw.size(3) == target.width) return residual_n2hw;
  return F::interpolate(residual_n2hw, F::InterpolateFuncOptions()
                                           .size(std::vector<int64_t>{target.height, target.width})
                                           .mode(torch::kBilinear)
                                           .align_corners(false));
}

DeformationField resize_field(const DeformationField& field, ImageSize target) {
  return DeformationField::from_nchw(resize_residual(field.to_nchw(), target));
}

torch::Tensor exaggeration_degree_batch(const torch::Tensor& residual_n2hw) {
  CARIME_CHECK(residual_n2hw.dim() == 4 && residual_n2hw.size(1) == 2, ErrorKind::kShapeMismatch,
               "exaggeration_degree_batch expects [N, 2, H, W]");
  const auto h = residual_n2hw.size(2);
  const auto w = residual_n2hw.size(3);
  auto r = residual_n2hw.detach().to(torch::kFloat64);
  auto dx = r.select(1, 0) * (w / 2.0);
  auto dy = r.select(1, 1) * (h / 2.0);
  return torch::sqrt(dx * dx + dy * dy).sum({1, 2}) / static_cast<double>(h * w);
}

double exaggeration_degree(const DeformationField& field) {
  return exaggeration_degree_batch(field.to_nchw())[0].item<double>();
}

}  // namespace carime
