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

#include "carime/geometry/tps.hpp"

#include <fmt/format.h>
#include <torch/torch.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "carime/core/error.hpp"

namespace carime {

namespace {

double tps_kernel(double dx, double dy) {
  const double r2 = dx * dx + dy * dy;
  return r2 > 0.0 ? r2 * std::log(r2) : 0.0;
}

}  // namespace

ThinPlateSpline::ThinPlateSpline(std::span<const Point2> controls, std::span<const Point2> displacements,
                                 ImageSize frame, double regularization, double max_condition)
    : frame_(frame) {
  CARIME_CHECK(controls.size() == displacements.size(), ErrorKind::kInvalidArgument,
               fmt::format("TPS: {} control points but {} displacements", controls.size(), displacements.size()));
  CARIME_CHECK(controls.size() >= 3, ErrorKind::kInvalidArgument, "TPS: need at least 3 control points");
  scale_ = 1.0 / std::max(frame.width, frame.height);

  const auto n = static_cast<Eigen::Index>(controls.size());
  controls_.reserve(controls.size());
  for (const auto& c : controls) controls_.push_back({c.x * scale_, c.y * scale_});

  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(n + 3, n + 3);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n + 3, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system(i, j) = tps_kernel(controls_[i].x - controls_[j].x, controls_[i].y - controls_[j].y);
    }
    system(i, i) += regularization;
    system(i, n) = 1.0;
    system(i, n + 1) = controls_[i].x;
    system(i, n + 2) = controls_[i].y;
    system(n, i) = 1.0;
    system(n + 1, i) = controls_[i].x;
    system(n + 2, i) = controls_[i].y;
    rhs(i, 0) = displacements[i].x;
    rhs(i, 1) = displacements[i].y;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(system);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  condition_ = smallest > 0.0 ? sv(0) / smallest : std::numeric_limits<double>::infinity();
  CARIME_CHECK(std::isfinite(condition_) && condition_ <= max_condition, ErrorKind::kNumerical,
               fmt::format("TPS system is singular or ill-conditioned (condition number {:.3e} > {:.1e}); "
                           "landmarks are degenerate, duplicated or collinear",
                           condition_, max_condition));

  const Eigen::MatrixXd sol = system.partialPivLu().solve(rhs);
  weights_x_.resize(controls.size());
  weights_y_.resize(controls.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    weights_x_[i] = sol(i, 0);
    weights_y_[i] = sol(i, 1);
  }
  for (int k = 0; k < 3; ++k) {
    affine_x_[k] = sol(n + k, 0);
    affine_y_[k] = sol(n + k, 1);
  }
}

Point2 ThinPlateSpline::displacement(const Point2& p) const {
  const double x = p.x * scale_;
  const double y = p.y * scale_;
  double dx = affine_x_[0] + affine_x_[1] * x + affine_x_[2] * y;
  double dy = affine_y_[0] + affine_y_[1] * x + affine_y_[2] * y;
  for (std::size_t i = 0; i < controls_.size(); ++i) {
    const double u = tps_kernel(x - controls_[i].x, y - controls_[i].y);
    dx += weights_x_[i] * u;
    dy += weights_y_[i] * u;
  }
  return {dx, dy};
}

std::vector<double> ThinPlateSpline::dense_displacement() const {
  std::vector<double> out(static_cast<std::size_t>(frame_.width) * frame_.height * 2);
  std::size_t k = 0;
  for (int i = 0; i < frame_.height; ++i) {
    for (int j = 0; j < frame_.width; ++j) {
      const auto d = displacement({static_cast<double>(j), static_cast<double>(i)});
      out[k++] = d.x;
      out[k++] = d.y;
    }
  }
  return out;
}

std::vector<Point2> border_anchors(ImageSize size) {
  const double r = size.width - 1.0;
  const double b = size.height - 1.0;
  return {{0, 0}, {r, 0}, {0, b}, {r, b}, {r / 2, 0}, {r / 2, b}, {0, b / 2}, {r, b / 2}};
}

DeformationField field_from_landmarks(const LandmarkSet& src, const LandmarkSet& dst, const TpsOptions& options) {
  CARIME_CHECK(src.size() == dst.size(), ErrorKind::kShapeMismatch,
               fmt::format("field_from_landmarks: src frame {}x{} vs dst frame {}x{}", src.size().width,
                           src.size().height, dst.size().width, dst.size().height));
  const ImageSize size = dst.size();

  std::vector<Point2> controls(dst.points().begin(), dst.points().end());
  std::vector<Point2> displacements;
  displacements.reserve(controls.size() + 8);
  for (std::size_t i = 0; i < kNumLandmarks; ++i) displacements.push_back({src[i].x - dst[i].x, src[i].y - dst[i].y});
  if (options.anchor_border) {
    for (const auto& a : border_anchors(size)) {
      controls.push_back(a);
      displacements.push_back({0.0, 0.0});
    }
  }

  const ThinPlateSpline tps(controls, displacements, size, options.regularization, options.max_condition);
  auto dense = tps.dense_displacement();
  auto pixels = torch::from_blob(dense.data(), {size.height, size.width, 2}, torch::kFloat64).clone();
  return DeformationField(DeformationField::from_pixels(pixels).residual().to(torch::kFloat32));
}

}  // namespace carime
