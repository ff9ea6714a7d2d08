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

#include <span>
#include <vector>

#include "carime/geometry/field.hpp"
#include "carime/geometry/landmarks.hpp"

namespace carime {

struct TpsOptions {
  /// Adds zero-displacement anchors at the 4 corners and 4 edge midpoints.
  bool anchor_border = true;
  /// Tikhonov term on the kernel diagonal, in unit-square coordinates.
  double regularization = 1e-6;
  /// Systems whose 2-norm condition number exceeds this are rejected.
  double max_condition = 1e12;
};

/// Thin-plate spline interpolating 2-D displacement vectors at control points.
///
/// Coordinates are scaled by 1 / max(W, H) before the kernel U(r) = r^2 log r^2 is applied.
class ThinPlateSpline {
 public:
  ThinPlateSpline(std::span<const Point2> controls, std::span<const Point2> displacements, ImageSize frame,
                  double regularization, double max_condition);

  Point2 displacement(const Point2& p) const;
  double condition_number() const { return condition_; }

  /// Dense [H, W, 2] pixel displacement over the frame grid (double).
  std::vector<double> dense_displacement() const;

 private:
  std::vector<Point2> controls_;  // scaled
  std::vector<double> weights_x_, weights_y_;
  double affine_x_[3]{}, affine_y_[3]{};
  double scale_ = 1.0;
  double condition_ = 0.0;
  ImageSize frame_{};
};

/// Backward sampling field that maps each `dst` landmark onto the matching `src` landmark,
/// i.e. warping an image with `src` geometry yields `dst` geometry.
DeformationField field_from_landmarks(const LandmarkSet& src, const LandmarkSet& dst, const TpsOptions& options = {});

/// The 8 border anchor positions (pixel coordinates) used when `anchor_border` is set.
std::vector<Point2> border_anchors(ImageSize size);

}  // namespace carime
