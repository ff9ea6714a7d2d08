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

#include "carime/data/align.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "carime/core/error.hpp"
#include "carime/core/log.hpp"
#include "carime/data/image_io.hpp"

namespace carime {

namespace {

Point2 midpoint(const LandmarkSet& lm, std::size_t a, std::size_t b) {
  return {(lm[a].x + lm[b].x) / 2.0, (lm[a].y + lm[b].y) / 2.0};
}

}  // namespace

AlignmentGeometry alignment_geometry(const LandmarkSet& landmarks, const AlignOptions& options) {
  using namespace landmark_index;
  CARIME_CHECK(options.enlarge > 0.0, ErrorKind::kInvalidArgument, "alignment enlarge factor must be positive");
  const Point2 left = midpoint(landmarks, kLeftEyeCorners[0], kLeftEyeCorners[1]);
  const Point2 right = midpoint(landmarks, kRightEyeCorners[0], kRightEyeCorners[1]);
  const double eye_angle = std::atan2(right.y - left.y, right.x - left.x);

  const ImageSize in = landmarks.size();
  const Point2 center{(in.width - 1) / 2.0, (in.height - 1) / 2.0};
  const Affine2 rotate = Affine2::rotation(-eye_angle, center);

  double min_x = std::numeric_limits<double>::infinity();
  double min_y = min_x;
  double max_x = -min_x;
  double max_y = -min_x;
  for (auto idx : kContour) {
    const auto p = rotate.apply(landmarks[idx]);
    min_x = std::min(min_x, p.x);
    max_x = std::max(max_x, p.x);
    min_y = std::min(min_y, p.y);
    max_y = std::max(max_y, p.y);
  }
  const double w = max_x - min_x;
  const double h = max_y - min_y;
  CARIME_CHECK(w > 0.0 && h > 0.0, ErrorKind::kInvalidArgument,
               fmt::format("face contour box has zero area ({} x {})", w, h));

  AlignmentGeometry g;
  g.rotation_degrees = -eye_angle * 180.0 / std::numbers::pi;
  g.box_center = {(min_x + max_x) / 2.0, (min_y + max_y) / 2.0};
  g.contour_side = std::max(w, h);
  g.box_side = g.contour_side * options.enlarge;

  // Box [c - side/2, c + side/2] maps onto output cells [-0.5, W - 0.5].
  const double sx = options.output.width / g.box_side;
  const double sy = options.output.height / g.box_side;
  const Affine2 crop{{sx, 0, -(g.box_center.x - g.box_side / 2.0) * sx - 0.5, 0, sy,
                      -(g.box_center.y - g.box_side / 2.0) * sy - 0.5}};
  g.transform = crop.after(rotate);
  return g;
}

AlignedFace align_and_crop(const ImageBuffer& image, const LandmarkSet& landmarks, const AlignOptions& options) {
  CARIME_CHECK(image.size() == landmarks.size(), ErrorKind::kShapeMismatch,
               fmt::format("align_and_crop: image {}x{} but landmarks annotated for {}x{}", image.width(),
                           image.height(), landmarks.size().width, landmarks.size().height));
  AlignedFace out;
  out.geometry = alignment_geometry(landmarks, options);
  out.image = affine_resample(image, out.geometry.transform, options.output);
  auto [clamped, moved] = out.geometry.transform.apply(landmarks, options.output).clamped();
  if (moved > 0) log::warn("align_and_crop: {} landmark(s) fell outside the crop and were clamped", moved);
  out.landmarks = clamped;
  out.clamped_points = moved;
  return out;
}

}  // namespace carime
