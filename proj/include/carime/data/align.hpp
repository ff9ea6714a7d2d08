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

#include "carime/geometry/affine.hpp"
#include "carime/geometry/image.hpp"
#include "carime/geometry/landmarks.hpp"

namespace carime {

struct AlignOptions {
  ImageSize output = kCanonicalSize;
  /// Square contour box is grown by this factor in width and height about its center.
  double enlarge = 1.3;
};

/// Geometry of one alignment, independent of pixels.
struct AlignmentGeometry {
  Affine2 transform;            // raw pixel -> output pixel
  double rotation_degrees = 0;  // rotation applied to level the eyes
  Point2 box_center;            // in the rotated raw frame
  double contour_side = 0;      // max(w, h) of the contour box
  double box_side = 0;          // contour_side * enlarge
};

struct AlignedFace {
  ImageBuffer image;
  LandmarkSet landmarks;
  AlignmentGeometry geometry;
  int clamped_points = 0;
};

/// Rotation that levels the line between the two eye-corner midpoints, square box around
/// the face contour grown by `enlarge`, mapped onto `output`.
AlignmentGeometry alignment_geometry(const LandmarkSet& landmarks, const AlignOptions& options = {});

/// Applies alignment_geometry to pixels and landmarks. Landmarks that leave the output are
/// clamped back inside and counted (with a warning).
AlignedFace align_and_crop(const ImageBuffer& image, const LandmarkSet& landmarks, const AlignOptions& options = {});

}  // namespace carime
