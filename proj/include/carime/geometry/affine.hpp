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

#include <array>
#include <cmath>

#include "carime/geometry/landmarks.hpp"

namespace carime {

/// 2x3 affine map on pixel-index coordinates: [x'; y'] = A [x; y; 1].
struct Affine2 {
  std::array<double, 6> m{1, 0, 0, 0, 1, 0};

  static Affine2 translation(double tx, double ty) { return {{1, 0, tx, 0, 1, ty}}; }
  static Affine2 scaling(double sx, double sy) { return {{sx, 0, 0, 0, sy, 0}}; }
  /// Rotation by `radians` about `center`, using the image frame (y down).
  static Affine2 rotation(double radians, const Point2& center) {
    const double c = std::cos(radians);
    const double s = std::sin(radians);
    return {{c, -s, center.x - c * center.x + s * center.y, s, c, center.y - s * center.x - c * center.y}};
  }

  Point2 apply(const Point2& p) const { return {m[0] * p.x + m[1] * p.y + m[2], m[3] * p.x + m[4] * p.y + m[5]}; }

  /// this ∘ inner: applies `inner` first.
  Affine2 after(const Affine2& inner) const {
    const auto& a = m;
    const auto& b = inner.m;
    return {{a[0] * b[0] + a[1] * b[3], a[0] * b[1] + a[1] * b[4], a[0] * b[2] + a[1] * b[5] + a[2],
             a[3] * b[0] + a[4] * b[3], a[3] * b[1] + a[4] * b[4], a[3] * b[2] + a[4] * b[5] + a[5]}};
  }

  LandmarkSet apply(const LandmarkSet& lm, ImageSize target) const {
    LandmarkSet::Points out = lm.points();
    for (auto& p : out) p = apply(p);
    return LandmarkSet(out, target);
  }
};

}  // namespace carime
