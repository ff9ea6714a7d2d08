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
#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace carime {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

inline constexpr std::size_t kNumLandmarks = 17;
inline constexpr ImageSize kCanonicalSize{256, 256};

/// Index layout of the 17-point annotation.
///
///   0..4   face contour: left upper, left lower, chin, right lower, right upper
///   5..8   eyebrows: left outer, left inner, right inner, right outer
///   9..12  eye corners: left outer, left inner, right inner, right outer
///   13     nose tip
///   14..16 mouth: left corner, upper-lip center, right corner
///
/// "Left" is the image left.
namespace landmark_index {
inline constexpr std::array<std::size_t, 5> kContour{0, 1, 2, 3, 4};
inline constexpr std::array<std::size_t, 2> kLeftEyeCorners{9, 10};
inline constexpr std::array<std::size_t, 2> kRightEyeCorners{11, 12};
/// Label pairs exchanged by a horizontal flip; indices not listed map to themselves.
inline constexpr std::array<std::pair<std::size_t, std::size_t>, 7> kMirrorPairs{
    {{0, 4}, {1, 3}, {5, 8}, {6, 7}, {9, 12}, {10, 11}, {14, 16}}};
}  // namespace landmark_index

/// Seventeen facial points in pixel coordinates (x right, y down) of an image of `size`.
class LandmarkSet {
 public:
  using Points = std::array<Point2, kNumLandmarks>;

  LandmarkSet() = default;
  LandmarkSet(const Points& points, ImageSize size);

  const Points& points() const { return points_; }
  const Point2& operator[](std::size_t i) const { return points_[i]; }
  ImageSize size() const { return size_; }

  /// True when every point lies in [0, W) x [0, H).
  bool inside_image() const;

  /// Copy with all points clamped into the image; returns the number moved.
  std::pair<LandmarkSet, int> clamped() const;

  /// Maps the set onto an image resampled to `target` with the pixel-center convention
  /// x' = (x + 0.5) * W'/W - 0.5.
  LandmarkSet resized(ImageSize target) const;

  /// Horizontal mirror: x -> W - 1 - x with left/right labels exchanged.
  LandmarkSet mirrored() const;

  friend bool operator==(const LandmarkSet&, const LandmarkSet&) = default;

 private:
  Points points_{};
  ImageSize size_{};
};

/// Per-point arithmetic mean. The sum is evaluated over sorted coordinates in extended
/// precision, so the result does not depend on the order of `sets`.
LandmarkSet mean_landmarks(std::span<const LandmarkSet> sets);

/// Reads "x y" lines. An optional leading "# size W H" line overrides `image_size`.
LandmarkSet read_landmarks(const std::filesystem::path& path, ImageSize image_size);
LandmarkSet read_landmarks(const std::filesystem::path& path);

/// Writes 17 "x y" lines; `tag_size` prepends the "# size W H" header.
void write_landmarks(const std::filesystem::path& path, const LandmarkSet& set, bool tag_size = true);

}  // namespace carime
