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

#include "carime/geometry/landmarks.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "carime/core/error.hpp"

namespace carime {

LandmarkSet::LandmarkSet(const Points& points, ImageSize size) : points_(points), size_(size) {
  CARIME_CHECK(size.width > 0 && size.height > 0, ErrorKind::kInvalidArgument,
               fmt::format("landmark image size must be positive, got {}x{}", size.width, size.height));
  for (std::size_t i = 0; i < points.size(); ++i) {
    CARIME_CHECK(std::isfinite(points[i].x) && std::isfinite(points[i].y), ErrorKind::kNumerical,
                 fmt::format("landmark {} is not finite", i));
  }
}

bool LandmarkSet::inside_image() const {
  return std::all_of(points_.begin(), points_.end(), [&](const Point2& p) {
    return p.x >= 0.0 && p.x < size_.width && p.y >= 0.0 && p.y < size_.height;
  });
}

std::pair<LandmarkSet, int> LandmarkSet::clamped() const {
  Points out = points_;
  int moved = 0;
  // Largest representable value strictly below the image extent.
  const double max_x = std::nextafter(static_cast<double>(size_.width), 0.0);
  const double max_y = std::nextafter(static_cast<double>(size_.height), 0.0);
  for (auto& p : out) {
    const Point2 before = p;
    p.x = std::clamp(p.x, 0.0, max_x);
    p.y = std::clamp(p.y, 0.0, max_y);
    if (!(p == before)) ++moved;
  }
  return {LandmarkSet(out, size_), moved};
}

LandmarkSet LandmarkSet::resized(ImageSize target) const {
  CARIME_CHECK(target.width > 0 && target.height > 0, ErrorKind::kInvalidArgument,
               "resize target must be positive");
  const double sx = static_cast<double>(target.width) / size_.width;
  const double sy = static_cast<double>(target.height) / size_.height;
  Points out = points_;
  for (auto& p : out) {
    p.x = (p.x + 0.5) * sx - 0.5;
    p.y = (p.y + 0.5) * sy - 0.5;
  }
  return LandmarkSet(out, target);
}

LandmarkSet LandmarkSet::mirrored() const {
  Points out = points_;
  for (auto& p : out) p.x = size_.width - 1 - p.x;
  for (const auto& [a, b] : landmark_index::kMirrorPairs) std::swap(out[a], out[b]);
  return LandmarkSet(out, size_);
}

namespace {

double order_free_mean(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  long double acc = 0.0L;
  for (double v : values) acc += v;
  return static_cast<double>(acc / static_cast<long double>(values.size()));
}

}  // namespace

LandmarkSet mean_landmarks(std::span<const LandmarkSet> sets) {
  CARIME_CHECK(!sets.empty(), ErrorKind::kInvalidArgument, "mean_landmarks: empty landmark list");
  const ImageSize size = sets.front().size();
  for (const auto& s : sets) {
    CARIME_CHECK(s.size() == size, ErrorKind::kInvalidArgument,
                 fmt::format("mean_landmarks: mixed image sizes {}x{} and {}x{}", size.width, size.height,
                             s.size().width, s.size().height));
  }
  LandmarkSet::Points out{};
  std::vector<double> xs(sets.size());
  std::vector<double> ys(sets.size());
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    for (std::size_t k = 0; k < sets.size(); ++k) {
      xs[k] = sets[k][i].x;
      ys[k] = sets[k][i].y;
    }
    out[i] = {order_free_mean(xs), order_free_mean(ys)};
  }
  return LandmarkSet(out, size);
}

LandmarkSet read_landmarks(const std::filesystem::path& path, ImageSize image_size) {
  std::ifstream in(path);
  CARIME_CHECK(in.good(), ErrorKind::kIo, fmt::format("cannot open landmark file {}", path.string()));
  LandmarkSet::Points pts{};
  std::size_t count = 0;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') {
      std::istringstream tag(line.substr(first + 1));
      std::string key;
      int w = 0;
      int h = 0;
      if (tag >> key && key == "size" && tag >> w >> h) image_size = {w, h};
      continue;
    }
    std::istringstream fields(line);
    double x = 0.0;
    double y = 0.0;
    CARIME_CHECK(static_cast<bool>(fields >> x >> y), ErrorKind::kFormat,
                 fmt::format("{}:{}: expected \"x y\"", path.string(), line_no));
    CARIME_CHECK(count < kNumLandmarks, ErrorKind::kFormat,
                 fmt::format("{}: more than {} landmarks", path.string(), kNumLandmarks));
    pts[count++] = {x, y};
  }
  CARIME_CHECK(count == kNumLandmarks, ErrorKind::kFormat,
               fmt::format("{}: expected {} landmarks, found {}", path.string(), kNumLandmarks, count));
  CARIME_CHECK(image_size.width > 0 && image_size.height > 0, ErrorKind::kFormat,
               fmt::format("{}: image size unknown (no size tag and none supplied)", path.string()));
  return LandmarkSet(pts, image_size);
}

LandmarkSet read_landmarks(const std::filesystem::path& path) { return read_landmarks(path, ImageSize{}); }

void write_landmarks(const std::filesystem::path& path, const LandmarkSet& set, bool tag_size) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  CARIME_CHECK(out.good(), ErrorKind::kIo, fmt::format("cannot write landmark file {}", path.string()));
  if (tag_size) out << fmt::format("# size {} {}\n", set.size().width, set.size().height);
  for (const auto& p : set.points()) out << fmt::format("{} {}\n", p.x, p.y);
}

}  // namespace carime
