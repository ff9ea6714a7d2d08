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

#include "carime/data/augment.hpp"

#include <cmath>

#include "carime/data/image_io.hpp"
#include "carime/geometry/affine.hpp"

namespace carime {

namespace {

int enlarged_side(int side, const AugmentOptions& options) {
  return static_cast<int>(std::lround(side * options.enlarged_side_at_256 / 256.0));
}

}  // namespace

AugmentDecision draw_augment(std::mt19937_64& rng, ImageSize size, const AugmentOptions& options) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentDecision d;
  d.flip = unit(rng) < options.flip_probability;
  d.rescale_crop = unit(rng) < options.rescale_crop_probability;
  if (d.rescale_crop) {
    d.offset_x = std::uniform_int_distribution<int>(0, enlarged_side(size.width, options) - size.width)(rng);
    d.offset_y = std::uniform_int_distribution<int>(0, enlarged_side(size.height, options) - size.height)(rng);
  }
  return d;
}

void apply_augment(ImageBuffer& image, LandmarkSet& landmarks, const AugmentDecision& decision,
                   const AugmentOptions& options) {
  if (decision.flip) {
    image = mirror_image(image);
    landmarks = landmarks.mirrored();
  }
  if (decision.rescale_crop) {
    const ImageSize size = image.size();
    const double sx = static_cast<double>(enlarged_side(size.width, options)) / size.width;
    const double sy = static_cast<double>(enlarged_side(size.height, options)) / size.height;
    // Resize with the pixel-center convention, then shift by the crop offset.
    const Affine2 t{{sx, 0, 0.5 * sx - 0.5 - decision.offset_x, 0, sy, 0.5 * sy - 0.5 - decision.offset_y}};
    image = affine_resample(image, t, size);
    landmarks = t.apply(landmarks, size).clamped().first;
  }
}

SamplePair augment(const SamplePair& pair, std::mt19937_64& rng, const AugmentOptions& options) {
  SamplePair out = pair;
  const auto photo_decision = draw_augment(rng, out.photo.size(), options);
  const auto cari_decision = draw_augment(rng, out.caricature.size(), options);
  apply_augment(out.photo, out.photo_landmarks, photo_decision, options);
  apply_augment(out.caricature, out.cari_landmarks, cari_decision, options);
  return out;
}

}  // namespace carime
