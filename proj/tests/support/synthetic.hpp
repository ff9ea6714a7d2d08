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

// Synthetic faces, fields and datasets for tests.

#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>

#include "carime/geometry/field.hpp"
#include "carime/geometry/image.hpp"
#include "carime/geometry/landmarks.hpp"

namespace carime::testing {

/// A level, frontal 17-point face scaled to `size`.
LandmarkSet template_landmarks(ImageSize size);

/// (template, jittered template); sigma in pixels at 256 scale.
std::pair<LandmarkSet, LandmarkSet> random_landmark_pair(std::mt19937_64& rng, ImageSize size, double sigma);

/// Uniform [-1, 1] image.
ImageBuffer random_image(int width, int height, std::uint64_t seed);

/// Uniform residual in [-amplitude, amplitude] (normalized units).
DeformationField random_field(ImageSize size, std::uint64_t seed, double amplitude);

/// Cartoon face drawn at `landmarks`. `style` in [0, 1) selects palette and stroke width;
/// caricature-like renderings use `cartoon`.
ImageBuffer render_face(const LandmarkSet& landmarks, double style, bool cartoon);

/// Rotates landmarks about the image center by `degrees` (counter-clockwise on screen).
LandmarkSet rotate_landmarks(const LandmarkSet& lm, double degrees);

/// Exaggerates a face: features pushed away from the mean by `amount`, plus a per-identity
/// bias pattern.
LandmarkSet exaggerate(const LandmarkSet& face, std::mt19937_64& rng, double amount);

struct SyntheticDatasetSpec {
  int identities = 4;
  int photos_per_identity = 3;
  int caricatures_per_identity = 3;
  ImageSize raw_size{200, 220};
  double max_rotation_degrees = 10.0;
  std::uint64_t seed = 1;
};

/// Writes `<root>/Photo|Caricature/<Id>/*.png` and
/// `<root>/landmarks/Photo|Caricature/<Id>/*.txt` in raw pixel coordinates.
void write_synthetic_dataset(const std::filesystem::path& root, const SyntheticDatasetSpec& synth);

/// Eye line tilt in degrees, positive when the right eye sits lower on screen.
double eye_line_degrees(const LandmarkSet& lm);

/// Gaussian dots (sigma 1.2 px) at every landmark on a dark background.
ImageBuffer render_dots(const LandmarkSet& lm);

/// Intensity centroid of the dot nearest `guess`.
Point2 dot_centroid(const ImageBuffer& img, Point2 guess, int radius = 4);

/// The template face placed in a raw frame at 70% of its short side, rotated by `degrees`.
LandmarkSet raw_face(ImageSize raw, double degrees);

}  // namespace carime::testing
