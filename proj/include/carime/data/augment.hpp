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

#include <random>

#include "carime/data/dataset.hpp"

namespace carime {

struct AugmentOptions {
  double flip_probability = 0.5;
  double rescale_crop_probability = 0.5;
  /// Enlarged side relative to a 256 image; scaled proportionally for other sizes.
  int enlarged_side_at_256 = 288;
};

/// Random choices for one image, drawn up front so they can be replayed or forced.
struct AugmentDecision {
  bool flip = false;
  bool rescale_crop = false;
  int offset_x = 0;
  int offset_y = 0;
};

AugmentDecision draw_augment(std::mt19937_64& rng, ImageSize size, const AugmentOptions& options = {});

/// Applies a decision to one image and its landmarks. Flip first, then resize-and-crop.
void apply_augment(ImageBuffer& image, LandmarkSet& landmarks, const AugmentDecision& decision,
                   const AugmentOptions& options = {});

/// Augments photo and caricature with independent draws.
SamplePair augment(const SamplePair& pair, std::mt19937_64& rng, const AugmentOptions& options = {});

}  // namespace carime
