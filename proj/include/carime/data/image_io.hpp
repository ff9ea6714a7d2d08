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

#include <cstdint>
#include <filesystem>
#include <vector>

#include "carime/geometry/affine.hpp"
#include "carime/geometry/image.hpp"

namespace carime {

/// Decodes any OpenCV-readable file to RGB in [-1, 1] (v / 127.5 - 1).
ImageBuffer load_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG; values are clamped to [-1, 1] and rounded.
void save_image(const std::filesystem::path& path, const ImageBuffer& image);
/// The bytes save_image would write.
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);

/// Quantizes to the 8-bit grid used by save_image, so that load(save(x)) == quantize(x).
ImageBuffer quantize(const ImageBuffer& image);

/// Bilinear resampling through `transform` (source -> destination pixel indices), border
/// pixels replicated outside the source.
ImageBuffer affine_resample(const ImageBuffer& image, const Affine2& transform, ImageSize out);

/// Bilinear resize with the pixel-center convention used by LandmarkSet::resized.
ImageBuffer resize_image(const ImageBuffer& image, ImageSize out);

/// Exact left-right mirror.
ImageBuffer mirror_image(const ImageBuffer& image);

}  // namespace carime
