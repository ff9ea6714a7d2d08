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

#include <torch/types.h>

#include "carime/geometry/field.hpp"
#include "carime/geometry/image.hpp"

namespace carime {

/// Differentiable backward warp (bilinear gather, border clamp).
///
/// images:   [N, C, H, W]
/// residual: [N, H, W, 2] normalized displacement, same dtype as images.
/// Returns [N, C, H, W]. Gradients flow to both inputs. Sampling locations outside the
/// image clamp to the border pixels and carry zero gradient in the clamped axis.
torch::Tensor warp_bilinear(const torch::Tensor& images, const torch::Tensor& residual);

/// Single-image form. The image and field must share a resolution.
ImageBuffer warp_image(const ImageBuffer& image, const DeformationField& field);

}  // namespace carime
