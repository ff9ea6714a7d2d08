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

#include <torch/torch.h>

#include <vector>

#include "carime/data/dataset.hpp"
#include "carime/geometry/field.hpp"
#include "carime/geometry/image.hpp"
#include "carime/geometry/landmarks.hpp"
#include "carime/warper/networks.hpp"

namespace carime {

/// Mean absolute difference between two residual tensors of equal shape.
torch::Tensor warp_recon_loss(const torch::Tensor& pred, const torch::Tensor& target);
double warp_recon_loss(const DeformationField& pred, const DeformationField& target);

/// Mean absolute difference between a reconstruction and the photo.
torch::Tensor photo_recon_loss(const torch::Tensor& photo, const torch::Tensor& reconstruction);

/// Unnormalized total variation of [N, C, H, W] images: squared vertical plus squared
/// horizontal neighbour differences, summed per image and averaged over the batch.
torch::Tensor tv_loss(const torch::Tensor& images);
double tv_loss(const ImageBuffer& image);

struct WarperWeights {
  double warp = 10.0;
  double tv = 5e-6;
};

/// One training batch, all tensors at the network resolution S.
struct WarperBatch {
  torch::Tensor photos;        // [N, 3, S, S]
  torch::Tensor target_field;  // [N, 2, S, S]     photo -> caricature
  torch::Tensor mean_field;    // [N, 2, S/2, S/2] mean face -> caricature (encoder input)
};

/// Builds a batch from same-identity pairs whose images share one size. Pairs at another
/// resolution than `image_size` are resampled together with their landmarks. `mean` is
/// rescaled to the pair resolution.
WarperBatch make_warper_batch(const std::vector<SamplePair>& pairs, const LandmarkSet& mean, int image_size);

struct WarperLossTerms {
  torch::Tensor warp;
  torch::Tensor photo;
  torch::Tensor tv;
  torch::Tensor total;
};

/// Forward pass of the warper objective. `z_tv` is the random warp code whose warped photo
/// feeds the smoothness term.
WarperLossTerms warper_losses(WarperNet& net, const WarperBatch& batch, const torch::Tensor& z_tv,
                              const WarperWeights& weights = {});

struct WarperStepResult {
  double warp = 0;
  double photo = 0;
  double tv = 0;
  double total = 0;
};

/// One Adam step on the warper objective. Throws ErrorKind::kNumerical before touching
/// the parameters if any loss term is not finite.
WarperStepResult warper_train_step(WarperNet& net, torch::optim::Optimizer& optimizer, const WarperBatch& batch,
                                   const WarperWeights& weights, torch::Generator& generator);

struct WarpSample {
  torch::Tensor warp_code;  // [code_dim_w]
  DeformationField field;   // unscaled, at image resolution
  ImageBuffer warped;
  double scale = 1.0;
};

/// Warps `photo` with the field decoded from `z_w` and the photo's content code, scaled by
/// `scale`. Runs in eval mode without gradients; the network mode is restored afterwards.
WarpSample sample_exaggeration(WarperNet& net, const ImageBuffer& photo, const torch::Tensor& z_w, double scale);
WarpSample sample_exaggeration(WarperNet& net, const ImageBuffer& photo, torch::Generator& generator, double scale);

/// Warp code of the exaggeration that carries `mean` onto `reference` (both at any common size).
torch::Tensor encode_reference_warp(WarperNet& net, const LandmarkSet& mean, const LandmarkSet& reference);

}  // namespace carime
