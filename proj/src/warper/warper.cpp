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

#include "carime/warper/warper.hpp"

#include <fmt/format.h>

#include <cmath>

#include "carime/core/error.hpp"
#include "carime/core/eval_guard.hpp"
#include "carime/data/image_io.hpp"
#include "carime/geometry/tps.hpp"
#include "carime/geometry/warp.hpp"

namespace carime {

namespace {

torch::Tensor field_tensor(const DeformationField& f) { return f.to_nchw(); }

}  // namespace

torch::Tensor warp_recon_loss(const torch::Tensor& pred, const torch::Tensor& target) {
  CARIME_CHECK(pred.sizes() == target.sizes(), ErrorKind::kShapeMismatch, "warp_recon_loss: shape mismatch");
  return (pred - target).abs().mean();
}

double warp_recon_loss(const DeformationField& pred, const DeformationField& target) {
  return warp_recon_loss(pred.residual().to(torch::kFloat64), target.residual().to(torch::kFloat64)).item<double>();
}

torch::Tensor photo_recon_loss(const torch::Tensor& photo, const torch::Tensor& reconstruction) {
  CARIME_CHECK(photo.sizes() == reconstruction.sizes(), ErrorKind::kShapeMismatch, "photo_recon_loss: shape mismatch");
  return (reconstruction - photo).abs().mean();
}

torch::Tensor tv_loss(const torch::Tensor& images) {
  CARIME_CHECK(images.dim() == 4 && images.size(2) >= 2 && images.size(3) >= 2, ErrorKind::kShapeMismatch,
               "tv_loss expects [N, C, H, W] with H, W >= 2");
  using torch::indexing::Slice;
  const auto dv = images.index({Slice(), Slice(), Slice(1), Slice()}) -
                  images.index({Slice(), Slice(), Slice(0, -1), Slice()});
  const auto dh = images.index({Slice(), Slice(), Slice(), Slice(1)}) -
                  images.index({Slice(), Slice(), Slice(), Slice(0, -1)});
  return (dv.square().sum() + dh.square().sum()) / static_cast<double>(images.size(0));
}

double tv_loss(const ImageBuffer& image) {
  return tv_loss(image.to_nchw().to(torch::kFloat64)).item<double>();
}

WarperBatch make_warper_batch(const std::vector<SamplePair>& pairs, const LandmarkSet& mean, int image_size) {
  CARIME_CHECK(!pairs.empty(), ErrorKind::kInvalidArgument, "make_warper_batch: no pairs");
  const ImageSize target{image_size, image_size};
  const ImageSize half{image_size / 2, image_size / 2};
  std::vector<ImageBuffer> photos;
  std::vector<torch::Tensor> targets;
  std::vector<torch::Tensor> means;
  for (const auto& pair : pairs) {
    auto photo = pair.photo;
    auto lp = pair.photo_landmarks;
    auto lc = pair.cari_landmarks;
    if (photo.size() != target) {
      photo = resize_image(photo, target);
      lp = lp.resized(target);
    }
    if (lc.size() != target) lc = lc.resized(target);
    photos.push_back(photo);
    targets.push_back(field_tensor(field_from_landmarks(lp, lc)));
    const auto lm = mean.size() == target ? mean : mean.resized(target);
    means.push_back(resize_residual(field_tensor(field_from_landmarks(lm, lc)), half));
  }
  return {stack_nchw(photos), torch::cat(targets), torch::cat(means)};
}

WarperLossTerms warper_losses(WarperNet& net, const WarperBatch& batch, const torch::Tensor& z_tv,
                              const WarperWeights& weights) {
  WarperLossTerms t;
  const auto z_w = net->encode_warp(batch.mean_field);
  auto [z_p, feature] = net->encode_photo(batch.photos);
  t.warp = warp_recon_loss(net->decode_full_field(z_w, z_p), batch.target_field);
  t.photo = photo_recon_loss(batch.photos, net->decode_photo(feature));
  const auto random_field = net->decode_full_field(z_tv, z_p);
  t.tv = tv_loss(warp_bilinear(batch.photos, random_field.permute({0, 2, 3, 1})));
  t.total = weights.warp * t.warp + t.photo + weights.tv * t.tv;
  return t;
}

WarperStepResult warper_train_step(WarperNet& net, torch::optim::Optimizer& optimizer, const WarperBatch& batch,
                                   const WarperWeights& weights, torch::Generator& generator) {
  net->train();
  const auto n = batch.photos.size(0);
  const auto z_tv = torch::randn({n, net->options().code_dim_w}, generator, batch.photos.scalar_type());
  optimizer.zero_grad();
  auto terms = warper_losses(net, batch, z_tv, weights);
  WarperStepResult r{terms.warp.item<double>(), terms.photo.item<double>(), terms.tv.item<double>(),
                     terms.total.item<double>()};
  if (!std::isfinite(r.total)) {
    fail(ErrorKind::kNumerical, fmt::format("warper loss is not finite: warp={} photo={} tv={} total={}", r.warp,
                                            r.photo, r.tv, r.total));
  }
  terms.total.backward();
  optimizer.step();
  return r;
}

WarpSample sample_exaggeration(WarperNet& net, const ImageBuffer& photo, const torch::Tensor& z_w, double scale) {
  CARIME_CHECK(std::isfinite(scale), ErrorKind::kInvalidArgument, "sample_exaggeration: scale must be finite");
  const auto code = z_w.reshape({1, -1}).to(torch::kFloat32);
  CARIME_CHECK(code.size(1) == net->options().code_dim_w, ErrorKind::kShapeMismatch,
               fmt::format("warp code has {} entries, expected {}", code.size(1), net->options().code_dim_w));
  EvalGuard eval(*net);
  torch::NoGradGuard no_grad;
  const auto input = photo.to_nchw().to(torch::kFloat32);
  const auto z_p = net->encode_photo(input).first;
  WarpSample s;
  s.warp_code = code.reshape({-1}).clone();
  s.field = DeformationField::from_nchw(net->decode_full_field(code, z_p));
  s.scale = scale;
  s.warped = warp_image(photo, scale_field(s.field, scale));
  return s;
}

WarpSample sample_exaggeration(WarperNet& net, const ImageBuffer& photo, torch::Generator& generator, double scale) {
  return sample_exaggeration(net, photo, torch::randn({net->options().code_dim_w}, generator), scale);
}

torch::Tensor encode_reference_warp(WarperNet& net, const LandmarkSet& mean, const LandmarkSet& reference) {
  const int s = net->options().image_size;
  const ImageSize target{s, s};
  const auto lm = mean.size() == target ? mean : mean.resized(target);
  const auto ref = reference.size() == target ? reference : reference.resized(target);
  EvalGuard eval(*net);
  torch::NoGradGuard no_grad;
  const auto field = resize_residual(field_from_landmarks(lm, ref).to_nchw(), {s / 2, s / 2});
  return net->encode_warp(field).reshape({-1});
}

}  // namespace carime
