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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "carime/data/preprocess.hpp"
#include "carime/eval/metrics.hpp"
#include "carime/train/trainer.hpp"

namespace carime {

namespace fs = std::filesystem;

/// Directory named by CARIME_CACHE, if set and non-empty.
std::optional<fs::path> cache_dir_from_env();

struct GenerateRequest {
  std::vector<fs::path> photos;
  fs::path out_dir;
  fs::path warper_checkpoint;
  /// Empty: identity styler, the warped photo is written as is.
  std::optional<fs::path> styler_checkpoint;
  int num_samples = 1;
  std::uint64_t seed = 0;
  double scale = 1.0;
  /// Reference image (encoded with E_s) or a `.txt` style code file.
  std::optional<fs::path> style_ref;
  /// Landmark file of a reference caricature; requires `mean_landmarks`.
  std::optional<fs::path> warp_ref;
  std::optional<fs::path> mean_landmarks;
  /// Also write `<stem>_grid.png` with the samples side by side.
  bool grid = false;
};

struct CommandReport {
  std::vector<fs::path> outputs;
  /// One line per input that could not be processed.
  std::vector<std::string> failures;
};

/// Loads a photo at the warper resolution. A sibling `<stem>.txt` landmark file triggers
/// alignment first; otherwise the image is taken as already aligned.
ImageBuffer load_network_photo(const fs::path& path, int image_size);

/// `<stem>_w<k>_s<k>_scale<r>.png` for each photo and sample k. Codes come from a generator
/// seeded with seed + photo index, so each file depends only on the request.
CommandReport cmd_generate(const GenerateRequest& request);

struct InterpolateRequest {
  fs::path photo;
  fs::path out_dir;
  fs::path warper_checkpoint;
  std::optional<fs::path> styler_checkpoint;
  int steps = 5;
  std::uint64_t seed = 0;
  double scale = 1.0;
  /// Optional endpoint codes (`.txt`); drawn from the seed otherwise.
  std::optional<std::pair<fs::path, fs::path>> warp_codes;
  std::optional<std::pair<fs::path, fs::path>> style_codes;
};

/// `steps` codes from a to b inclusive, linearly spaced.
std::vector<torch::Tensor> interpolate_codes(const torch::Tensor& a, const torch::Tensor& b, int steps);

/// Writes `<stem>_interp.png`: a steps x steps grid whose row r uses style interpolant r
/// and column c warp interpolant c.
CommandReport cmd_interpolate(const InterpolateRequest& request);

struct TrainRequest {
  TrainConfig config;
  fs::path data_root;
  fs::path out_dir;
  std::optional<fs::path> resume;
  bool force = false;
};

TrainSummary cmd_train(const TrainRequest& request);

enum class Metric { kDegree, kFid, kIdentity, kRuntime };
Metric parse_metric(const std::string& name);

struct EvaluateRequest {
  Metric metric = Metric::kDegree;
  fs::path data_root;  // preprocessed; test-split photos are evaluated
  fs::path out_dir;
  std::optional<fs::path> warper_checkpoint;
  std::optional<fs::path> styler_checkpoint;
  std::uint64_t seed = 0;
  double scale = 1.0;
  /// Degree: search the scale reaching this mean degree instead of using `scale`.
  std::optional<double> target_degree;
  /// FID and identity: remote feature extractor.
  std::string embedding_url;
  /// FID: generated and reference image directories (reference defaults to the test
  /// caricatures under data_root).
  std::optional<fs::path> generated_dir;
  std::optional<fs::path> reference_dir;
  int warmup = 2;
};

/// Writes `<metric>.csv` and `<metric>.txt` into out_dir.
CommandReport cmd_evaluate(const EvaluateRequest& request);

}  // namespace carime
