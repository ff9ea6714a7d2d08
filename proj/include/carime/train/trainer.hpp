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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "carime/styler/styler.hpp"
#include "carime/train/checkpoint.hpp"
#include "carime/train/config.hpp"
#include "carime/warper/networks.hpp"

namespace carime {

struct TrainRunOptions {
  /// Preprocessed dataset root (aligned images, split and mean landmarks).
  std::filesystem::path data_root;
  /// Receives config.txt, train_log.csv and checkpoints/.
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> resume;
  bool force = false;
};

/// Loss components of one iteration, keyed by name.
struct IterationRecord {
  std::int64_t iter = 0;
  double lr = 0;
  std::map<std::string, double> losses;
};

struct TrainSummary {
  std::int64_t start_iteration = 0;
  std::int64_t end_iteration = 0;  // completed iterations
  std::vector<std::filesystem::path> checkpoints;
  std::filesystem::path final_checkpoint;
  std::vector<IterationRecord> history;
};

/// Trains the module selected by `config.module`. Checkpoints land in
/// `<out>/checkpoints/<module>_<iter>.ckpt`; a non-finite loss writes
/// `<module>_nan_<iter>.ckpt` and rethrows.
TrainSummary run_training(const TrainConfig& config, const TrainRunOptions& options);

/// Seed for everything random in iteration `iter` of a run seeded with `seed`.
std::uint64_t step_seed(std::uint64_t seed, std::int64_t iter);

/// Applies the library threading and determinism switches for a run.
void apply_runtime_settings(const TrainConfig& config);

struct LoadedWarper {
  TrainConfig config;
  WarperNet net{nullptr};
  std::int64_t iteration = 0;
};

struct LoadedStyler {
  TrainConfig config;
  StylerNet net{nullptr};
  std::int64_t iteration = 0;
};

/// Rebuilds a network from the config stored in its checkpoint; the result is in eval mode.
LoadedWarper load_warper(const std::filesystem::path& path);
LoadedStyler load_styler(const std::filesystem::path& path);

}  // namespace carime
