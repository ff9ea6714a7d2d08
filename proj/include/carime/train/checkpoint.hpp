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
#include <string>
#include <utility>
#include <vector>

namespace carime {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Versioned training snapshot: the config it was produced under, the number of completed
/// iterations and a flat list of named tensors (parameters, buffers, optimizer moments).
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  std::string module;
  std::string config_text;
  std::uint64_t config_hash = 0;
  std::int64_t iteration = 0;
  std::vector<std::pair<std::string, torch::Tensor>> tensors;

  bool has(const std::string& name) const;
  /// Throws kFormat if absent.
  const torch::Tensor& tensor(const std::string& name) const;
  void put(const std::string& name, const torch::Tensor& value);
};

/// Writes to a sibling temporary and renames, so a crash never leaves a torn file.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Parameters and buffers under `prefix.`.
void capture_module(Checkpoint& checkpoint, const std::string& prefix, const torch::nn::Module& module);
/// Copies stored values into the module; every parameter and buffer must be present with
/// the same shape.
void restore_module(const Checkpoint& checkpoint, const std::string& prefix, torch::nn::Module& module);

/// Adam moments and step counts under `prefix.<group>.<param>.`. Parameters that have not
/// been stepped yet are skipped.
void capture_adam(Checkpoint& checkpoint, const std::string& prefix, torch::optim::Adam& optimizer);
void restore_adam(const Checkpoint& checkpoint, const std::string& prefix, torch::optim::Adam& optimizer);

/// Throws kConfig when the stored hash differs from `expected_hash`, unless `force`.
void check_config_hash(const Checkpoint& checkpoint, std::uint64_t expected_hash, bool force);

}  // namespace carime
