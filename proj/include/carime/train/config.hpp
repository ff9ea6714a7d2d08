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
#include <string>
#include <vector>

#include "carime/styler/styler.hpp"
#include "carime/warper/networks.hpp"
#include "carime/warper/warper.hpp"

namespace carime {

enum class TrainModule { kWarper, kStyler };

TrainModule parse_train_module(const std::string& name);
std::string to_string(TrainModule m);

/// Every training hyperparameter. Serialized as flat `key = value` text.
struct TrainConfig {
  TrainModule module = TrainModule::kWarper;
  int image_size = 256;
  int batch_size = 16;

  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::int64_t warper_fixed_iters = 10000;
  std::int64_t warper_decay_iters = 10000;
  std::int64_t styler_fixed_iters = 250000;
  std::int64_t styler_decay_iters = 250000;

  double lambda_img = 10.0;
  double lambda_warp = 10.0;
  double lambda_cyc = 1.0;
  double lambda_tv = 5e-6;

  std::uint64_t seed = 0;
  bool augment = true;
  bool deterministic = false;

  int code_dim_w = 64;
  int code_dim_p = 64;
  int warper_channels = 32;
  int warper_max_channels = 256;
  std::string code_norm = "batch";

  int style_dim = 8;
  int styler_channels = 64;
  int styler_mlp_dim = 256;
  int styler_res_blocks = 4;
  int disc_channels = 64;

  // Run bookkeeping; excluded from the hash.
  std::int64_t checkpoint_every = 1000;
  std::int64_t log_window = 100;
  std::int64_t stop_at = 0;  // stop after this many iterations when > 0
  int threads = 0;           // 0 keeps the library default outside deterministic mode

  std::int64_t fixed_iters() const;
  std::int64_t decay_iters() const;
  std::int64_t total_iters() const { return fixed_iters() + decay_iters(); }

  WarperOptions warper_options() const;
  WarperWeights warper_weights() const { return {lambda_warp, lambda_tv}; }
  StylerOptions styler_options() const;
  StylerWeights styler_weights() const { return {lambda_img, lambda_cyc}; }

  /// Sets one key from its text form; unknown keys and malformed values throw kConfig.
  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  static const std::vector<std::string>& keys();

  /// `key = value` lines in key order.
  std::string to_text() const;
  static TrainConfig from_text(const std::string& text, const std::string& origin = "<config>");
  static TrainConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// FNV-1a over the sorted, model-relevant `key=value` pairs.
  std::uint64_t hash() const;

  /// Throws kConfig on out-of-range values.
  void validate() const;
};

/// Learning rate at `iter`: base during the fixed phase, then linear decay reaching 0 at the
/// last iteration.
double lr_at(std::int64_t iter, std::int64_t phase_len, std::int64_t decay_len, double base);

}  // namespace carime
