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

#include "carime/data/align.hpp"
#include "carime/data/dataset.hpp"

namespace carime {

struct PreprocessOptions {
  AlignOptions align;
  std::uint64_t split_seed = kDefaultSplitSeed;
};

struct PreprocessReport {
  std::size_t photos = 0;
  std::size_t caricatures = 0;
  std::size_t identities = 0;
  std::size_t clamped_landmarks = 0;
  std::vector<std::string> failures;
};

inline constexpr const char* kSplitFile = "split.txt";
inline constexpr const char* kMeanLandmarksFile = "mean_landmarks.txt";

/// Aligns every entry of `input_root` into `output_root` (same layout, PNG images, tagged
/// landmark files), then writes the identity split and the mean training-caricature
/// landmarks. Unreadable entries are reported and skipped.
PreprocessReport preprocess_dataset(const std::filesystem::path& input_root, const std::filesystem::path& output_root,
                                    const PreprocessOptions& options = {});

}  // namespace carime
