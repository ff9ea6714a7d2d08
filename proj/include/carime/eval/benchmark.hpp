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
#include <string>
#include <vector>

#include "carime/geometry/image.hpp"
#include "carime/styler/styler.hpp"
#include "carime/warper/networks.hpp"

namespace carime {

struct BenchmarkResult {
  std::vector<double> seconds;  // one entry per timed image
  double total_seconds = 0;
  double mean_seconds = 0;      // total / count
  std::string hardware;
};

/// CPU model, logical cores and intra-op threads of this process.
std::string hardware_descriptor();

/// Times warp (and stylization when `styler` is non-null) per photo. The first `warmup`
/// photos, cycled if needed, run once untimed.
BenchmarkResult runtime_benchmark(WarperNet& warper, StylerNet* styler, const std::vector<ImageBuffer>& photos,
                                  int warmup = 2, std::uint64_t seed = 0);

}  // namespace carime
