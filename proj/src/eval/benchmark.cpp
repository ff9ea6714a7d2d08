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

#include "carime/eval/benchmark.hpp"

#include <ATen/CPUGeneratorImpl.h>
#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <thread>

#include "carime/core/error.hpp"
#include "carime/warper/warper.hpp"

namespace carime {

std::string hardware_descriptor() {
  std::string model = "unknown cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) model = line.substr(line.find_first_not_of(' ', colon + 1));
      break;
    }
  }
  return fmt::format("{}; {} logical cores; {} intra-op threads", model, std::thread::hardware_concurrency(),
                     torch::get_num_threads());
}

BenchmarkResult runtime_benchmark(WarperNet& warper, StylerNet* styler, const std::vector<ImageBuffer>& photos,
                                  int warmup, std::uint64_t seed) {
  CARIME_CHECK(!photos.empty(), ErrorKind::kInvalidArgument, "runtime_benchmark: no photos");
  CARIME_CHECK(warmup >= 0, ErrorKind::kInvalidArgument, "runtime_benchmark: negative warm-up");
  auto gen = at::detail::createCPUGenerator(seed);
  torch::Tensor style;
  if (styler) style = torch::randn({(*styler)->options().style_dim}, gen);

  auto run = [&](const ImageBuffer& photo) {
    auto sample = sample_exaggeration(warper, photo, gen, 1.0);
    if (styler) stylize(*styler, sample.warped, style);
  };
  for (int i = 0; i < warmup; ++i) run(photos[static_cast<std::size_t>(i) % photos.size()]);

  BenchmarkResult r;
  r.hardware = hardware_descriptor();
  for (const auto& photo : photos) {
    const auto t0 = std::chrono::steady_clock::now();
    run(photo);
    r.seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  for (double s : r.seconds) r.total_seconds += s;
  r.mean_seconds = r.total_seconds / static_cast<double>(r.seconds.size());
  return r;
}

}  // namespace carime
