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

#include "carime/data/preprocess.hpp"

#include <fmt/format.h>

#include <set>

#include "carime/core/error.hpp"
#include "carime/core/log.hpp"
#include "carime/data/image_io.hpp"

namespace carime {

namespace fs = std::filesystem;

PreprocessReport preprocess_dataset(const fs::path& input_root, const fs::path& output_root,
                                    const PreprocessOptions& options) {
  const auto index = DatasetIndex::scan(input_root);
  CARIME_CHECK(!index.empty(), ErrorKind::kIo, fmt::format("no identities found under {}", input_root.string()));

  PreprocessReport report;
  report.identities = index.identities().size();
  std::vector<std::string> names;
  for (const auto& rec : index.identities()) names.push_back(rec.name);
  const auto split = make_split(names, options.split_seed);
  const std::set<std::string> train(split.train.begin(), split.train.end());
  std::vector<LandmarkSet> train_caricature_landmarks;

  for (const auto& rec : index.identities()) {
    for (Domain d : {Domain::kPhoto, Domain::kCaricature}) {
      const auto& entries = d == Domain::kPhoto ? rec.photos : rec.caricatures;
      for (const auto& entry : entries) {
        try {
          auto [image, lm] = load_entry(entry);
          const auto aligned = align_and_crop(image, lm, options.align);
          const auto stem = entry.image.stem().string();
          save_image(output_root / domain_dir(d) / rec.name / (stem + ".png"), aligned.image);
          write_landmarks(output_root / "landmarks" / domain_dir(d) / rec.name / (stem + ".txt"), aligned.landmarks);
          report.clamped_landmarks += static_cast<std::size_t>(aligned.clamped_points);
          if (d == Domain::kPhoto) {
            ++report.photos;
          } else {
            ++report.caricatures;
            if (train.contains(rec.name)) train_caricature_landmarks.push_back(aligned.landmarks);
          }
        } catch (const Error& e) {
          log::error("preprocess: skipping {}: {}", entry.image.string(), e.what());
          report.failures.push_back(fmt::format("{}: {}", entry.image.string(), e.what()));
        }
      }
    }
  }

  write_split(output_root / kSplitFile, split);
  if (!train_caricature_landmarks.empty()) {
    write_landmarks(output_root / kMeanLandmarksFile, mean_landmarks(train_caricature_landmarks));
  } else {
    log::warn("preprocess: no training caricatures; mean landmarks not written");
  }
  return report;
}

}  // namespace carime
