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
#include <random>
#include <string>
#include <vector>

#include "carime/geometry/image.hpp"
#include "carime/geometry/landmarks.hpp"

namespace carime {

enum class Domain { kPhoto, kCaricature };

std::string_view domain_dir(Domain d);

struct DatasetEntry {
  std::filesystem::path image;
  std::filesystem::path landmarks;
};

struct IdentityRecord {
  std::string name;
  std::vector<DatasetEntry> photos;
  std::vector<DatasetEntry> caricatures;
};

/// Dataset layout on disk:
///
///   <root>/Photo/<Identity>/<stem>.<ext>
///   <root>/Caricature/<Identity>/<stem>.<ext>
///   <root>/landmarks/Photo/<Identity>/<stem>.txt
///   <root>/landmarks/Caricature/<Identity>/<stem>.txt
///
/// Identities and entries are sorted by name so that indices are stable.
class DatasetIndex {
 public:
  DatasetIndex() = default;
  explicit DatasetIndex(std::vector<IdentityRecord> identities);

  /// Scans `root`; every image needs a landmark file with 17 points.
  static DatasetIndex scan(const std::filesystem::path& root);

  const std::vector<IdentityRecord>& identities() const& { return identities_; }
  // By value on temporaries, so `for (auto& id : DatasetIndex::scan(p).identities())` is safe.
  std::vector<IdentityRecord> identities() && { return std::move(identities_); }
  std::size_t photo_count() const;
  std::size_t caricature_count() const;
  bool empty() const { return identities_.empty(); }

  /// Identities whose names appear in `names`, in index order.
  DatasetIndex subset(const std::vector<std::string>& names) const;

 private:
  std::vector<IdentityRecord> identities_;
};

struct SplitAssignment {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

inline constexpr std::uint64_t kDefaultSplitSeed = 20210126;

/// Shuffles identity names with `seed` and assigns the first floor(n / 2) to train.
SplitAssignment make_split(std::vector<std::string> names, std::uint64_t seed = kDefaultSplitSeed);
void write_split(const std::filesystem::path& path, const SplitAssignment& split);
SplitAssignment read_split(const std::filesystem::path& path);

struct SamplePair {
  ImageBuffer photo;
  ImageBuffer caricature;
  LandmarkSet photo_landmarks;
  LandmarkSet cari_landmarks;
  bool same_identity = false;
};

enum class PairPolicy { kSameIdentity, kRandom };

/// Position of a sampled pair inside an index.
struct PairChoice {
  std::size_t photo_identity = 0;
  std::size_t photo = 0;
  std::size_t cari_identity = 0;
  std::size_t caricature = 0;
  bool same_identity = false;
};

/// Per-identity (photo count, caricature count); shared by on-disk and in-memory sampling.
struct IdentityCounts {
  std::size_t photos = 0;
  std::size_t caricatures = 0;
};

/// same_identity: identity uniform over those holding both domains, then entries uniform.
/// random: photo uniform over all photos, caricature uniform over all caricatures.
PairChoice choose_pair(const std::vector<IdentityCounts>& counts, PairPolicy policy, std::mt19937_64& rng);

/// Loads an entry; landmarks use the image's size unless the file carries a size tag.
std::pair<ImageBuffer, LandmarkSet> load_entry(const DatasetEntry& entry);

SamplePair sample_pair(const DatasetIndex& index, PairPolicy policy, std::mt19937_64& rng);

}  // namespace carime
