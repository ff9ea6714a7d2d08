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

#include "carime/data/dataset.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "carime/core/error.hpp"
#include "carime/data/image_io.hpp"

namespace carime {

namespace fs = std::filesystem;

std::string_view domain_dir(Domain d) { return d == Domain::kPhoto ? "Photo" : "Caricature"; }

namespace {

bool is_image_file(const fs::path& p) {
  static const std::set<std::string> kExt{".png", ".jpg", ".jpeg", ".bmp", ".PNG", ".JPG", ".JPEG"};
  return kExt.contains(p.extension().string());
}

std::vector<DatasetEntry> scan_entries(const fs::path& root, Domain d, const std::string& identity) {
  std::vector<DatasetEntry> entries;
  const fs::path dir = root / domain_dir(d) / identity;
  if (!fs::is_directory(dir)) return entries;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (!f.is_regular_file() || !is_image_file(f.path())) continue;
    const fs::path lm = root / "landmarks" / domain_dir(d) / identity / (f.path().stem().string() + ".txt");
    CARIME_CHECK(fs::exists(lm), ErrorKind::kIo, fmt::format("missing landmark file {} for {}", lm.string(),
                                                             f.path().string()));
    // Validates the point count only; the real frame size comes from the image at load time.
    read_landmarks(lm, ImageSize{1, 1});
    entries.push_back({f.path(), lm});
  }
  std::sort(entries.begin(), entries.end(),
            [](const DatasetEntry& a, const DatasetEntry& b) { return a.image.filename() < b.image.filename(); });
  return entries;
}

}  // namespace

DatasetIndex::DatasetIndex(std::vector<IdentityRecord> identities) : identities_(std::move(identities)) {}

DatasetIndex DatasetIndex::scan(const fs::path& root) {
  CARIME_CHECK(fs::is_directory(root), ErrorKind::kIo, fmt::format("dataset root {} does not exist", root.string()));
  std::set<std::string> names;
  for (Domain d : {Domain::kPhoto, Domain::kCaricature}) {
    const fs::path dir = root / domain_dir(d);
    if (!fs::is_directory(dir)) continue;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory()) names.insert(e.path().filename().string());
    }
  }
  std::vector<IdentityRecord> records;
  for (const auto& name : names) {
    IdentityRecord rec{name, scan_entries(root, Domain::kPhoto, name), scan_entries(root, Domain::kCaricature, name)};
    if (!rec.photos.empty() || !rec.caricatures.empty()) records.push_back(std::move(rec));
  }
  return DatasetIndex(std::move(records));
}

std::size_t DatasetIndex::photo_count() const {
  std::size_t n = 0;
  for (const auto& r : identities_) n += r.photos.size();
  return n;
}

std::size_t DatasetIndex::caricature_count() const {
  std::size_t n = 0;
  for (const auto& r : identities_) n += r.caricatures.size();
  return n;
}

DatasetIndex DatasetIndex::subset(const std::vector<std::string>& names) const {
  const std::set<std::string> keep(names.begin(), names.end());
  std::vector<IdentityRecord> out;
  for (const auto& r : identities_) {
    if (keep.contains(r.name)) out.push_back(r);
  }
  return DatasetIndex(std::move(out));
}

SplitAssignment make_split(std::vector<std::string> names, std::uint64_t seed) {
  std::sort(names.begin(), names.end());
  std::mt19937_64 rng(seed);
  std::shuffle(names.begin(), names.end(), rng);
  SplitAssignment split;
  const std::size_t n_train = names.size() / 2;
  split.train.assign(names.begin(), names.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(names.begin() + static_cast<std::ptrdiff_t>(n_train), names.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

void write_split(const fs::path& path, const SplitAssignment& split) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  CARIME_CHECK(out.good(), ErrorKind::kIo, fmt::format("cannot write split file {}", path.string()));
  out << "train:\n";
  for (const auto& n : split.train) out << n << '\n';
  out << "test:\n";
  for (const auto& n : split.test) out << n << '\n';
}

SplitAssignment read_split(const fs::path& path) {
  std::ifstream in(path);
  CARIME_CHECK(in.good(), ErrorKind::kIo, fmt::format("cannot open split file {}", path.string()));
  SplitAssignment split;
  std::vector<std::string>* current = nullptr;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (line == "train:") {
      current = &split.train;
    } else if (line == "test:") {
      current = &split.test;
    } else {
      CARIME_CHECK(current != nullptr, ErrorKind::kFormat,
                   fmt::format("{}: identity listed before a train:/test: header", path.string()));
      current->push_back(line);
    }
  }
  const std::set<std::string> train(split.train.begin(), split.train.end());
  for (const auto& n : split.test) {
    CARIME_CHECK(!train.contains(n), ErrorKind::kFormat,
                 fmt::format("{}: identity {} is in both train and test", path.string(), n));
  }
  return split;
}

PairChoice choose_pair(const std::vector<IdentityCounts>& counts, PairPolicy policy, std::mt19937_64& rng) {
  PairChoice choice;
  if (policy == PairPolicy::kSameIdentity) {
    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i].photos > 0 && counts[i].caricatures > 0) eligible.push_back(i);
    }
    CARIME_CHECK(!eligible.empty(), ErrorKind::kInvalidArgument,
                 "same-identity sampling needs an identity with both a photo and a caricature");
    const std::size_t id = eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)];
    choice.photo_identity = choice.cari_identity = id;
    choice.photo = std::uniform_int_distribution<std::size_t>(0, counts[id].photos - 1)(rng);
    choice.caricature = std::uniform_int_distribution<std::size_t>(0, counts[id].caricatures - 1)(rng);
    choice.same_identity = true;
    return choice;
  }

  std::size_t total_photos = 0;
  std::size_t total_caris = 0;
  for (const auto& c : counts) {
    total_photos += c.photos;
    total_caris += c.caricatures;
  }
  CARIME_CHECK(total_photos > 0 && total_caris > 0, ErrorKind::kInvalidArgument,
               "random pair sampling needs at least one photo and one caricature");
  auto locate = [&](std::size_t flat, bool photo) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const std::size_t n = photo ? counts[i].photos : counts[i].caricatures;
      if (flat < n) return std::pair{i, flat};
      flat -= n;
    }
    fail(ErrorKind::kInvalidArgument, "choose_pair: index out of range");
  };
  std::tie(choice.photo_identity, choice.photo) =
      locate(std::uniform_int_distribution<std::size_t>(0, total_photos - 1)(rng), true);
  std::tie(choice.cari_identity, choice.caricature) =
      locate(std::uniform_int_distribution<std::size_t>(0, total_caris - 1)(rng), false);
  choice.same_identity = choice.photo_identity == choice.cari_identity;
  return choice;
}

std::pair<ImageBuffer, LandmarkSet> load_entry(const DatasetEntry& entry) {
  auto image = load_image(entry.image);
  auto lm = read_landmarks(entry.landmarks, image.size());
  CARIME_CHECK(lm.size() == image.size(), ErrorKind::kFormat,
               fmt::format("{}: landmark frame {}x{} does not match image {}x{}", entry.landmarks.string(),
                           lm.size().width, lm.size().height, image.width(), image.height()));
  return {std::move(image), std::move(lm)};
}

SamplePair sample_pair(const DatasetIndex& index, PairPolicy policy, std::mt19937_64& rng) {
  CARIME_CHECK(!index.empty(), ErrorKind::kInvalidArgument, "sample_pair: empty dataset index");
  std::vector<IdentityCounts> counts;
  for (const auto& r : index.identities()) counts.push_back({r.photos.size(), r.caricatures.size()});
  const auto choice = choose_pair(counts, policy, rng);
  const auto& ids = index.identities();
  auto [photo, photo_lm] = load_entry(ids[choice.photo_identity].photos[choice.photo]);
  auto [cari, cari_lm] = load_entry(ids[choice.cari_identity].caricatures[choice.caricature]);
  return {std::move(photo), std::move(cari), std::move(photo_lm), std::move(cari_lm), choice.same_identity};
}

}  // namespace carime
