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

#include "carime/cli/commands.hpp"

#include <ATen/CPUGeneratorImpl.h>
#include <fmt/format.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>

#include "carime/core/error.hpp"
#include "carime/core/log.hpp"
#include "carime/data/align.hpp"
#include "carime/data/dataset.hpp"
#include "carime/data/image_io.hpp"
#include "carime/eval/benchmark.hpp"
#include "carime/eval/embedding.hpp"
#include "carime/styler/styler.hpp"
#include "carime/warper/warper.hpp"

namespace carime {

namespace {

bool is_image(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp";
}

std::vector<fs::path> list_images(const fs::path& dir) {
  CARIME_CHECK(fs::is_directory(dir), ErrorKind::kIo, fmt::format("{} is not a directory", dir.string()));
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file() && is_image(e.path())) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_scale(double s) { return fmt::format("{}", s); }

ImageBuffer hconcat(const std::vector<ImageBuffer>& tiles) {
  std::vector<torch::Tensor> parts;
  for (const auto& t : tiles) parts.push_back(t.data());
  return ImageBuffer(torch::cat(parts, 1));
}

ImageBuffer vconcat(const std::vector<ImageBuffer>& rows) {
  std::vector<torch::Tensor> parts;
  for (const auto& r : rows) parts.push_back(r.data());
  return ImageBuffer(torch::cat(parts, 0));
}

std::optional<LoadedStyler> maybe_styler(const std::optional<fs::path>& path) {
  if (!path) return std::nullopt;
  return load_styler(*path);
}

// Test-split entries of a preprocessed dataset.
DatasetIndex test_index(const fs::path& data_root) {
  const auto split_path = data_root / kSplitFile;
  CARIME_CHECK(fs::exists(split_path), ErrorKind::kIo,
               fmt::format("{} is missing; run preprocess first", split_path.string()));
  const auto split = read_split(split_path);
  auto index = DatasetIndex::scan(data_root).subset(split.test);
  CARIME_CHECK(index.photo_count() > 0, ErrorKind::kIo,
               fmt::format("{} has no test photos", data_root.string()));
  return index;
}

ImageBuffer at_size(ImageBuffer image, int size) {
  const ImageSize target{size, size};
  return image.size() == target ? image : resize_image(image, target);
}

std::vector<std::vector<double>> to_double(const std::vector<Embedding>& e) {
  std::vector<std::vector<double>> out;
  out.reserve(e.size());
  for (const auto& v : e) out.emplace_back(v.begin(), v.end());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  CARIME_CHECK(out.good(), ErrorKind::kIo, fmt::format("cannot write {}", path.string()));
  out << text;
}

std::vector<ImageBuffer> load_all(const std::vector<fs::path>& paths, std::vector<std::string>& failures) {
  std::vector<ImageBuffer> out;
  for (const auto& p : paths) {
    try {
      out.push_back(load_image(p));
    } catch (const Error& e) {
      failures.push_back(fmt::format("{}: {}", p.string(), e.what()));
    }
  }
  return out;
}

}  // namespace

std::optional<fs::path> cache_dir_from_env() {
  const char* v = std::getenv("CARIME_CACHE");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return fs::path(v);
}

ImageBuffer load_network_photo(const fs::path& path, int image_size) {
  auto image = load_image(path);
  auto lm_path = path;
  lm_path.replace_extension(".txt");
  if (fs::exists(lm_path)) image = align_and_crop(image, read_landmarks(lm_path, image.size())).image;
  return at_size(std::move(image), image_size);
}

CommandReport cmd_generate(const GenerateRequest& request) {
  CARIME_CHECK(request.num_samples >= 1, ErrorKind::kInvalidArgument, "num_samples must be at least 1");
  CARIME_CHECK(!request.photos.empty(), ErrorKind::kInvalidArgument, "generate: no input photos");
  auto warper = load_warper(request.warper_checkpoint);
  auto styler = maybe_styler(request.styler_checkpoint);
  const int size = warper.net->options().image_size;

  std::optional<torch::Tensor> fixed_style;
  if (request.style_ref) {
    if (request.style_ref->extension() == ".txt") {
      fixed_style = read_code(*request.style_ref);
    } else {
      CARIME_CHECK(styler.has_value(), ErrorKind::kInvalidArgument,
                   "a reference style image needs a styler checkpoint");
      fixed_style = encode_style(styler->net, load_network_photo(*request.style_ref, size));
    }
    CARIME_CHECK(!styler || fixed_style->numel() == styler->net->options().style_dim, ErrorKind::kShapeMismatch,
                 fmt::format("style code has {} entries, the styler expects {}", fixed_style->numel(),
                             styler->net->options().style_dim));
  }
  std::optional<torch::Tensor> fixed_warp;
  if (request.warp_ref) {
    CARIME_CHECK(request.mean_landmarks.has_value(), ErrorKind::kInvalidArgument,
                 "a reference warp needs the mean landmarks of the dataset");
    const auto mean = read_landmarks(*request.mean_landmarks, kCanonicalSize);
    const auto ref = read_landmarks(*request.warp_ref, kCanonicalSize);
    fixed_warp = encode_reference_warp(warper.net, mean, ref);
  }

  CommandReport report;
  fs::create_directories(request.out_dir);
  for (std::size_t i = 0; i < request.photos.size(); ++i) {
    const auto& path = request.photos[i];
    ImageBuffer photo;
    try {
      photo = load_network_photo(path, size);
    } catch (const Error& e) {
      log::error("{}: {}", path.string(), e.what());
      report.failures.push_back(fmt::format("{}: {}", path.string(), e.what()));
      continue;
    }
    auto gen = at::detail::createCPUGenerator(request.seed + i);
    std::vector<ImageBuffer> tiles;
    for (int k = 0; k < request.num_samples; ++k) {
      const auto z_w = fixed_warp ? *fixed_warp : torch::randn({warper.net->options().code_dim_w}, gen);
      const auto sample = sample_exaggeration(warper.net, photo, z_w, request.scale);
      ImageBuffer result = sample.warped;
      if (styler) {
        const auto z_s = fixed_style ? *fixed_style : torch::randn({styler->net->options().style_dim}, gen);
        result = stylize(styler->net, sample.warped, z_s);
      }
      const auto out = request.out_dir / fmt::format("{}_w{}_s{}_scale{}.png", path.stem().string(), k, k,
                                                     format_scale(request.scale));
      save_image(out, result);
      report.outputs.push_back(out);
      if (request.grid) tiles.push_back(std::move(result));
    }
    if (request.grid) {
      const auto out = request.out_dir / fmt::format("{}_grid.png", path.stem().string());
      save_image(out, hconcat(tiles));
      report.outputs.push_back(out);
    }
  }
  return report;
}

std::vector<torch::Tensor> interpolate_codes(const torch::Tensor& a, const torch::Tensor& b, int steps) {
  CARIME_CHECK(steps >= 2, ErrorKind::kInvalidArgument, "interpolation needs at least 2 steps");
  CARIME_CHECK(a.sizes() == b.sizes(), ErrorKind::kShapeMismatch, "interpolation endpoints differ in shape");
  std::vector<torch::Tensor> out;
  for (int i = 0; i < steps; ++i) {
    const double t = static_cast<double>(i) / (steps - 1);
    out.push_back(i == 0 ? a.clone() : i == steps - 1 ? b.clone() : a * (1 - t) + b * t);
  }
  return out;
}

CommandReport cmd_interpolate(const InterpolateRequest& request) {
  CARIME_CHECK(request.steps >= 2, ErrorKind::kInvalidArgument, "interpolation needs at least 2 steps");
  auto warper = load_warper(request.warper_checkpoint);
  auto styler = maybe_styler(request.styler_checkpoint);
  const int size = warper.net->options().image_size;
  const auto photo = load_network_photo(request.photo, size);

  auto gen = at::detail::createCPUGenerator(request.seed);
  const auto dim_w = warper.net->options().code_dim_w;
  torch::Tensor w0, w1;
  if (request.warp_codes) {
    w0 = read_code(request.warp_codes->first);
    w1 = read_code(request.warp_codes->second);
  } else {
    w0 = torch::randn({dim_w}, gen);
    w1 = torch::randn({dim_w}, gen);
  }
  torch::Tensor s0, s1;
  if (styler) {
    const auto dim_s = styler->net->options().style_dim;
    if (request.style_codes) {
      s0 = read_code(request.style_codes->first);
      s1 = read_code(request.style_codes->second);
    } else {
      s0 = torch::randn({dim_s}, gen);
      s1 = torch::randn({dim_s}, gen);
    }
  }
  const auto warps = interpolate_codes(w0, w1, request.steps);
  std::vector<ImageBuffer> warped;
  for (const auto& z : warps) warped.push_back(sample_exaggeration(warper.net, photo, z, request.scale).warped);

  std::vector<ImageBuffer> rows;
  if (styler) {
    for (const auto& z_s : interpolate_codes(s0, s1, request.steps)) {
      std::vector<ImageBuffer> row;
      for (const auto& w : warped) row.push_back(stylize(styler->net, w, z_s));
      rows.push_back(hconcat(row));
    }
  } else {
    for (int r = 0; r < request.steps; ++r) rows.push_back(hconcat(warped));
  }
  CommandReport report;
  const auto out = request.out_dir / fmt::format("{}_interp.png", request.photo.stem().string());
  save_image(out, vconcat(rows));
  report.outputs.push_back(out);
  return report;
}

TrainSummary cmd_train(const TrainRequest& request) {
  return run_training(request.config, {request.data_root, request.out_dir, request.resume, request.force});
}

Metric parse_metric(const std::string& name) {
  if (name == "degree") return Metric::kDegree;
  if (name == "fid") return Metric::kFid;
  if (name == "identity") return Metric::kIdentity;
  if (name == "runtime") return Metric::kRuntime;
  fail(ErrorKind::kInvalidArgument, fmt::format("unknown metric '{}' (degree, fid, identity, runtime)", name));
}

CommandReport cmd_evaluate(const EvaluateRequest& request) {
  CommandReport report;
  fs::create_directories(request.out_dir);

  auto test_photos = [&](int size, std::vector<std::string>& names) {
    std::vector<ImageBuffer> photos;
    const auto index = test_index(request.data_root);
    for (const auto& id : index.identities()) {
      for (const auto& entry : id.photos) {
        try {
          photos.push_back(at_size(load_entry(entry).first, size));
          names.push_back(fmt::format("{}/{}", id.name, entry.image.filename().string()));
        } catch (const Error& e) {
          report.failures.push_back(fmt::format("{}: {}", entry.image.string(), e.what()));
        }
      }
    }
    return photos;
  };

  switch (request.metric) {
    case Metric::kDegree: {
      CARIME_CHECK(request.warper_checkpoint.has_value(), ErrorKind::kInvalidArgument,
                   "degree evaluation needs a warper checkpoint");
      auto warper = load_warper(*request.warper_checkpoint);
      std::vector<std::string> names;
      const auto photos = test_photos(warper.net->options().image_size, names);
      std::vector<torch::Tensor> codes;
      for (std::size_t i = 0; i < photos.size(); ++i) {
        auto gen = at::detail::createCPUGenerator(request.seed + i);
        codes.push_back(torch::randn({warper.net->options().code_dim_w}, gen));
      }
      const auto fields = unit_fields(warper.net, photos, codes);
      const double scale = request.target_degree ? scale_for_degree(fields, *request.target_degree) : request.scale;
      const auto r = degree_report(fields, names, scale, "carime");
      write_degree_csv(request.out_dir / "degree.csv", r);
      write_text(request.out_dir / "degree.txt", degree_summary(r));
      report.outputs = {request.out_dir / "degree.csv", request.out_dir / "degree.txt"};
      break;
    }
    case Metric::kRuntime: {
      CARIME_CHECK(request.warper_checkpoint.has_value(), ErrorKind::kInvalidArgument,
                   "runtime evaluation needs a warper checkpoint");
      auto warper = load_warper(*request.warper_checkpoint);
      auto styler = maybe_styler(request.styler_checkpoint);
      std::vector<std::string> names;
      const auto photos = test_photos(warper.net->options().image_size, names);
      const auto r = runtime_benchmark(warper.net, styler ? &styler->net : nullptr, photos, request.warmup,
                                       request.seed);
      std::string csv = "name,seconds\n";
      for (std::size_t i = 0; i < names.size(); ++i) csv += fmt::format("{},{}\n", names[i], r.seconds[i]);
      write_text(request.out_dir / "runtime.csv", csv);
      write_text(request.out_dir / "runtime.txt",
                 fmt::format("images {}  warm-up {}  mean {:.6f} s/image  total {:.4f} s\nhardware: {}\n",
                             r.seconds.size(), request.warmup, r.mean_seconds, r.total_seconds, r.hardware));
      report.outputs = {request.out_dir / "runtime.csv", request.out_dir / "runtime.txt"};
      break;
    }
    case Metric::kFid: {
      CARIME_CHECK(!request.embedding_url.empty(), ErrorKind::kInvalidArgument, "FID needs --embedding-url");
      CARIME_CHECK(request.generated_dir.has_value(), ErrorKind::kInvalidArgument, "FID needs --generated");
      std::vector<fs::path> reference_paths;
      if (request.reference_dir) {
        reference_paths = list_images(*request.reference_dir);
      } else {
        const auto index = test_index(request.data_root);
        for (const auto& id : index.identities())
          for (const auto& e : id.caricatures) reference_paths.push_back(e.image);
      }
      const auto generated_paths = list_images(*request.generated_dir);
      const auto generated = load_all(generated_paths, report.failures);
      const auto reference = load_all(reference_paths, report.failures);
      HttpEmbedder embedder(request.embedding_url);
      auto names_of = [](const std::vector<fs::path>& ps) {
        std::vector<std::string> n;
        for (const auto& p : ps) n.push_back(p.string());
        return n;
      };
      CARIME_CHECK(report.failures.empty(), ErrorKind::kIo, "FID: some images could not be read");
      const auto fa = embed_images(embedder, generated, names_of(generated_paths));
      const auto fb = embed_images(embedder, reference, names_of(reference_paths));
      const double value = fid(to_double(fa), to_double(fb));
      write_text(request.out_dir / "fid.csv",
                 fmt::format("metric,value,generated,reference\nfid,{},{},{}\n", value, fa.size(), fb.size()));
      write_text(request.out_dir / "fid.txt", fmt::format("FID {:.4f} ({} generated vs {} reference images)\n", value,
                                                          fa.size(), fb.size()));
      report.outputs = {request.out_dir / "fid.csv", request.out_dir / "fid.txt"};
      break;
    }
    case Metric::kIdentity: {
      CARIME_CHECK(!request.embedding_url.empty(), ErrorKind::kInvalidArgument,
                   "identity evaluation needs --embedding-url");
      CARIME_CHECK(request.generated_dir.has_value(), ErrorKind::kInvalidArgument,
                   "identity evaluation needs --generated with one sub-directory per identity");
      // Gallery: the first test photo of each identity.
      std::map<std::string, fs::path> gallery_paths;
      const auto index = test_index(request.data_root);
      for (const auto& id : index.identities())
        if (!id.photos.empty()) gallery_paths.emplace(id.name, id.photos.front().image);
      std::vector<fs::path> probe_paths;
      std::vector<std::string> probe_ids;
      for (const auto& p : list_images(*request.generated_dir)) {
        const auto id = p.parent_path().filename().string();
        CARIME_CHECK(gallery_paths.contains(id), ErrorKind::kInvalidArgument,
                     fmt::format("probe {} belongs to '{}', which has no test photo", p.string(), id));
        probe_paths.push_back(p);
        probe_ids.push_back(id);
      }
      std::vector<fs::path> gpaths;
      std::vector<std::string> gids;
      for (const auto& [id, p] : gallery_paths) {
        gpaths.push_back(p);
        gids.push_back(id);
      }
      const auto probes = load_all(probe_paths, report.failures);
      const auto gallery = load_all(gpaths, report.failures);
      CARIME_CHECK(report.failures.empty(), ErrorKind::kIo, "identity: some images could not be read");
      HttpEmbedder embedder(request.embedding_url);
      std::vector<std::string> pnames, gnames;
      for (const auto& p : probe_paths) pnames.push_back(p.string());
      for (const auto& p : gpaths) gnames.push_back(p.string());
      const double rank1 =
          rank1_accuracy(embed_images(embedder, probes, pnames), probe_ids, embed_images(embedder, gallery, gnames), gids);
      write_text(request.out_dir / "identity.csv",
                 fmt::format("metric,value,probes,gallery\nrank1,{},{},{}\n", rank1, probes.size(), gallery.size()));
      write_text(request.out_dir / "identity.txt",
                 fmt::format("rank-1 {:.2f}% over {} probes, gallery of {} identities\n", 100 * rank1, probes.size(),
                             gallery.size()));
      report.outputs = {request.out_dir / "identity.csv", request.out_dir / "identity.txt"};
      break;
    }
  }
  return report;
}

}  // namespace carime
