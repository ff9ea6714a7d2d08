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

#include "support/synthetic.hpp"

#include <fmt/format.h>
#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <opencv2/imgproc.hpp>

#include "carime/data/dataset.hpp"
#include "carime/data/image_io.hpp"
#include "carime/geometry/affine.hpp"

namespace carime::testing {

namespace fs = std::filesystem;

namespace {

constexpr std::array<Point2, kNumLandmarks> kTemplate256{{
    {58, 112}, {76, 186}, {128, 216}, {180, 186}, {198, 112},  // contour
    {82, 90},  {114, 92}, {142, 92},  {174, 90},               // brows
    {84, 110}, {112, 111}, {144, 111}, {172, 110},             // eye corners
    {128, 148},                                                // nose tip
    {102, 176}, {128, 170}, {154, 176},                        // mouth
}};

cv::Point fixed(const Point2& p) {
  constexpr double kScale = 16.0;  // 4 fractional bits
  return {static_cast<int>(std::lround(p.x * kScale)), static_cast<int>(std::lround(p.y * kScale))};
}

ImageBuffer from_bgr8(const cv::Mat& bgr) {
  auto t = torch::empty({bgr.rows, bgr.cols, 3}, torch::kFloat32);
  auto acc = t.accessor<float, 3>();
  for (int i = 0; i < bgr.rows; ++i) {
    const auto* row = bgr.ptr<cv::Vec3b>(i);
    for (int j = 0; j < bgr.cols; ++j) {
      for (int c = 0; c < 3; ++c) acc[i][j][c] = static_cast<float>(row[j][2 - c]) / 127.5f - 1.0f;
    }
  }
  return ImageBuffer(std::move(t));
}

}  // namespace

LandmarkSet template_landmarks(ImageSize size) {
  LandmarkSet::Points pts{};
  const double sx = size.width / 256.0;
  const double sy = size.height / 256.0;
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    pts[i] = {(kTemplate256[i].x + 0.5) * sx - 0.5, (kTemplate256[i].y + 0.5) * sy - 0.5};
  }
  return LandmarkSet(pts, size);
}

std::pair<LandmarkSet, LandmarkSet> random_landmark_pair(std::mt19937_64& rng, ImageSize size, double sigma) {
  const double u = size.width / 256.0;
  std::normal_distribution<double> noise(0.0, sigma * u);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto jitter = [&] {
    // Random similarity about the nose tip, then independent per-point noise.
    const double scale = 1.0 + 0.1 * unit(rng);
    const double angle = 0.08 * unit(rng);
    const double tx = 6.0 * u * unit(rng);
    const double ty = 6.0 * u * unit(rng);
    auto pts = template_landmarks(size).points();
    const Point2 c = pts[13];
    for (auto& p : pts) {
      const double dx = p.x - c.x;
      const double dy = p.y - c.y;
      p.x = c.x + scale * (std::cos(angle) * dx - std::sin(angle) * dy) + tx + noise(rng);
      p.y = c.y + scale * (std::sin(angle) * dx + std::cos(angle) * dy) + ty + noise(rng);
    }
    return LandmarkSet(pts, size);
  };
  return {template_landmarks(size), jitter()};
}

ImageBuffer random_image(int width, int height, std::uint64_t seed) {
  torch::Generator gen = at::detail::createCPUGenerator(seed);
  return ImageBuffer(torch::rand({height, width, 3}, gen, torch::kFloat32) * 2 - 1);
}

DeformationField random_field(ImageSize size, std::uint64_t seed, double amplitude) {
  torch::Generator gen = at::detail::createCPUGenerator(seed);
  return DeformationField((torch::rand({size.height, size.width, 2}, gen, torch::kFloat32) * 2 - 1) * amplitude);
}

LandmarkSet rotate_landmarks(const LandmarkSet& lm, double degrees) {
  const ImageSize s = lm.size();
  const auto r = Affine2::rotation(degrees * std::numbers::pi / 180.0, {(s.width - 1) / 2.0, (s.height - 1) / 2.0});
  return r.apply(lm, s);
}

LandmarkSet exaggerate(const LandmarkSet& face, std::mt19937_64& rng, double amount) {
  std::normal_distribution<double> bias(0.0, 5.0 * face.size().width / 256.0);
  auto pts = face.points();
  const Point2 nose = pts[13];
  for (auto& p : pts) {
    p.x += amount * (0.15 * (p.x - nose.x) + bias(rng));
    p.y += amount * (0.25 * (p.y - nose.y) + bias(rng));
  }
  return LandmarkSet(pts, face.size());
}

ImageBuffer render_face(const LandmarkSet& lm, double style, bool cartoon) {
  const ImageSize size = lm.size();
  const double u = size.width / 256.0;
  const auto& p = lm.points();

  const cv::Scalar background = cartoon ? cv::Scalar(200 - 80 * style, 170 + 60 * style, 120 + 100 * style)
                                        : cv::Scalar(90 + 40 * style, 100 + 30 * style, 110 + 20 * style);
  const cv::Scalar skin = cartoon ? cv::Scalar(120 + 60 * style, 190 - 40 * style, 250 - 20 * style)
                                  : cv::Scalar(120 + 30 * style, 150 + 30 * style, 200 + 30 * style);
  const cv::Scalar ink = cartoon ? cv::Scalar(20, 20, 20) : cv::Scalar(60, 60, 80);
  const int stroke = std::max(1, static_cast<int>(std::lround((cartoon ? 3.0 : 1.5) * u)));

  cv::Mat img(size.height, size.width, CV_8UC3, background);
  if (!cartoon) {
    // soft vertical shading
    for (int i = 0; i < img.rows; ++i) {
      const double k = 0.85 + 0.3 * i / std::max(1, img.rows - 1);
      for (int j = 0; j < img.cols; ++j) {
        auto& px = img.at<cv::Vec3b>(i, j);
        for (int c = 0; c < 3; ++c) px[c] = cv::saturate_cast<std::uint8_t>(px[c] * k);
      }
    }
  }

  const double forehead = 28.0 * u;
  std::vector<cv::Point> outline{fixed(p[0]), fixed(p[1]), fixed(p[2]), fixed(p[3]), fixed(p[4]),
                                 fixed({p[4].x - 4 * u, p[8].y - forehead}),
                                 fixed({(p[7].x + p[8].x) / 2, p[7].y - 1.4 * forehead}),
                                 fixed({(p[5].x + p[6].x) / 2, p[6].y - 1.4 * forehead}),
                                 fixed({p[0].x + 4 * u, p[5].y - forehead})};
  cv::fillPoly(img, std::vector<std::vector<cv::Point>>{outline}, skin, cv::LINE_AA, 4);
  if (cartoon) cv::polylines(img, outline, true, ink, stroke, cv::LINE_AA, 4);

  cv::line(img, fixed(p[5]), fixed(p[6]), ink, stroke + 1, cv::LINE_AA, 4);
  cv::line(img, fixed(p[7]), fixed(p[8]), ink, stroke + 1, cv::LINE_AA, 4);

  for (auto [a, b] : {std::pair{9, 10}, std::pair{11, 12}}) {
    const Point2 c{(p[a].x + p[b].x) / 2, (p[a].y + p[b].y) / 2};
    const double half = std::hypot(p[b].x - p[a].x, p[b].y - p[a].y) / 2;
    const double angle = std::atan2(p[b].y - p[a].y, p[b].x - p[a].x) * 180 / std::numbers::pi;
    cv::ellipse(img, fixed(c), cv::Size(static_cast<int>(half * 16), static_cast<int>(half * 0.55 * 16)), angle, 0,
                360, cv::Scalar(245, 245, 245), cv::FILLED, cv::LINE_AA, 4);
    cv::circle(img, fixed(c), static_cast<int>(half * 0.4 * 16), ink, cv::FILLED, cv::LINE_AA, 4);
  }

  const Point2 nose = p[13];
  std::vector<cv::Point> nose_poly{fixed({nose.x, nose.y - 22 * u}), fixed({nose.x - 8 * u, nose.y}),
                                   fixed({nose.x + 8 * u, nose.y})};
  cv::polylines(img, nose_poly, false, ink, stroke, cv::LINE_AA, 4);

  std::vector<cv::Point> mouth{fixed(p[14]), fixed(p[15]), fixed(p[16]),
                               fixed({p[15].x, p[15].y + 10 * u + 0.3 * std::abs(p[16].x - p[14].x)})};
  cv::fillPoly(img, std::vector<std::vector<cv::Point>>{mouth}, cv::Scalar(70, 60, 170), cv::LINE_AA, 4);
  if (cartoon) cv::polylines(img, mouth, true, ink, stroke, cv::LINE_AA, 4);

  if (cartoon) {
    // posterize
    img.forEach<cv::Vec3b>([](cv::Vec3b& px, const int*) {
      for (int c = 0; c < 3; ++c) px[c] = static_cast<std::uint8_t>((px[c] / 48) * 48 + 24);
    });
  }
  return from_bgr8(img);
}

void write_synthetic_dataset(const fs::path& root, const SyntheticDatasetSpec& synth) {
  std::mt19937_64 rng(synth.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ImageSize raw = synth.raw_size;
  // Template at 256 scale placed in the raw frame at ~75% size.
  const double place = 0.75 * std::min(raw.width, raw.height) / 256.0;
  auto to_raw = [&](const LandmarkSet& lm256) {
    auto pts = lm256.points();
    for (auto& q : pts) {
      q.x = (q.x - 128.0) * place + raw.width / 2.0;
      q.y = (q.y - 128.0) * place + raw.height / 2.0;
    }
    return LandmarkSet(pts, raw);
  };

  for (int id = 0; id < synth.identities; ++id) {
    const std::string name = fmt::format("Identity_{:03d}", id);
    std::mt19937_64 id_rng(synth.seed * 1000 + id);
    std::normal_distribution<double> shape(0.0, 5.0);
    auto base = template_landmarks(kCanonicalSize).points();
    for (auto& q : base) {
      q.x += shape(id_rng);
      q.y += shape(id_rng);
    }
    const LandmarkSet face(base, kCanonicalSize);
    const double skin_style = unit(id_rng) * 0.5;

    auto emit = [&](Domain d, int k, const LandmarkSet& lm256, double style, bool cartoon) {
      std::normal_distribution<double> jitter(0.0, 1.0);
      auto pts = lm256.points();
      for (auto& q : pts) {
        q.x += jitter(rng);
        q.y += jitter(rng);
      }
      const auto level = to_raw(LandmarkSet(pts, kCanonicalSize));
      const double angle = (unit(rng) * 2 - 1) * synth.max_rotation_degrees;
      const auto image = render_face(level, style, cartoon);
      const auto rot = Affine2::rotation(angle * std::numbers::pi / 180.0,
                                         {(raw.width - 1) / 2.0, (raw.height - 1) / 2.0});
      const auto rotated = affine_resample(image, rot, raw);
      const auto stem = fmt::format("{}{:05d}", d == Domain::kPhoto ? 'P' : 'C', k + 1);
      save_image(root / domain_dir(d) / name / (stem + ".png"), rotated);
      write_landmarks(root / "landmarks" / domain_dir(d) / name / (stem + ".txt"), rot.apply(level, raw),
                      /*tag_size=*/false);
    };

    for (int k = 0; k < synth.photos_per_identity; ++k) emit(Domain::kPhoto, k, face, skin_style, false);
    const auto cari_shape = exaggerate(face, id_rng, 1.0);
    for (int k = 0; k < synth.caricatures_per_identity; ++k) {
      emit(Domain::kCaricature, k, cari_shape, unit(rng), true);
    }
  }
}

double eye_line_degrees(const LandmarkSet& lm) {
  using namespace landmark_index;
  const double lx = (lm[kLeftEyeCorners[0]].x + lm[kLeftEyeCorners[1]].x) / 2;
  const double ly = (lm[kLeftEyeCorners[0]].y + lm[kLeftEyeCorners[1]].y) / 2;
  const double rx = (lm[kRightEyeCorners[0]].x + lm[kRightEyeCorners[1]].x) / 2;
  const double ry = (lm[kRightEyeCorners[0]].y + lm[kRightEyeCorners[1]].y) / 2;
  return std::atan2(ry - ly, rx - lx) * 180.0 / std::numbers::pi;
}

ImageBuffer render_dots(const LandmarkSet& lm) {
  const ImageSize s = lm.size();
  auto t = torch::full({s.height, s.width, 3}, -1.0f);
  auto a = t.accessor<float, 3>();
  for (const auto& p : lm.points()) {
    for (int i = std::max(0, int(p.y) - 6); i < std::min(s.height, int(p.y) + 7); ++i) {
      for (int j = std::max(0, int(p.x) - 6); j < std::min(s.width, int(p.x) + 7); ++j) {
        const double d2 = (j - p.x) * (j - p.x) + (i - p.y) * (i - p.y);
        const float v = static_cast<float>(2.0 * std::exp(-d2 / (2 * 1.44)));
        for (int c = 0; c < 3; ++c) a[i][j][c] = std::min(1.0f, a[i][j][c] + v);
      }
    }
  }
  return ImageBuffer(t);
}

Point2 dot_centroid(const ImageBuffer& img, Point2 guess, int radius) {
  auto a = img.data().accessor<float, 3>();
  double sw = 0, sx = 0, sy = 0;
  const int ci = static_cast<int>(std::lround(guess.y));
  const int cj = static_cast<int>(std::lround(guess.x));
  for (int i = std::max(0, ci - radius); i <= std::min(img.height() - 1, ci + radius); ++i) {
    for (int j = std::max(0, cj - radius); j <= std::min(img.width() - 1, cj + radius); ++j) {
      const double w = (a[i][j][0] + 1.0) / 2.0;
      sw += w;
      sx += w * j;
      sy += w * i;
    }
  }
  return sw > 0 ? Point2{sx / sw, sy / sw} : Point2{-1e9, -1e9};
}

LandmarkSet raw_face(ImageSize raw, double degrees) {
  auto lm = template_landmarks(kCanonicalSize).points();
  const double place = 0.7 * std::min(raw.width, raw.height) / 256.0;
  for (auto& q : lm) {
    q.x = (q.x - 127.5) * place + (raw.width - 1) / 2.0;
    q.y = (q.y - 127.5) * place + (raw.height - 1) / 2.0;
  }
  return rotate_landmarks(LandmarkSet(lm, raw), degrees);
}


}  // namespace carime::testing
