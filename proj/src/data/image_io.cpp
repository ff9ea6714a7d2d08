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

#include "carime/data/image_io.hpp"

#include <fmt/format.h>
#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "carime/core/error.hpp"

namespace carime {

namespace {

float decode_level(std::uint8_t v) { return static_cast<float>(v) / 127.5f - 1.0f; }

std::uint8_t encode_level(float x) {
  const float scaled = (std::clamp(x, -1.0f, 1.0f) + 1.0f) * 127.5f;
  return static_cast<std::uint8_t>(std::lround(scaled));
}

cv::Mat to_float_mat(const ImageBuffer& image) {
  auto data = image.data().to(torch::kFloat32).contiguous();
  cv::Mat wrapped(image.height(), image.width(), CV_32FC3, data.data_ptr<float>());
  return wrapped.clone();
}

ImageBuffer from_float_mat(const cv::Mat& mat) {
  CARIME_CHECK(mat.type() == CV_32FC3, ErrorKind::kInvalidArgument, "expected a CV_32FC3 matrix");
  cv::Mat contiguous = mat.isContinuous() ? mat : mat.clone();
  auto t = torch::from_blob(contiguous.data, {contiguous.rows, contiguous.cols, 3}, torch::kFloat32).clone();
  return ImageBuffer(std::move(t));
}

}  // namespace

ImageBuffer load_image(const std::filesystem::path& path) {
  const cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  CARIME_CHECK(!bgr.empty(), ErrorKind::kIo, fmt::format("cannot decode image {}", path.string()));
  auto t = torch::empty({bgr.rows, bgr.cols, 3}, torch::kFloat32);
  auto acc = t.accessor<float, 3>();
  for (int i = 0; i < bgr.rows; ++i) {
    const auto* row = bgr.ptr<cv::Vec3b>(i);
    for (int j = 0; j < bgr.cols; ++j) {
      acc[i][j][0] = decode_level(row[j][2]);
      acc[i][j][1] = decode_level(row[j][1]);
      acc[i][j][2] = decode_level(row[j][0]);
    }
  }
  return ImageBuffer(std::move(t));
}

namespace {

cv::Mat to_bgr8(const ImageBuffer& image) {
  const auto data = image.data().to(torch::kFloat32).contiguous();
  const auto acc = data.accessor<float, 3>();
  cv::Mat bgr(image.height(), image.width(), CV_8UC3);
  for (int i = 0; i < bgr.rows; ++i) {
    auto* row = bgr.ptr<cv::Vec3b>(i);
    for (int j = 0; j < bgr.cols; ++j) {
      row[j] = {encode_level(acc[i][j][2]), encode_level(acc[i][j][1]), encode_level(acc[i][j][0])};
    }
  }
  return bgr;
}

}  // namespace

void save_image(const std::filesystem::path& path, const ImageBuffer& image) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  CARIME_CHECK(cv::imwrite(path.string(), to_bgr8(image)), ErrorKind::kIo,
               fmt::format("cannot write image {}", path.string()));
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  std::vector<std::uint8_t> bytes;
  CARIME_CHECK(cv::imencode(".png", to_bgr8(image), bytes), ErrorKind::kIo, "PNG encoding failed");
  return bytes;
}

ImageBuffer quantize(const ImageBuffer& image) {
  auto data = image.data().to(torch::kFloat32).contiguous().clone();
  auto* p = data.data_ptr<float>();
  for (int64_t i = 0; i < data.numel(); ++i) p[i] = decode_level(encode_level(p[i]));
  return ImageBuffer(std::move(data));
}

ImageBuffer affine_resample(const ImageBuffer& image, const Affine2& transform, ImageSize out) {
  CARIME_CHECK(out.width > 0 && out.height > 0, ErrorKind::kInvalidArgument, "affine_resample: empty output");
  const cv::Mat src = to_float_mat(image);
  const cv::Mat m = (cv::Mat_<double>(2, 3) << transform.m[0], transform.m[1], transform.m[2], transform.m[3],
                     transform.m[4], transform.m[5]);
  cv::Mat dst;
  cv::warpAffine(src, dst, m, cv::Size(out.width, out.height), cv::INTER_LINEAR, cv::BORDER_REPLICATE);
  return from_float_mat(dst);
}

ImageBuffer resize_image(const ImageBuffer& image, ImageSize out) {
  if (image.size() == out) return image;
  const double sx = static_cast<double>(out.width) / image.width();
  const double sy = static_cast<double>(out.height) / image.height();
  if (sx < 1.0 && sy < 1.0) {
    // Area averaging keeps the same pixel-center mapping and avoids aliasing.
    cv::Mat dst;
    cv::resize(to_float_mat(image), dst, cv::Size(out.width, out.height), 0, 0, cv::INTER_AREA);
    return from_float_mat(dst);
  }
  // x' = (x + 0.5) * s - 0.5
  return affine_resample(image, Affine2{{sx, 0, 0.5 * sx - 0.5, 0, sy, 0.5 * sy - 0.5}}, out);
}

ImageBuffer mirror_image(const ImageBuffer& image) { return ImageBuffer(image.data().flip({1}).contiguous()); }

}  // namespace carime
