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

#include "carime/geometry/warp.hpp"

#include <fmt/format.h>
#include <torch/torch.h>

#include <algorithm>
#include <cmath>

#include "carime/core/error.hpp"

namespace carime {

namespace {

using torch::autograd::AutogradContext;
using torch::autograd::tensor_list;

/// Bilinear tap for one output pixel.
template <typename T>
struct Tap {
  int x0, x1, y0, y1;
  T fx, fy;
  bool clamped_x, clamped_y;
};

template <typename T>
Tap<T> make_tap(T x, T y, int width, int height) {
  Tap<T> t{};
  const T max_x = static_cast<T>(width - 1);
  const T max_y = static_cast<T>(height - 1);
  t.clamped_x = !(x >= T(0) && x <= max_x);
  t.clamped_y = !(y >= T(0) && y <= max_y);
  x = std::clamp(x, T(0), max_x);
  y = std::clamp(y, T(0), max_y);
  t.x0 = static_cast<int>(std::floor(x));
  t.y0 = static_cast<int>(std::floor(y));
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.fx = x - t.x0;
  t.fy = y - t.y0;
  return t;
}

template <typename T>
void warp_forward_kernel(const torch::Tensor& images, const torch::Tensor& residual, torch::Tensor& out) {
  const auto img = images.accessor<T, 4>();
  const auto res = residual.accessor<T, 4>();
  auto dst = out.accessor<T, 4>();
  const int n_batch = static_cast<int>(images.size(0));
  const int channels = static_cast<int>(images.size(1));
  const int height = static_cast<int>(images.size(2));
  const int width = static_cast<int>(images.size(3));
  const T half_w = static_cast<T>(width) / 2;
  const T half_h = static_cast<T>(height) / 2;
  for (int n = 0; n < n_batch; ++n) {
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const auto tap = make_tap<T>(j + res[n][i][j][0] * half_w, i + res[n][i][j][1] * half_h, width, height);
        for (int c = 0; c < channels; ++c) {
          const T top = (1 - tap.fx) * img[n][c][tap.y0][tap.x0] + tap.fx * img[n][c][tap.y0][tap.x1];
          const T bottom = (1 - tap.fx) * img[n][c][tap.y1][tap.x0] + tap.fx * img[n][c][tap.y1][tap.x1];
          dst[n][c][i][j] = (1 - tap.fy) * top + tap.fy * bottom;
        }
      }
    }
  }
}

template <typename T>
void warp_backward_kernel(const torch::Tensor& images, const torch::Tensor& residual, const torch::Tensor& grad_out,
                          torch::Tensor& grad_images, torch::Tensor& grad_residual) {
  const auto img = images.accessor<T, 4>();
  const auto res = residual.accessor<T, 4>();
  const auto gout = grad_out.accessor<T, 4>();
  auto gimg = grad_images.accessor<T, 4>();
  auto gres = grad_residual.accessor<T, 4>();
  const int n_batch = static_cast<int>(images.size(0));
  const int channels = static_cast<int>(images.size(1));
  const int height = static_cast<int>(images.size(2));
  const int width = static_cast<int>(images.size(3));
  const T half_w = static_cast<T>(width) / 2;
  const T half_h = static_cast<T>(height) / 2;
  for (int n = 0; n < n_batch; ++n) {
    for (int i = 0; i < height; ++i) {
      for (int j = 0; j < width; ++j) {
        const auto tap = make_tap<T>(j + res[n][i][j][0] * half_w, i + res[n][i][j][1] * half_h, width, height);
        const T w00 = (1 - tap.fx) * (1 - tap.fy);
        const T w01 = tap.fx * (1 - tap.fy);
        const T w10 = (1 - tap.fx) * tap.fy;
        const T w11 = tap.fx * tap.fy;
        T dx = 0;
        T dy = 0;
        for (int c = 0; c < channels; ++c) {
          const T g = gout[n][c][i][j];
          gimg[n][c][tap.y0][tap.x0] += g * w00;
          gimg[n][c][tap.y0][tap.x1] += g * w01;
          gimg[n][c][tap.y1][tap.x0] += g * w10;
          gimg[n][c][tap.y1][tap.x1] += g * w11;
          const T v00 = img[n][c][tap.y0][tap.x0];
          const T v01 = img[n][c][tap.y0][tap.x1];
          const T v10 = img[n][c][tap.y1][tap.x0];
          const T v11 = img[n][c][tap.y1][tap.x1];
          dx += g * ((1 - tap.fy) * (v01 - v00) + tap.fy * (v11 - v10));
          dy += g * ((1 - tap.fx) * (v10 - v00) + tap.fx * (v11 - v01));
        }
        gres[n][i][j][0] = tap.clamped_x ? T(0) : dx * half_w;
        gres[n][i][j][1] = tap.clamped_y ? T(0) : dy * half_h;
      }
    }
  }
}

class BilinearWarp : public torch::autograd::Function<BilinearWarp> {
 public:
  static torch::Tensor forward(AutogradContext* ctx, const torch::Tensor& images, const torch::Tensor& residual) {
    auto img = images.contiguous();
    auto res = residual.contiguous();
    ctx->save_for_backward({img, res});
    auto out = torch::empty_like(img);
    AT_DISPATCH_FLOATING_TYPES(img.scalar_type(), "warp_forward", [&] { warp_forward_kernel<scalar_t>(img, res, out); });
    return out;
  }

  static tensor_list backward(AutogradContext* ctx, tensor_list grad_outputs) {
    const auto saved = ctx->get_saved_variables();
    const auto& img = saved[0];
    const auto& res = saved[1];
    auto grad_out = grad_outputs[0].contiguous();
    auto grad_img = torch::zeros_like(img);
    auto grad_res = torch::zeros_like(res);
    AT_DISPATCH_FLOATING_TYPES(img.scalar_type(), "warp_backward",
                               [&] { warp_backward_kernel<scalar_t>(img, res, grad_out, grad_img, grad_res); });
    return {grad_img, grad_res};
  }
};

}  // namespace

torch::Tensor warp_bilinear(const torch::Tensor& images, const torch::Tensor& residual) {
  CARIME_CHECK(images.dim() == 4, ErrorKind::kShapeMismatch, "warp_bilinear expects images [N, C, H, W]");
  CARIME_CHECK(residual.dim() == 4 && residual.size(3) == 2, ErrorKind::kShapeMismatch,
               "warp_bilinear expects residual [N, H, W, 2]");
  CARIME_CHECK(images.size(0) == residual.size(0) && images.size(2) == residual.size(1) &&
                   images.size(3) == residual.size(2),
               ErrorKind::kShapeMismatch,
               fmt::format("warp_bilinear: image {}x{} vs field {}x{} (batch {} vs {})", images.size(3),
                           images.size(2), residual.size(2), residual.size(1), images.size(0), residual.size(0)));
  CARIME_CHECK(images.scalar_type() == residual.scalar_type(), ErrorKind::kInvalidArgument,
               "warp_bilinear: image and residual dtypes differ");
  return BilinearWarp::apply(images, residual);
}

ImageBuffer warp_image(const ImageBuffer& image, const DeformationField& field) {
  CARIME_CHECK(image.size() == field.size(), ErrorKind::kShapeMismatch,
               fmt::format("warp_image: image {}x{} vs field {}x{}", image.width(), image.height(), field.width(),
                           field.height()));
  torch::NoGradGuard no_grad;
  auto res = field.residual().to(image.data().scalar_type()).unsqueeze(0);
  return ImageBuffer::from_chw(warp_bilinear(image.to_nchw(), res));
}

}  // namespace carime
