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

// Brute-force reference implementations used only by tests. Each one follows the
// textbook definition with explicit loops and shares no code with the library.

#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <utility>
#include <vector>

namespace carime::testing {

/// Bilinear sample of channel c of a [C, H, W] double tensor at absolute normalized
/// coordinate (gx, gy) in [-1, 1], pixel centers at (2j + 1)/W - 1, border padding.
inline double oracle_grid_sample(const torch::Tensor& chw, int c, double gx, double gy) {
  const int h = static_cast<int>(chw.size(1));
  const int w = static_cast<int>(chw.size(2));
  gx = std::min(1.0, std::max(-1.0, gx));
  gy = std::min(1.0, std::max(-1.0, gy));
  double px = ((gx + 1.0) * w - 1.0) / 2.0;
  double py = ((gy + 1.0) * h - 1.0) / 2.0;
  px = std::min<double>(w - 1, std::max(0.0, px));
  py = std::min<double>(h - 1, std::max(0.0, py));
  auto at = [&](int y, int x) {
    x = std::min(w - 1, std::max(0, x));
    y = std::min(h - 1, std::max(0, y));
    return chw[c][y][x].item<double>();
  };
  const int x0 = static_cast<int>(std::floor(px));
  const int y0 = static_cast<int>(std::floor(py));
  const double ax = px - x0;
  const double ay = py - y0;
  return at(y0, x0) * (1 - ax) * (1 - ay) + at(y0, x0 + 1) * ax * (1 - ay) + at(y0 + 1, x0) * (1 - ax) * ay +
         at(y0 + 1, x0 + 1) * ax * ay;
}

/// Warps a [C, H, W] image with an [H, W, 2] normalized residual, pixel by pixel.
inline torch::Tensor oracle_warp(const torch::Tensor& chw_in, const torch::Tensor& hw2_in) {
  const auto chw = chw_in.to(torch::kFloat64);
  const auto hw2 = hw2_in.to(torch::kFloat64);
  const int c_n = static_cast<int>(chw.size(0));
  const int h = static_cast<int>(chw.size(1));
  const int w = static_cast<int>(chw.size(2));
  auto out = torch::zeros({c_n, h, w}, torch::kFloat64);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < w; ++j) {
      const double gx = (2.0 * j + 1.0) / w - 1.0 + hw2[i][j][0].item<double>();
      const double gy = (2.0 * i + 1.0) / h - 1.0 + hw2[i][j][1].item<double>();
      for (int c = 0; c < c_n; ++c) out[c][i][j] = oracle_grid_sample(chw, c, gx, gy);
    }
  }
  return out;
}

/// Anisotropic squared total variation over a [H, W, C] image.
inline double oracle_tv(const torch::Tensor& hwc_in) {
  const auto hwc = hwc_in.to(torch::kFloat64).contiguous();
  const auto a = hwc.accessor<double, 3>();
  double sum = 0.0;
  for (int64_t i = 0; i < hwc.size(0); ++i) {
    for (int64_t j = 0; j < hwc.size(1); ++j) {
      for (int64_t k = 0; k < hwc.size(2); ++k) {
        if (i + 1 < hwc.size(0)) sum += std::pow(a[i + 1][j][k] - a[i][j][k], 2);
        if (j + 1 < hwc.size(1)) sum += std::pow(a[i][j + 1][k] - a[i][j][k], 2);
      }
    }
  }
  return sum;
}

inline double oracle_mean_abs_diff(const torch::Tensor& a_in, const torch::Tensor& b_in) {
  const auto a = a_in.to(torch::kFloat64).contiguous().view(-1);
  const auto b = b_in.to(torch::kFloat64).contiguous().view(-1);
  const auto pa = a.data_ptr<double>();
  const auto pb = b.data_ptr<double>();
  double sum = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) sum += std::abs(pa[i] - pb[i]);
  return sum / static_cast<double>(a.numel());
}

/// Mean pixel displacement length of an [H, W, 2] normalized residual.
inline double oracle_degree(const torch::Tensor& hw2_in) {
  const auto hw2 = hw2_in.to(torch::kFloat64).contiguous();
  const auto a = hw2.accessor<double, 3>();
  const int64_t h = hw2.size(0);
  const int64_t w = hw2.size(1);
  double sum = 0.0;
  for (int64_t i = 0; i < h; ++i) {
    for (int64_t j = 0; j < w; ++j) {
      const double dx = a[i][j][0] * w / 2.0;
      const double dy = a[i][j][1] * h / 2.0;
      sum += std::sqrt(dx * dx + dy * dy);
    }
  }
  return sum / static_cast<double>(h * w);
}

/// Dense Gaussian elimination with partial pivoting in long double.
inline std::vector<long double> oracle_solve(std::vector<std::vector<long double>> a, std::vector<long double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
    }
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = a[r][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
      b[r] -= f * b[col];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

/// Thin-plate spline fitted directly in pixel coordinates (no rescaling, no
/// regularization), returning a callable displacement evaluator.
inline std::function<std::pair<double, double>(double, double)> oracle_tps(const std::vector<std::pair<double, double>>& ctrl,
                                                                           const std::vector<std::pair<double, double>>& disp) {
  const std::size_t n = ctrl.size();
  auto u = [](long double dx, long double dy) {
    const long double r2 = dx * dx + dy * dy;
    return r2 > 0 ? r2 * std::log(r2) : 0.0L;
  };
  std::vector<std::vector<long double>> a(n + 3, std::vector<long double>(n + 3, 0.0L));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a[i][j] = u(ctrl[i].first - ctrl[j].first, ctrl[i].second - ctrl[j].second);
    a[i][n] = a[n][i] = 1;
    a[i][n + 1] = a[n + 1][i] = ctrl[i].first;
    a[i][n + 2] = a[n + 2][i] = ctrl[i].second;
  }
  std::vector<long double> bx(n + 3, 0.0L);
  std::vector<long double> by(n + 3, 0.0L);
  for (std::size_t i = 0; i < n; ++i) {
    bx[i] = disp[i].first;
    by[i] = disp[i].second;
  }
  const auto sx = oracle_solve(a, bx);
  const auto sy = oracle_solve(a, by);
  return [=](double x, double y) {
    long double dx = sx[n] + sx[n + 1] * x + sx[n + 2] * y;
    long double dy = sy[n] + sy[n + 1] * x + sy[n + 2] * y;
    for (std::size_t i = 0; i < n; ++i) {
      const long double k = u(x - ctrl[i].first, y - ctrl[i].second);
      dx += sx[i] * k;
      dy += sy[i] * k;
    }
    return std::pair<double, double>{static_cast<double>(dx), static_cast<double>(dy)};
  };
}

/// Central finite-difference gradient of a scalar function of one tensor.
inline torch::Tensor finite_difference(const std::function<double(const torch::Tensor&)>& fn, const torch::Tensor& x,
                                       double eps = 1e-6) {
  auto base = x.detach().clone().to(torch::kFloat64);
  auto grad = torch::zeros_like(base);
  auto flat = base.view(-1);
  auto gflat = grad.view(-1);
  for (int64_t i = 0; i < flat.numel(); ++i) {
    const double orig = flat[i].item<double>();
    flat[i] = orig + eps;
    const double up = fn(base);
    flat[i] = orig - eps;
    const double down = fn(base);
    flat[i] = orig;
    gflat[i] = (up - down) / (2 * eps);
  }
  return grad;
}

/// max |a - b| / max(|b|_inf, floor).
inline double relative_error(const torch::Tensor& a, const torch::Tensor& b, double floor = 1e-8) {
  const double num = (a.to(torch::kFloat64) - b.to(torch::kFloat64)).abs().max().item<double>();
  const double den = std::max(b.to(torch::kFloat64).abs().max().item<double>(), floor);
  return num / den;
}

}  // namespace carime::testing
