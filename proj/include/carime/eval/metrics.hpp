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

#include <torch/torch.h>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "carime/geometry/field.hpp"
#include "carime/geometry/image.hpp"
#include "carime/warper/networks.hpp"

namespace carime {

/// Mean exaggeration degree of a non-empty list of fields.
double mean_degree(std::span<const DeformationField> fields);

struct DegreeReport {
  std::vector<std::string> names;
  std::vector<double> degrees;
  double mean = 0;
  double scale = 1;
  std::string method;
};

/// Degrees of `fields` after scaling by `scale`.
DegreeReport degree_report(std::span<const DeformationField> fields, std::vector<std::string> names, double scale,
                           std::string method);
/// `name,degree` rows followed by a `mean` row.
void write_degree_csv(const std::filesystem::path& path, const DegreeReport& report);
std::string degree_summary(const DegreeReport& report);

/// Scale s with mean_degree(s * F) == target. Degree is absolutely homogeneous, so
/// s = target / mean_degree(F); the result is checked to reproduce the target within 1%.
/// Throws kNumerical when the fields carry no displacement.
double scale_for_degree(std::span<const DeformationField> unit_fields, double target);

/// Unscaled fields the warper produces for `photos` with one warp code per photo.
std::vector<DeformationField> unit_fields(WarperNet& net, std::span<const ImageBuffer> photos,
                                          std::span<const torch::Tensor> warp_codes);

/// Frechet distance between Gaussian fits of two feature sets (rows are samples). Uses the
/// unbiased covariance; eigenvalues down to -1e-6 (relative to the largest) are clipped
/// to zero, anything more negative throws kNumerical.
double fid(const std::vector<std::vector<double>>& features_a, const std::vector<std::vector<double>>& features_b);

}  // namespace carime
