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

#include "carime/eval/metrics.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "carime/core/error.hpp"
#include "carime/warper/warper.hpp"

namespace carime {

namespace {

Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows, const char* which) {
  CARIME_CHECK(rows.size() >= 2, ErrorKind::kInvalidArgument,
               fmt::format("fid: feature set {} needs at least 2 vectors, got {}", which, rows.size()));
  const auto dim = rows.front().size();
  CARIME_CHECK(dim > 0, ErrorKind::kInvalidArgument, "fid: empty feature vectors");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CARIME_CHECK(rows[i].size() == dim, ErrorKind::kShapeMismatch,
                 fmt::format("fid: set {} row {} has length {}, expected {}", which, i, rows[i].size(), dim));
    for (std::size_t j = 0; j < dim; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

// Eigenvalues of a symmetric PSD matrix with round-off clipped.
Eigen::VectorXd psd_eigenvalues(const Eigen::MatrixXd& m, Eigen::MatrixXd* vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  CARIME_CHECK(solver.info() == Eigen::Success, ErrorKind::kNumerical, "fid: eigendecomposition failed");
  Eigen::VectorXd ev = solver.eigenvalues();
  const double tol = 1e-6 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    CARIME_CHECK(ev(i) >= -tol, ErrorKind::kNumerical,
                 fmt::format("fid: matrix is not positive semi-definite (eigenvalue {})", ev(i)));
    ev(i) = std::max(ev(i), 0.0);
  }
  if (vectors) *vectors = solver.eigenvectors();
  return ev;
}

}  // namespace

double mean_degree(std::span<const DeformationField> fields) {
  CARIME_CHECK(!fields.empty(), ErrorKind::kInvalidArgument, "mean_degree: no fields");
  double sum = 0;
  for (const auto& f : fields) sum += exaggeration_degree(f);
  return sum / static_cast<double>(fields.size());
}

DegreeReport degree_report(std::span<const DeformationField> fields, std::vector<std::string> names, double scale,
                           std::string method) {
  CARIME_CHECK(!fields.empty(), ErrorKind::kInvalidArgument, "degree_report: no fields");
  CARIME_CHECK(names.size() == fields.size(), ErrorKind::kShapeMismatch, "degree_report: one name per field");
  DegreeReport r;
  r.names = std::move(names);
  r.scale = scale;
  r.method = std::move(method);
  for (const auto& f : fields) r.degrees.push_back(exaggeration_degree(scale_field(f, scale)));
  r.mean = std::accumulate(r.degrees.begin(), r.degrees.end(), 0.0) / static_cast<double>(r.degrees.size());
  return r;
}

void write_degree_csv(const std::filesystem::path& path, const DegreeReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  CARIME_CHECK(out.good(), ErrorKind::kIo, fmt::format("cannot write {}", path.string()));
  out << "# method=" << report.method << " scale=" << fmt::format("{}", report.scale) << "\n";
  out << "name,degree\n";
  for (std::size_t i = 0; i < report.degrees.size(); ++i)
    out << report.names[i] << ',' << fmt::format("{}", report.degrees[i]) << '\n';
  out << "mean," << fmt::format("{}", report.mean) << '\n';
}

std::string degree_summary(const DegreeReport& report) {
  const auto [lo, hi] = std::minmax_element(report.degrees.begin(), report.degrees.end());
  return fmt::format("method {}  scale {}  images {}  mean degree {:.4f}  (min {:.4f}, max {:.4f})\n", report.method,
                     report.scale, report.degrees.size(), report.mean, *lo, *hi);
}

double scale_for_degree(std::span<const DeformationField> unit_fields, double target) {
  CARIME_CHECK(target > 0, ErrorKind::kInvalidArgument, "scale_for_degree: target must be positive");
  const double unit = mean_degree(unit_fields);
  CARIME_CHECK(unit > 0, ErrorKind::kNumerical,
               "scale_for_degree: the warper produces no displacement (untrained or degenerate weights)");
  const double s = target / unit;
  std::vector<DeformationField> scaled;
  scaled.reserve(unit_fields.size());
  for (const auto& f : unit_fields) scaled.push_back(scale_field(f, s));
  const double reached = mean_degree(scaled);
  CARIME_CHECK(std::abs(reached - target) <= 0.01 * target, ErrorKind::kNumerical,
               fmt::format("scale_for_degree: scale {} reaches {} instead of {}", s, reached, target));
  return s;
}

std::vector<DeformationField> unit_fields(WarperNet& net, std::span<const ImageBuffer> photos,
                                          std::span<const torch::Tensor> warp_codes) {
  CARIME_CHECK(photos.size() == warp_codes.size(), ErrorKind::kShapeMismatch, "unit_fields: one warp code per photo");
  std::vector<DeformationField> out;
  out.reserve(photos.size());
  for (std::size_t i = 0; i < photos.size(); ++i)
    out.push_back(sample_exaggeration(net, photos[i], warp_codes[i], 1.0).field);
  return out;
}

double fid(const std::vector<std::vector<double>>& features_a, const std::vector<std::vector<double>>& features_b) {
  const auto a = to_matrix(features_a, "a");
  const auto b = to_matrix(features_b, "b");
  CARIME_CHECK(a.cols() == b.cols(), ErrorKind::kShapeMismatch,
               fmt::format("fid: feature lengths differ ({} vs {})", a.cols(), b.cols()));

  auto fit = [](const Eigen::MatrixXd& x, Eigen::VectorXd& mu, Eigen::MatrixXd& cov) {
    mu = x.colwise().mean().transpose();
    const Eigen::MatrixXd centered = x.rowwise() - mu.transpose();
    cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  };
  Eigen::VectorXd mu_a, mu_b;
  Eigen::MatrixXd cov_a, cov_b;
  fit(a, mu_a, cov_a);
  fit(b, mu_b, cov_b);

  // tr((A B)^1/2) = tr((A^1/2 B A^1/2)^1/2), and the right-hand side is symmetric.
  Eigen::MatrixXd v;
  const Eigen::VectorXd ev_a = psd_eigenvalues(cov_a, &v);
  const Eigen::MatrixXd sqrt_a = v * ev_a.cwiseSqrt().asDiagonal() * v.transpose();
  Eigen::MatrixXd inner = sqrt_a * cov_b * sqrt_a;
  inner = (inner + inner.transpose()) / 2;
  psd_eigenvalues(cov_b, nullptr);
  const double tr_sqrt = psd_eigenvalues(inner, nullptr).cwiseSqrt().sum();

  const double d = (mu_a - mu_b).squaredNorm() + cov_a.trace() + cov_b.trace() - 2 * tr_sqrt;
  return std::max(d, 0.0);
}

}  // namespace carime
