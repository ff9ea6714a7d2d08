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

// Eigen before httplib: <resolv.h> defines a `_res` macro that breaks Eigen's products.
#include <Eigen/Dense>
#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>
#include <torch/torch.h>

#include <ATen/CPUGeneratorImpl.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "carime/core/error.hpp"
#include "carime/core/log.hpp"
#include "carime/eval/benchmark.hpp"
#include "carime/eval/embedding.hpp"
#include "carime/eval/metrics.hpp"
#include "support/moments.hpp"
#include "support/synthetic.hpp"

namespace carime {
namespace {

namespace fs = std::filesystem;

template <typename F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return static_cast<ErrorKind>(0);
}

// Pixel-loop degree oracle.
double degree_oracle(const DeformationField& f) {
  const auto r = f.residual().to(torch::kFloat64).contiguous();
  const auto acc = r.accessor<double, 3>();
  const double sx = f.width() / 2.0;
  const double sy = f.height() / 2.0;
  double sum = 0;
  for (int i = 0; i < f.height(); ++i)
    for (int j = 0; j < f.width(); ++j) sum += std::hypot(acc[i][j][0] * sx, acc[i][j][1] * sy);
  return sum / (f.width() * f.height());
}

std::vector<DeformationField> random_fields(int n, std::uint64_t seed) {
  std::vector<DeformationField> out;
  for (int i = 0; i < n; ++i) out.push_back(testing::random_field({24, 20}, seed + i, 0.05));
  return out;
}

TEST(DegreeTest, IdentityFieldsHaveZeroMeanDegree) {
  std::vector<DeformationField> fields(3, DeformationField::identity({16, 16}));
  EXPECT_EQ(mean_degree(fields), 0.0);
  EXPECT_EQ(error_kind([] { mean_degree(std::vector<DeformationField>{}); }), ErrorKind::kInvalidArgument);
}

TEST(DegreeTest, MeanMatchesScalarOracle) {
  const auto fields = random_fields(5, 10);
  double oracle = 0;
  for (const auto& f : fields) oracle += degree_oracle(f);
  EXPECT_NEAR(mean_degree(fields), oracle / 5, 1e-6);
}

TEST(DegreeTest, ReportMeanIsArithmeticMean) {
  const auto fields = random_fields(4, 20);
  const auto r = degree_report(fields, {"a", "b", "c", "d"}, 0.3, "test");
  ASSERT_EQ(r.degrees.size(), 4u);
  double sum = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_GE(r.degrees[i], 0.0);
    EXPECT_NEAR(r.degrees[i], 0.3 * degree_oracle(fields[i]), 1e-6);
    sum += r.degrees[i];
  }
  EXPECT_DOUBLE_EQ(r.mean, sum / 4);

  const auto dir = fs::temp_directory_path() / "carime_eval_test_report";
  fs::remove_all(dir);
  write_degree_csv(dir / "degree.csv", r);
  std::ifstream in(dir / "degree.csv");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[1], "name,degree");
  EXPECT_EQ(lines[2].substr(0, 2), "a,");
  EXPECT_EQ(lines[6].substr(0, 5), "mean,");
  EXPECT_NE(degree_summary(r).find("scale 0.3"), std::string::npos);
}

TEST(ScaleForDegreeTest, HomogeneityGivesExactScale) {
  const auto fields = random_fields(6, 30);
  const double unit = mean_degree(fields);
  EXPECT_NEAR(scale_for_degree(fields, unit), 1.0, 1e-12);
  EXPECT_NEAR(scale_for_degree(fields, 2 * unit), 2.0, 1e-6);
  for (double target : {3.0, 10.0, 30.0}) {
    const double s = scale_for_degree(fields, target);
    std::vector<DeformationField> scaled;
    for (const auto& f : fields) scaled.push_back(scale_field(f, s));
    EXPECT_NEAR(mean_degree(scaled), target, 0.01 * target);
  }
}

TEST(ScaleForDegreeTest, DegenerateWarperIsAnError) {
  std::vector<DeformationField> flat(2, DeformationField::identity({8, 8}));
  EXPECT_EQ(error_kind([&] { scale_for_degree(flat, 3.0); }), ErrorKind::kNumerical);
  EXPECT_EQ(error_kind([&] { scale_for_degree(random_fields(1, 1), 0.0); }), ErrorKind::kInvalidArgument);
}

TEST(ScaleForDegreeTest, WorksOnWarperOutput) {
  torch::manual_seed(4);
  WarperOptions o;
  o.image_size = 64;
  o.channels = 4;
  o.max_channels = 8;
  o.code_dim_w = 4;
  o.code_dim_p = 4;
  WarperNet net(o);
  std::vector<ImageBuffer> photos{testing::random_image(64, 64, 1), testing::random_image(64, 64, 2)};
  std::vector<torch::Tensor> codes{torch::randn({4}), torch::randn({4})};
  // The field head starts at zero, which yields identity warps.
  EXPECT_EQ(error_kind([&] { scale_for_degree(unit_fields(net, photos, codes), 3.0); }), ErrorKind::kNumerical);
  {
    torch::NoGradGuard g;
    for (auto& p : net->field_head()->parameters()) p.normal_(0, 0.05);
  }
  const auto fields = unit_fields(net, photos, codes);
  const double s = scale_for_degree(fields, 3.0);
  std::vector<DeformationField> scaled;
  for (const auto& f : fields) scaled.push_back(scale_field(f, s));
  EXPECT_NEAR(mean_degree(scaled), 3.0, 0.03);
}

// --- FID ----------------------------------------------------------------------------------

using testing::exact_moment_samples;
using Rows = testing::Rows;

TEST(FidTest, IdenticalSetsGiveZero) {
  const auto a = exact_moment_samples(Eigen::VectorXd::Constant(5, 0.3), Eigen::MatrixXd::Identity(5, 5) * 2, 50, 1);
  EXPECT_LT(fid(a, a), 1e-3);
}

TEST(FidTest, CommutingGaussiansMatchClosedForm) {
  // Shared eigenbasis: tr((Sa Sb)^1/2) = sum sqrt(a_i b_i).
  const int d = 6;
  std::mt19937_64 rng(3);
  Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(Eigen::MatrixXd::Random(d, d)).householderQ();
  Eigen::VectorXd ea(d), eb(d), mu_a(d), mu_b(d);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int i = 0; i < d; ++i) {
    ea(i) = u(rng);
    eb(i) = u(rng);
    mu_a(i) = u(rng) - 1.5;
    mu_b(i) = u(rng) - 1.5;
  }
  const Eigen::MatrixXd sa = q * ea.asDiagonal() * q.transpose();
  const Eigen::MatrixXd sb = q * eb.asDiagonal() * q.transpose();
  double closed = (mu_a - mu_b).squaredNorm();
  for (int i = 0; i < d; ++i) closed += ea(i) + eb(i) - 2 * std::sqrt(ea(i) * eb(i));

  const auto a = exact_moment_samples(mu_a, sa, 400, 4);
  const auto b = exact_moment_samples(mu_b, sb, 300, 5);
  EXPECT_NEAR(fid(a, b), closed, 0.01 * closed);
}

TEST(FidTest, NonCommutingTwoByTwoMatchesClosedForm) {
  // For 2x2 PSD M: tr(M^1/2) = sqrt(tr M + 2 sqrt(det M)).
  Eigen::Matrix2d sa, sb;
  sa << 2.0, 0.7, 0.7, 1.0;
  sb << 0.5, -0.2, -0.2, 1.5;
  const Eigen::Matrix2d m = sa * sb;
  const double tr_sqrt = std::sqrt(m.trace() + 2 * std::sqrt(m.determinant()));
  const Eigen::Vector2d mu_a(1.0, -0.5), mu_b(0.2, 0.4);
  const double closed = (mu_a - mu_b).squaredNorm() + sa.trace() + sb.trace() - 2 * tr_sqrt;

  const auto a = exact_moment_samples(mu_a, sa, 100, 6);
  const auto b = exact_moment_samples(mu_b, sb, 120, 7);
  EXPECT_NEAR(fid(a, b), closed, 0.01 * closed);
}

TEST(FidTest, SymmetricAndNonNegative) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 5; ++trial) {
    Rows a(30, std::vector<double>(8)), b(40, std::vector<double>(8));
    for (auto& r : a)
      for (auto& v : r) v = n(rng);
    for (auto& r : b)
      for (auto& v : r) v = 1.5 * n(rng) + 0.3;
    const double ab = fid(a, b);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, fid(b, a), 1e-6);
  }
}

TEST(FidTest, RejectsBadInput) {
  const Rows a{{1, 2}, {3, 4}, {5, 7}};
  const Rows b{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(error_kind([&] { fid(a, b); }), ErrorKind::kShapeMismatch);
  EXPECT_EQ(error_kind([&] { fid(a, Rows{{1, 2}}); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(error_kind([&] { fid(a, Rows{{1, 2}, {3}}); }), ErrorKind::kShapeMismatch);
}

// --- identity embedding -------------------------------------------------------------------

TEST(Rank1Test, GalleryEqualToProbesIsPerfect) {
  std::mt19937_64 rng(1);
  std::normal_distribution<float> n;
  std::vector<Embedding> e(12, Embedding(16));
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (auto& v : e[i]) v = n(rng);
    ids.push_back("id" + std::to_string(i));
  }
  EXPECT_EQ(rank1_accuracy(e, ids, e, ids), 1.0);
}

TEST(Rank1Test, RandomEmbeddingsGiveChanceLevel) {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> n;
  const int ids_count = 10;
  double total = 0;
  const int trials = 400;
  for (int t = 0; t < trials; ++t) {
    std::vector<Embedding> gallery(ids_count, Embedding(32)), probes(ids_count, Embedding(32));
    std::vector<std::string> ids;
    for (int i = 0; i < ids_count; ++i) {
      for (auto& v : gallery[i]) v = n(rng);
      for (auto& v : probes[i]) v = n(rng);
      ids.push_back(std::to_string(i));
    }
    total += rank1_accuracy(probes, ids, gallery, ids);
  }
  EXPECT_NEAR(total / trials, 1.0 / ids_count, 0.02);
}

TEST(Rank1Test, GalleryNeedsDistinctIdentities) {
  const std::vector<Embedding> e{{1, 0}, {0, 1}};
  EXPECT_EQ(error_kind([&] { rank1_accuracy(e, {"a", "b"}, e, {"a", "a"}); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(error_kind([&] { cosine_similarity({0, 0}, {1, 0}); }), ErrorKind::kNumerical);
}

std::string base64_decode(const std::string& in) {
  static const std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  unsigned buffer = 0;
  int bits = 0;
  for (char c : in) {
    if (c == '=') break;
    buffer = (buffer << 6) | static_cast<unsigned>(alphabet.find(c));
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((buffer >> bits) & 0xFF));
    }
  }
  return out;
}

class FlakyEmbedder : public Embedder {
 public:
  explicit FlakyEmbedder(int failures) : failures_(failures) {}
  std::vector<Embedding> embed(const std::vector<ImageBuffer>& images) override {
    ++calls;
    if (failures_-- > 0) fail(ErrorKind::kRemote, "temporarily unavailable");
    std::vector<Embedding> out;
    for (const auto& im : images) out.push_back({static_cast<float>(im.width()), 1.0f});
    return out;
  }
  int calls = 0;

 private:
  int failures_;
};

TEST(EmbedImagesTest, RetriesWithExponentialBackoff) {
  const auto saved = log::level();
  log::set_level(log::Level::kOff);
  std::vector<long> sleeps;
  RetryPolicy policy;
  policy.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d.count()); };

  FlakyEmbedder recovers(2);
  const auto v = embed_images(recovers, {testing::random_image(8, 8, 1)}, {"one"}, policy);
  EXPECT_EQ(v.front(), (Embedding{8.0f, 1.0f}));
  EXPECT_EQ(sleeps, (std::vector<long>{200, 400}));

  sleeps.clear();
  FlakyEmbedder broken(100);
  try {
    embed_images(broken, {testing::random_image(8, 8, 1)}, {"face_07.png"}, policy);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kRemote);
    EXPECT_NE(std::string(e.what()).find("face_07.png"), std::string::npos);
  }
  EXPECT_EQ(broken.calls, 4);  // first attempt plus three retries
  EXPECT_EQ(sleeps, (std::vector<long>{200, 400, 800}));
  log::set_level(saved);
}

TEST(HttpEmbedderTest, SpeaksTheJsonContract) {
  httplib::Server server;
  std::atomic<int> requests{0};
  server.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = ++requests;
    if (n == 1) {
      res.status = 503;
      return;
    }
    const auto body = nlohmann::json::parse(req.body);
    nlohmann::json reply;
    reply["embeddings"] = nlohmann::json::array();
    for (const auto& img : body.at("images")) {
      const auto png = base64_decode(img.get<std::string>());
      // PNG signature check, then the payload length as a feature.
      const bool is_png = png.size() > 8 && png.substr(1, 3) == "PNG";
      reply["embeddings"].push_back({is_png ? 1.0 : 0.0, static_cast<double>(png.size())});
    }
    res.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const auto saved = log::level();
  log::set_level(log::Level::kOff);
  HttpEmbedder client(fmt::format("http://127.0.0.1:{}/embed", port), std::chrono::seconds(5));
  RetryPolicy policy;
  policy.sleep = [](std::chrono::milliseconds) {};
  const auto v = embed_images(client, {testing::random_image(16, 16, 3)}, {"x"}, policy);
  log::set_level(saved);
  server.stop();
  worker.join();

  ASSERT_EQ(v.size(), 1u);
  ASSERT_EQ(v[0].size(), 2u);
  EXPECT_EQ(v[0][0], 1.0f);
  EXPECT_GT(v[0][1], 16.0f);
  EXPECT_EQ(requests.load(), 2);
}

TEST(HttpEmbedderTest, RejectsMalformedUrls) {
  EXPECT_EQ(error_kind([] { HttpEmbedder("https://example.org/embed"); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(error_kind([] { HttpEmbedder("localhost:80"); }), ErrorKind::kInvalidArgument);
}

// --- runtime ------------------------------------------------------------------------------

TEST(BenchmarkTest, MeanIsTotalOverCountAndRepeatsAgree) {
  torch::manual_seed(0);
  WarperOptions o;
  o.image_size = 64;
  o.channels = 8;
  o.max_channels = 16;
  WarperNet net(o);
  std::vector<ImageBuffer> photos;
  for (int i = 0; i < 20; ++i) photos.push_back(testing::random_image(64, 64, i));

  std::vector<double> means;
  for (int repeat = 0; repeat < 3; ++repeat) {
    const auto r = runtime_benchmark(net, nullptr, photos, 3, 1);
    ASSERT_EQ(r.seconds.size(), photos.size());
    EXPECT_DOUBLE_EQ(r.mean_seconds, r.total_seconds / photos.size());
    EXPECT_FALSE(r.hardware.empty());
    means.push_back(r.mean_seconds);
  }
  const double avg = (means[0] + means[1] + means[2]) / 3;
  double var = 0;
  for (double m : means) var += (m - avg) * (m - avg);
  EXPECT_LT(std::sqrt(var / 3), 0.2 * avg) << "repeat means " << means[0] << " " << means[1] << " " << means[2];
}

}  // namespace
}  // namespace carime
