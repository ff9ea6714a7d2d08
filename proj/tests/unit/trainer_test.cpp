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

#include <gtest/gtest.h>
#include <torch/torch.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "carime/core/error.hpp"
#include "carime/core/log.hpp"
#include "carime/data/preprocess.hpp"
#include "carime/train/checkpoint.hpp"
#include "carime/train/config.hpp"
#include "carime/train/trainer.hpp"
#include "carime/warper/warper.hpp"
#include "support/synthetic.hpp"

namespace carime {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("carime_trainer_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return static_cast<ErrorKind>(0);
}

// --- learning-rate schedule -------------------------------------------------------------

TEST(LrAtTest, StartsAtBaseRate) { EXPECT_DOUBLE_EQ(lr_at(0, 10000, 10000, 1e-4), 1e-4); }

TEST(LrAtTest, FinalIterationIsZero) {
  EXPECT_NEAR(lr_at(19999, 10000, 10000, 1e-4), 0.0, 1e-12);
  EXPECT_NEAR(lr_at(499999, 250000, 250000, 1e-4), 0.0, 1e-12);
  EXPECT_NEAR(lr_at(6, 0, 7, 3.0), 0.0, 1e-12);
}

TEST(LrAtTest, DecayMidpointIsHalfTheBase) {
  // (iter - phase + 1) / decay = 1/2
  EXPECT_NEAR(lr_at(10000 + 5000 - 1, 10000, 10000, 1e-4), 0.5e-4, 1e-9);
}

TEST(LrAtTest, OutOfRangeThrows) {
  EXPECT_EQ(error_kind([] { lr_at(-1, 10, 10, 1.0); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(error_kind([] { lr_at(20, 10, 10, 1.0); }), ErrorKind::kInvalidArgument);
}

TEST(LrAtTest, PiecewiseLinearAndNonIncreasing) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const std::int64_t phase = std::uniform_int_distribution<int>(0, 40)(rng);
    const std::int64_t decay = std::uniform_int_distribution<int>(1, 40)(rng);
    const double base = std::uniform_real_distribution<double>(1e-5, 1.0)(rng);
    double prev = base;
    for (std::int64_t i = 0; i < phase + decay; ++i) {
      const double lr = lr_at(i, phase, decay, base);
      EXPECT_LE(lr, prev + 1e-15);
      if (i < phase) EXPECT_EQ(lr, base);
      if (i >= phase + 2) {
        const double second = lr - 2 * lr_at(i - 1, phase, decay, base) + lr_at(i - 2, phase, decay, base);
        EXPECT_NEAR(second, 0.0, 1e-12);
      }
      prev = lr;
    }
    EXPECT_NEAR(lr_at(phase + decay - 1, phase, decay, base), 0.0, 1e-12);
  }
}

// --- config -------------------------------------------------------------------------------

TEST(TrainConfigTest, DefaultsFollowTheReferenceSchedule) {
  const TrainConfig c;
  EXPECT_EQ(c.beta1, 0.5);
  EXPECT_EQ(c.beta2, 0.999);
  EXPECT_EQ(c.lr, 1e-4);
  EXPECT_EQ(c.warper_fixed_iters, 10000);
  EXPECT_EQ(c.warper_decay_iters, 10000);
  EXPECT_EQ(c.styler_fixed_iters, 250000);
  EXPECT_EQ(c.styler_decay_iters, 250000);
  EXPECT_EQ(c.lambda_img, 10.0);
  EXPECT_EQ(c.lambda_warp, 10.0);
  EXPECT_EQ(c.lambda_cyc, 1.0);
  EXPECT_EQ(c.lambda_tv, 0.000005);
  EXPECT_EQ(c.checkpoint_every, 1000);
  EXPECT_EQ(c.log_window, 100);
}

TEST(TrainConfigTest, TextRoundTrip) {
  TrainConfig c;
  c.module = TrainModule::kStyler;
  c.lr = 3.25e-5;
  c.seed = 77;
  c.code_norm = "layer";
  c.augment = false;
  const auto back = TrainConfig::from_text(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.hash(), c.hash());
}

TEST(TrainConfigTest, HashStableUnderLineReordering) {
  TrainConfig c;
  c.lr = 2e-4;
  c.batch_size = 3;
  std::vector<std::string> lines;
  std::istringstream in(c.to_text());
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    EXPECT_EQ(TrainConfig::from_text(text).hash(), c.hash());
  }
}

TEST(TrainConfigTest, HashTracksModelKeysOnly) {
  TrainConfig a;
  TrainConfig b = a;
  b.checkpoint_every = 7;
  b.log_window = 3;
  b.stop_at = 5;
  b.threads = 2;
  EXPECT_EQ(a.hash(), b.hash());
  b.lambda_tv = 1e-5;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(TrainConfigTest, RejectsUnknownKeysAndBadValues) {
  EXPECT_EQ(error_kind([] { TrainConfig::from_text("learning_rate = 1\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(error_kind([] { TrainConfig::from_text("lr = fast\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(error_kind([] { TrainConfig::from_text("batch_size = 4\nbatch_size = 5\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(error_kind([] { TrainConfig::from_text("module = painter\n"); }), ErrorKind::kConfig);
  EXPECT_EQ(error_kind([] { TrainConfig::from_text("lr\n"); }), ErrorKind::kConfig);
  const auto c = TrainConfig::from_text("# comment\n\n  lr = 0.5   # trailing\n");
  EXPECT_EQ(c.lr, 0.5);
}

// --- checkpoint container -----------------------------------------------------------------

WarperOptions tiny_warper() {
  WarperOptions o;
  o.image_size = 64;
  o.channels = 4;
  o.max_channels = 8;
  o.code_dim_w = 4;
  o.code_dim_p = 4;
  return o;
}

// A warper with Adam moments after a few steps on random targets.
struct SteppedWarper {
  WarperNet net{nullptr};
  std::unique_ptr<torch::optim::Adam> opt;
};

SteppedWarper stepped_warper(int steps, std::uint64_t seed) {
  torch::manual_seed(static_cast<std::int64_t>(seed));
  SteppedWarper s;
  s.net = WarperNet(tiny_warper());
  s.opt = std::make_unique<torch::optim::Adam>(s.net->parameters(), torch::optim::AdamOptions(1e-3).betas({0.5, 0.999}));
  auto gen = at::detail::createCPUGenerator(seed);
  for (int i = 0; i < steps; ++i) {
    WarperBatch batch;
    batch.photos = torch::rand({2, 3, 64, 64}, gen) * 2 - 1;
    batch.target_field = (torch::rand({2, 2, 64, 64}, gen) - 0.5) * 0.1;
    batch.mean_field = (torch::rand({2, 2, 32, 32}, gen) - 0.5) * 0.1;
    warper_train_step(s.net, *s.opt, batch, {}, gen);
  }
  return s;
}

Checkpoint capture(SteppedWarper& s, const TrainConfig& config) {
  Checkpoint c;
  c.module = "warper";
  c.config_text = config.to_text();
  c.config_hash = config.hash();
  c.iteration = 3;
  capture_module(c, "warper", *s.net);
  capture_adam(c, "adam", *s.opt);
  return c;
}

TEST(CheckpointTest, SaveLoadSaveIsByteIdentical) {
  const auto dir = scratch_dir("bytes");
  auto s = stepped_warper(3, 1);
  const TrainConfig config;
  save_checkpoint(dir / "a.ckpt", capture(s, config));
  const auto loaded = load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(loaded.iteration, 3);
  EXPECT_EQ(loaded.config_hash, config.hash());
  save_checkpoint(dir / "b.ckpt", loaded);
  EXPECT_EQ(read_file(dir / "a.ckpt"), read_file(dir / "b.ckpt"));
  EXPECT_FALSE(fs::exists(dir / "b.ckpt.tmp"));
}

TEST(CheckpointTest, RestoredOptimizerContinuesInLockstep) {
  const auto dir = scratch_dir("lockstep");
  auto a = stepped_warper(3, 2);
  save_checkpoint(dir / "a.ckpt", capture(a, TrainConfig{}));

  auto b = stepped_warper(0, 99);  // different init, no optimizer state
  const auto c = load_checkpoint(dir / "a.ckpt");
  restore_module(c, "warper", *b.net);
  restore_adam(c, "adam", *b.opt);

  auto gen_a = at::detail::createCPUGenerator(11);
  auto gen_b = at::detail::createCPUGenerator(11);
  for (int i = 0; i < 3; ++i) {
    for (auto* pair : {&a, &b}) {
      auto& gen = pair == &a ? gen_a : gen_b;
      WarperBatch batch;
      batch.photos = torch::rand({2, 3, 64, 64}, gen) * 2 - 1;
      batch.target_field = (torch::rand({2, 2, 64, 64}, gen) - 0.5) * 0.1;
      batch.mean_field = (torch::rand({2, 2, 32, 32}, gen) - 0.5) * 0.1;
      warper_train_step(pair->net, *pair->opt, batch, {}, gen);
    }
  }
  const auto pa = a.net->parameters();
  const auto pb = b.net->parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_TRUE(torch::equal(pa[i], pb[i])) << i;
}

TEST(CheckpointTest, HashMismatchRefusedUnlessForced) {
  TrainConfig a;
  TrainConfig b;
  b.lr = 5e-4;
  Checkpoint c;
  c.config_hash = a.hash();
  EXPECT_NO_THROW(check_config_hash(c, a.hash(), false));
  EXPECT_EQ(error_kind([&] { check_config_hash(c, b.hash(), false); }), ErrorKind::kConfig);
  const auto saved = log::level();
  log::set_level(log::Level::kOff);
  EXPECT_NO_THROW(check_config_hash(c, b.hash(), true));
  log::set_level(saved);
}

TEST(CheckpointTest, CorruptFilesAreRejected) {
  const auto dir = scratch_dir("corrupt");
  auto s = stepped_warper(1, 3);
  save_checkpoint(dir / "a.ckpt", capture(s, TrainConfig{}));
  const auto bytes = read_file(dir / "a.ckpt");
  {
    std::ofstream out(dir / "short.ckpt", std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  {
    std::ofstream out(dir / "junk.ckpt", std::ios::binary);
    out << "not a checkpoint at all";
  }
  EXPECT_EQ(error_kind([&] { load_checkpoint(dir / "short.ckpt"); }), ErrorKind::kFormat);
  EXPECT_EQ(error_kind([&] { load_checkpoint(dir / "junk.ckpt"); }), ErrorKind::kFormat);
  EXPECT_EQ(error_kind([&] { load_checkpoint(dir / "missing.ckpt"); }), ErrorKind::kIo);

  WarperOptions wider = tiny_warper();
  wider.channels = 8;
  WarperNet other(wider);
  const auto c = load_checkpoint(dir / "a.ckpt");
  EXPECT_EQ(error_kind([&] { restore_module(c, "warper", *other); }), ErrorKind::kShapeMismatch);
}

// --- training loop ------------------------------------------------------------------------

class TrainingRunTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    log::set_level(log::Level::kWarn);
    const auto raw = scratch_dir("raw");
    data_root_ = new fs::path(scratch_dir("data"));
    testing::SyntheticDatasetSpec synth;
    synth.identities = 4;
    synth.photos_per_identity = 2;
    synth.caricatures_per_identity = 2;
    testing::write_synthetic_dataset(raw, synth);
    preprocess_dataset(raw, *data_root_);
  }
  static void TearDownTestSuite() {
    delete data_root_;
    data_root_ = nullptr;
  }

  static TrainConfig warper_config() {
    TrainConfig c;
    c.module = TrainModule::kWarper;
    c.image_size = 64;
    c.batch_size = 2;
    c.warper_channels = 4;
    c.warper_max_channels = 8;
    c.code_dim_w = 4;
    c.code_dim_p = 4;
    c.warper_fixed_iters = 250;
    c.warper_decay_iters = 250;
    c.checkpoint_every = 200;
    c.deterministic = true;
    c.seed = 4;
    return c;
  }

  static TrainConfig styler_config() {
    TrainConfig c;
    c.module = TrainModule::kStyler;
    c.image_size = 64;
    c.batch_size = 2;
    c.styler_channels = 4;
    c.styler_mlp_dim = 16;
    c.styler_res_blocks = 1;
    c.style_dim = 4;
    c.disc_channels = 4;
    c.styler_fixed_iters = 10;
    c.styler_decay_iters = 10;
    c.checkpoint_every = 5;
    c.deterministic = true;
    c.seed = 8;
    return c;
  }

  static fs::path* data_root_;
};

fs::path* TrainingRunTest::data_root_ = nullptr;

TEST_F(TrainingRunTest, DeskScaleRunWritesCheckpoints) {
  const auto out = scratch_dir("desk");
  const auto summary = run_training(warper_config(), {*data_root_, out, std::nullopt, false});
  EXPECT_EQ(summary.end_iteration, 500);
  EXPECT_EQ(summary.history.size(), 500u);
  ASSERT_EQ(summary.checkpoints.size(), 3u);  // 200, 400, 500
  for (const auto& p : summary.checkpoints) EXPECT_TRUE(fs::exists(p)) << p;
  EXPECT_EQ(load_checkpoint(summary.final_checkpoint).iteration, 500);
  EXPECT_NEAR(summary.history.back().lr, 0.0, 1e-12);

  // Log: header plus one row per iteration.
  std::ifstream csv(out / "train_log.csv");
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, "iter,lr,photo,total,tv,warp,wall_time");
  int rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 500);

  // The effective config carries the loss weights.
  const auto effective = TrainConfig::load(out / "config.txt");
  EXPECT_EQ(effective.lambda_tv, 0.000005);
  EXPECT_EQ(effective.lambda_warp, 10.0);
  EXPECT_EQ(effective.lambda_img, 10.0);
  EXPECT_EQ(effective.lambda_cyc, 1.0);

  const auto loaded = load_warper(summary.final_checkpoint);
  EXPECT_EQ(loaded.iteration, 500);
  EXPECT_EQ(loaded.config.hash(), warper_config().hash());
}

TEST_F(TrainingRunTest, WarperResumeMatchesUninterruptedRun) {
  auto config = warper_config();
  config.stop_at = 201;
  const auto full = run_training(config, {*data_root_, scratch_dir("full"), std::nullopt, false});

  const auto out = scratch_dir("split");
  auto first = config;
  first.stop_at = 100;
  first.checkpoint_every = 50;
  const auto head = run_training(first, {*data_root_, out, std::nullopt, false});
  ASSERT_EQ(head.end_iteration, 100);
  const auto tail = run_training(config, {*data_root_, out, head.final_checkpoint, false});
  ASSERT_EQ(tail.start_iteration, 100);
  ASSERT_FALSE(tail.history.empty());
  EXPECT_EQ(tail.history.back().iter, 200);

  for (const auto& [name, value] : full.history[200].losses)
    EXPECT_NEAR(tail.history.back().losses.at(name), value, 1e-6) << name;
}

TEST_F(TrainingRunTest, StylerResumeMatchesUninterruptedRun) {
  const auto config = styler_config();
  const auto full = run_training(config, {*data_root_, scratch_dir("sfull"), std::nullopt, false});
  ASSERT_EQ(full.history.size(), 20u);

  const auto out = scratch_dir("ssplit");
  auto first = config;
  first.stop_at = 10;
  const auto head = run_training(first, {*data_root_, out, std::nullopt, false});
  const auto tail = run_training(config, {*data_root_, out, head.final_checkpoint, false});
  ASSERT_EQ(tail.history.size(), 10u);
  for (std::size_t i = 0; i < tail.history.size(); ++i)
    for (const auto& [name, value] : full.history[10 + i].losses)
      EXPECT_NEAR(tail.history[i].losses.at(name), value, 1e-6) << name << " at " << 10 + i;
}

TEST_F(TrainingRunTest, ResumeRefusesForeignConfig) {
  auto config = styler_config();
  config.stop_at = 5;
  const auto out = scratch_dir("foreign");
  const auto head = run_training(config, {*data_root_, out, std::nullopt, false});
  auto other = config;
  other.lr = 2e-4;
  other.stop_at = 6;
  EXPECT_EQ(error_kind([&] { run_training(other, {*data_root_, out, head.final_checkpoint, false}); }),
            ErrorKind::kConfig);
  EXPECT_NO_THROW(run_training(other, {*data_root_, out, head.final_checkpoint, true}));
  EXPECT_EQ(error_kind([&] { run_training(warper_config(), {*data_root_, out, head.final_checkpoint, true}); }),
            ErrorKind::kConfig);
}

TEST_F(TrainingRunTest, NonFiniteLossCheckpointsAndAborts) {
  auto config = warper_config();
  config.lambda_tv = std::numeric_limits<double>::infinity();
  const auto out = scratch_dir("nan");
  const auto saved = log::level();
  log::set_level(log::Level::kOff);
  EXPECT_EQ(error_kind([&] { run_training(config, {*data_root_, out, std::nullopt, false}); }),
            ErrorKind::kNumerical);
  log::set_level(saved);
  EXPECT_TRUE(fs::exists(out / "checkpoints" / "warper_nan_00000000.ckpt"));
}

TEST_F(TrainingRunTest, MissingDatasetIsAnError) {
  const auto out = scratch_dir("missing");
  EXPECT_EQ(error_kind([&] { run_training(warper_config(), {out / "nowhere", out, std::nullopt, false}); }),
            ErrorKind::kIo);
  EXPECT_EQ(error_kind([&] { run_training(warper_config(), {out, out, std::nullopt, false}); }), ErrorKind::kIo);
}

}  // namespace
}  // namespace carime
