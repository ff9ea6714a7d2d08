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

#include "carime/train/trainer.hpp"

#include <ATen/CPUGeneratorImpl.h>
#include <fmt/format.h>

#include <chrono>
#include <fstream>
#include <random>
#include <unordered_map>

#include "carime/core/error.hpp"
#include "carime/core/log.hpp"
#include "carime/data/augment.hpp"
#include "carime/data/dataset.hpp"
#include "carime/data/image_io.hpp"
#include "carime/data/preprocess.hpp"
#include "carime/geometry/image.hpp"
#include "carime/warper/warper.hpp"

namespace carime {

namespace {

using Entry = std::pair<ImageBuffer, LandmarkSet>;

// Entries resampled to the training resolution, kept in memory up to a fixed count.
class EntryCache {
 public:
  EntryCache(int image_size, std::size_t capacity) : size_{image_size, image_size}, capacity_(capacity) {}

  Entry get(const DatasetEntry& entry) {
    const auto key = entry.image.string();
    if (const auto it = cache_.find(key); it != cache_.end()) return it->second;
    auto [image, lm] = load_entry(entry);
    if (image.size() != size_) {
      image = resize_image(image, size_);
      lm = lm.resized(size_);
    }
    Entry loaded{std::move(image), std::move(lm)};
    if (cache_.size() < capacity_) cache_.emplace(key, loaded);
    return loaded;
  }

 private:
  ImageSize size_;
  std::size_t capacity_;
  std::unordered_map<std::string, Entry> cache_;
};

constexpr std::size_t kCacheEntries = 1024;

struct TrainingData {
  DatasetIndex index;
  std::vector<IdentityCounts> counts;
  LandmarkSet mean;
};

TrainingData load_training_data(const std::filesystem::path& root, TrainModule module) {
  CARIME_CHECK(std::filesystem::is_directory(root), ErrorKind::kIo,
               fmt::format("dataset root {} does not exist", root.string()));
  const auto split_path = root / kSplitFile;
  CARIME_CHECK(std::filesystem::exists(split_path), ErrorKind::kIo,
               fmt::format("{} is missing; run preprocess first", split_path.string()));
  const auto split = read_split(split_path);
  TrainingData data;
  data.index = DatasetIndex::scan(root).subset(split.train);
  CARIME_CHECK(data.index.photo_count() > 0 && data.index.caricature_count() > 0, ErrorKind::kIo,
               fmt::format("{} holds no training photos or caricatures", root.string()));
  for (const auto& id : data.index.identities()) data.counts.push_back({id.photos.size(), id.caricatures.size()});
  if (module == TrainModule::kWarper) {
    const auto mean_path = root / kMeanLandmarksFile;
    CARIME_CHECK(std::filesystem::exists(mean_path), ErrorKind::kIo,
                 fmt::format("{} is missing; run preprocess first", mean_path.string()));
    data.mean = read_landmarks(mean_path);
  }
  return data;
}

SamplePair draw_pair(const TrainingData& data, EntryCache& cache, PairPolicy policy, bool augment_pair,
                     std::mt19937_64& rng) {
  const auto choice = choose_pair(data.counts, policy, rng);
  const auto& ids = data.index.identities();
  auto [photo, photo_lm] = cache.get(ids[choice.photo_identity].photos[choice.photo]);
  auto [cari, cari_lm] = cache.get(ids[choice.cari_identity].caricatures[choice.caricature]);
  SamplePair pair{std::move(photo), std::move(cari), std::move(photo_lm), std::move(cari_lm), choice.same_identity};
  return augment_pair ? augment(pair, rng) : pair;
}

torch::optim::Adam make_adam(const std::vector<torch::Tensor>& params, const TrainConfig& c) {
  return torch::optim::Adam(params, torch::optim::AdamOptions(c.lr).betas({c.beta1, c.beta2}));
}

void set_lr(torch::optim::Optimizer& opt, double lr) {
  for (auto& group : opt.param_groups()) static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

// The module-specific half of the loop: networks, optimizers and one step.
class Session {
 public:
  virtual ~Session() = default;
  virtual std::map<std::string, double> step(std::int64_t iter, double lr) = 0;
  virtual void capture(Checkpoint& c) = 0;
  virtual void restore(const Checkpoint& c) = 0;
};

class WarperSession final : public Session {
 public:
  WarperSession(const TrainConfig& config, TrainingData data)
      : config_(config),
        data_(std::move(data)),
        cache_(config.image_size, kCacheEntries),
        net_(config.warper_options()),
        opt_(make_adam(net_->parameters(), config)) {
    net_->train();
  }

  std::map<std::string, double> step(std::int64_t iter, double lr) override {
    const auto seed = step_seed(config_.seed, iter);
    std::mt19937_64 rng(seed);
    auto gen = at::detail::createCPUGenerator(seed >> 1);
    std::vector<SamplePair> pairs;
    pairs.reserve(config_.batch_size);
    for (int b = 0; b < config_.batch_size; ++b)
      pairs.push_back(draw_pair(data_, cache_, PairPolicy::kSameIdentity, config_.augment, rng));
    const auto batch = make_warper_batch(pairs, data_.mean, config_.image_size);
    set_lr(opt_, lr);
    const auto r = warper_train_step(net_, opt_, batch, config_.warper_weights(), gen);
    return {{"warp", r.warp}, {"photo", r.photo}, {"tv", r.tv}, {"total", r.total}};
  }

  void capture(Checkpoint& c) override {
    capture_module(c, "warper", *net_);
    capture_adam(c, "warper_adam", opt_);
  }

  void restore(const Checkpoint& c) override {
    restore_module(c, "warper", *net_);
    restore_adam(c, "warper_adam", opt_);
  }

 private:
  TrainConfig config_;
  TrainingData data_;
  EntryCache cache_;
  WarperNet net_;
  torch::optim::Adam opt_;
};

class StylerSession final : public Session {
 public:
  StylerSession(const TrainConfig& config, TrainingData data)
      : config_(config),
        data_(std::move(data)),
        cache_(config.image_size, kCacheEntries),
        net_(config.styler_options()),
        disc_(config.styler_options()),
        gen_opt_(make_adam(net_->parameters(), config)),
        disc_opt_(make_adam(disc_->parameters(), config)) {
    net_->train();
    disc_->train();
  }

  std::map<std::string, double> step(std::int64_t iter, double lr) override {
    const auto seed = step_seed(config_.seed, iter);
    std::mt19937_64 rng(seed);
    auto gen = at::detail::createCPUGenerator(seed >> 1);
    std::vector<ImageBuffer> photos;
    std::vector<ImageBuffer> caricatures;
    for (int b = 0; b < config_.batch_size; ++b) {
      auto pair = draw_pair(data_, cache_, PairPolicy::kRandom, config_.augment, rng);
      photos.push_back(std::move(pair.photo));
      caricatures.push_back(std::move(pair.caricature));
    }
    set_lr(gen_opt_, lr);
    set_lr(disc_opt_, lr);
    const auto r = styler_train_step(net_, disc_, gen_opt_, disc_opt_, stack_nchw(photos), stack_nchw(caricatures),
                                     config_.styler_weights(), gen);
    return {{"d_loss", r.d_loss},          {"g_adv", r.g_adv},         {"rec_photo", r.rec_photo},
            {"rec_cari", r.rec_cari},      {"rec_img", r.rec_img},     {"cyc_content", r.cyc_content},
            {"cyc_style", r.cyc_style},    {"cyc", r.cyc},             {"total", r.total}};
  }

  void capture(Checkpoint& c) override {
    capture_module(c, "styler", *net_);
    capture_module(c, "disc", *disc_);
    capture_adam(c, "styler_adam", gen_opt_);
    capture_adam(c, "disc_adam", disc_opt_);
  }

  void restore(const Checkpoint& c) override {
    restore_module(c, "styler", *net_);
    restore_module(c, "disc", *disc_);
    restore_adam(c, "styler_adam", gen_opt_);
    restore_adam(c, "disc_adam", disc_opt_);
  }

 private:
  TrainConfig config_;
  TrainingData data_;
  EntryCache cache_;
  StylerNet net_;
  Discriminator disc_;
  torch::optim::Adam gen_opt_;
  torch::optim::Adam disc_opt_;
};

std::filesystem::path checkpoint_path(const std::filesystem::path& out, const std::string& module,
                                      const std::string& tag) {
  return out / "checkpoints" / fmt::format("{}_{}.ckpt", module, tag);
}

class CsvLog {
 public:
  CsvLog(const std::filesystem::path& path, bool append) : path_(path), append_(append) {}

  void write(const IterationRecord& r, double wall) {
    if (!out_.is_open()) open(r);
    out_ << r.iter << ',' << fmt::format("{}", r.lr);
    for (const auto& [k, v] : r.losses) out_ << ',' << fmt::format("{}", v);
    out_ << ',' << fmt::format("{:.3f}", wall) << '\n';
    out_.flush();
  }

 private:
  void open(const IterationRecord& first) {
    const bool fresh = !append_ || !std::filesystem::exists(path_);
    out_.open(path_, fresh ? std::ios::trunc : std::ios::app);
    CARIME_CHECK(out_.good(), ErrorKind::kIo, fmt::format("cannot write {}", path_.string()));
    if (!fresh) return;
    out_ << "iter,lr";
    for (const auto& [k, v] : first.losses) out_ << ',' << k;
    out_ << ",wall_time\n";
  }

  std::filesystem::path path_;
  bool append_;
  std::ofstream out_;
};

}  // namespace

std::uint64_t step_seed(std::uint64_t seed, std::int64_t iter) {
  // splitmix64 over the pair; consecutive iterations get unrelated streams.
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(iter) + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void apply_runtime_settings(const TrainConfig& config) {
  if (config.deterministic) {
    torch::set_num_threads(1);
    at::globalContext().setDeterministicAlgorithms(true, true);
  } else if (config.threads > 0) {
    torch::set_num_threads(config.threads);
  }
}

TrainSummary run_training(const TrainConfig& config, const TrainRunOptions& options) {
  config.validate();
  apply_runtime_settings(config);
  const auto module = to_string(config.module);

  std::optional<Checkpoint> resume;
  if (options.resume) {
    resume = load_checkpoint(*options.resume);
    CARIME_CHECK(resume->module == module, ErrorKind::kConfig,
                 fmt::format("{} holds a {} checkpoint, not {}", options.resume->string(), resume->module, module));
    check_config_hash(*resume, config.hash(), options.force);
  }

  auto data = load_training_data(options.data_root, config.module);
  torch::manual_seed(config.seed);
  std::unique_ptr<Session> session;
  if (config.module == TrainModule::kWarper) {
    session = std::make_unique<WarperSession>(config, std::move(data));
  } else {
    session = std::make_unique<StylerSession>(config, std::move(data));
  }

  TrainSummary summary;
  if (resume) {
    session->restore(*resume);
    summary.start_iteration = resume->iteration;
  }
  const std::int64_t end = config.stop_at > 0 ? config.stop_at : config.total_iters();

  std::filesystem::create_directories(options.out_dir / "checkpoints");
  config.save(options.out_dir / "config.txt");
  log::info("{}: lambda_img={} lambda_warp={} lambda_cyc={} lambda_tv={} lr={} betas=({}, {}) iterations {}..{}",
            module, config.lambda_img, config.lambda_warp, config.lambda_cyc, config.lambda_tv, config.lr,
            config.beta1, config.beta2, summary.start_iteration, end);

  auto save = [&](std::int64_t completed, const std::string& tag) {
    Checkpoint c;
    c.module = module;
    c.config_text = config.to_text();
    c.config_hash = config.hash();
    c.iteration = completed;
    session->capture(c);
    const auto path = checkpoint_path(options.out_dir, module, tag);
    save_checkpoint(path, c);
    return path;
  };

  CsvLog csv(options.out_dir / "train_log.csv", resume.has_value());
  const auto t0 = std::chrono::steady_clock::now();
  std::map<std::string, double> window_sum;
  std::int64_t window_count = 0;
  std::int64_t last_saved = -1;

  for (std::int64_t iter = summary.start_iteration; iter < end; ++iter) {
    IterationRecord record;
    record.iter = iter;
    record.lr = lr_at(iter, config.fixed_iters(), config.decay_iters(), config.lr);
    try {
      record.losses = session->step(iter, record.lr);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNumerical) throw;
      const auto path = save(iter, fmt::format("nan_{:08d}", iter));
      log::error("{}: non-finite loss at iteration {}; state saved to {}", module, iter, path.string());
      throw;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    csv.write(record, wall);

    for (const auto& [k, v] : record.losses) window_sum[k] += v;
    if (++window_count == config.log_window) {
      std::string line;
      for (const auto& [k, v] : window_sum) line += fmt::format(" {}={:.5f}", k, v / static_cast<double>(window_count));
      log::info("{} iter {} lr {:.3g}{}", module, iter + 1, record.lr, line);
      window_sum.clear();
      window_count = 0;
    }
    summary.history.push_back(std::move(record));

    const auto completed = iter + 1;
    if (completed % config.checkpoint_every == 0 || completed == end) {
      summary.checkpoints.push_back(save(completed, fmt::format("{:08d}", completed)));
      last_saved = completed;
    }
  }

  if (last_saved < 0) summary.checkpoints.push_back(save(end, fmt::format("{:08d}", std::max(end, summary.start_iteration))));
  summary.end_iteration = std::max(end, summary.start_iteration);
  summary.final_checkpoint = summary.checkpoints.back();
  return summary;
}

LoadedWarper load_warper(const std::filesystem::path& path) {
  const auto c = load_checkpoint(path);
  CARIME_CHECK(c.module == "warper", ErrorKind::kConfig,
               fmt::format("{} is a {} checkpoint, expected warper", path.string(), c.module));
  LoadedWarper out;
  out.config = TrainConfig::from_text(c.config_text, path.string());
  out.net = WarperNet(out.config.warper_options());
  restore_module(c, "warper", *out.net);
  out.net->eval();
  out.iteration = c.iteration;
  return out;
}

LoadedStyler load_styler(const std::filesystem::path& path) {
  const auto c = load_checkpoint(path);
  CARIME_CHECK(c.module == "styler", ErrorKind::kConfig,
               fmt::format("{} is a {} checkpoint, expected styler", path.string(), c.module));
  LoadedStyler out;
  out.config = TrainConfig::from_text(c.config_text, path.string());
  out.net = StylerNet(out.config.styler_options());
  restore_module(c, "styler", *out.net);
  out.net->eval();
  out.iteration = c.iteration;
  return out;
}

}  // namespace carime
