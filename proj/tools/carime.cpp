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

#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>

#include "carime/cli/commands.hpp"
#include "carime/core/error.hpp"
#include "carime/core/log.hpp"

namespace {

using carime::fs::path;

path resolve_data_root(const std::string& flag, const char* what) {
  if (!flag.empty()) return flag;
  if (auto cache = carime::cache_dir_from_env()) return *cache;
  carime::fail(carime::ErrorKind::kInvalidArgument,
               fmt::format("{}: pass --data-root or set CARIME_CACHE", what));
}

std::optional<path> optional_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return path(s);
}

// "none" selects the identity styler.
std::optional<path> styler_path(const std::string& s) {
  if (s.empty() || s == "none") return std::nullopt;
  return path(s);
}

void set_deterministic() {
  carime::TrainConfig c;
  c.deterministic = true;
  carime::apply_runtime_settings(c);
}

void print_outputs(const carime::CommandReport& r) {
  for (const auto& p : r.outputs) std::cout << p.string() << "\n";
  for (const auto& f : r.failures) std::cerr << "failed: " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Caricature generation: preprocessing, training, generation and evaluation."};
  app.require_subcommand(1);
  bool quiet = false;
  bool verbose = false;
  app.add_flag("-q,--quiet", quiet, "Only print warnings and errors");
  app.add_flag("-v,--verbose", verbose, "Print debug messages");

  // preprocess
  auto* pre = app.add_subcommand("preprocess", "Align and crop a raw dataset, write the split and mean landmarks");
  std::string pre_in, pre_out;
  std::uint64_t pre_seed = carime::kDefaultSplitSeed;
  pre->add_option("--data-root", pre_in, "Raw dataset root")->required();
  pre->add_option("--out", pre_out, "Output root (default: $CARIME_CACHE)");
  pre->add_option("--seed", pre_seed, "Identity split seed")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train the warper or the styler");
  std::string module, config_path, train_root, train_out = "runs", resume;
  std::optional<std::uint64_t> train_seed;
  bool train_det = false, force = false;
  std::vector<std::string> overrides;
  train->add_option("--module", module, "warper or styler")->required()->check(CLI::IsMember({"warper", "styler"}));
  train->add_option("--config", config_path, "key = value config file");
  train->add_option("--data-root", train_root, "Preprocessed dataset (default: $CARIME_CACHE)");
  train->add_option("--out", train_out, "Run directory")->capture_default_str();
  train->add_option("--seed", train_seed, "Overrides the config seed");
  train->add_flag("--deterministic", train_det, "Single thread, deterministic kernels");
  train->add_option("--resume", resume, "Checkpoint to resume from");
  train->add_flag("--force", force, "Resume even if the checkpoint config differs");
  train->add_option("--set", overrides, "Config override key=value (repeatable)");

  // generate
  auto* gen = app.add_subcommand("generate", "Generate caricatures from photos");
  std::vector<std::string> photos;
  std::string gen_out = "out", ckpt_w, ckpt_s, style_ref, warp_ref, gen_root;
  std::uint64_t gen_seed = 0;
  double gen_scale = 1.0;
  int num_samples = 1;
  bool grid = false, gen_det = false;
  gen->add_option("photos", photos, "Input photos (aligned, or with a sibling <stem>.txt landmark file)")->required();
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();
  gen->add_option("--checkpoint-warper", ckpt_w, "Warper checkpoint")->required();
  gen->add_option("--checkpoint-styler", ckpt_s, "Styler checkpoint, or 'none' for the identity styler");
  gen->add_option("--seed", gen_seed, "Seed for sampled codes")->capture_default_str();
  gen->add_option("--scale", gen_scale, "Exaggeration scale")->capture_default_str();
  gen->add_option("--num-samples", num_samples, "Samples per photo")->capture_default_str()->check(CLI::PositiveNumber);
  gen->add_option("--style-ref", style_ref, "Reference caricature image or .txt style code");
  gen->add_option("--warp-ref", warp_ref, "Landmark file of a reference caricature");
  gen->add_option("--data-root", gen_root, "Preprocessed dataset holding mean landmarks (for --warp-ref)");
  gen->add_flag("--grid", grid, "Also write a contact sheet per photo");
  gen->add_flag("--deterministic", gen_det, "Single thread, deterministic kernels");

  // interpolate
  auto* interp = app.add_subcommand("interpolate", "Grid of interpolated style (rows) and warp (columns) codes");
  std::string interp_photo, interp_out = "out", iw, is;
  std::uint64_t interp_seed = 0;
  double interp_scale = 1.0;
  int steps = 5;
  std::vector<std::string> warp_codes, style_codes;
  bool interp_det = false;
  interp->add_option("photo", interp_photo, "Input photo")->required();
  interp->add_option("--out", interp_out, "Output directory")->capture_default_str();
  interp->add_option("--checkpoint-warper", iw, "Warper checkpoint")->required();
  interp->add_option("--checkpoint-styler", is, "Styler checkpoint, or 'none'");
  interp->add_option("--steps", steps, "Interpolants per axis")->capture_default_str()->check(CLI::Range(2, 64));
  interp->add_option("--seed", interp_seed, "Seed for endpoint codes")->capture_default_str();
  interp->add_option("--scale", interp_scale, "Exaggeration scale")->capture_default_str();
  interp->add_option("--warp-codes", warp_codes, "Two .txt warp codes")->expected(2);
  interp->add_option("--style-codes", style_codes, "Two .txt style codes")->expected(2);
  interp->add_flag("--deterministic", interp_det, "Single thread, deterministic kernels");

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Degree, FID, identity or runtime evaluation");
  std::string metric = "degree", eval_root, eval_out = "eval", ew, es, url, generated, reference;
  std::uint64_t eval_seed = 0;
  double eval_scale = 1.0;
  std::optional<double> target;
  int warmup = 2;
  bool eval_det = false;
  eval->add_option("--metric", metric, "degree, fid, identity or runtime")
      ->capture_default_str()
      ->check(CLI::IsMember({"degree", "fid", "identity", "runtime"}));
  eval->add_option("--data-root", eval_root, "Preprocessed dataset (default: $CARIME_CACHE)");
  eval->add_option("--out", eval_out, "Report directory")->capture_default_str();
  eval->add_option("--checkpoint-warper", ew, "Warper checkpoint");
  eval->add_option("--checkpoint-styler", es, "Styler checkpoint, or 'none'");
  eval->add_option("--seed", eval_seed, "Seed for warp codes")->capture_default_str();
  eval->add_option("--scale", eval_scale, "Exaggeration scale")->capture_default_str();
  eval->add_option("--target-degree", target, "Search the scale reaching this mean degree");
  eval->add_option("--embedding-url", url, "http://host:port/path of the feature extractor");
  eval->add_option("--generated", generated, "Directory of generated images");
  eval->add_option("--reference", reference, "FID reference images (default: test caricatures)");
  eval->add_option("--warmup", warmup, "Untimed runs before benchmarking")->capture_default_str();
  eval->add_flag("--deterministic", eval_det, "Single thread, deterministic kernels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
  }

  if (quiet) carime::log::set_level(carime::log::Level::kWarn);
  if (verbose) carime::log::set_level(carime::log::Level::kDebug);

  try {
    if (*pre) {
      carime::PreprocessOptions options;
      options.split_seed = pre_seed;
      const path out = pre_out.empty() ? resolve_data_root("", "preprocess output") : path(pre_out);
      const auto r = carime::preprocess_dataset(pre_in, out, options);
      std::cout << fmt::format("{} identities, {} photos, {} caricatures, {} clamped landmarks, {} failures -> {}\n",
                               r.identities, r.photos, r.caricatures, r.clamped_landmarks, r.failures.size(),
                               out.string());
      for (const auto& f : r.failures) std::cerr << "failed: " << f << "\n";
    } else if (*train) {
      carime::TrainRequest req;
      if (!config_path.empty()) req.config = carime::TrainConfig::load(config_path);
      req.config.module = carime::parse_train_module(module);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          carime::fail(carime::ErrorKind::kConfig, fmt::format("--set expects key=value, got '{}'", kv));
        req.config.set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (train_seed) req.config.seed = *train_seed;
      if (train_det) req.config.deterministic = true;
      req.data_root = resolve_data_root(train_root, "train");
      req.out_dir = train_out;
      req.resume = optional_path(resume);
      req.force = force;
      const auto s = carime::cmd_train(req);
      std::cout << s.final_checkpoint.string() << "\n";
    } else if (*gen) {
      if (gen_det) set_deterministic();
      carime::GenerateRequest req;
      for (const auto& p : photos) req.photos.emplace_back(p);
      req.out_dir = gen_out;
      req.warper_checkpoint = ckpt_w;
      req.styler_checkpoint = styler_path(ckpt_s);
      req.num_samples = num_samples;
      req.seed = gen_seed;
      req.scale = gen_scale;
      req.style_ref = optional_path(style_ref);
      req.warp_ref = optional_path(warp_ref);
      if (req.warp_ref) req.mean_landmarks = resolve_data_root(gen_root, "--warp-ref") / carime::kMeanLandmarksFile;
      req.grid = grid;
      const auto r = carime::cmd_generate(req);
      print_outputs(r);
      if (!r.failures.empty()) return static_cast<int>(carime::ErrorKind::kIo);
    } else if (*interp) {
      if (interp_det) set_deterministic();
      carime::InterpolateRequest req;
      req.photo = interp_photo;
      req.out_dir = interp_out;
      req.warper_checkpoint = iw;
      req.styler_checkpoint = styler_path(is);
      req.steps = steps;
      req.seed = interp_seed;
      req.scale = interp_scale;
      if (!warp_codes.empty()) req.warp_codes = std::make_pair(path(warp_codes[0]), path(warp_codes[1]));
      if (!style_codes.empty()) req.style_codes = std::make_pair(path(style_codes[0]), path(style_codes[1]));
      print_outputs(carime::cmd_interpolate(req));
    } else if (*eval) {
      if (eval_det) set_deterministic();
      carime::EvaluateRequest req;
      req.metric = carime::parse_metric(metric);
      const bool needs_data = req.metric != carime::Metric::kFid || reference.empty();
      if (needs_data) req.data_root = resolve_data_root(eval_root, "evaluate");
      req.out_dir = eval_out;
      req.warper_checkpoint = optional_path(ew);
      req.styler_checkpoint = styler_path(es);
      req.seed = eval_seed;
      req.scale = eval_scale;
      req.target_degree = target;
      req.embedding_url = url;
      req.generated_dir = optional_path(generated);
      req.reference_dir = optional_path(reference);
      req.warmup = warmup;
      const auto r = carime::cmd_evaluate(req);
      print_outputs(r);
      if (!r.failures.empty()) return static_cast<int>(carime::ErrorKind::kIo);
    }
  } catch (const carime::Error& e) {
    std::cerr << fmt::format("error ({}): {}\n", carime::to_string(e.kind()), e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
