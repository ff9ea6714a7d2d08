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

#include "carime/train/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "carime/core/error.hpp"

namespace carime {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  CARIME_CHECK(ec == std::errc() && ptr == end, ErrorKind::kConfig,
               fmt::format("config key '{}': cannot parse '{}'", key, text));
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  fail(ErrorKind::kConfig, fmt::format("config key '{}': expected true or false, got '{}'", key, text));
}

struct Field {
  std::function<std::string(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const std::string&, const std::string&)> set;
};

template <typename T>
Field field(T TrainConfig::*member) {
  Field f;
  f.get = [member](const TrainConfig& c) {
    if constexpr (std::is_same_v<T, bool>) {
      return std::string(c.*member ? "true" : "false");
    } else {
      return fmt::format("{}", c.*member);
    }
  };
  f.set = [member](TrainConfig& c, const std::string& key, const std::string& v) {
    if constexpr (std::is_same_v<T, bool>) {
      c.*member = parse_bool(key, v);
    } else if constexpr (std::is_same_v<T, std::string>) {
      c.*member = v;
    } else {
      c.*member = parse_number<T>(key, v);
    }
  };
  return f;
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    t["module"] = {[](const TrainConfig& c) { return to_string(c.module); },
                   [](TrainConfig& c, const std::string&, const std::string& v) { c.module = parse_train_module(v); }};
    t["image_size"] = field(&TrainConfig::image_size);
    t["batch_size"] = field(&TrainConfig::batch_size);
    t["lr"] = field(&TrainConfig::lr);
    t["beta1"] = field(&TrainConfig::beta1);
    t["beta2"] = field(&TrainConfig::beta2);
    t["warper_fixed_iters"] = field(&TrainConfig::warper_fixed_iters);
    t["warper_decay_iters"] = field(&TrainConfig::warper_decay_iters);
    t["styler_fixed_iters"] = field(&TrainConfig::styler_fixed_iters);
    t["styler_decay_iters"] = field(&TrainConfig::styler_decay_iters);
    t["lambda_img"] = field(&TrainConfig::lambda_img);
    t["lambda_warp"] = field(&TrainConfig::lambda_warp);
    t["lambda_cyc"] = field(&TrainConfig::lambda_cyc);
    t["lambda_tv"] = field(&TrainConfig::lambda_tv);
    t["seed"] = field(&TrainConfig::seed);
    t["augment"] = field(&TrainConfig::augment);
    t["deterministic"] = field(&TrainConfig::deterministic);
    t["code_dim_w"] = field(&TrainConfig::code_dim_w);
    t["code_dim_p"] = field(&TrainConfig::code_dim_p);
    t["warper_channels"] = field(&TrainConfig::warper_channels);
    t["warper_max_channels"] = field(&TrainConfig::warper_max_channels);
    t["code_norm"] = field(&TrainConfig::code_norm);
    t["style_dim"] = field(&TrainConfig::style_dim);
    t["styler_channels"] = field(&TrainConfig::styler_channels);
    t["styler_mlp_dim"] = field(&TrainConfig::styler_mlp_dim);
    t["styler_res_blocks"] = field(&TrainConfig::styler_res_blocks);
    t["disc_channels"] = field(&TrainConfig::disc_channels);
    t["checkpoint_every"] = field(&TrainConfig::checkpoint_every);
    t["log_window"] = field(&TrainConfig::log_window);
    t["stop_at"] = field(&TrainConfig::stop_at);
    t["threads"] = field(&TrainConfig::threads);
    return t;
  }();
  return table;
}

// Keys that change how a run is driven but not what it computes.
const std::set<std::string> kUnhashed{"checkpoint_every", "log_window", "stop_at", "threads"};

}  // namespace

TrainModule parse_train_module(const std::string& name) {
  if (name == "warper") return TrainModule::kWarper;
  if (name == "styler") return TrainModule::kStyler;
  fail(ErrorKind::kConfig, fmt::format("unknown module '{}' (warper, styler)", name));
}

std::string to_string(TrainModule m) { return m == TrainModule::kWarper ? "warper" : "styler"; }

std::int64_t TrainConfig::fixed_iters() const {
  return module == TrainModule::kWarper ? warper_fixed_iters : styler_fixed_iters;
}

std::int64_t TrainConfig::decay_iters() const {
  return module == TrainModule::kWarper ? warper_decay_iters : styler_decay_iters;
}

WarperOptions TrainConfig::warper_options() const {
  WarperOptions o;
  o.image_size = image_size;
  o.code_dim_w = code_dim_w;
  o.code_dim_p = code_dim_p;
  o.channels = warper_channels;
  o.max_channels = warper_max_channels;
  o.code_norm = parse_code_norm(code_norm);
  return o;
}

StylerOptions TrainConfig::styler_options() const {
  StylerOptions o;
  o.channels = styler_channels;
  o.style_dim = style_dim;
  o.mlp_dim = styler_mlp_dim;
  o.residual_blocks = styler_res_blocks;
  o.disc_channels = disc_channels;
  return o;
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  const auto it = fields().find(key);
  CARIME_CHECK(it != fields().end(), ErrorKind::kConfig, fmt::format("unknown config key '{}'", key));
  it->second.set(*this, key, value);
}

std::string TrainConfig::get(const std::string& key) const {
  const auto it = fields().find(key);
  CARIME_CHECK(it != fields().end(), ErrorKind::kConfig, fmt::format("unknown config key '{}'", key));
  return it->second.get(*this);
}

const std::vector<std::string>& TrainConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : fields()) out.push_back(name);
    return out;
  }();
  return k;
}

std::string TrainConfig::to_text() const {
  std::string out;
  for (const auto& [name, f] : fields()) out += fmt::format("{} = {}\n", name, f.get(*this));
  return out;
}

TrainConfig TrainConfig::from_text(const std::string& text, const std::string& origin) {
  TrainConfig c;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    CARIME_CHECK(eq != std::string::npos, ErrorKind::kConfig,
                 fmt::format("{}:{}: expected 'key = value'", origin, number));
    const auto key = trim(line.substr(0, eq));
    CARIME_CHECK(seen.insert(key).second, ErrorKind::kConfig,
                 fmt::format("{}:{}: duplicate key '{}'", origin, number, key));
    try {
      c.set(key, trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, fmt::format("{}:{}: {}", origin, number, e.what()));
    }
  }
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  CARIME_CHECK(in.good(), ErrorKind::kIo, fmt::format("cannot open config {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str(), path.string());
}

void TrainConfig::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  CARIME_CHECK(out.good(), ErrorKind::kIo, fmt::format("cannot write config {}", path.string()));
  out << to_text();
}

std::uint64_t TrainConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, f] : fields()) {
    if (kUnhashed.contains(name)) continue;
    mix(name);
    mix("=");
    mix(f.get(*this));
    mix("\n");
  }
  return h;
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) { CARIME_CHECK(ok, ErrorKind::kConfig, what); };
  require(batch_size >= 1, "batch_size must be at least 1");
  require(module != TrainModule::kWarper || batch_size >= 2 || code_norm != "batch",
          "batch code normalization needs batch_size >= 2");
  require(lr > 0, "lr must be positive");
  require(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1, "adam betas must lie in [0, 1)");
  require(fixed_iters() >= 0 && decay_iters() >= 0 && total_iters() > 0, "iteration counts must be non-negative "
                                                                          "with a positive total");
  require(checkpoint_every > 0, "checkpoint_every must be positive");
  require(log_window > 0, "log_window must be positive");
  require(stop_at >= 0 && stop_at <= total_iters(), "stop_at must lie in [0, total iterations]");
  require(lambda_img >= 0 && lambda_warp >= 0 && lambda_cyc >= 0 && lambda_tv >= 0, "loss weights must be >= 0");
  require(image_size >= 64 && image_size % 64 == 0, "image_size must be a positive multiple of 64");
  require(threads >= 0, "threads must be >= 0");
  parse_code_norm(code_norm);
}

double lr_at(std::int64_t iter, std::int64_t phase_len, std::int64_t decay_len, double base) {
  CARIME_CHECK(phase_len >= 0 && decay_len >= 0 && iter >= 0 && iter < phase_len + decay_len,
               ErrorKind::kInvalidArgument,
               fmt::format("lr_at: iteration {} outside [0, {})", iter, phase_len + decay_len));
  if (iter < phase_len) return base;
  return base * (1.0 - static_cast<double>(iter - phase_len + 1) / static_cast<double>(decay_len));
}

}  // namespace carime
